#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "geoflow/epdiff.hpp"
#include "geoflow/field.hpp"

namespace geoflow {

/// Integer label per grid node, 0 = background.
class LabelMask {
public:
    LabelMask() = default;
    explicit LabelMask(GridSpec grid, int fill = 0);
    LabelMask(GridSpec grid, std::vector<int> labels);

    /// label where f >= level, else 0.
    static LabelMask threshold(const ScalarField &f, double level = 0.5, int label = 1);

    const GridSpec &grid() const noexcept { return grid_; }
    std::span<const int> labels() const noexcept { return labels_; }
    int operator[](std::size_t p) const noexcept { return labels_[p]; }
    int &operator[](std::size_t p) noexcept { return labels_[p]; }
    std::size_t count(int label) const noexcept;

    /// Float copy of the labels, for storage as a scalar field.
    ScalarField to_field() const;
    static LabelMask from_field(const ScalarField &f);

    bool operator==(const LabelMask &) const = default;

private:
    GridSpec grid_;
    std::vector<int> labels_;
};

/// 2|A n B| / (|A| + |B|) for `label`; 1 when both sets are empty.
double dice(const LabelMask &a, const LabelMask &b, int label);

/// Nodes carrying `label` with at least one face neighbor carrying another label. Nodes on the
/// frame count as boundary (outside the frame is background). Index coordinates.
std::vector<std::array<int, 3>> boundary_nodes(const LabelMask &m, int label);

/// Symmetric Hausdorff distance between the boundaries of `label`, Euclidean in grid units, no
/// periodic wrap. Throws std::invalid_argument naming the label if either boundary is empty.
double hausdorff(const LabelMask &a, const LabelMask &b, int label);
/// Same distance between explicit node sets.
double hausdorff(std::span<const std::array<int, 3>> x, std::span<const std::array<int, 3>> y);

/// Nearest-node label at x + u(x), periodic; exact halves round toward the lower index.
LabelMask warp_labels(const LabelMask &m, const Transform &phi);

struct DetJacReport {
    double min = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::size_t negative = 0; ///< nodes with det <= 0
};

DetJacReport detjac_report(const Transform &phi);

struct TrajectoryMseRow {
    int t = 0;
    double image = 0.0;     ///< NaN when either trajectory carries no images
    double transform = 0.0; ///< over displacement components
    double velocity = 0.0;  ///< over velocity components
};

/// Per-step mean squared differences; trajectories must have equal lengths.
std::vector<TrajectoryMseRow> trajectory_mse(const Trajectory &pred, const Trajectory &ref);

} // namespace geoflow
