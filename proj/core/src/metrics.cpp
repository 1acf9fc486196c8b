#include "geoflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "geoflow/field_ops.hpp"

namespace geoflow {
namespace {

double mse(const MultiField &a, const MultiField &b) {
    require_same_grid(a.grid(), b.grid(), "trajectory_mse");
    if (a.channels() != b.channels()) throw std::invalid_argument("trajectory_mse: channel mismatch");
    MultiField d = a;
    d -= b;
    return d.sum_squares() / static_cast<double>(d.data().size());
}

} // namespace

LabelMask::LabelMask(GridSpec grid, int fill) : grid_(std::move(grid)), labels_(grid_.size(), fill) {
    if (fill < 0) throw std::invalid_argument("LabelMask: labels must be non-negative");
}

LabelMask::LabelMask(GridSpec grid, std::vector<int> labels) : grid_(std::move(grid)), labels_(std::move(labels)) {
    if (labels_.size() != grid_.size()) throw std::invalid_argument("LabelMask: label count does not match the grid");
    if (std::any_of(labels_.begin(), labels_.end(), [](int l) { return l < 0; })) {
        throw std::invalid_argument("LabelMask: labels must be non-negative");
    }
}

LabelMask LabelMask::threshold(const ScalarField &f, double level, int label) {
    LabelMask m(f.grid());
    for (std::size_t p = 0; p < f.points(); ++p) m.labels_[p] = f[p] >= level ? label : 0;
    return m;
}

std::size_t LabelMask::count(int label) const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), label));
}

ScalarField LabelMask::to_field() const {
    ScalarField f(grid_);
    for (std::size_t p = 0; p < labels_.size(); ++p) f[p] = labels_[p];
    return f;
}

LabelMask LabelMask::from_field(const ScalarField &f) {
    std::vector<int> labels(f.points());
    for (std::size_t p = 0; p < f.points(); ++p) {
        const double r = std::round(f[p]);
        if (!(r >= 0.0) || r != f[p] || r > std::numeric_limits<int>::max()) {
            throw std::invalid_argument("LabelMask: field holds a non-label value");
        }
        labels[p] = static_cast<int>(r);
    }
    return LabelMask(f.grid(), std::move(labels));
}

double dice(const LabelMask &a, const LabelMask &b, int label) {
    require_same_grid(a.grid(), b.grid(), "dice");
    std::size_t na = 0, nb = 0, both = 0;
    for (std::size_t p = 0; p < a.grid().size(); ++p) {
        const bool in_a = a[p] == label;
        const bool in_b = b[p] == label;
        na += in_a;
        nb += in_b;
        both += in_a && in_b;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

std::vector<std::array<int, 3>> boundary_nodes(const LabelMask &m, int label) {
    const GridSpec &g = m.grid();
    std::vector<std::array<int, 3>> out;
    for (std::size_t p = 0; p < g.size(); ++p) {
        if (m[p] != label) continue;
        const auto c = g.coords(p);
        bool edge = false;
        for (int a = 0; a < g.ndim() && !edge; ++a) {
            for (int s : {-1, 1}) {
                auto n = c;
                n[a] += s;
                if (n[a] < 0 || n[a] >= g.dim(a) || m[g.index(n[0], n[1], n[2])] != label) {
                    edge = true;
                    break;
                }
            }
        }
        if (edge) out.push_back(c);
    }
    return out;
}

double hausdorff(std::span<const std::array<int, 3>> x, std::span<const std::array<int, 3>> y) {
    if (x.empty() || y.empty()) throw std::invalid_argument("hausdorff: empty point set");
    const auto directed = [](std::span<const std::array<int, 3>> from, std::span<const std::array<int, 3>> to) {
        long best_max = 0;
        for (const auto &p : from) {
            long best = std::numeric_limits<long>::max();
            for (const auto &q : to) {
                long d2 = 0;
                for (int a = 0; a < 3; ++a) {
                    const long d = p[a] - q[a];
                    d2 += d * d;
                }
                best = std::min(best, d2);
                if (best <= best_max) break;
            }
            best_max = std::max(best_max, best);
        }
        return best_max;
    };
    return std::sqrt(static_cast<double>(std::max(directed(x, y), directed(y, x))));
}

double hausdorff(const LabelMask &a, const LabelMask &b, int label) {
    require_same_grid(a.grid(), b.grid(), "hausdorff");
    const auto x = boundary_nodes(a, label);
    const auto y = boundary_nodes(b, label);
    if (x.empty() || y.empty()) {
        throw std::invalid_argument("hausdorff: label " + std::to_string(label) + " has an empty boundary");
    }
    return hausdorff(x, y);
}

LabelMask warp_labels(const LabelMask &m, const Transform &phi) {
    require_same_grid(m.grid(), phi.grid(), "warp_labels");
    const GridSpec &g = m.grid();
    LabelMask out(g);
    const VectorField &u = phi.displacement;
    for (std::size_t p = 0; p < g.size(); ++p) {
        const auto c = g.coords(p);
        std::array<int, 3> n{0, 0, 0};
        for (int a = 0; a < g.ndim(); ++a) {
            const double q = c[a] + u.at(a, p) / g.spacing(a);
            if (!std::isfinite(q)) throw std::invalid_argument("warp_labels: non-finite displacement");
            const long k = static_cast<long>(std::ceil(q - 0.5));
            const long dim = g.dim(a);
            n[a] = static_cast<int>(((k % dim) + dim) % dim);
        }
        out[p] = m[g.index(n[0], n[1], n[2])];
    }
    return out;
}

DetJacReport detjac_report(const Transform &phi) {
    const ScalarField det = det_jacobian(phi);
    DetJacReport r;
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : det.values()) {
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
        sum += v;
        r.negative += v <= 0.0;
    }
    r.mean = sum / static_cast<double>(det.points());
    return r;
}

std::vector<TrajectoryMseRow> trajectory_mse(const Trajectory &pred, const Trajectory &ref) {
    if (pred.velocities.size() != ref.velocities.size() || pred.transforms.size() != ref.transforms.size()) {
        throw std::invalid_argument("trajectory_mse: trajectories have different lengths");
    }
    if (pred.velocities.size() != pred.transforms.size()) {
        throw std::invalid_argument("trajectory_mse: need one transform per velocity");
    }
    const bool images = !pred.images.empty() && !ref.images.empty();
    if (images && (pred.images.size() != pred.velocities.size() || ref.images.size() != ref.velocities.size())) {
        throw std::invalid_argument("trajectory_mse: need one image per step");
    }
    std::vector<TrajectoryMseRow> rows;
    for (std::size_t t = 0; t < pred.velocities.size(); ++t) {
        TrajectoryMseRow row;
        row.t = static_cast<int>(t);
        row.image = images ? mse(pred.images[t], ref.images[t]) : std::numeric_limits<double>::quiet_NaN();
        row.transform = mse(pred.transforms[t].displacement, ref.transforms[t].displacement);
        row.velocity = mse(pred.velocities[t], ref.velocities[t]);
        rows.push_back(row);
    }
    return rows;
}

} // namespace geoflow
