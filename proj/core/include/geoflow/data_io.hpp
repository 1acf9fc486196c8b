#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoflow/field.hpp"
#include "geoflow/metrics.hpp"

namespace geoflow {

enum class ShapeFamily { Circle, Blob, Triangle, Envelope };

std::string family_name(ShapeFamily f);
/// Accepts singular or plural names ("circle", "circles", ...).
ShapeFamily parse_family(std::string_view name);
/// Circles and blobs are in-distribution; triangles and envelopes are held out.
bool is_training_family(ShapeFamily f) noexcept;

/// Intensity image in [0, 1] plus its thresholded label mask (label 1).
struct ShapeImage {
    ScalarField image;
    LabelMask label;
};

struct ShapePair {
    ShapeImage source;
    ShapeImage target;
    ShapeFamily family = ShapeFamily::Circle;
};

/// Antialiased filled disk; center and radius in grid cells.
ShapeImage render_disk(const GridSpec &grid, double c0, double c1, double radius);

/// n independent (source, target) pairs of random disks on a dims x dims grid.
std::vector<ShapePair> gen_circles(int n, int dims, std::uint64_t seed);
/// n pairs of blobs, triangles or envelopes. Throws std::invalid_argument for circles.
std::vector<ShapePair> gen_shapes(ShapeFamily family, int n, int dims, std::uint64_t seed);

struct ManifestEntry {
    std::string source;
    std::string target;
    std::optional<std::string> source_label;
    std::optional<std::string> target_label;
    ShapeFamily family = ShapeFamily::Circle;
    std::string split; ///< train, val, test or ood
};

inline constexpr int kManifestSchemaVersion = 1;

/// Paths in entries are relative to `root`.
struct DatasetManifest {
    int schema_version = kManifestSchemaVersion;
    std::vector<int> dims;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;
    std::filesystem::path root;

    std::vector<const ManifestEntry *> split(std::string_view name) const;
    /// Split tags are known, ood excludes every family used for training, and every file exists.
    void validate() const;
};

std::string manifest_to_json(const DatasetManifest &m);
DatasetManifest manifest_from_json(std::string_view json, const std::filesystem::path &root);
/// Parses and validates; throws FormatError(Schema) or FormatError(Io).
DatasetManifest load_manifest(const std::filesystem::path &path);

/// Writes every pair as GFLD files under `dir` plus manifest.json. In-distribution families are
/// split 80/10/10 into train/val/test by a seeded shuffle; held-out families go to ood.
DatasetManifest write_dataset(const std::filesystem::path &dir, const std::vector<ShapePair> &pairs,
                              std::uint64_t seed);

/// Loads source and target images of an entry.
std::pair<ScalarField, ScalarField> load_pair(const DatasetManifest &m, const ManifestEntry &e);
/// Loads the label masks of an entry, thresholding the images when no label files are given.
std::pair<LabelMask, LabelMask> load_labels(const DatasetManifest &m, const ManifestEntry &e);

} // namespace geoflow
