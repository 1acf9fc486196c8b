#include "geoflow/data_io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "geoflow/atomic_file.hpp"
#include "geoflow/errors.hpp"
#include "geoflow/field_io.hpp"

namespace geoflow {
namespace {

using nlohmann::json;
using Vec2 = std::array<double, 2>;

/// Intensity for signed distance d (cells, positive inside): smoothstep across [-1, 1].
double edge(double d) {
    const double t = std::clamp((d + 1.0) * 0.5, 0.0, 1.0);
    return t * t * (3.0 - 2.0 * t);
}

template <class SignedDistance>
ShapeImage rasterize(const GridSpec &grid, SignedDistance sd) {
    ShapeImage s{ScalarField(grid), LabelMask(grid)};
    for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto c = grid.coords(p);
        const double d = sd(Vec2{double(c[0]), double(c[1])});
        s.image[p] = edge(d);
        s.label[p] = d >= 0.0 ? 1 : 0;
    }
    return s;
}

double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const double bx = b[0] - a[0], by = b[1] - a[1];
    const double px = p[0] - a[0], py = p[1] - a[1];
    const double len2 = bx * bx + by * by;
    const double t = len2 > 0.0 ? std::clamp((px * bx + py * by) / len2, 0.0, 1.0) : 0.0;
    return std::hypot(px - t * bx, py - t * by);
}

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]); }

GridSpec square_grid(int dims) {
    if (dims < 16) throw std::invalid_argument("dims must be >= 16");
    return GridSpec{dims, dims};
}

/// Independent stream per (seed, sample index).
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

ShapeImage random_disk(const GridSpec &g, std::mt19937_64 &rng) {
    const double n = g.dim(0);
    std::uniform_real_distribution<double> radius(0.15 * n, 0.35 * n);
    std::uniform_real_distribution<double> jitter(-0.1 * n, 0.1 * n);
    const double r = radius(rng);
    const double c0 = 0.5 * n + jitter(rng);
    const double c1 = 0.5 * n + jitter(rng);
    return render_disk(g, c0, c1, r);
}

ShapeImage random_blob(const GridSpec &g, std::mt19937_64 &rng) {
    const double n = g.dim(0);
    std::uniform_real_distribution<double> radius(0.15 * n, 0.28 * n);
    std::uniform_real_distribution<double> jitter(-0.1 * n, 0.1 * n);
    std::uniform_real_distribution<double> amp(-0.18, 0.18);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const double r0 = radius(rng);
    const Vec2 c{0.5 * n + jitter(rng), 0.5 * n + jitter(rng)};
    std::array<double, 3> a{}, ph{};
    for (int k = 0; k < 3; ++k) {
        a[k] = amp(rng);
        ph[k] = phase(rng);
    }
    return rasterize(g, [&](Vec2 p) {
        const double dx = p[0] - c[0], dy = p[1] - c[1];
        const double theta = std::atan2(dy, dx);
        double r = r0;
        for (int k = 0; k < 3; ++k) r += r0 * a[k] * std::cos((k + 2) * theta + ph[k]);
        return r - std::hypot(dx, dy);
    });
}

ShapeImage random_triangle(const GridSpec &g, std::mt19937_64 &rng) {
    const double n = g.dim(0);
    constexpr double margin = 2.0;
    std::uniform_real_distribution<double> coord(margin, n - 1.0 - margin);
    std::array<Vec2, 3> v{};
    do {
        for (auto &p : v) p = {coord(rng), coord(rng)};
    } while (std::abs(cross(v[0], v[1], v[2])) < 0.1 * n * n);
    if (cross(v[0], v[1], v[2]) < 0.0) std::swap(v[1], v[2]);
    return rasterize(g, [&](Vec2 p) {
        double dist = std::numeric_limits<double>::max();
        bool inside = true;
        for (int e = 0; e < 3; ++e) {
            const Vec2 a = v[e], b = v[(e + 1) % 3];
            dist = std::min(dist, segment_distance(p, a, b));
            inside = inside && cross(a, b, p) >= 0.0;
        }
        return inside ? dist : -dist;
    });
}

ShapeImage random_envelope(const GridSpec &g, std::mt19937_64 &rng) {
    const double n = g.dim(0);
    std::uniform_real_distribution<double> width(0.4 * n, 0.7 * n);
    std::uniform_real_distribution<double> height(0.3 * n, 0.55 * n);
    std::uniform_real_distribution<double> jitter(-0.08 * n, 0.08 * n);
    const double half_width = 0.08 * n / 2.0 + 0.5;
    // Keep the strokes and their antialiased edge off the frame.
    const double pad = half_width + 1.5, room = n - 1.0 - 2.0 * pad;
    const double w = std::min(width(rng), room), h = std::min(height(rng), room);
    const Vec2 c{std::clamp(0.5 * n + jitter(rng), pad + 0.5 * h, n - 1.0 - pad - 0.5 * h),
                 std::clamp(0.5 * n + jitter(rng), pad + 0.5 * w, n - 1.0 - pad - 0.5 * w)};
    const Vec2 p00{c[0] - 0.5 * h, c[1] - 0.5 * w}, p01{c[0] - 0.5 * h, c[1] + 0.5 * w};
    const Vec2 p10{c[0] + 0.5 * h, c[1] - 0.5 * w}, p11{c[0] + 0.5 * h, c[1] + 0.5 * w};
    const std::array<std::array<Vec2, 2>, 6> strokes{{{p00, p01}, {p01, p11}, {p11, p10}, {p10, p00}, {p00, p11}, {p01, p10}}};
    return rasterize(g, [&](Vec2 p) {
        double dist = std::numeric_limits<double>::max();
        for (const auto &s : strokes) dist = std::min(dist, segment_distance(p, s[0], s[1]));
        return half_width - dist;
    });
}

ShapeImage random_shape(ShapeFamily f, const GridSpec &g, std::mt19937_64 &rng) {
    switch (f) {
    case ShapeFamily::Circle: return random_disk(g, rng);
    case ShapeFamily::Blob: return random_blob(g, rng);
    case ShapeFamily::Triangle: return random_triangle(g, rng);
    case ShapeFamily::Envelope: return random_envelope(g, rng);
    }
    throw std::invalid_argument("unknown shape family");
}

std::vector<ShapePair> generate(ShapeFamily family, int n, int dims, std::uint64_t seed) {
    if (n < 0) throw std::invalid_argument("sample count must be >= 0");
    const GridSpec g = square_grid(dims);
    std::vector<ShapePair> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng = sample_rng(seed, static_cast<std::uint64_t>(i));
        ShapePair p;
        p.family = family;
        p.source = random_shape(family, g, rng);
        p.target = random_shape(family, g, rng);
        out.push_back(std::move(p));
    }
    return out;
}

const std::set<std::string> kSplits{"train", "val", "test", "ood"};

} // namespace

std::string family_name(ShapeFamily f) {
    switch (f) {
    case ShapeFamily::Circle: return "circle";
    case ShapeFamily::Blob: return "blob";
    case ShapeFamily::Triangle: return "triangle";
    case ShapeFamily::Envelope: return "envelope";
    }
    return "unknown";
}

ShapeFamily parse_family(std::string_view name) {
    for (ShapeFamily f : {ShapeFamily::Circle, ShapeFamily::Blob, ShapeFamily::Triangle, ShapeFamily::Envelope}) {
        const std::string s = family_name(f);
        if (name == s || name == s + "s") return f;
    }
    throw std::invalid_argument("unknown shape family '" + std::string(name) + "'");
}

bool is_training_family(ShapeFamily f) noexcept { return f == ShapeFamily::Circle || f == ShapeFamily::Blob; }

ShapeImage render_disk(const GridSpec &grid, double c0, double c1, double radius) {
    if (grid.ndim() != 2) throw std::invalid_argument("render_disk: 2D grids only");
    return rasterize(grid, [=](Vec2 p) { return radius - std::hypot(p[0] - c0, p[1] - c1); });
}

std::vector<ShapePair> gen_circles(int n, int dims, std::uint64_t seed) {
    return generate(ShapeFamily::Circle, n, dims, seed);
}

std::vector<ShapePair> gen_shapes(ShapeFamily family, int n, int dims, std::uint64_t seed) {
    if (family == ShapeFamily::Circle) throw std::invalid_argument("gen_shapes: family must be blob, triangle or envelope");
    return generate(family, n, dims, seed);
}

std::vector<const ManifestEntry *> DatasetManifest::split(std::string_view name) const {
    std::vector<const ManifestEntry *> out;
    for (const auto &e : entries) {
        if (e.split == name) out.push_back(&e);
    }
    return out;
}

void DatasetManifest::validate() const {
    if (schema_version != kManifestSchemaVersion) {
        throw FormatError(FormatError::Kind::BadVersion, "manifest: unsupported schema_version " + std::to_string(schema_version));
    }
    std::set<ShapeFamily> trained;
    for (const auto &e : entries) {
        if (!kSplits.count(e.split)) throw FormatError(FormatError::Kind::Schema, "manifest: unknown split '" + e.split + "'");
        if (e.split == "train") trained.insert(e.family);
    }
    for (const auto &e : entries) {
        if (e.split == "ood" && trained.count(e.family)) {
            throw FormatError(FormatError::Kind::Schema,
                              "manifest: family '" + family_name(e.family) + "' is used for both train and ood");
        }
        for (const std::string *p : {&e.source, &e.target, e.source_label ? &*e.source_label : nullptr,
                                     e.target_label ? &*e.target_label : nullptr}) {
            if (p && !std::filesystem::exists(root / *p)) {
                throw FormatError(FormatError::Kind::Io, "manifest: missing file " + (root / *p).string());
            }
        }
    }
}

std::string manifest_to_json(const DatasetManifest &m) {
    json j;
    j["schema_version"] = m.schema_version;
    j["dims"] = m.dims;
    j["seed"] = m.seed;
    j["pairs"] = json::array();
    for (const auto &e : m.entries) {
        json p{{"source", e.source}, {"target", e.target}, {"family", family_name(e.family)}, {"split", e.split}};
        if (e.source_label) p["source_label"] = *e.source_label;
        if (e.target_label) p["target_label"] = *e.target_label;
        j["pairs"].push_back(std::move(p));
    }
    return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text, const std::filesystem::path &root) {
    DatasetManifest m;
    m.root = root;
    try {
        const json j = json::parse(text);
        m.schema_version = j.at("schema_version").get<int>();
        m.dims = j.at("dims").get<std::vector<int>>();
        m.seed = j.at("seed").get<std::uint64_t>();
        for (const json &p : j.at("pairs")) {
            ManifestEntry e;
            e.source = p.at("source").get<std::string>();
            e.target = p.at("target").get<std::string>();
            if (p.contains("source_label")) e.source_label = p.at("source_label").get<std::string>();
            if (p.contains("target_label")) e.target_label = p.at("target_label").get<std::string>();
            e.family = parse_family(p.at("family").get<std::string>());
            e.split = p.at("split").get<std::string>();
            m.entries.push_back(std::move(e));
        }
    } catch (const json::exception &e) {
        throw FormatError(FormatError::Kind::Schema, std::string("manifest: ") + e.what());
    } catch (const std::invalid_argument &e) {
        throw FormatError(FormatError::Kind::Schema, std::string("manifest: ") + e.what());
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path &path) {
    DatasetManifest m = manifest_from_json(read_file(path), path.parent_path());
    m.validate();
    return m;
}

DatasetManifest write_dataset(const std::filesystem::path &dir, const std::vector<ShapePair> &pairs, std::uint64_t seed) {
    std::filesystem::create_directories(dir);
    DatasetManifest m;
    m.root = dir;
    m.seed = seed;
    if (!pairs.empty()) {
        const GridSpec &g = pairs.front().source.image.grid();
        for (int a = 0; a < g.ndim(); ++a) m.dims.push_back(g.dim(a));
    }

    std::vector<std::size_t> id;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (is_training_family(pairs[i].family)) id.push_back(i);
    }
    std::mt19937_64 rng(seed ^ 0x5eed5b1175ULL);
    std::shuffle(id.begin(), id.end(), rng);
    std::vector<std::string> split(pairs.size(), "ood");
    const std::size_t n_val = id.size() / 10, n_test = id.size() / 10;
    for (std::size_t k = 0; k < id.size(); ++k) split[id[k]] = k < n_val ? "val" : k < n_val + n_test ? "test" : "train";

    for (std::size_t i = 0; i < pairs.size(); ++i) {
        char stem[32];
        std::snprintf(stem, sizeof stem, "pair%05zu", i);
        ManifestEntry e;
        e.source = std::string(stem) + "_source.gfld";
        e.target = std::string(stem) + "_target.gfld";
        e.source_label = std::string(stem) + "_source_label.gfld";
        e.target_label = std::string(stem) + "_target_label.gfld";
        e.family = pairs[i].family;
        e.split = split[i];
        write_field(dir / e.source, pairs[i].source.image);
        write_field(dir / e.target, pairs[i].target.image);
        write_field(dir / *e.source_label, pairs[i].source.label.to_field());
        write_field(dir / *e.target_label, pairs[i].target.label.to_field());
        m.entries.push_back(std::move(e));
    }
    write_file_atomic(dir / "manifest.json", manifest_to_json(m));
    return m;
}

std::pair<ScalarField, ScalarField> load_pair(const DatasetManifest &m, const ManifestEntry &e) {
    return {read_scalar(m.root / e.source), read_scalar(m.root / e.target)};
}

std::pair<LabelMask, LabelMask> load_labels(const DatasetManifest &m, const ManifestEntry &e) {
    const auto load = [&m](const std::optional<std::string> &label, const std::string &image) {
        if (label) return LabelMask::from_field(read_scalar(m.root / *label));
        return LabelMask::threshold(read_scalar(m.root / image));
    };
    return {load(e.source_label, e.source), load(e.target_label, e.target)};
}

} // namespace geoflow
