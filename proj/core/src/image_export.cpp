#include "geoflow/image_export.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoflow/atomic_file.hpp"
#include "geoflow/field_ops.hpp"

namespace geoflow {
namespace {

void require_2d(const GridSpec &g, const char *where) {
    if (g.ndim() != 2) throw std::invalid_argument(std::string(where) + ": unsupported dimension " + std::to_string(g.ndim()) + " (2D only)");
}

} // namespace

Gray8 to_gray8(const ScalarField &f) {
    require_2d(f.grid(), "export_image");
    Gray8 img{f.grid().dim(0), f.grid().dim(1), std::vector<std::uint8_t>(f.points())};
    const auto [lo, hi] = std::minmax_element(f.values().begin(), f.values().end());
    const double range = *hi - *lo;
    for (std::size_t p = 0; p < f.points(); ++p) {
        const double t = range > 0.0 ? (f[p] - *lo) / range : std::clamp(f[p], 0.0, 1.0);
        img.pixels[p] = static_cast<std::uint8_t>(std::lround(255.0 * t));
    }
    return img;
}

Gray8 grid_raster(const Transform &phi, int stride, int scale) {
    const GridSpec &g = phi.grid();
    require_2d(g, "export_grid");
    if (stride < 1) throw std::invalid_argument("export_grid: stride must be >= 1");
    if (scale < 1) throw std::invalid_argument("export_grid: scale must be >= 1");
    Gray8 img{g.dim(0) * scale, g.dim(1) * scale, {}};
    img.pixels.assign(static_cast<std::size_t>(img.rows) * img.cols, 0);

    const ScalarField u0(MultiField(g, 1, std::vector<double>(phi.displacement.channel(0).begin(), phi.displacement.channel(0).end())));
    const ScalarField u1(MultiField(g, 1, std::vector<double>(phi.displacement.channel(1).begin(), phi.displacement.channel(1).end())));
    const auto plot = [&](double r, double c) {
        const long rows = img.rows, cols = img.cols;
        const long i = ((std::lround(r) % rows) + rows) % rows;
        const long j = ((std::lround(c) % cols) + cols) % cols;
        img.pixels[i * cols + j] = 255;
    };
    // Densely sample each line, map through phi, connect consecutive samples.
    const auto draw_line = [&](int axis, int k) {
        const int along = 1 - axis;
        const int samples = g.dim(along) * scale * 2;
        std::vector<Point> pts(samples + 1);
        for (int s = 0; s <= samples; ++s) {
            Point x{0.0, 0.0, 0.0};
            x[axis] = k * g.spacing(axis);
            x[along] = static_cast<double>(s) / samples * g.period(along);
            pts[s] = x;
        }
        const std::vector<double> d0 = interpolate(u0, pts);
        const std::vector<double> d1 = interpolate(u1, pts);
        std::array<double, 2> prev{};
        for (int s = 0; s <= samples; ++s) {
            const std::array<double, 2> cur{(pts[s][0] + d0[s]) / g.spacing(0) * scale,
                                            (pts[s][1] + d1[s]) / g.spacing(1) * scale};
            if (s > 0) {
                const double len = std::max(std::abs(cur[0] - prev[0]), std::abs(cur[1] - prev[1]));
                const int n = std::max(1, static_cast<int>(std::ceil(len)));
                for (int q = 0; q <= n; ++q) {
                    const double t = static_cast<double>(q) / n;
                    plot(prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]));
                }
            }
            prev = cur;
        }
    };
    for (int axis = 0; axis < 2; ++axis) {
        for (int k = 0; k < g.dim(axis); k += stride) draw_line(axis, k);
    }
    return img;
}

std::string encode_pgm(const Gray8 &img) {
    std::string out = "P5\n" + std::to_string(img.cols) + " " + std::to_string(img.rows) + "\n255\n";
    out.append(reinterpret_cast<const char *>(img.pixels.data()), img.pixels.size());
    return out;
}

void export_image(const ScalarField &f, const std::filesystem::path &path) { write_file_atomic(path, encode_pgm(to_gray8(f))); }

void export_grid(const Transform &phi, int stride, const std::filesystem::path &path, int scale) {
    write_file_atomic(path, encode_pgm(grid_raster(phi, stride, scale)));
}

} // namespace geoflow
