#include "geoflow/field_io.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "geoflow/atomic_file.hpp"
#include "geoflow/byte_codec.hpp"
#include "geoflow/errors.hpp"

namespace geoflow {
namespace {

constexpr std::string_view kMagic = "GFLD";
constexpr std::uint32_t kMaxDim = 1u << 16;
constexpr std::uint64_t kMaxSamples = std::uint64_t(1) << 32;

} // namespace

std::string encode_field(const MultiField &f) {
    const GridSpec &g = f.grid();
    std::string out;
    out.reserve(64 + f.data().size() * 8);
    out.append(kMagic);
    bytes::put<std::uint32_t>(out, kFieldFormatVersion);
    bytes::put<std::uint64_t>(out, 0);
    bytes::put<std::uint32_t>(out, g.ndim());
    for (int a = 0; a < 3; ++a) bytes::put<std::uint32_t>(out, a < g.ndim() ? g.dim(a) : 1);
    bytes::put<std::uint32_t>(out, f.channels());
    for (int a = 0; a < 3; ++a) bytes::put<double>(out, a < g.ndim() ? g.spacing(a) : 1.0);
    for (std::size_t p = 0; p < f.points(); ++p) {
        for (int c = 0; c < f.channels(); ++c) bytes::put<double>(out, f.at(c, p));
    }
    return out;
}

MultiField decode_field(std::string_view data, const std::string &what) {
    bytes::Reader r(data, what);
    if (r.remaining() < 4 || r.take(4) != kMagic) throw FormatError(FormatError::Kind::BadMagic, what + ": not a GFLD file");
    const auto version = r.get<std::uint32_t>();
    if (version != kFieldFormatVersion) {
        throw FormatError(FormatError::Kind::BadVersion, what + ": unsupported GFLD version " + std::to_string(version));
    }
    r.get<std::uint64_t>();
    const auto ndim = r.get<std::uint32_t>();
    std::array<std::uint32_t, 3> dims{};
    for (auto &d : dims) d = r.get<std::uint32_t>();
    const auto channels = r.get<std::uint32_t>();
    std::array<double, 3> spacing{};
    for (auto &s : spacing) s = r.get<double>();

    if (ndim != 2 && ndim != 3) throw FormatError(FormatError::Kind::Schema, what + ": ndim must be 2 or 3");
    std::uint64_t samples = channels;
    for (std::uint32_t a = 0; a < 3; ++a) {
        if (dims[a] == 0 || dims[a] > kMaxDim) throw FormatError(FormatError::Kind::DimOverflow, what + ": dimension out of range");
        if (a >= ndim && dims[a] != 1) throw FormatError(FormatError::Kind::Schema, what + ": unused axis must have extent 1");
        samples *= dims[a];
        if (samples > kMaxSamples) throw FormatError(FormatError::Kind::DimOverflow, what + ": sample count overflows");
    }
    if (channels == 0) throw FormatError(FormatError::Kind::Schema, what + ": zero channels");
    r.need(samples * sizeof(double));

    GridSpec grid;
    try {
        std::vector<int> d(dims.begin(), dims.begin() + ndim);
        std::vector<double> h(spacing.begin(), spacing.begin() + ndim);
        grid = GridSpec(d, h);
    } catch (const std::invalid_argument &e) {
        throw FormatError(FormatError::Kind::Schema, what + ": " + e.what());
    }
    MultiField f(grid, static_cast<int>(channels));
    for (std::size_t p = 0; p < f.points(); ++p) {
        for (int c = 0; c < f.channels(); ++c) f.at(c, p) = r.get<double>();
    }
    return f;
}

void write_field(const std::filesystem::path &path, const MultiField &f) { write_file_atomic(path, encode_field(f)); }

MultiField read_field(const std::filesystem::path &path) { return decode_field(read_file(path), path.string()); }

ScalarField read_scalar(const std::filesystem::path &path) {
    MultiField f = read_field(path);
    if (f.channels() != 1) throw FormatError(FormatError::Kind::Schema, path.string() + ": expected a scalar field");
    return ScalarField(std::move(f));
}

VectorField read_vector(const std::filesystem::path &path) {
    MultiField f = read_field(path);
    if (f.channels() != f.grid().ndim()) {
        throw FormatError(FormatError::Kind::Schema, path.string() + ": expected a vector field");
    }
    return VectorField(std::move(f));
}

} // namespace geoflow
