#include "geoflow/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>

namespace geoflow {

struct Fft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    Plans() = default;
    Plans(const Plans &) = delete;
    Plans &operator=(const Plans &) = delete;
    ~Plans() {
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

namespace {

std::mutex &planner_mutex() {
    static std::mutex m;
    return m;
}

std::shared_ptr<const Fft::Plans> plans_for(const GridSpec &grid) {
    static std::map<std::array<int, 3>, std::shared_ptr<const Fft::Plans>> cache;
    std::lock_guard lock(planner_mutex());
    auto it = cache.find(grid.dims());
    if (it != cache.end()) return it->second;

    int n[3];
    for (int a = 0; a < grid.ndim(); ++a) n[a] = grid.dim(a);
    auto *buf_in = fftw_alloc_complex(grid.size());
    auto *buf_out = fftw_alloc_complex(grid.size());
    auto plans = std::make_shared<Fft::Plans>();
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans->forward = fftw_plan_dft(grid.ndim(), n, buf_in, buf_out, FFTW_FORWARD, flags);
    plans->backward = fftw_plan_dft(grid.ndim(), n, buf_in, buf_out, FFTW_BACKWARD, flags);
    fftw_free(buf_in);
    fftw_free(buf_out);
    if (!plans->forward || !plans->backward) throw std::runtime_error("FFTW planning failed for " + grid.describe());
    cache.emplace(grid.dims(), plans);
    return plans;
}

fftw_complex *as_fftw(const Complex *p) {
    // The DFT is out-of-place; FFTW's new-array interface takes non-const input.
    return reinterpret_cast<fftw_complex *>(const_cast<Complex *>(p));
}

} // namespace

Fft::Fft(const GridSpec &grid) : plans_(plans_for(grid)), size_(grid.size()) {}

void Fft::forward(std::span<const Complex> in, std::span<Complex> out) const {
    fftw_execute_dft(plans_->forward, as_fftw(in.data()), as_fftw(out.data()));
}

void Fft::inverse(std::span<const Complex> in, std::span<Complex> out) const {
    fftw_execute_dft(plans_->backward, as_fftw(in.data()), as_fftw(out.data()));
    const double scale = 1.0 / static_cast<double>(size_);
    for (Complex &z : out) z *= scale;
}

std::vector<Complex> Fft::forward_real(std::span<const double> in) const {
    std::vector<Complex> buf(in.begin(), in.end());
    std::vector<Complex> out(size_);
    forward(buf, out);
    return out;
}

void Fft::inverse_real(std::span<const Complex> in, std::span<double> out) const {
    std::vector<Complex> buf(size_);
    inverse(in, buf);
    for (std::size_t k = 0; k < size_; ++k) out[k] = buf[k].real();
}

} // namespace geoflow
