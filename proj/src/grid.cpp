#include "cavjt/grid.hpp"

#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "cavjt/errors.hpp"

namespace cavjt {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

int& planner_threads() {
    static int threads = 1;
    return threads;
}

void init_threads_once() {
    static std::once_flag flag;
    std::call_once(flag, [] { fftw_init_threads(); });
}

} // namespace

GridSpec::GridSpec(int n, double half_width) : n_(n), half_width_(half_width) {
    if (n < 8 || (n & (n - 1)) != 0) throw ConfigError("grid n must be a power of two >= 8");
    if (!(half_width > 0.0) || !std::isfinite(half_width)) throw ConfigError("grid half_width must be > 0");
    if (dx() > 0.25) {
        std::ostringstream msg;
        msg << "grid spacing dx = " << dx() << " exceeds 1/4; increase n or reduce half_width";
        throw ConfigError(msg.str());
    }
}

double GridSpec::wavenumber(int i) const {
    const int k = i < n_ / 2 ? i : i - n_;
    return kPi * k / half_width_;
}

void GridSpec::check_containment(const ModelParams& p) const {
    const double rho = surface_geometry(p).rho_min;
    if (!(half_width_ > rho + 5.0)) {
        std::ostringstream msg;
        msg << "grid half_width " << half_width_ << " must exceed rho_min + 5 = " << rho + 5.0;
        throw ConfigError(msg.str());
    }
}

void set_fft_threads(int threads) {
    init_threads_once();
    std::lock_guard lock(planner_mutex());
    planner_threads() = threads > 0 ? threads : 1;
}

Fft2D::Fft2D(int n) : n_(n) {
    init_threads_once();
    Field2D scratch(static_cast<std::size_t>(n) * n);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    std::lock_guard lock(planner_mutex());
    fftw_plan_with_nthreads(planner_threads());
    forward_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_2d(n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
}

Fft2D::~Fft2D() {
    std::lock_guard lock(planner_mutex());
    if (forward_) fftw_destroy_plan(forward_);
    if (backward_) fftw_destroy_plan(backward_);
}

void Fft2D::forward(Field2D& f) const {
    auto* buf = reinterpret_cast<fftw_complex*>(f.data());
    fftw_execute_dft(forward_, buf, buf);
}

void Fft2D::backward(Field2D& f) const {
    auto* buf = reinterpret_cast<fftw_complex*>(f.data());
    fftw_execute_dft(backward_, buf, buf);
}

} // namespace cavjt
