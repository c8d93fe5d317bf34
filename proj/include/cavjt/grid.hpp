// grid.hpp - uniform periodic quadrature grid and FFTW-backed 2D transforms.

#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <new>
#include <vector>

#include <fftw3.h>

#include "cavjt/model.hpp"

namespace cavjt {

/// std::allocator replacement returning SIMD-aligned storage from fftw_malloc.
template <typename T>
struct FftwAllocator {
    using value_type = T;

    FftwAllocator() = default;
    template <typename U>
    FftwAllocator(const FftwAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        if (n > std::numeric_limits<std::size_t>::max() / sizeof(T)) throw std::bad_array_new_length();
        void* p = fftw_malloc(n * sizeof(T));
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) noexcept { fftw_free(p); }

    template <typename U>
    bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

/// Complex samples on an n x n grid, index ix * n + iy.
using Field2D = std::vector<cplx, FftwAllocator<cplx>>;

/// n points per axis spanning [-L, L), dx = 2L / n.
class GridSpec {
public:
    GridSpec() = default;
    /// Throws ConfigError unless n is a power of two >= 8, L > 0 and dx <= 1/4.
    GridSpec(int n, double half_width);

    int n() const { return n_; }
    double half_width() const { return half_width_; }
    double dx() const { return 2.0 * half_width_ / n_; }
    std::size_t size() const { return static_cast<std::size_t>(n_) * n_; }
    std::size_t index(int ix, int iy) const { return static_cast<std::size_t>(ix) * n_ + iy; }

    double coord(int i) const { return -half_width_ + i * dx(); }
    /// Angular wavenumber of FFT bin i (FFTW ordering).
    double wavenumber(int i) const;
    /// Index of the mirror point -x (mod the period).
    int mirror(int i) const { return (n_ - i) % n_; }

    /// Throws ConfigError if the grid does not leave 5 units of margin beyond the ring radius.
    void check_containment(const ModelParams& p) const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int n_ = 0;
    double half_width_ = 0.0;
};

/// Sets the number of threads used by subsequently created FFT plans.
void set_fft_threads(int threads);

/// In-place unnormalized forward / backward 2D DFT of an n x n field.
class Fft2D {
public:
    explicit Fft2D(int n);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    void forward(Field2D& f) const;
    void backward(Field2D& f) const;
    int n() const { return n_; }

private:
    int n_;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

} // namespace cavjt
