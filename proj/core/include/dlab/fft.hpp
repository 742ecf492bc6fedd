#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace dlab {

// Smallest integer >= m whose only prime factors are 2, 3, 5, 7.
int fft_size_at_least(int m);

// In-place n-dimensional complex transform on an M^n periodic grid, row-major
// with the first coordinate slowest. Backward transform maps Fourier
// coefficients (indexed by xi mod M) to samples at x_j = 2*pi*j/M; forward is
// the unnormalized inverse of that. Planning is serialized internally, so
// grids may be created and executed concurrently from worker threads.
class FftGrid {
public:
    FftGrid(int dimension, int points_per_dim);
    ~FftGrid();
    FftGrid(const FftGrid&) = delete;
    FftGrid& operator=(const FftGrid&) = delete;
    FftGrid(FftGrid&& other) noexcept;
    FftGrid& operator=(FftGrid&& other) noexcept;

    int dimension() const noexcept { return dimension_; }
    int points_per_dim() const noexcept { return points_; }
    std::size_t size() const noexcept { return size_; }

    std::span<std::complex<double>> values() noexcept { return {data_, size_}; }
    std::span<const std::complex<double>> values() const noexcept { return {data_, size_}; }

    void clear() noexcept;
    void to_physical() noexcept;  // coefficients -> samples
    void to_spectral() noexcept;  // samples -> M^n * coefficients

private:
    void release() noexcept;

    int dimension_ = 0;
    int points_ = 0;
    std::size_t size_ = 0;
    std::complex<double>* data_ = nullptr;
    void* backward_ = nullptr;
    void* forward_ = nullptr;
};

}  // namespace dlab
