#include "dlab/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <vector>

#include "dlab/error.hpp"

namespace dlab {
namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

bool smooth(int m) {
    for (int p : {2, 3, 5, 7})
        while (m % p == 0) m /= p;
    return m == 1;
}

}  // namespace

int fft_size_at_least(int m) {
    int candidate = std::max(1, m);
    while (!smooth(candidate)) ++candidate;
    return candidate;
}

FftGrid::FftGrid(int dimension, int points_per_dim) : dimension_(dimension), points_(points_per_dim) {
    require(dimension >= 1, ErrorCode::InvalidArgument, "FFT dimension must be positive");
    require(points_per_dim >= 1, ErrorCode::InvalidArgument, "FFT size must be positive");
    size_ = 1;
    for (int d = 0; d < dimension; ++d) size_ *= static_cast<std::size_t>(points_per_dim);

    std::vector<int> dims(static_cast<std::size_t>(dimension), points_per_dim);
    std::lock_guard lock(planner_mutex());
    auto* buffer = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size_));
    if (buffer == nullptr) fail(ErrorCode::InvalidArgument, "FFT buffer allocation failed");
    data_ = reinterpret_cast<std::complex<double>*>(buffer);
    backward_ = fftw_plan_dft(dimension, dims.data(), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    forward_ = fftw_plan_dft(dimension, dims.data(), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
    std::fill(data_, data_ + size_, std::complex<double>{});
}

FftGrid::~FftGrid() { release(); }

FftGrid::FftGrid(FftGrid&& other) noexcept
    : dimension_(other.dimension_), points_(other.points_), size_(other.size_),
      data_(other.data_), backward_(other.backward_), forward_(other.forward_) {
    other.data_ = nullptr;
    other.backward_ = nullptr;
    other.forward_ = nullptr;
    other.size_ = 0;
}

FftGrid& FftGrid::operator=(FftGrid&& other) noexcept {
    if (this != &other) {
        release();
        dimension_ = other.dimension_;
        points_ = other.points_;
        size_ = other.size_;
        data_ = other.data_;
        backward_ = other.backward_;
        forward_ = other.forward_;
        other.data_ = nullptr;
        other.backward_ = nullptr;
        other.forward_ = nullptr;
        other.size_ = 0;
    }
    return *this;
}

void FftGrid::release() noexcept {
    if (data_ == nullptr) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(backward_));
    fftw_destroy_plan(static_cast<fftw_plan>(forward_));
    fftw_free(data_);
    data_ = nullptr;
}

void FftGrid::clear() noexcept { std::fill(data_, data_ + size_, std::complex<double>{}); }

void FftGrid::to_physical() noexcept { fftw_execute(static_cast<fftw_plan>(backward_)); }

void FftGrid::to_spectral() noexcept { fftw_execute(static_cast<fftw_plan>(forward_)); }

}  // namespace dlab
