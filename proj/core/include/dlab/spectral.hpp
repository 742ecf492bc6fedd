#pragma once

#include "dlab/parallel.hpp"
#include "dlab/phase.hpp"

#include <nlohmann/json.hpp>

#include <complex>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace dlab {

class FftGrid;

using Complex = std::complex<double>;

// Fourier coefficients on the lattice box [-R, R]^n, stored densely in
// row-major order (first coordinate slowest). u(x) = sum_xi c(xi) e^{i xi.x}.
class SpectralState {
public:
    SpectralState() = default;
    SpectralState(int dimension, int box_radius);

    int dimension() const noexcept { return n_; }
    int box_radius() const noexcept { return radius_; }
    int side() const noexcept { return 2 * radius_ + 1; }
    std::size_t size() const noexcept { return coefficients_.size(); }

    std::span<Complex> coefficients() noexcept { return coefficients_; }
    std::span<const Complex> coefficients() const noexcept { return coefficients_; }

    bool contains(std::span<const int> xi) const noexcept;
    std::size_t index_of(std::span<const int> xi) const;  // DimensionMismatch / InvalidArgument
    void lattice_point(std::size_t index, std::span<int> xi) const noexcept;
    std::vector<int> lattice_point(std::size_t index) const;

    Complex& at(std::span<const int> xi) { return coefficients_[index_of(xi)]; }
    Complex at(std::span<const int> xi) const { return coefficients_[index_of(xi)]; }
    Complex& at(std::initializer_list<int> xi) { return at(std::span<const int>(xi.begin(), xi.size())); }
    Complex at(std::initializer_list<int> xi) const { return at(std::span<const int>(xi.begin(), xi.size())); }

    double l2_norm_squared() const noexcept;
    double l2_norm() const noexcept;
    bool is_zero() const noexcept;
    std::size_t nonzero_count() const noexcept;

    // Copy into a box of another radius; modes outside the new box are dropped.
    SpectralState with_radius(int box_radius) const;

    SpectralState& operator*=(Complex factor) noexcept;
    SpectralState& operator+=(const SpectralState& other);  // same shape required
    SpectralState& operator-=(const SpectralState& other);

    // {"n":..,"box_radius":..,"coefficients":[[re,im],...]}; doubles are
    // written in shortest round-trip form so the encoding is lossless.
    nlohmann::json to_json() const;
    static SpectralState from_json(const nlohmann::json& doc);

    friend bool operator==(const SpectralState&, const SpectralState&) = default;

private:
    int n_ = 0;
    int radius_ = 0;
    std::vector<Complex> coefficients_;
};

SpectralState operator-(SpectralState a, const SpectralState& b);
SpectralState operator+(SpectralState a, const SpectralState& b);

// Per-coordinate extent of the nonzero coefficients. Empty for the zero state.
struct SupportBounds {
    std::vector<int> lo;
    std::vector<int> hi;

    bool empty() const noexcept { return lo.empty(); }
    int width() const noexcept;  // max_i (hi_i - lo_i + 1); 0 when empty
};

SupportBounds support_bounds(const SpectralState& state);

struct DyadicBand {
    int N = 0;  // N <= |xi| < 2N; N = 0 keeps only xi = 0
};

struct CubeBand {
    std::vector<int> center;
    int side = 1;  // keeps max_i |xi_i - center_i| <= side / 2
};

using FrequencyBand = std::variant<DyadicBand, CubeBand>;

bool in_band(const FrequencyBand& band, std::span<const int> xi);

SpectralState project(const SpectralState& state, const FrequencyBand& band);

// c(xi) <- e^{i t phi(xi)} c(xi)
SpectralState propagate(const SpectralState& state, const PhaseFunction& phi, double t);

// ((2 pi)^n sum <xi>^{2s} |c(xi)|^2)^{1/2}
double sobolev_norm(const SpectralState& state, double s);

// Direct evaluation of sum_xi c(xi) e^{i(xi.x + t phi(xi))} at one point.
Complex evaluate_direct(const SpectralState& state, const PhaseFunction& phi, double t,
                        std::span<const double> x);

struct SpaceTimeGrid {
    int points_per_dim = 0;
    std::vector<double> time_nodes;
};

// Samples of u(t, x) for x_j = 2 pi j / M, one M^n block per time node.
struct SpaceTimeField {
    int dimension = 0;
    int points_per_dim = 0;
    std::vector<double> times;
    std::vector<Complex> values;

    std::span<const Complex> at_time(std::size_t k) const;
};

// GridTooCoarse unless M >= 2R + 1. Parallel over time nodes.
SpaceTimeField synthesize(const SpectralState& state, const SpaceTimeGrid& grid,
                          const PhaseFunction& phi, const Executor& executor = Executor::serial());

// Nonzero modes of a state with their phases and FFT-grid slots, reused across
// time nodes by the quadrature engines.
struct ModeTable {
    int dimension = 0;
    int points_per_dim = 0;
    std::vector<std::size_t> slot;
    std::vector<Complex> coefficient;
    std::vector<double> phase;
};

ModeTable mode_table(const SpectralState& state, const PhaseFunction& phi, int points_per_dim);

// Writes sum over modes of c e^{i time phi} into grid slots (aliased modes
// accumulate) and transforms to physical samples.
void load_and_synthesize(const ModeTable& modes, double time, FftGrid& grid);

struct RecenteredState {
    SpectralState base;           // w0(xi') = u0(xi0 + xi') on the cube
    Vector shift_velocity;        // grad phi(xi0)
    PhaseFunction recentered_phase;  // psi(xi') = phi(xi0+xi') - phi(xi0) - xi'.grad phi(xi0)
    std::vector<int> center;
    double center_phase = 0.0;    // phi(xi0)
};

// Band must be a cube. u(t,x) = e^{i(x.xi0 + t phi(xi0))} w(t, x + t grad phi(xi0)).
RecenteredState recenter(const SpectralState& state, const PhaseFunction& phi, const FrequencyBand& band);

}  // namespace dlab
