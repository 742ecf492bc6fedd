#include "dlab/counterexample.hpp"

#include <cmath>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"

namespace dlab {
namespace {

constexpr double kPhaseTolerance = 1e-9;
constexpr int kStationarityTimes = 16;

int dimension_of(CounterexampleVariant variant) { return variant == CounterexampleVariant::hyperbolic_2d ? 2 : 4; }

}  // namespace

std::string to_string(CounterexampleVariant variant) {
    return variant == CounterexampleVariant::hyperbolic_2d ? "hyperbolic_2d" : "hyperbolic_4d";
}

CounterexampleVariant counterexample_variant_from_string(const std::string& name) {
    if (name == "hyperbolic_2d") return CounterexampleVariant::hyperbolic_2d;
    if (name == "hyperbolic_4d") return CounterexampleVariant::hyperbolic_4d;
    fail(ErrorCode::ConfigInvalid, "unknown counterexample variant '" + name + "'");
}

CounterexampleData build_counterexample(CounterexampleVariant variant, int N) {
    require(N >= 1, ErrorCode::InvalidArgument, "counterexample scale N must be positive");
    CounterexampleData data;
    data.variant = variant;
    data.N = N;
    data.state = SpectralState(dimension_of(variant), N);
    if (variant == CounterexampleVariant::hyperbolic_2d) {
        const double amplitude = 1.0 / std::sqrt(static_cast<double>(N));
        for (int k = -N; k <= N; ++k) data.state.at({k, -k}) = amplitude;
    } else {
        const double amplitude = 1.0 / static_cast<double>(N);
        for (int k1 = -N; k1 <= N; ++k1)
            for (int k2 = -N; k2 <= N; ++k2) data.state.at({k1, -k1, k2, -k2}) = amplitude;
    }
    return data;
}

PhaseFunction matching_phase(CounterexampleVariant variant) {
    if (variant == CounterexampleVariant::hyperbolic_2d) return PhaseFunction::quadratic({1.0, -1.0});
    return PhaseFunction::quadratic({1.0, -1.0, 1.0, -1.0});
}

double verify_stationarity(const CounterexampleData& data, const PhaseFunction& phi) {
    const SpectralState& state = data.state;
    require(phi.dimension() == state.dimension(), ErrorCode::DimensionMismatch, "phase and data dimensions differ");
    std::vector<int> xi(static_cast<std::size_t>(state.dimension()));
    const auto coeffs = state.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        const double value = phi.at_lattice(xi);
        if (std::abs(value) > kPhaseTolerance) {
            std::string where;
            for (int x : xi) where += (where.empty() ? "" : ",") + std::to_string(x);
            fail(ErrorCode::PhaseMismatch, "phase is " + std::to_string(value) + " at (" + where + ") on the support");
        }
    }
    double deviation = 0.0;
    for (int k = 0; k < kStationarityTimes; ++k) {
        const double t = static_cast<double>(k) / (kStationarityTimes - 1);
        deviation = std::max(deviation, (propagate(state, phi, t) - state).l2_norm());
    }
    return deviation;
}

SpectralState cubic_product(const SpectralState& state) {
    const int n = state.dimension();
    const int R = state.box_radius();
    const int M = fft_size_at_least(6 * R + 1);
    FftGrid grid(n, M);
    auto values = grid.values();
    std::vector<int> xi(static_cast<std::size_t>(n));
    const auto coeffs = state.coefficients();
    auto slot_of = [M](std::span<const int> point) {
        std::size_t slot = 0;
        for (int x : point) slot = slot * static_cast<std::size_t>(M) + static_cast<std::size_t>(((x % M) + M) % M);
        return slot;
    };
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] == Complex{}) continue;
        state.lattice_point(i, xi);
        values[slot_of(xi)] = coeffs[i];
    }
    grid.to_physical();
    for (Complex& v : values) v *= std::norm(v);
    grid.to_spectral();
    const double inv = 1.0 / static_cast<double>(grid.size());
    SpectralState out(n, 3 * R);
    auto out_coeffs = out.coefficients();
    for (std::size_t i = 0; i < out_coeffs.size(); ++i) {
        out.lattice_point(i, xi);
        out_coeffs[i] = values[slot_of(xi)] * inv;
    }
    return out;
}

int growth_exponent(CounterexampleVariant variant) {
    return variant == CounterexampleVariant::hyperbolic_2d ? 1 : 2;
}

PicardBound picard_lower_bound(const CounterexampleData& data, const PhaseFunction& phi, double s, double T) {
    require(T > 0.0 && std::isfinite(T), ErrorCode::InvalidArgument, "T must be positive");
    require(std::isfinite(s), ErrorCode::InvalidArgument, "s must be finite");
    verify_stationarity(data, phi);
    PicardBound bound;
    bound.hs_norm = sobolev_norm(data.state, s);
    // Stationary data: the Duhamel integrand is constant in time.
    bound.hs_of_cubic = T * sobolev_norm(cubic_product(data.state), s);
    const double d = growth_exponent(data.variant);
    bound.ratio = bound.hs_of_cubic / (T * std::pow(static_cast<double>(data.N), d + s));
    return bound;
}

double threshold_for_growth(double d) {
    require(d >= 0.0 && std::isfinite(d), ErrorCode::InvalidArgument, "growth exponent must be nonnegative");
    return d / 2.0;
}

double threshold_table(CounterexampleVariant variant) { return threshold_for_growth(growth_exponent(variant)); }

}  // namespace dlab
