#pragma once

#include "dlab/phase.hpp"
#include "dlab/spectral.hpp"

#include <string>

namespace dlab {

enum class CounterexampleVariant { hyperbolic_2d, hyperbolic_4d };

std::string to_string(CounterexampleVariant variant);
CounterexampleVariant counterexample_variant_from_string(const std::string& name);  // ConfigInvalid

struct CounterexampleData {
    CounterexampleVariant variant = CounterexampleVariant::hyperbolic_2d;
    int N = 1;
    SpectralState state;
};

// 2d: N^{-1/2} at (k, -k), |k| <= N. 4d: N^{-1} at (k1, -k1, k2, -k2).
CounterexampleData build_counterexample(CounterexampleVariant variant, int N);

// xi1^2 - xi2^2, or xi1^2 - xi2^2 + xi3^2 - xi4^2.
PhaseFunction matching_phase(CounterexampleVariant variant);

// Largest l2 distance between the data and its evolution over 16 equally
// spaced times in [0, 1]. PhaseMismatch if |phi| > 1e-9 on the support.
double verify_stationarity(const CounterexampleData& data, const PhaseFunction& phi);

// |u|^2 u, computed on an alias-free grid (M >= 6R + 1) and returned in the
// box of radius 3R that holds its full support.
SpectralState cubic_product(const SpectralState& state);

// Growth exponent d of the first Picard iterate: 1 (2d) or 2 (4d).
int growth_exponent(CounterexampleVariant variant);

struct PicardBound {
    double hs_norm = 0.0;       // ||phi_N||_{H^s}
    double hs_of_cubic = 0.0;   // T ||phi_N|^2 phi_N||_{H^s}
    double ratio = 0.0;         // hs_of_cubic / (T N^{d+s})
};

PicardBound picard_lower_bound(const CounterexampleData& data, const PhaseFunction& phi, double s, double T);

// Regularity balancing T N^{d+s} against N^{3s}: s = d/2.
double threshold_for_growth(double d);
double threshold_table(CounterexampleVariant variant);

}  // namespace dlab
