#pragma once

#include "dlab/parallel.hpp"
#include "dlab/phase.hpp"
#include "dlab/quadrature.hpp"
#include "dlab/spectral.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dlab {

enum class SpatialRule {
    automatic,     // exact_even_p for p in {2,4,6,8}, adaptive otherwise
    exact_even_p,  // alias-free discrete mean
    adaptive,      // M doubles until the value settles
};

struct NormSpec {
    double p = 4.0;
    Interval interval{};
    SpatialRule spatial = SpatialRule::automatic;
    double rel_tol = 1e-6;
    std::size_t node_cap = std::size_t{1} << 20;  // time nodes per refinement level
    int spatial_points = 0;                        // 0: chosen from p and the support
};

struct QuadratureResult {
    double value = 0.0;        // the norm
    double integral = 0.0;     // value^p (value^2 for bilinear norms)
    double est_rel_error = 0.0;
    std::size_t time_nodes_used = 0;
    int spatial_M = 0;
};

// Smallest M for which the M^n discrete mean of |u|^p is exact, p even and
// u supported in a box of per-coordinate width W: M > (p/2)(W-1).
int alias_free_points(int support_width, int p);

// (int_I int_{T^n} |e^{it phi} u|^p dx dt)^{1/p}
QuadratureResult spacetime_lp_norm(const SpectralState& state, const PhaseFunction& phi, const NormSpec& spec,
                                   const Executor& executor = Executor::serial());

struct BilinearSigns {
    int a = 1;  // +1: e^{+it phi}, -1: e^{-it phi}
    int b = 1;
};

struct BilinearSpec {
    Interval interval{};
    BilinearSigns signs{};
    double rel_tol = 1e-6;
    std::size_t node_cap = std::size_t{1} << 20;
};

// || (e^{+-it phi} a)(e^{+-it phi} b) ||_{L^2(I x T^n)}
QuadratureResult bilinear_l2_norm(const SpectralState& a, const SpectralState& b, const PhaseFunction& phi,
                                  const BilinearSpec& spec, const Executor& executor = Executor::serial());

struct PartitionCheck {
    double lhs = 0.0;  // ||F||^2 over I
    double rhs = 0.0;  // sum over parts
    double max_rel_dev = 0.0;
    std::vector<double> parts;  // ||F||^2 over each I_j
};

// `fractions` are the relative part lengths (summing to 1); use
// equal_fractions(J) for J equal parts.
PartitionCheck interval_partition_check(const SpectralState& a, const SpectralState& b, const PhaseFunction& phi,
                                        const BilinearSpec& spec, const std::vector<double>& fractions,
                                        const Executor& executor = Executor::serial());

std::vector<double> equal_fractions(int parts);

// Adaptive composite Gauss-Legendre integration of a nonnegative integrand in
// time. Levels double the panel count, starting from a count sized to the
// integrand bandwidth; stops when transform(Q) changes by less than rel_tol.
struct TimeIntegral {
    double integral = 0.0;
    double est_rel_error = 0.0;
    std::size_t nodes_used = 0;
};

// `evaluate` fills out[k] with the integrand at times[k]; it is called once per
// worker chunk so scratch buffers can be chunk-local. `root` is the power
// relating the integral to the reported quantity (p for L^p norms).
using BatchIntegrand = std::function<void(std::span<const double> times, std::span<double> out)>;

TimeIntegral integrate_in_time(const Interval& interval, double bandwidth, double rel_tol, std::size_t node_cap,
                               double root, const BatchIntegrand& evaluate, const Executor& executor);

}  // namespace dlab
