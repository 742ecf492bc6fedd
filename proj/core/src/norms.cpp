#include "dlab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dlab/error.hpp"
#include "dlab/fft.hpp"

namespace dlab {
namespace {

// Panel length times bandwidth kept below this on the first level, so the
// 16-point rule already resolves the integrand before doubling confirms it.
constexpr double kPanelPhaseBudget = 24.0;
constexpr std::size_t kMaxSpatialPoints = std::size_t{1} << 24;

bool is_even_exact(double p) {
    return p == 2.0 || p == 4.0 || p == 6.0 || p == 8.0;
}

double phase_range(const ModeTable& modes) {
    if (modes.phase.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(modes.phase.begin(), modes.phase.end());
    return *hi - *lo;
}

std::size_t grid_points(int n, int M) {
    std::size_t total = 1;
    for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(M);
    return total;
}

double power_of_modulus(double modulus_sq, double p, int half_p) {
    if (half_p > 0) {
        double r = modulus_sq;
        for (int k = 1; k < half_p; ++k) r *= modulus_sq;
        return r;
    }
    return std::pow(modulus_sq, 0.5 * p);
}

void check_interval(const Interval& interval) {
    require(std::isfinite(interval.t0) && std::isfinite(interval.t1) && interval.t1 > interval.t0,
            ErrorCode::InvalidArgument, "time interval must satisfy t1 > t0");
}

void check_tolerance(double rel_tol, std::size_t node_cap) {
    require(rel_tol > 0.0 && std::isfinite(rel_tol), ErrorCode::InvalidArgument, "rel_tol must be positive");
    require(node_cap >= static_cast<std::size_t>(2 * kGaussPointsPerPanel), ErrorCode::InvalidArgument,
            "node cap too small for two refinement levels");
}

double relative_change(double now, double before) {
    if (now == before) return 0.0;
    return std::abs(now - before) / std::max(std::abs(now), std::abs(before));
}

}  // namespace

int alias_free_points(int support_width, int p) {
    require(support_width >= 1, ErrorCode::InvalidArgument, "support width must be positive");
    require(p >= 2 && p % 2 == 0, ErrorCode::InvalidArgument, "alias-free rule needs an even p");
    return std::max(support_width, (p / 2) * (support_width - 1) + 1);
}

TimeIntegral integrate_in_time(const Interval& interval, double bandwidth, double rel_tol, std::size_t node_cap,
                               double root, const BatchIntegrand& evaluate, const Executor& executor) {
    check_interval(interval);
    check_tolerance(rel_tol, node_cap);
    const auto per_panel = static_cast<std::size_t>(kGaussPointsPerPanel);

    std::size_t panels = 1;
    const double wanted = bandwidth * interval.length() / kPanelPhaseBudget;
    while (static_cast<double>(panels) < wanted && panels * per_panel * 2 <= node_cap) panels *= 2;

    auto level = [&](std::size_t count) {
        const TimeRule rule = composite_gauss_legendre(interval, count);
        std::vector<double> values(rule.nodes.size());
        const std::span<const double> nodes(rule.nodes);
        const std::span<double> out(values);
        executor.for_chunks(values.size(), [&](std::size_t begin, std::size_t end) {
            evaluate(nodes.subspan(begin, end - begin), out.subspan(begin, end - begin));
        });
        for (std::size_t k = 0; k < values.size(); ++k) values[k] *= rule.weights[k];
        return pairwise_sum(values);
    };

    double previous = level(panels);
    double change = 0.0;
    while (true) {
        const std::size_t next = panels * 2;
        if (next * per_panel > node_cap)
            fail(ErrorCode::QuadratureStalled,
                 "time quadrature did not reach rel_tol " + std::to_string(rel_tol) + " within " +
                     std::to_string(node_cap) + " nodes (last change " + std::to_string(change) + ")");
        const double current = level(next);
        panels = next;
        change = relative_change(std::pow(current, 1.0 / root), std::pow(previous, 1.0 / root));
        previous = current;
        if (change < rel_tol) return {current, change, panels * per_panel};
    }
}

QuadratureResult spacetime_lp_norm(const SpectralState& state, const PhaseFunction& phi, const NormSpec& spec,
                                   const Executor& executor) {
    require(std::isfinite(spec.p) && spec.p >= 2.0, ErrorCode::InvalidArgument, "p must satisfy 2 <= p < inf");
    require(phi.dimension() == state.dimension(), ErrorCode::DimensionMismatch, "phase and state dimensions differ");
    check_interval(spec.interval);
    check_tolerance(spec.rel_tol, spec.node_cap);
    require(!state.is_zero(), ErrorCode::InvalidArgument, "L^p norm of the zero state requested");

    SpatialRule rule = spec.spatial;
    if (rule == SpatialRule::automatic) rule = is_even_exact(spec.p) ? SpatialRule::exact_even_p : SpatialRule::adaptive;
    require(rule != SpatialRule::exact_even_p || is_even_exact(spec.p), ErrorCode::InvalidArgument,
            "exact_even_p quadrature needs p in {2,4,6,8}");

    const int n = state.dimension();
    const int width = support_bounds(state).width();
    const double p = spec.p;
    const int half_p = rule == SpatialRule::exact_even_p ? static_cast<int>(p) / 2 : 0;
    const double torus = std::pow(2.0 * std::numbers::pi, n);

    auto run = [&](int M) {
        const ModeTable modes = mode_table(state, phi, M);
        const std::size_t points = grid_points(n, M);
        const double bandwidth = 0.5 * std::ceil(p) * phase_range(modes);
        BatchIntegrand evaluate = [&](std::span<const double> times, std::span<double> out) {
            FftGrid grid(n, M);
            for (std::size_t k = 0; k < times.size(); ++k) {
                load_and_synthesize(modes, times[k], grid);
                double sum = 0.0;
                for (const Complex& v : grid.values()) sum += power_of_modulus(std::norm(v), p, half_p);
                out[k] = torus * sum / static_cast<double>(points);
            }
        };
        return integrate_in_time(spec.interval, bandwidth, spec.rel_tol, spec.node_cap, p, evaluate, executor);
    };

    const int even_p = 2 * static_cast<int>(std::ceil(0.5 * p));
    const int minimal = alias_free_points(width, even_p);
    int M = spec.spatial_points;
    if (M == 0) {
        M = fft_size_at_least(minimal);
    } else if (rule == SpatialRule::exact_even_p) {
        require(M >= minimal, ErrorCode::GridTooCoarse,
                "M=" + std::to_string(M) + " is below the alias-free size " + std::to_string(minimal));
    }

    QuadratureResult result;
    TimeIntegral current = run(M);
    double est = current.est_rel_error;
    if (rule == SpatialRule::adaptive) {
        while (true) {
            const int next_M = fft_size_at_least(2 * M);
            require(grid_points(n, next_M) <= kMaxSpatialPoints, ErrorCode::QuadratureStalled,
                    "spatial refinement exceeded the grid cap");
            const TimeIntegral refined = run(next_M);
            const double change =
                relative_change(std::pow(refined.integral, 1.0 / p), std::pow(current.integral, 1.0 / p));
            current = refined;
            M = next_M;
            est = std::max(change, refined.est_rel_error);
            if (change < spec.rel_tol) break;
        }
    }
    result.integral = current.integral;
    result.value = std::pow(current.integral, 1.0 / p);
    result.est_rel_error = est;
    result.time_nodes_used = current.nodes_used;
    result.spatial_M = M;
    return result;
}

namespace {

TimeIntegral bilinear_integral(const SpectralState& a, const SpectralState& b, const PhaseFunction& phi,
                               const Interval& interval, const BilinearSpec& spec, const Executor& executor,
                               int& spatial_M) {
    require(a.dimension() == b.dimension() && phi.dimension() == a.dimension(), ErrorCode::DimensionMismatch,
            "phase and state dimensions differ");
    require(!a.is_zero() && !b.is_zero(), ErrorCode::InvalidArgument, "bilinear norm of a zero state requested");
    require(std::abs(spec.signs.a) == 1 && std::abs(spec.signs.b) == 1, ErrorCode::InvalidArgument,
            "bilinear signs must be +1 or -1");
    const int n = a.dimension();
    const int M = fft_size_at_least(support_bounds(a).width() + support_bounds(b).width() - 1);
    spatial_M = M;
    const ModeTable modes_a = mode_table(a, phi, M);
    const ModeTable modes_b = mode_table(b, phi, M);
    const std::size_t points = grid_points(n, M);
    const double torus = std::pow(2.0 * std::numbers::pi, n);
    const double sa = spec.signs.a;
    const double sb = spec.signs.b;

    BatchIntegrand evaluate = [&](std::span<const double> times, std::span<double> out) {
        FftGrid grid_a(n, M);
        FftGrid grid_b(n, M);
        for (std::size_t k = 0; k < times.size(); ++k) {
            load_and_synthesize(modes_a, sa * times[k], grid_a);
            load_and_synthesize(modes_b, sb * times[k], grid_b);
            const auto va = grid_a.values();
            const auto vb = grid_b.values();
            double sum = 0.0;
            for (std::size_t j = 0; j < points; ++j) sum += std::norm(va[j] * vb[j]);
            out[k] = torus * sum / static_cast<double>(points);
        }
    };
    const double bandwidth = phase_range(modes_a) + phase_range(modes_b);
    return integrate_in_time(interval, bandwidth, spec.rel_tol, spec.node_cap, 2.0, evaluate, executor);
}

}  // namespace

QuadratureResult bilinear_l2_norm(const SpectralState& a, const SpectralState& b, const PhaseFunction& phi,
                                  const BilinearSpec& spec, const Executor& executor) {
    int M = 0;
    const TimeIntegral integral = bilinear_integral(a, b, phi, spec.interval, spec, executor, M);
    QuadratureResult result;
    result.integral = integral.integral;
    result.value = std::sqrt(integral.integral);
    result.est_rel_error = integral.est_rel_error;
    result.time_nodes_used = integral.nodes_used;
    result.spatial_M = M;
    return result;
}

std::vector<double> equal_fractions(int parts) {
    require(parts >= 1, ErrorCode::InvalidArgument, "number of parts must be positive");
    return std::vector<double>(static_cast<std::size_t>(parts), 1.0 / parts);
}

PartitionCheck interval_partition_check(const SpectralState& a, const SpectralState& b, const PhaseFunction& phi,
                                        const BilinearSpec& spec, const std::vector<double>& fractions,
                                        const Executor& executor) {
    require(fractions.size() >= 2, ErrorCode::InvalidArgument, "partition needs at least two parts");
    double total = 0.0;
    for (double f : fractions) {
        require(f > 0.0 && std::isfinite(f), ErrorCode::InvalidArgument, "partition fractions must be positive");
        total += f;
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "partition fractions must sum to 1");
    check_interval(spec.interval);

    int M = 0;
    PartitionCheck check;
    check.lhs = bilinear_integral(a, b, phi, spec.interval, spec, executor, M).integral;
    const double length = spec.interval.length();
    double cumulative = 0.0;
    double start = spec.interval.t0;
    for (std::size_t j = 0; j < fractions.size(); ++j) {
        cumulative += fractions[j];
        const double end = j + 1 == fractions.size() ? spec.interval.t1 : spec.interval.t0 + cumulative * length;
        check.parts.push_back(bilinear_integral(a, b, phi, Interval{start, end}, spec, executor, M).integral);
        start = end;
    }
    check.rhs = pairwise_sum(check.parts);
    check.max_rel_dev = std::abs(check.lhs - check.rhs) / std::abs(check.lhs);
    return check;
}

}  // namespace dlab
