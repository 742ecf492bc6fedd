#include <algorithm>
#include <cmath>
#include <numbers>

#include "dlab/error.hpp"
#include "dlab/exponents.hpp"
#include "dlab/fft.hpp"
#include "dlab/random.hpp"

namespace dlab {
namespace {

constexpr double kPanelPhaseBudget = 12.0;
constexpr double kMinStep = 1e-12;
constexpr double kZeroGradient = 1e-12;
// Quotients this close to the flat one count as ties, not as search failures.
constexpr double kFlatTieTolerance = 1e-9;

int band_box_radius(const FrequencyBand& band, int dimension) {
    if (const auto* dyadic = std::get_if<DyadicBand>(&band)) {
        require(dyadic->N >= 0, ErrorCode::InvalidArgument, "dyadic scale must be nonnegative");
        return dyadic->N == 0 ? 0 : 2 * dyadic->N - 1;
    }
    const auto& cube = std::get<CubeBand>(band);
    require(static_cast<int>(cube.center.size()) == dimension, ErrorCode::DimensionMismatch,
            "cube center has wrong dimension");
    require(cube.side >= 0, ErrorCode::InvalidArgument, "cube side must be nonnegative");
    int radius = 0;
    for (int c : cube.center) radius = std::max(radius, std::abs(c) + cube.side / 2);
    return radius;
}

}  // namespace

LpObjective::LpObjective(const PhaseFunction& phi, int p, const FrequencyBand& band, int dimension,
                         const Interval& interval)
    : n_(dimension), p_(p), box_radius_(band_box_radius(band, dimension)), M_(0) {
    require(p >= 2 && p % 2 == 0, ErrorCode::InvalidArgument, "extremizer objective needs an even p");
    require(phi.dimension() == dimension, ErrorCode::DimensionMismatch, "phase and band dimensions differ");
    require(interval.t1 > interval.t0, ErrorCode::InvalidArgument, "time interval must satisfy t1 > t0");

    SpectralState indicator(dimension, box_radius_);
    auto coeffs = indicator.coefficients();
    std::vector<int> xi(static_cast<std::size_t>(dimension));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        indicator.lattice_point(i, xi);
        if (in_band(band, xi)) {
            coeffs[i] = 1.0;
            support_.push_back(xi);
        }
    }
    require(!support_.empty(), ErrorCode::EmptyShell, "extremizer band contains no lattice points");

    M_ = fft_size_at_least(alias_free_points(support_bounds(indicator).width(), p));
    const ModeTable modes = mode_table(indicator, phi, M_);
    slots_ = modes.slot;
    phases_ = modes.phase;

    const auto [lo, hi] = std::minmax_element(phases_.begin(), phases_.end());
    const double bandwidth = 0.5 * p * (*hi - *lo);
    std::size_t panels = 2;
    while (static_cast<double>(panels) < bandwidth * interval.length() / kPanelPhaseBudget) panels *= 2;
    rule_ = composite_gauss_legendre(interval, panels);
}

double LpObjective::evaluate(const Coefficients& c, Coefficients* grad) const {
    require(static_cast<std::size_t>(c.size()) == support_.size(), ErrorCode::DimensionMismatch,
            "coefficient vector does not match the band");
    FftGrid grid(n_, M_);
    const std::size_t points = grid.size();
    const double torus = std::pow(2.0 * std::numbers::pi, n_);
    const double scale = torus / static_cast<double>(points);
    const int half = p_ / 2;
    if (grad) grad->setZero(c.size());

    double total = 0.0;
    for (std::size_t j = 0; j < rule_.nodes.size(); ++j) {
        const double t = rule_.nodes[j];
        const double w = rule_.weights[j];
        grid.clear();
        auto values = grid.values();
        for (std::size_t k = 0; k < slots_.size(); ++k)
            values[slots_[k]] += c(static_cast<Eigen::Index>(k)) * std::polar(1.0, t * phases_[k]);
        grid.to_physical();
        double sum = 0.0;
        for (Complex& v : values) {
            const double m = std::norm(v);
            double m_pow = 1.0;  // |u|^{p-2}
            for (int r = 1; r < half; ++r) m_pow *= m;
            sum += m_pow * m;
            if (grad) v *= m_pow;
        }
        total += w * scale * sum;
        if (!grad) continue;
        grid.to_spectral();
        // d/d conj(c_k) of F, times 2 for the real gradient.
        const double factor = w * scale * static_cast<double>(p_);
        for (std::size_t k = 0; k < slots_.size(); ++k)
            (*grad)(static_cast<Eigen::Index>(k)) +=
                factor * std::polar(1.0, -t * phases_[k]) * values[slots_[k]];
    }
    return total;
}

double LpObjective::value(const Coefficients& c) const { return evaluate(c, nullptr); }

double LpObjective::value_and_gradient(const Coefficients& c, Coefficients& grad) const { return evaluate(c, &grad); }

double LpObjective::quotient(const Coefficients& c) const { return std::pow(value(c), 1.0 / p_); }

SpectralState LpObjective::to_state(const Coefficients& c) const {
    SpectralState state(n_, box_radius_);
    for (std::size_t k = 0; k < support_.size(); ++k) state.at(support_[k]) = c(static_cast<Eigen::Index>(k));
    return state;
}

LpObjective::Coefficients LpObjective::from_state(const SpectralState& state) const {
    require(state.dimension() == n_, ErrorCode::DimensionMismatch, "state dimension does not match the band");
    Coefficients c(static_cast<Eigen::Index>(support_.size()));
    for (std::size_t k = 0; k < support_.size(); ++k)
        c(static_cast<Eigen::Index>(k)) = state.contains(support_[k]) ? state.at(support_[k]) : Complex{};
    return c;
}

LpObjective::Coefficients LpObjective::flat() const {
    const auto size = static_cast<Eigen::Index>(support_.size());
    return Coefficients::Constant(size, Complex(1.0 / std::sqrt(static_cast<double>(size)), 0.0));
}

namespace {

struct AscentRun {
    LpObjective::Coefficients c;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    bool stalled_at_start = false;
    std::vector<double> history;
};

AscentRun ascend(const LpObjective& objective, LpObjective::Coefficients c, const ExtremizerOptions& options) {
    AscentRun run;
    LpObjective::Coefficients grad;
    double F = objective.value_and_gradient(c, grad);
    double step = 0.5;
    for (int it = 1; it <= options.max_iterations; ++it) {
        run.iterations = it;
        const LpObjective::Coefficients tangent = grad - c.dot(grad).real() * c;
        const double tn = tangent.norm();
        if (tn <= kZeroGradient * std::max(grad.norm(), 1e-300)) {
            run.converged = true;
            break;
        }
        bool accepted = false;
        LpObjective::Coefficients trial;
        double F_trial = F;
        while (step >= kMinStep) {
            trial = c + (step / tn) * tangent;
            trial /= trial.norm();
            F_trial = objective.value(trial);
            if (F_trial > F) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No ascent along a nonzero gradient: a numerical stationary point
            // unless it happens before any progress was made.
            run.stalled_at_start = it == 1;
            run.converged = it > 1;
            break;
        }
        const double change = (F_trial - F) / F_trial;
        c = trial;
        F = objective.value_and_gradient(c, grad);
        run.history.push_back(F);
        step = std::min(2.0 * step, 1.0);
        if (change < options.objective_rel_tol) {
            run.converged = true;
            break;
        }
    }
    run.c = std::move(c);
    run.objective = F;
    return run;
}

}  // namespace

ExtremizerResult extremizer_search(const PhaseFunction& phi, int p, const FrequencyBand& band, int dimension,
                                   const Interval& interval, const ExtremizerOptions& options,
                                   const Executor& executor) {
    require(options.restarts >= 1, ErrorCode::InvalidArgument, "restarts must be positive");
    require(options.max_iterations >= 1, ErrorCode::InvalidArgument, "max_iterations must be positive");
    require(options.objective_rel_tol > 0.0, ErrorCode::InvalidArgument, "objective tolerance must be positive");
    const LpObjective objective(phi, p, band, dimension, interval);

    std::vector<AscentRun> runs(static_cast<std::size_t>(options.restarts));
    executor.for_each(runs.size(), [&](std::size_t r) {
        LpObjective::Coefficients start;
        if (r == 0 && options.initial) {
            start = objective.from_state(*options.initial);
        } else {
            Rng rng(derive_seed(options.seed, r));
            start.resize(static_cast<Eigen::Index>(objective.size()));
            for (Eigen::Index k = 0; k < start.size(); ++k) start(k) = rng.complex_normal();
        }
        const double norm = start.norm();
        require(norm > 0.0 && std::isfinite(norm), ErrorCode::InvalidArgument,
                "extremizer start has no mass on the band");
        start /= norm;
        runs[r] = ascend(objective, std::move(start), options);
    });

    const bool all_stalled =
        std::all_of(runs.begin(), runs.end(), [](const AscentRun& run) { return run.stalled_at_start; });
    require(!all_stalled, ErrorCode::NoAscent, "every restart failed to ascend at its first iteration");

    std::size_t best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].objective > runs[best].objective) best = r;

    ExtremizerResult result;
    result.data = objective.to_state(runs[best].c);
    result.objective = runs[best].objective;
    result.quotient = std::pow(result.objective, 1.0 / p);
    result.iterations = runs[best].iterations;
    result.converged = runs[best].converged;
    result.restarts_used = options.restarts;
    result.history = runs[best].history;
    result.flat_quotient = objective.quotient(objective.flat());
    result.below_flat = result.quotient < result.flat_quotient * (1.0 - kFlatTieTolerance);
    return result;
}

}  // namespace dlab
