#include "dlab/nls.hpp"

#include <cmath>

#include "dlab/counterexample.hpp"
#include "dlab/error.hpp"
#include "dlab/fft.hpp"

namespace dlab {
namespace {

constexpr double kOverflowModulus = 1e12;
constexpr double kMaxSteps = 1e7;

void check_config(const SplitStepConfig& config) {
    require(config.sign == -1 || config.sign == 0 || config.sign == 1, ErrorCode::InvalidArgument,
            "nonlinearity sign must be -1, 0 or +1");
    require(std::isfinite(config.dt) && config.dt != 0.0, ErrorCode::InvalidArgument, "dt must be nonzero");
    require(config.box_radius >= 0, ErrorCode::InvalidArgument, "box radius must be nonnegative");
}

}  // namespace

std::string to_string(Dealias dealias) {
    return dealias == Dealias::alias_free_cubic ? "alias_free_cubic" : "two_thirds";
}

Dealias dealias_from_string(const std::string& name) {
    if (name == "alias_free_cubic") return Dealias::alias_free_cubic;
    if (name == "two_thirds") return Dealias::two_thirds;
    fail(ErrorCode::ConfigInvalid, "unknown dealiasing rule '" + name + "'");
}

int split_step_grid_points(int box_radius, Dealias dealias) {
    const int minimal = dealias == Dealias::alias_free_cubic ? 6 * box_radius + 1 : 3 * box_radius + 2;
    return fft_size_at_least(minimal);
}

SplitStepper::SplitStepper(const SplitStepConfig& config) : config_(config) {
    check_config(config);
    M_ = split_step_grid_points(config.box_radius, config.dealias);
    const int n = config.phi.dimension();
    grid_ = std::make_unique<FftGrid>(n, M_);
    const SpectralState box(n, config.box_radius);
    std::vector<int> xi(static_cast<std::size_t>(n));
    half_step_.resize(box.size());
    slots_.resize(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) {
        box.lattice_point(i, xi);
        half_step_[i] = std::polar(1.0, 0.5 * config.dt * config.phi.at_lattice(xi));
        std::size_t slot = 0;
        for (int x : xi) slot = slot * static_cast<std::size_t>(M_) + static_cast<std::size_t>(((x % M_) + M_) % M_);
        slots_[i] = slot;
    }
}

SplitStepper::~SplitStepper() = default;
SplitStepper::SplitStepper(SplitStepper&&) noexcept = default;
SplitStepper& SplitStepper::operator=(SplitStepper&&) noexcept = default;

SpectralState SplitStepper::step(const SpectralState& state) {
    require(state.dimension() == config_.phi.dimension() && state.box_radius() == config_.box_radius,
            ErrorCode::DimensionMismatch, "state does not match the solver box");
    const auto in = state.coefficients();
    grid_->clear();
    auto values = grid_->values();
    for (std::size_t i = 0; i < in.size(); ++i) values[slots_[i]] = in[i] * half_step_[i];
    grid_->to_physical();
    const double rotation = -static_cast<double>(config_.sign) * config_.dt;
    for (Complex& v : values) {
        const double m = std::norm(v);
        if (!(m <= kOverflowModulus * kOverflowModulus))
            fail(ErrorCode::Overflow, "field modulus exceeded 1e12");
        if (config_.sign != 0) v *= std::polar(1.0, rotation * m);
    }
    grid_->to_spectral();
    const double inv = 1.0 / static_cast<double>(grid_->size());
    SpectralState out(state.dimension(), state.box_radius());
    auto coeffs = out.coefficients();
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = values[slots_[i]] * inv * half_step_[i];
    return out;
}

SpectralState step_strang(const SpectralState& state, const SplitStepConfig& config) {
    SplitStepper stepper(config);
    return stepper.step(state);
}

std::size_t step_count(const SplitStepConfig& config) {
    check_config(config);
    const double ratio = config.T / config.dt;
    require(std::isfinite(ratio) && ratio >= 0.0, ErrorCode::InvalidArgument, "T and dt must have the same sign");
    require(ratio <= kMaxSteps, ErrorCode::InvalidArgument, "T/dt exceeds 1e7 steps");
    return static_cast<std::size_t>(std::llround(ratio));
}

Trajectory solve(const SpectralState& u0, const SplitStepConfig& config, int snapshot_every, double hs_index) {
    require(snapshot_every >= 1, ErrorCode::InvalidArgument, "snapshot_every must be positive");
    const std::size_t steps = step_count(config);
    SplitStepper stepper(config);
    SpectralState u = u0.with_radius(config.box_radius);

    Trajectory traj;
    traj.hs_index = hs_index;
    auto record = [&](double t) {
        traj.snapshots.emplace_back(t, u);
        traj.mass_ledger.emplace_back(t, sobolev_norm(u, 0.0));
        traj.hs_ledger.emplace_back(t, sobolev_norm(u, hs_index));
    };
    record(0.0);
    for (std::size_t k = 1; k <= steps; ++k) {
        try {
            u = stepper.step(u);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Overflow) throw;
            traj.overflow = true;
            traj.halt_time = static_cast<double>(k - 1) * config.dt;
            return traj;
        }
        traj.steps = k;
        if (k % static_cast<std::size_t>(snapshot_every) == 0 || k == steps) record(static_cast<double>(k) * config.dt);
    }
    traj.halt_time = static_cast<double>(steps) * config.dt;
    return traj;
}

std::string to_string(ProbeFamily family) { return family == ProbeFamily::wang ? "wang" : "flat_annulus"; }

ProbeFamily probe_family_from_string(const std::string& name) {
    if (name == "wang") return ProbeFamily::wang;
    if (name == "flat_annulus") return ProbeFamily::flat_annulus;
    fail(ErrorCode::ConfigInvalid, "unknown probe family '" + name + "'");
}

SpectralState probe_data(ProbeFamily family, const PhaseFunction& phi, int N, double s) {
    require(N >= 1, ErrorCode::InvalidArgument, "probe scale must be positive");
    SpectralState data;
    if (family == ProbeFamily::wang) {
        require(phi.dimension() == 2 || phi.dimension() == 4, ErrorCode::DimensionUnsupported,
                "wang data exist in dimensions 2 and 4 only");
        const auto variant =
            phi.dimension() == 2 ? CounterexampleVariant::hyperbolic_2d : CounterexampleVariant::hyperbolic_4d;
        data = build_counterexample(variant, N).state;
    } else {
        data = SpectralState(phi.dimension(), 2 * N - 1);
        std::vector<int> xi(static_cast<std::size_t>(phi.dimension()));
        for (std::size_t i = 0; i < data.size(); ++i) {
            data.lattice_point(i, xi);
            if (in_band(DyadicBand{N}, xi)) data.coefficients()[i] = 1.0;
        }
    }
    data *= 1.0 / sobolev_norm(data, s);
    return data;
}

std::vector<ProbeRow> wellposedness_probe(const PhaseFunction& phi, double s, const std::vector<int>& N_list,
                                          double epsilon, double T, const ProbeOptions& options,
                                          const Executor& executor) {
    require(s >= 0.0 && std::isfinite(s), ErrorCode::InvalidArgument, "s must be nonnegative");
    require(epsilon > 0.0 && epsilon < 0.5, ErrorCode::InvalidArgument, "epsilon must lie in (0, 0.5)");
    require(T > 0.0 && options.dt > 0.0, ErrorCode::InvalidArgument, "T and dt must be positive");
    require(options.box_factor >= 1, ErrorCode::InvalidArgument, "box_factor must be at least 1");
    require(!N_list.empty() && !options.families.empty(), ErrorCode::InvalidArgument, "empty probe sweep");

    std::vector<ProbeRow> rows;
    for (ProbeFamily family : options.families)
        for (int N : N_list) rows.push_back({N, s, family, epsilon, 0.0, false});

    executor.for_each(rows.size(), [&](std::size_t r) {
        ProbeRow& row = rows[r];
        const SpectralState data = probe_data(row.family, phi, row.N, s);
        SplitStepConfig config;
        config.phi = phi;
        config.sign = options.sign;
        config.dt = options.dt;
        config.T = T;
        config.box_radius = options.box_factor * data.box_radius();
        config.dealias = options.dealias;
        const std::size_t steps = step_count(config);

        SplitStepper stepper_u(config);
        SplitStepper stepper_v(config);
        SpectralState u = data.with_radius(config.box_radius);
        SpectralState v = u;
        v *= 1.0 + epsilon;
        double sup = sobolev_norm(v - u, s);
        try {
            for (std::size_t k = 0; k < steps; ++k) {
                u = stepper_u.step(u);
                v = stepper_v.step(v);
                sup = std::max(sup, sobolev_norm(v - u, s));
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Overflow) throw;
            row.overflow = true;
        }
        row.modulus = sup / epsilon;
    });
    return rows;
}

}  // namespace dlab
