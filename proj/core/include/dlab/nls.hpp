#pragma once

#include "dlab/parallel.hpp"
#include "dlab/phase.hpp"
#include "dlab/spectral.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dlab {

class FftGrid;

enum class Dealias {
    alias_free_cubic,  // M >= 6R + 1
    two_thirds,        // M >= 3R + 2
};

std::string to_string(Dealias dealias);
Dealias dealias_from_string(const std::string& name);  // ConfigInvalid

// i u_t + phi(D) u = sign |u|^2 u; sign 0 switches the nonlinearity off.
struct SplitStepConfig {
    PhaseFunction phi = PhaseFunction::quadratic({1.0});
    int sign = 1;
    double dt = 1e-3;  // negative values integrate backwards
    double T = 1.0;    // same sign as dt
    int box_radius = 8;
    Dealias dealias = Dealias::alias_free_cubic;
};

int split_step_grid_points(int box_radius, Dealias dealias);

// Reusable Strang integrator for one configuration. Not thread-safe; give
// each worker its own stepper.
class SplitStepper {
public:
    explicit SplitStepper(const SplitStepConfig& config);
    ~SplitStepper();
    SplitStepper(SplitStepper&&) noexcept;
    SplitStepper& operator=(SplitStepper&&) noexcept;

    const SplitStepConfig& config() const noexcept { return config_; }
    int grid_points() const noexcept { return M_; }

    // Half linear step, exact pointwise phase rotation u <- e^{-i sign |u|^2 dt} u,
    // truncation to the box, half linear step. Overflow if |u| > 1e12.
    SpectralState step(const SpectralState& state);

private:
    SplitStepConfig config_;
    int M_ = 0;
    std::vector<Complex> half_step_;
    std::vector<std::size_t> slots_;
    std::unique_ptr<FftGrid> grid_;
};

SpectralState step_strang(const SpectralState& state, const SplitStepConfig& config);

struct Trajectory {
    std::vector<std::pair<double, SpectralState>> snapshots;
    std::vector<std::pair<double, double>> mass_ledger;  // (t, ||u||_{L^2})
    std::vector<std::pair<double, double>> hs_ledger;    // (t, ||u||_{H^s})
    double hs_index = 0.0;
    bool overflow = false;
    double halt_time = 0.0;  // time reached; where the blowup guard fired if overflow
    std::size_t steps = 0;
};

// Snapshots (and ledger entries) at t = 0, every `snapshot_every` steps and at
// the final step. Overflow ends the run early with overflow = true.
Trajectory solve(const SpectralState& u0, const SplitStepConfig& config, int snapshot_every, double hs_index = 0.0);

std::size_t step_count(const SplitStepConfig& config);

enum class ProbeFamily { flat_annulus, wang };

std::string to_string(ProbeFamily family);
ProbeFamily probe_family_from_string(const std::string& name);  // ConfigInvalid

struct ProbeOptions {
    double dt = 1e-3;
    int sign = 1;
    std::vector<ProbeFamily> families{ProbeFamily::wang};
    int box_factor = 2;  // solver box radius = box_factor * data radius
    Dealias dealias = Dealias::alias_free_cubic;
};

struct ProbeRow {
    int N = 0;
    double s = 0.0;
    ProbeFamily family = ProbeFamily::wang;
    double epsilon = 0.0;
    double modulus = 0.0;  // sup_t ||u - u_eps||_{H^s} / epsilon
    bool overflow = false;
};

// Data u0 normalized to ||u0||_{H^s} = 1, perturbation delta = epsilon u0.
std::vector<ProbeRow> wellposedness_probe(const PhaseFunction& phi, double s, const std::vector<int>& N_list,
                                          double epsilon, double T, const ProbeOptions& options = {},
                                          const Executor& executor = Executor::serial());

// Unit-H^s probe data for one family at scale N.
SpectralState probe_data(ProbeFamily family, const PhaseFunction& phi, int N, double s);

}  // namespace dlab
