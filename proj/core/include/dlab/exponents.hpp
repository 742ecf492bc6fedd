#pragma once

#include "dlab/fit.hpp"
#include "dlab/norms.hpp"
#include "dlab/parallel.hpp"
#include "dlab/phase.hpp"
#include "dlab/quadrature.hpp"
#include "dlab/spectral.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dlab {

enum class DataFamily { flat_annulus, random_phase, random_sparse, extremized };

std::string to_string(DataFamily family);
DataFamily data_family_from_string(const std::string& name);  // ConfigInvalid

struct ExtremizerOptions {
    int restarts = 5;
    int max_iterations = 500;
    double objective_rel_tol = 1e-6;
    std::uint64_t seed = 1;
    std::optional<SpectralState> initial;  // used for the first restart
};

struct DataSpec {
    DataFamily family = DataFamily::flat_annulus;
    std::uint64_t seed = 1;
    double density = 1.0;  // random_sparse keep probability
    ExtremizerOptions extremizer{};
};

// Data on the dyadic annulus N <= |xi| < 2N in the box of radius 2N - 1.
// `stream` separates the random streams of the two factors in bilinear sweeps.
SpectralState make_annulus_data(const DataSpec& spec, const PhaseFunction& phi, int N, double p,
                                const Interval& interval, std::uint64_t stream = 0,
                                const Executor& executor = Executor::serial());

struct SweepConfig {
    PhaseFunction phi = PhaseFunction::quadratic({1.0});
    double p = 4.0;
    Interval interval{};
    std::vector<int> N_list;
    DataSpec data{};
    double rel_tol = 1e-6;
    std::size_t node_cap = std::size_t{1} << 20;
    // Bilinear sweeps only.
    std::optional<int> K;
    std::vector<int> K_list;
    BilinearSigns signs{};
};

struct SweepPoint {
    int N = 0;
    int K = 0;  // 0 for linear sweeps
    double norm = 0.0;
    double data_l2 = 0.0;  // product of the factors' l2 norms for bilinear sweeps
    double normalized = 0.0;
    double est_rel_error = 0.0;
    std::size_t time_nodes = 0;
    int spatial_M = 0;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::optional<FitResult> fit;
    bool partial = false;
    std::string error;  // first error when partial
};

SweepResult linear_strichartz_sweep(const SweepConfig& cfg, const Executor& executor = Executor::serial());

struct BilinearSweepResult {
    std::optional<SweepResult> in_N;  // K fixed, N swept
    std::optional<SweepResult> in_K;  // N fixed at max(N_list), K swept over K_list
};

BilinearSweepResult bilinear_sweep(const SweepConfig& cfg, const Executor& executor = Executor::serial());

// F(c) = int_I int_{T^n} |sum_xi c_xi e^{i(xi.x + t phi(xi))}|^p on a fixed
// quadrature: alias-free spatial mean and a composite Gauss-Legendre rule
// sized from the band's phase spread.
class LpObjective {
public:
    using Coefficients = Eigen::VectorXcd;

    LpObjective(const PhaseFunction& phi, int p, const FrequencyBand& band, int dimension, const Interval& interval);

    std::size_t size() const noexcept { return support_.size(); }
    const std::vector<std::vector<int>>& support() const noexcept { return support_; }
    int box_radius() const noexcept { return box_radius_; }
    int p() const noexcept { return p_; }

    double value(const Coefficients& c) const;
    // Returns F(c) and writes the real gradient: dF(c + h d)/dh = Re(grad^H d).
    double value_and_gradient(const Coefficients& c, Coefficients& grad) const;

    // p-th root of F, i.e. the L^p norm.
    double quotient(const Coefficients& c) const;

    SpectralState to_state(const Coefficients& c) const;
    Coefficients from_state(const SpectralState& state) const;
    Coefficients flat() const;  // unit l2, equal real entries

private:
    double evaluate(const Coefficients& c, Coefficients* grad) const;

    int n_;
    int p_;
    int box_radius_;
    int M_;
    std::vector<std::vector<int>> support_;
    std::vector<std::size_t> slots_;
    std::vector<double> phases_;
    TimeRule rule_;
};

struct ExtremizerResult {
    SpectralState data;  // unit l2
    double quotient = 0.0;
    double objective = 0.0;  // quotient^p
    int iterations = 0;
    bool converged = false;
    int restarts_used = 0;
    double flat_quotient = 0.0;
    bool below_flat = false;
    std::vector<double> history;  // objective after each accepted step of the best restart
};

// Projected gradient ascent on the unit sphere; p must be even.
ExtremizerResult extremizer_search(const PhaseFunction& phi, int p, const FrequencyBand& band, int dimension,
                                   const Interval& interval, const ExtremizerOptions& options = {},
                                   const Executor& executor = Executor::serial());

}  // namespace dlab
