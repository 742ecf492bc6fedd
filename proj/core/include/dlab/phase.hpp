#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Jets {
    double value = 0.0;
    std::optional<Vector> gradient;
    std::optional<Matrix> hessian;
};

/// Real symbol of a dispersive operator on frequency space.
///
/// Three kinds are supported: diagonal quadratic forms sum_i alpha_i xi_i^2,
/// the fractional power |xi|^a (0 < a < 2, a != 1), and arbitrary callables
/// with optional closed-form gradient/Hessian. Instances are immutable and
/// cheap to copy; custom callables are shared.
class PhaseFunction {
public:
    enum class Kind { quadratic, fractional, custom };

    using ValueFn = std::function<double(const Vector&)>;
    using GradientFn = std::function<Vector(const Vector&)>;
    using HessianFn = std::function<Matrix(const Vector&)>;

    static PhaseFunction quadratic(std::vector<double> alphas);
    static PhaseFunction fractional(double a, int dimension);
    static PhaseFunction custom(int dimension, ValueFn value, GradientFn gradient = {},
                                HessianFn hessian = {});

    Kind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return dimension_; }

    // Only meaningful for the matching kind.
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    double exponent() const noexcept { return exponent_; }

    double operator()(const Vector& xi) const;
    double at_lattice(std::span<const int> xi) const;

    bool has_gradient() const noexcept;
    bool has_hessian() const noexcept;

    // -phi, keeping closed-form jets where they exist.
    PhaseFunction negated() const;

    // Human-readable tag, e.g. "quadratic(1,-1)" or "fractional(a=1.5,n=1)".
    std::string describe() const;

    // {"kind":"fractional","a":1.5,"n":1} or {"kind":"quadratic","alphas":[...]}.
    // Custom phases have no JSON form.
    nlohmann::json to_json() const;
    static PhaseFunction from_json(const nlohmann::json& spec);

private:
    friend Jets evaluate_jets(const PhaseFunction& phi, const Vector& xi, int order);

    struct CustomParts {
        ValueFn value;
        GradientFn gradient;
        HessianFn hessian;
    };

    PhaseFunction() = default;

    Kind kind_ = Kind::quadratic;
    int dimension_ = 0;
    std::vector<double> alphas_;
    double exponent_ = 0.0;
    std::shared_ptr<const CustomParts> custom_;
};

// order 0: value; 1: + gradient; 2: + Hessian. Closed forms for the built-in
// kinds; central differences with h = max(1e-5, 1e-7 |xi|) for custom phases
// without the requested jet. Hessians are returned exactly symmetric.
Jets evaluate_jets(const PhaseFunction& phi, const Vector& xi, int order);

struct HessianSpectrum {
    Vector eigenvalues;  // ascending
    int sigma = 0;       // min(#negative, #positive)
};

inline constexpr double kZeroEigenvalueThreshold = 1e-10;

HessianSpectrum hessian_spectrum(const PhaseFunction& phi, const Vector& xi);

// Signature defect of an already computed spectrum; eigenvalues with
// |lambda| <= 1e-10 max|lambda| count as zero.
int signature_defect(const Vector& eigenvalues);

struct ShellCurvature {
    int N = 0;
    std::size_t samples = 0;
    double min_abs_eig = 0.0;
    double max_abs_eig = 0.0;
    int sigma = 0;              // -1 if it varies inside the shell
    double log_geo_mean = 0.0;  // mean over samples of mean log|eig|
};

struct PsiFit {
    double beta = 0.0;         // psi(N) ~ N^beta
    double stderr_beta = 0.0;
    double ratio_bound = 1.0;  // sup over samples of max|eig| / min|eig|
};

struct CurvatureProfile {
    std::vector<ShellCurvature> per_shell;
    PsiFit psi_fit;
    std::optional<double> uniform_constant;
    bool violated = false;
    std::string violation;
};

struct CurvatureOptions {
    double ratio_cap = 100.0;
    // |beta| at or below this counts as uniform curvature.
    double uniform_tolerance = 0.05;
    std::uint64_t seed = 0x5eedULL;
};

// Samples are radius-stratified over the lattice points of each annulus
// N <= |xi| < 2N; every point is used when the shell has at most
// samples_per_shell of them.
CurvatureProfile fit_curvature_scale(const PhaseFunction& phi, std::span<const int> N_list,
                                     int samples_per_shell, const CurvatureOptions& options = {});

struct TransversalitySample {
    int K = 0;
    int N = 0;
    double min_gap = 0.0;
    double max_gap = 0.0;
    double typical_gap = 0.0;  // geometric mean over the sampled pairs
    double ratio = 1.0;        // max_gap / min_gap
};

struct TransversalityReport {
    double alpha = 0.0;
    double stderr_alpha = 0.0;
    int sign = -1;
    std::vector<TransversalitySample> samples;
    double worst_ratio = 1.0;
};

// One-dimensional only. Pairs xi_1 in +-[K, 2K), xi_2 in +-[N, 2N); alpha is
// the pooled least-squares slope of log(typical gap) against log N.
TransversalityReport check_transversality(const PhaseFunction& phi, std::span<const int> K_list,
                                          std::span<const int> N_list, int sign);

struct ExponentBudget {
    int n = 0;
    int k = 0;
    double p = 2.0;
    double critical_p = 0.0;
    double base_exponent = 0.0;   // n/2 - (n+2)/p
    double curvature_loss = 0.0;  // -beta/p for beta < 0
    double total = 0.0;
    bool interpolated = false;
    double theta = 1.0;  // weight of the critical endpoint when interpolated
};

ExponentBudget theoretical_exponent(int n, int k, double p, double beta);

// Lattice points of the annulus N <= |xi| < 2N (|xi| < 1 for N = 0), sorted by
// (|xi|^2, lexicographic).
std::vector<std::vector<int>> annulus_points(int dimension, int N);

}  // namespace dlab
