#include "dlab/phase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "dlab/error.hpp"
#include "dlab/fit.hpp"
#include "dlab/random.hpp"

namespace dlab {
namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void check_dimension(const PhaseFunction& phi, const Vector& xi) {
    require(xi.size() == phi.dimension(), ErrorCode::DimensionMismatch,
            "phase of dimension " + std::to_string(phi.dimension()) + " evaluated at a point of dimension " +
                std::to_string(xi.size()));
}

double fd_step(const Vector& xi) { return std::max(1e-5, 1e-7 * xi.norm()); }

Vector fd_gradient(const PhaseFunction::ValueFn& f, const Vector& xi) {
    const double h = fd_step(xi);
    Vector g(xi.size());
    Vector x = xi;
    for (Eigen::Index i = 0; i < xi.size(); ++i) {
        x(i) = xi(i) + h;
        const double fp = f(x);
        x(i) = xi(i) - h;
        const double fm = f(x);
        x(i) = xi(i);
        g(i) = (fp - fm) / (2.0 * h);
    }
    return g;
}

Matrix fd_hessian_from_gradient(const PhaseFunction::GradientFn& g, const Vector& xi) {
    const double h = fd_step(xi);
    const auto n = xi.size();
    Matrix H(n, n);
    Vector x = xi;
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = xi(i) + h;
        const Vector gp = g(x);
        x(i) = xi(i) - h;
        const Vector gm = g(x);
        x(i) = xi(i);
        H.col(i) = (gp - gm) / (2.0 * h);
    }
    return H;
}

Matrix fd_hessian_from_value(const PhaseFunction::ValueFn& f, const Vector& xi) {
    const double h = fd_step(xi);
    const auto n = xi.size();
    Matrix H(n, n);
    const double f0 = f(xi);
    Vector x = xi;
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = xi(i) + h;
        const double fp = f(x);
        x(i) = xi(i) - h;
        const double fm = f(x);
        x(i) = xi(i);
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j) {
            double corner[4];
            int c = 0;
            for (double si : {1.0, -1.0}) {
                for (double sj : {1.0, -1.0}) {
                    x(i) = xi(i) + si * h;
                    x(j) = xi(j) + sj * h;
                    corner[c++] = f(x);
                }
            }
            x(i) = xi(i);
            x(j) = xi(j);
            H(i, j) = H(j, i) = (corner[0] - corner[1] - corner[2] + corner[3]) / (4.0 * h * h);
        }
    }
    return H;
}

Matrix symmetrized(const Matrix& H) { return 0.5 * (H + H.transpose()); }

}  // namespace

PhaseFunction PhaseFunction::quadratic(std::vector<double> alphas) {
    require(!alphas.empty(), ErrorCode::InvalidArgument, "quadratic phase needs at least one coefficient");
    for (double a : alphas)
        require(a != 0.0 && std::isfinite(a), ErrorCode::InvalidArgument,
                "quadratic phase coefficients must be finite and nonzero");
    PhaseFunction phi;
    phi.kind_ = Kind::quadratic;
    phi.dimension_ = static_cast<int>(alphas.size());
    phi.alphas_ = std::move(alphas);
    return phi;
}

PhaseFunction PhaseFunction::fractional(double a, int dimension) {
    require(a > 0.0 && a < 2.0 && a != 1.0, ErrorCode::InvalidArgument,
            "fractional exponent must satisfy 0 < a < 2, a != 1");
    require(dimension >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    PhaseFunction phi;
    phi.kind_ = Kind::fractional;
    phi.dimension_ = dimension;
    phi.exponent_ = a;
    return phi;
}

PhaseFunction PhaseFunction::custom(int dimension, ValueFn value, GradientFn gradient, HessianFn hessian) {
    require(dimension >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    require(static_cast<bool>(value), ErrorCode::InvalidArgument, "custom phase needs a value function");
    PhaseFunction phi;
    phi.kind_ = Kind::custom;
    phi.dimension_ = dimension;
    phi.custom_ = std::make_shared<const CustomParts>(
        CustomParts{std::move(value), std::move(gradient), std::move(hessian)});
    return phi;
}

double PhaseFunction::operator()(const Vector& xi) const {
    check_dimension(*this, xi);
    switch (kind_) {
        case Kind::quadratic: {
            double v = 0.0;
            for (int i = 0; i < dimension_; ++i) v += alphas_[static_cast<std::size_t>(i)] * xi(i) * xi(i);
            return v;
        }
        case Kind::fractional: return std::pow(xi.squaredNorm(), 0.5 * exponent_);
        case Kind::custom: return custom_->value(xi);
    }
    return 0.0;
}

double PhaseFunction::at_lattice(std::span<const int> xi) const {
    require(static_cast<int>(xi.size()) == dimension_, ErrorCode::DimensionMismatch,
            "lattice point dimension does not match phase");
    switch (kind_) {
        case Kind::quadratic: {
            double v = 0.0;
            for (std::size_t i = 0; i < xi.size(); ++i) {
                const double x = xi[i];
                v += alphas_[i] * x * x;
            }
            return v;
        }
        case Kind::fractional: {
            double r2 = 0.0;
            for (int x : xi) r2 += static_cast<double>(x) * x;
            return std::pow(r2, 0.5 * exponent_);
        }
        case Kind::custom: {
            Vector v(static_cast<Eigen::Index>(xi.size()));
            for (std::size_t i = 0; i < xi.size(); ++i) v(static_cast<Eigen::Index>(i)) = xi[i];
            return custom_->value(v);
        }
    }
    return 0.0;
}

bool PhaseFunction::has_gradient() const noexcept {
    return kind_ != Kind::custom || static_cast<bool>(custom_->gradient);
}

bool PhaseFunction::has_hessian() const noexcept {
    return kind_ != Kind::custom || static_cast<bool>(custom_->hessian);
}

PhaseFunction PhaseFunction::negated() const {
    if (kind_ == Kind::quadratic) {
        std::vector<double> flipped = alphas_;
        for (double& a : flipped) a = -a;
        return quadratic(std::move(flipped));
    }
    const PhaseFunction base = *this;
    const int order = kind_ == Kind::fractional ? 2 : (has_hessian() ? 2 : (has_gradient() ? 1 : 0));
    GradientFn gradient;
    HessianFn hessian;
    if (order >= 1)
        gradient = [base](const Vector& xi) -> Vector { return -*evaluate_jets(base, xi, 1).gradient; };
    if (order >= 2)
        hessian = [base](const Vector& xi) -> Matrix { return -*evaluate_jets(base, xi, 2).hessian; };
    return custom(dimension_, [base](const Vector& xi) { return -base(xi); }, std::move(gradient),
                  std::move(hessian));
}

std::string PhaseFunction::describe() const {
    switch (kind_) {
        case Kind::quadratic: {
            std::string s = "quadratic(";
            for (std::size_t i = 0; i < alphas_.size(); ++i) {
                if (i) s += ",";
                s += format_number(alphas_[i]);
            }
            return s + ")";
        }
        case Kind::fractional:
            return "fractional(a=" + format_number(exponent_) + ",n=" + std::to_string(dimension_) + ")";
        case Kind::custom: return "custom(n=" + std::to_string(dimension_) + ")";
    }
    return "unknown";
}

nlohmann::json PhaseFunction::to_json() const {
    switch (kind_) {
        case Kind::quadratic: return {{"kind", "quadratic"}, {"alphas", alphas_}};
        case Kind::fractional: return {{"kind", "fractional"}, {"a", exponent_}, {"n", dimension_}};
        case Kind::custom: break;
    }
    fail(ErrorCode::InvalidArgument, "custom phases cannot be serialized");
}

PhaseFunction PhaseFunction::from_json(const nlohmann::json& spec) {
    auto bad = [](const std::string& msg) { fail(ErrorCode::ConfigInvalid, msg); };
    if (!spec.is_object()) bad("phase: expected an object");
    if (!spec.contains("kind") || !spec["kind"].is_string()) bad("phase.kind: expected a string");
    const std::string kind = spec["kind"].get<std::string>();
    if (kind == "quadratic") {
        for (const auto& [key, _] : spec.items())
            if (key != "kind" && key != "alphas") bad("phase." + key + ": unknown key");
        if (!spec.contains("alphas") || !spec["alphas"].is_array() || spec["alphas"].empty())
            bad("phase.alphas: expected a nonempty array of numbers");
        std::vector<double> alphas;
        for (const auto& a : spec["alphas"]) {
            if (!a.is_number()) bad("phase.alphas: expected numbers");
            if (a.get<double>() == 0.0) bad("phase.alphas: coefficients must be nonzero");
            alphas.push_back(a.get<double>());
        }
        return quadratic(std::move(alphas));
    }
    if (kind == "fractional") {
        for (const auto& [key, _] : spec.items())
            if (key != "kind" && key != "a" && key != "n") bad("phase." + key + ": unknown key");
        if (!spec.contains("a") || !spec["a"].is_number()) bad("phase.a: expected a number");
        const double a = spec["a"].get<double>();
        if (!(a > 0.0 && a < 2.0) || a == 1.0) bad("phase.a: must satisfy 0 < a < 2 and a != 1");
        int n = 1;
        if (spec.contains("n")) {
            if (!spec["n"].is_number_integer() || spec["n"].get<int>() < 1) bad("phase.n: expected a positive integer");
            n = spec["n"].get<int>();
        }
        return fractional(a, n);
    }
    bad("phase.kind: unknown kind '" + kind + "'");
    return quadratic({1.0});
}

Jets evaluate_jets(const PhaseFunction& phi, const Vector& xi, int order) {
    check_dimension(phi, xi);
    require(order >= 0 && order <= 2, ErrorCode::InvalidArgument, "jet order must be 0, 1 or 2");
    Jets jets;
    jets.value = phi(xi);
    if (order == 0) return jets;

    const auto n = xi.size();
    switch (phi.kind()) {
        case PhaseFunction::Kind::quadratic: {
            Vector g(n);
            Matrix H = Matrix::Zero(n, n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double a = phi.alphas()[static_cast<std::size_t>(i)];
                g(i) = 2.0 * a * xi(i);
                H(i, i) = 2.0 * a;
            }
            jets.gradient = std::move(g);
            if (order == 2) jets.hessian = std::move(H);
            return jets;
        }
        case PhaseFunction::Kind::fractional: {
            const double r2 = xi.squaredNorm();
            require(r2 > 0.0, ErrorCode::SingularPoint, "fractional phase is not differentiable at xi = 0");
            const double a = phi.exponent();
            const double scale = a * std::pow(r2, 0.5 * (a - 2.0));
            jets.gradient = scale * xi;
            if (order == 2) {
                Matrix H = Matrix::Identity(n, n) + ((a - 2.0) / r2) * (xi * xi.transpose());
                jets.hessian = symmetrized(scale * H);
            }
            return jets;
        }
        case PhaseFunction::Kind::custom: break;
    }

    // Custom: supplied jets where present, finite differences otherwise.
    const auto& parts = *phi.custom_;
    if (parts.gradient) {
        jets.gradient = parts.gradient(xi);
    } else {
        jets.gradient = fd_gradient(parts.value, xi);
    }
    require(jets.gradient->size() == n, ErrorCode::DimensionMismatch, "custom gradient has wrong size");
    if (order == 2) {
        Matrix H;
        if (parts.hessian) {
            H = parts.hessian(xi);
        } else if (parts.gradient) {
            H = fd_hessian_from_gradient(parts.gradient, xi);
        } else {
            H = fd_hessian_from_value(parts.value, xi);
        }
        require(H.rows() == n && H.cols() == n, ErrorCode::DimensionMismatch, "custom Hessian has wrong size");
        jets.hessian = symmetrized(H);
    }
    return jets;
}


int signature_defect(const Vector& eigenvalues) {
    if (eigenvalues.size() == 0) return 0;
    const double threshold = kZeroEigenvalueThreshold * eigenvalues.cwiseAbs().maxCoeff();
    int negative = 0, positive = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        if (eigenvalues(i) < -threshold) ++negative;
        if (eigenvalues(i) > threshold) ++positive;
    }
    return std::min(negative, positive);
}

HessianSpectrum hessian_spectrum(const PhaseFunction& phi, const Vector& xi) {
    const Jets jets = evaluate_jets(phi, xi, 2);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(*jets.hessian, Eigen::EigenvaluesOnly);
    HessianSpectrum spectrum;
    spectrum.eigenvalues = solver.eigenvalues();
    spectrum.sigma = signature_defect(spectrum.eigenvalues);
    return spectrum;
}

std::vector<std::vector<int>> annulus_points(int dimension, int N) {
    require(dimension >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    require(N >= 0, ErrorCode::InvalidArgument, "dyadic scale must be nonnegative");
    const long long lo2 = N == 0 ? 0 : static_cast<long long>(N) * N;
    const long long hi2 = N == 0 ? 1 : 4LL * N * N;
    const int r = N == 0 ? 0 : 2 * N - 1;
    std::vector<std::vector<int>> points;
    std::vector<int> xi(static_cast<std::size_t>(dimension), -r);
    while (true) {
        long long r2 = 0;
        for (int x : xi) r2 += static_cast<long long>(x) * x;
        if (r2 >= lo2 && r2 < hi2) points.push_back(xi);
        int d = dimension - 1;
        while (d >= 0 && xi[static_cast<std::size_t>(d)] == r) {
            xi[static_cast<std::size_t>(d)] = -r;
            --d;
        }
        if (d < 0) break;
        ++xi[static_cast<std::size_t>(d)];
    }
    auto norm2 = [](const std::vector<int>& v) {
        long long s = 0;
        for (int x : v) s += static_cast<long long>(x) * x;
        return s;
    };
    std::stable_sort(points.begin(), points.end(),
                     [&](const auto& a, const auto& b) { return norm2(a) < norm2(b); });
    return points;
}

namespace {

constexpr double kEnumerationLimit = 4.0e6;

bool is_dyadic(int N) { return N >= 1 && (N & (N - 1)) == 0; }

std::vector<Vector> sample_shell(int dimension, int N, int samples, std::uint64_t seed) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(N)));
    std::vector<Vector> out;
    const double box = std::pow(4.0 * N - 1.0, dimension);
    auto to_vector = [](const std::vector<int>& p) {
        Vector v(static_cast<Eigen::Index>(p.size()));
        for (std::size_t i = 0; i < p.size(); ++i) v(static_cast<Eigen::Index>(i)) = p[i];
        return v;
    };
    if (box <= kEnumerationLimit) {
        const auto points = annulus_points(dimension, N);
        require(!points.empty(), ErrorCode::EmptyShell, "no lattice points in shell N=" + std::to_string(N));
        const std::size_t count = points.size();
        const auto want = static_cast<std::size_t>(samples);
        if (count <= want) {
            for (const auto& p : points) out.push_back(to_vector(p));
            return out;
        }
        for (std::size_t i = 0; i < want; ++i) {
            const std::size_t begin = count * i / want;
            const std::size_t end = count * (i + 1) / want;
            out.push_back(to_vector(points[begin + rng.below(end - begin)]));
        }
        return out;
    }
    // Large shells: rejection sampling inside the bounding box.
    const long long lo2 = static_cast<long long>(N) * N;
    const long long hi2 = 4LL * N * N;
    const auto side = static_cast<std::size_t>(4 * N - 1);
    std::vector<int> p(static_cast<std::size_t>(dimension));
    while (out.size() < static_cast<std::size_t>(samples)) {
        long long r2 = 0;
        for (auto& x : p) {
            x = static_cast<int>(rng.below(side)) - (2 * N - 1);
            r2 += static_cast<long long>(x) * x;
        }
        if (r2 >= lo2 && r2 < hi2) out.push_back(to_vector(p));
    }
    return out;
}

}  // namespace

CurvatureProfile fit_curvature_scale(const PhaseFunction& phi, std::span<const int> N_list,
                                     int samples_per_shell, const CurvatureOptions& options) {
    require(N_list.size() >= 3, ErrorCode::InvalidArgument, "need at least 3 dyadic scales");
    require(samples_per_shell >= 1, ErrorCode::InvalidArgument, "samples_per_shell must be positive");
    for (int N : N_list) require(is_dyadic(N), ErrorCode::InvalidArgument, "scale " + std::to_string(N) + " is not dyadic");

    CurvatureProfile profile;
    std::vector<FitPoint> points;
    int global_sigma = -2;
    double global_min = std::numeric_limits<double>::infinity();
    double global_max = 0.0;
    double ratio_bound = 1.0;

    for (int N : N_list) {
        const auto samples = sample_shell(phi.dimension(), N, samples_per_shell, options.seed);
        ShellCurvature shell;
        shell.N = N;
        shell.samples = samples.size();
        shell.min_abs_eig = std::numeric_limits<double>::infinity();
        int shell_sigma = -2;
        double log_sum = 0.0;
        for (const Vector& xi : samples) {
            const HessianSpectrum spectrum = hessian_spectrum(phi, xi);
            const Vector abs_eigs = spectrum.eigenvalues.cwiseAbs();
            const double lo = abs_eigs.minCoeff();
            const double hi = abs_eigs.maxCoeff();
            shell.min_abs_eig = std::min(shell.min_abs_eig, lo);
            shell.max_abs_eig = std::max(shell.max_abs_eig, hi);
            const bool degenerate = lo <= kZeroEigenvalueThreshold * hi;
            ratio_bound = degenerate ? std::numeric_limits<double>::infinity() : std::max(ratio_bound, hi / lo);
            double mean_log = 0.0;
            for (Eigen::Index i = 0; i < abs_eigs.size(); ++i) mean_log += std::log(abs_eigs(i));
            log_sum += mean_log / static_cast<double>(abs_eigs.size());
            if (shell_sigma == -2) shell_sigma = spectrum.sigma;
            else if (shell_sigma != spectrum.sigma) shell_sigma = -1;
        }
        shell.sigma = shell_sigma;
        shell.log_geo_mean = log_sum / static_cast<double>(samples.size());
        global_min = std::min(global_min, shell.min_abs_eig);
        global_max = std::max(global_max, shell.max_abs_eig);
        if (global_sigma == -2) global_sigma = shell_sigma;
        else if (global_sigma != shell_sigma) global_sigma = -1;
        if (std::isfinite(shell.log_geo_mean)) points.push_back({std::log(static_cast<double>(N)), shell.log_geo_mean});
        profile.per_shell.push_back(shell);
    }

    profile.psi_fit.ratio_bound = ratio_bound;
    if (global_sigma == -1) {
        profile.violated = true;
        profile.violation = "signature defect varies across samples";
    }
    if (!(ratio_bound <= options.ratio_cap)) {
        profile.violated = true;
        if (!profile.violation.empty()) profile.violation += "; ";
        profile.violation += "eigenvalue ratio exceeds cap";
    }
    if (points.size() == N_list.size()) {
        const FitResult fit = loglog_fit(points);
        profile.psi_fit.beta = fit.slope;
        profile.psi_fit.stderr_beta = fit.stderr_slope;
        if (std::abs(fit.slope) <= options.uniform_tolerance && global_min > 0.0)
            profile.uniform_constant = std::sqrt(global_min * global_max);
    } else {
        profile.psi_fit.beta = std::numeric_limits<double>::quiet_NaN();
    }
    return profile;
}

namespace {

constexpr std::size_t kMaxHighSamples = 256;

std::vector<double> one_dim_shell(int N) {
    std::vector<double> out;
    for (int x = -2 * N + 1; x <= 2 * N - 1; ++x)
        if (std::abs(x) >= N) out.push_back(x);
    return out;
}

}  // namespace

TransversalityReport check_transversality(const PhaseFunction& phi, std::span<const int> K_list,
                                          std::span<const int> N_list, int sign) {
    require(phi.dimension() == 1, ErrorCode::DimensionUnsupported,
            "transversality is only measured in one dimension");
    require(sign == 1 || sign == -1, ErrorCode::InvalidArgument, "sign must be +1 or -1");
    require(!K_list.empty() && !N_list.empty(), ErrorCode::InvalidArgument, "empty scale list");

    auto derivative = [&phi](double x) {
        Vector v(1);
        v(0) = x;
        return (*evaluate_jets(phi, v, 1).gradient)(0);
    };

    TransversalityReport report;
    report.sign = sign;
    std::vector<FitPoint> points;
    for (int K : K_list) {
        require(K >= 1, ErrorCode::InvalidArgument, "K must be positive");
        std::vector<double> low_grad;
        for (double x : one_dim_shell(K)) low_grad.push_back(derivative(x));
        for (int N : N_list) {
            require(4 * K <= N, ErrorCode::InvalidArgument,
                    "transversality needs K <= N/4 (K=" + std::to_string(K) + ", N=" + std::to_string(N) + ")");
            const auto high = one_dim_shell(N);
            const std::size_t stride = (high.size() + kMaxHighSamples - 1) / kMaxHighSamples;
            TransversalitySample sample;
            sample.K = K;
            sample.N = N;
            sample.min_gap = std::numeric_limits<double>::infinity();
            double log_sum = 0.0;
            std::size_t count = 0;
            for (std::size_t j = 0; j < high.size(); j += stride) {
                const double g2 = derivative(high[j]);
                for (double g1 : low_grad) {
                    const double gap = std::abs(g1 + sign * g2);
                    sample.min_gap = std::min(sample.min_gap, gap);
                    sample.max_gap = std::max(sample.max_gap, gap);
                    log_sum += std::log(gap);
                    ++count;
                }
            }
            sample.typical_gap = std::exp(log_sum / static_cast<double>(count));
            sample.ratio = sample.max_gap / sample.min_gap;
            report.worst_ratio = std::max(report.worst_ratio, sample.ratio);
            points.push_back({std::log(static_cast<double>(N)), log_sum / static_cast<double>(count)});
            report.samples.push_back(sample);
        }
    }
    const FitResult fit = loglog_fit(points);
    report.alpha = fit.slope;
    report.stderr_alpha = fit.stderr_slope;
    return report;
}

ExponentBudget theoretical_exponent(int n, int k, double p, double beta) {
    require(n >= 1, ErrorCode::InvalidArgument, "dimension must be positive");
    require(k >= 0 && k < n && 2 * k <= n, ErrorCode::InvalidSignature,
            "signature defect k=" + std::to_string(k) + " invalid for n=" + std::to_string(n));
    require(p >= 2.0 && std::isfinite(p), ErrorCode::InvalidArgument, "exponent p must satisfy 2 <= p < inf");

    ExponentBudget budget;
    budget.n = n;
    budget.k = k;
    budget.p = p;
    budget.critical_p = 2.0 * (n + 2 - k) / static_cast<double>(n - k);

    auto endpoint_total = [&](double q) {
        const double base = 0.5 * n - (n + 2.0) / q;
        const double loss = beta < 0.0 ? -beta / q : 0.0;
        return base + loss;
    };
    budget.base_exponent = 0.5 * n - (n + 2.0) / p;
    budget.curvature_loss = beta < 0.0 ? -beta / p : 0.0;
    if (p >= budget.critical_p) {
        budget.total = budget.base_exponent + budget.curvature_loss;
        budget.theta = 1.0;
        budget.interpolated = false;
    } else {
        // 1/p = theta/p_c + (1 - theta)/2, the L^2 endpoint carrying exponent 0.
        budget.theta = (0.5 - 1.0 / p) / (0.5 - 1.0 / budget.critical_p);
        budget.total = budget.theta * endpoint_total(budget.critical_p);
        budget.interpolated = true;
    }
    return budget;
}

}  // namespace dlab
