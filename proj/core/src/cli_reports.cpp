#include "dlab/cli_reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "dlab/counterexample.hpp"
#include "dlab/error.hpp"
#include "dlab/exponents.hpp"
#include "dlab/nls.hpp"
#include "dlab/phase.hpp"

namespace dlab {
namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
    fail(ErrorCode::ConfigInvalid, "key '" + key + "': " + what);
}

// Typed view of one JSON object. Every key read is registered; finish()
// rejects whatever was not.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj_.is_object()) bad_key(path_.empty() ? "<root>" : path_, "must be an object");
    }

    std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        allowed_.insert(key);
        return obj_.contains(key);
    }

    const json& raw(const std::string& key) {
        if (!has(key)) bad_key(name(key), "is required");
        return obj_.at(key);
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) bad_key(name(key), "is required");
            return *fallback;
        }
        const json& v = obj_.at(key);
        if (!v.is_number()) bad_key(name(key), "must be a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) bad_key(name(key), "must be finite");
        return d;
    }

    std::optional<double> optional_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    long long integer(const std::string& key, std::optional<long long> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) bad_key(name(key), "is required");
            return *fallback;
        }
        const json& v = obj_.at(key);
        if (!v.is_number_integer()) bad_key(name(key), "must be an integer");
        return v.get<long long>();
    }

    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        // Documents built in code hold positive literals as signed integers.
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            bad_key(name(key), "must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) bad_key(name(key), "is required");
            return *fallback;
        }
        const json& v = obj_.at(key);
        if (!v.is_string()) bad_key(name(key), "must be a string");
        return v.get<std::string>();
    }

    std::vector<int> int_list(const std::string& key, std::optional<std::vector<int>> fallback = std::nullopt) {
        if (!has(key)) {
            if (!fallback) bad_key(name(key), "is required");
            return *fallback;
        }
        const json& v = obj_.at(key);
        if (!v.is_array()) bad_key(name(key), "must be an array of integers");
        std::vector<int> out;
        for (const json& e : v) {
            if (!e.is_number_integer()) bad_key(name(key), "must be an array of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }

    std::vector<double> number_list(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) bad_key(name(key), "must be an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) bad_key(name(key), "must be an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<std::string> string_list(const std::string& key, std::vector<std::string> fallback) {
        if (!has(key)) return fallback;
        const json& v = obj_.at(key);
        if (!v.is_array() || v.empty()) bad_key(name(key), "must be a nonempty array of strings");
        std::vector<std::string> out;
        for (const json& e : v) {
            if (!e.is_string()) bad_key(name(key), "must be a nonempty array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    Section child(const std::string& key) { return Section(raw(key), name(key)); }

    void finish() const {
        for (const auto& item : obj_.items())
            if (!allowed_.count(item.key())) bad_key(name(item.key()), "unknown key");
    }

private:
    const json& obj_;
    std::string path_;
    std::set<std::string> allowed_;
};

PhaseFunction read_phase(Section& root) {
    const json& spec = root.raw("phase");
    try {
        return PhaseFunction::from_json(spec);
    } catch (const Error& e) {
        fail(ErrorCode::ConfigInvalid, std::string("key 'phase': ") + e.what());
    }
}

Interval read_interval(Section& s, const std::string& key, Interval fallback) {
    if (!s.has(key)) return fallback;
    const auto values = s.number_list(key);
    if (values.size() != 2) bad_key(s.name(key), "must be [t0, t1]");
    if (!(values[1] > values[0])) bad_key(s.name(key), "must satisfy t1 > t0");
    return {values[0], values[1]};
}

double read_p(Section& s, std::optional<double> fallback = std::nullopt) {
    const double p = s.number("p", fallback);
    if (p < 2.0) bad_key(s.name("p"), "must be >= 2");
    return p;
}

double positive(Section& s, const std::string& key, double fallback) {
    const double v = s.number(key, fallback);
    if (!(v > 0.0)) bad_key(s.name(key), "must be positive");
    return v;
}

int read_sign(Section& s, const std::string& key, int fallback, bool allow_zero = false) {
    const long long v = s.integer(key, fallback);
    if (v != 1 && v != -1 && !(allow_zero && v == 0))
        bad_key(s.name(key), allow_zero ? "must be -1, 0 or 1" : "must be -1 or 1");
    return static_cast<int>(v);
}

std::vector<int> dyadic_list(Section& s, const std::string& key, std::size_t min_size,
                             std::optional<std::vector<int>> fallback = std::nullopt) {
    const auto list = s.int_list(key, std::move(fallback));
    if (list.size() < min_size) bad_key(s.name(key), "needs at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i] < 1 || (list[i] & (list[i] - 1)) != 0) bad_key(s.name(key), "entries must be powers of two");
        if (i > 0 && list[i] <= list[i - 1]) bad_key(s.name(key), "must be strictly increasing");
    }
    return list;
}

struct Check {
    std::string name;
    double measured = 0.0;
    double prediction = 0.0;
    double band = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

json to_json(const Check& c) {
    return {{"name", c.name},
            {"measured", c.measured},
            {"prediction", c.prediction},
            {"band", c.band},
            {"verdict", to_string(c.verdict)}};
}

Check banded(std::string name, double measured, double prediction, double band) {
    return {std::move(name), measured, prediction, band, judge(measured, prediction, band)};
}

// Pass/fail check expressed as measured <= limit.
Check at_most(std::string name, double measured, double limit) {
    return {std::move(name), measured, limit, 0.0, measured <= limit ? Verdict::pass : Verdict::fail};
}

void finalize(Report& report, const std::vector<Check>& checks) {
    json list = json::array();
    Verdict overall = checks.empty() ? Verdict::inconclusive : Verdict::pass;
    for (const Check& c : checks) {
        list.push_back(to_json(c));
        overall = worst(overall, c.verdict);
    }
    report.summary["checks"] = std::move(list);
    report.verdict = overall;
    report.summary["verdict"] = to_string(overall);
}

json fit_json(const FitResult& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"stderr", fit.stderr_slope},
            {"r_squared", fit.r_squared},
            {"points", fit.points.size()}};
}

json budget_json(const ExponentBudget& b) {
    return {{"n", b.n},
            {"k", b.k},
            {"p", b.p},
            {"critical_p", b.critical_p},
            {"base_exponent", b.base_exponent},
            {"curvature_loss", b.curvature_loss},
            {"total", b.total},
            {"interpolated", b.interpolated},
            {"theta", b.theta}};
}

// Curvature exponent of the built-in kinds: psi(N) = N^{a-2} or constant.
std::optional<double> known_beta(const PhaseFunction& phi) {
    if (phi.kind() == PhaseFunction::Kind::fractional) return phi.exponent() - 2.0;
    if (phi.kind() == PhaseFunction::Kind::quadratic) return 0.0;
    return std::nullopt;
}

int reference_sigma(const PhaseFunction& phi) {
    Vector xi = Vector::Zero(phi.dimension());
    xi(0) = 1.0;
    return hessian_spectrum(phi, xi).sigma;
}

Report start_report(const std::string& command, const std::string& id, const json& config) {
    Report report;
    report.command = command;
    report.summary = {{"schema", kReportSchema}, {"command", command}, {"config_id", id}, {"config", config}};
    return report;
}

// ---------------------------------------------------------------- analyze-phase

Report analyze_phase(Section& root, const std::string& id, std::uint64_t seed, const json& config) {
    const PhaseFunction phi = read_phase(root);
    const auto N_list = dyadic_list(root, "N_list", 3);
    const long long samples = root.integer("samples_per_shell", 64);
    if (samples < 1) bad_key("samples_per_shell", "must be positive");
    CurvatureOptions options;
    options.ratio_cap = positive(root, "ratio_cap", options.ratio_cap);
    options.uniform_tolerance = positive(root, "uniform_tolerance", options.uniform_tolerance);
    options.seed = seed;
    const double band = positive(root, "band", 0.05);
    std::optional<double> expected_beta = root.optional_number("expected_beta");
    if (!expected_beta) expected_beta = known_beta(phi);
    std::optional<long long> expected_sigma;
    if (root.has("expected_sigma")) expected_sigma = root.integer("expected_sigma");
    const std::optional<double> expected_constant = root.optional_number("expected_uniform_constant");
    const bool has_p = root.has("p");
    const double p = has_p ? read_p(root) : 0.0;

    struct TransversalityConfig {
        std::vector<int> K_list, N_list;
        int sign = -1;
        std::optional<double> expected_alpha;
        double band = 0.05;
    };
    std::optional<TransversalityConfig> tcfg;
    if (root.has("transversality")) {
        Section t = root.child("transversality");
        TransversalityConfig c;
        c.K_list = dyadic_list(t, "K_list", 1);
        c.N_list = dyadic_list(t, "N_list", 3);
        c.sign = read_sign(t, "sign", -1);
        c.expected_alpha = t.optional_number("expected_alpha");
        if (!c.expected_alpha) {
            if (phi.kind() == PhaseFunction::Kind::fractional) c.expected_alpha = phi.exponent() - 1.0;
            if (phi.kind() == PhaseFunction::Kind::quadratic) c.expected_alpha = 1.0;
        }
        c.band = positive(t, "band", 0.05);
        t.finish();
        tcfg = c;
    }
    root.finish();

    Report report = start_report("analyze-phase", id, config);
    report.summary["phase"] = phi.describe();
    const CurvatureProfile profile = fit_curvature_scale(phi, N_list, static_cast<int>(samples), options);

    int sigma = profile.per_shell.front().sigma;
    for (const ShellCurvature& shell : profile.per_shell)
        if (shell.sigma != sigma) sigma = -1;
    report.summary["curvature"] = {{"beta", profile.psi_fit.beta},
                                   {"stderr_beta", profile.psi_fit.stderr_beta},
                                   {"ratio_bound", profile.psi_fit.ratio_bound},
                                   {"sigma", sigma},
                                   {"uniform_constant", profile.uniform_constant ? json(*profile.uniform_constant)
                                                                                : json(nullptr)},
                                   {"violated", profile.violated},
                                   {"violation", profile.violation}};

    report.csv_header = {"config_id", "kind", "K", "N", "samples", "sigma", "min_value", "max_value", "typical_value"};
    report.plot_header = {"log_N", "log_geo_mean_abs_eig"};
    for (const ShellCurvature& shell : profile.per_shell) {
        report.csv_rows.push_back({id, std::string("curvature"), 0LL, static_cast<long long>(shell.N),
                                   static_cast<long long>(shell.samples), static_cast<long long>(shell.sigma),
                                   shell.min_abs_eig, shell.max_abs_eig, std::exp(shell.log_geo_mean)});
        report.plot_rows.push_back({std::log(static_cast<double>(shell.N)), shell.log_geo_mean});
    }

    std::vector<Check> checks;
    checks.push_back({"curvature_condition", profile.violated ? 1.0 : 0.0, 0.0, 0.0,
                      profile.violated ? Verdict::fail : Verdict::pass});
    if (expected_beta) checks.push_back(banded("psi_beta", profile.psi_fit.beta, *expected_beta, band));
    if (expected_sigma) {
        const bool ok = sigma == *expected_sigma;
        checks.push_back({"sigma", static_cast<double>(sigma), static_cast<double>(*expected_sigma), 0.0,
                          ok ? Verdict::pass : Verdict::fail});
    }
    if (expected_constant) {
        const double measured = profile.uniform_constant.value_or(std::nan(""));
        const bool ok = profile.uniform_constant && std::abs(measured - *expected_constant) <= 1e-12 * *expected_constant;
        checks.push_back({"uniform_constant", measured, *expected_constant, 0.0, ok ? Verdict::pass : Verdict::fail});
    }

    if (tcfg) {
        const TransversalityReport tr = check_transversality(phi, tcfg->K_list, tcfg->N_list, tcfg->sign);
        json samples_json = json::array();
        for (const TransversalitySample& s : tr.samples) {
            report.csv_rows.push_back({id, std::string("transversality"), static_cast<long long>(s.K),
                                       static_cast<long long>(s.N), 0LL, 0LL, s.min_gap, s.max_gap, s.typical_gap});
            samples_json.push_back({{"K", s.K}, {"N", s.N}, {"min_gap", s.min_gap}, {"max_gap", s.max_gap},
                                    {"typical_gap", s.typical_gap}, {"ratio", s.ratio}});
        }
        report.summary["transversality"] = {{"alpha", tr.alpha},
                                            {"stderr_alpha", tr.stderr_alpha},
                                            {"sign", tr.sign},
                                            {"worst_ratio", tr.worst_ratio},
                                            {"samples", samples_json}};
        if (tcfg->expected_alpha) checks.push_back(banded("transversality_alpha", tr.alpha, *tcfg->expected_alpha, tcfg->band));
    }

    if (has_p && sigma >= 0 && std::isfinite(profile.psi_fit.beta)) {
        const double beta = std::min(0.0, expected_beta.value_or(profile.psi_fit.beta));
        report.summary["exponent_budget"] = budget_json(theoretical_exponent(phi.dimension(), sigma, p, beta));
    }
    finalize(report, checks);
    return report;
}

// ---------------------------------------------------------------- strichartz

ExtremizerOptions read_extremizer(Section& root, std::uint64_t seed) {
    ExtremizerOptions options;
    options.seed = seed;
    if (!root.has("extremizer")) return options;
    Section e = root.child("extremizer");
    options.restarts = static_cast<int>(e.integer("restarts", options.restarts));
    options.max_iterations = static_cast<int>(e.integer("max_iterations", options.max_iterations));
    options.objective_rel_tol = positive(e, "rel_tol", options.objective_rel_tol);
    if (options.restarts < 1) bad_key(e.name("restarts"), "must be positive");
    if (options.max_iterations < 1) bad_key(e.name("max_iterations"), "must be positive");
    e.finish();
    return options;
}

std::vector<CsvCell> sweep_row(const std::string& id, const std::string& label, const SweepPoint& pt, double p,
                               bool in_K) {
    const double x = std::log(static_cast<double>(in_K ? pt.K : pt.N));
    return {id,
            label,
            static_cast<long long>(pt.N),
            static_cast<long long>(pt.K),
            p,
            pt.norm,
            pt.data_l2,
            pt.normalized,
            x,
            std::log(pt.normalized),
            pt.est_rel_error,
            static_cast<long long>(pt.time_nodes),
            static_cast<long long>(pt.spatial_M)};
}

const std::vector<std::string> kSweepHeader = {"config_id", "series",  "N",       "K",
                                               "p",         "norm",    "data_l2", "normalized",
                                               "log_x",     "log_normalized", "est_rel_error", "time_nodes",
                                               "spatial_M"};

json sweep_json(const SweepResult& sweep) {
    json out = {{"partial", sweep.partial}, {"error", sweep.error}, {"points", sweep.points.size()}};
    out["fit"] = sweep.fit ? fit_json(*sweep.fit) : json(nullptr);
    return out;
}

Report strichartz(Section& root, const std::string& id, std::uint64_t seed, const json& config,
                  const Executor& executor) {
    SweepConfig cfg;
    cfg.phi = read_phase(root);
    cfg.p = read_p(root);
    cfg.interval = read_interval(root, "interval", Interval{0.0, 1.0});
    cfg.N_list = dyadic_list(root, "N_list", 3);
    cfg.rel_tol = positive(root, "rel_tol", cfg.rel_tol);
    cfg.node_cap = static_cast<std::size_t>(root.unsigned_integer("node_cap", cfg.node_cap));
    std::vector<DataFamily> families;
    for (const std::string& name : root.string_list("families", {"flat_annulus"})) {
        try {
            families.push_back(data_family_from_string(name));
        } catch (const Error&) {
            bad_key("families", "unknown data family '" + name + "'");
        }
    }
    cfg.data.seed = seed;
    cfg.data.density = root.number("density", 1.0);
    if (!(cfg.data.density > 0.0 && cfg.data.density <= 1.0)) bad_key("density", "must lie in (0, 1]");
    cfg.data.extremizer = read_extremizer(root, seed);
    const double band = positive(root, "band", 0.1);
    const double upper_slack = positive(root, "upper_slack", 0.15);
    std::optional<double> prediction = root.optional_number("prediction");
    const bool needs_even = std::find(families.begin(), families.end(), DataFamily::extremized) != families.end();
    if (needs_even && !(cfg.p == std::round(cfg.p) && static_cast<int>(cfg.p) % 2 == 0))
        bad_key("families", "extremized data need an even p");
    root.finish();

    Report report = start_report("strichartz", id, config);
    report.summary["phase"] = cfg.phi.describe();
    const std::optional<double> beta = known_beta(cfg.phi);
    if (beta) {
        const ExponentBudget budget = theoretical_exponent(cfg.phi.dimension(), reference_sigma(cfg.phi), cfg.p, *beta);
        report.summary["exponent_budget"] = budget_json(budget);
        if (!prediction) prediction = budget.total;
    }
    if (!prediction) bad_key("prediction", "is required for custom phases");
    report.summary["prediction"] = *prediction;

    report.csv_header = kSweepHeader;
    report.plot_header = {"series", "log_N", "log_normalized"};
    json per_family = json::object();
    std::vector<Check> checks;
    for (std::size_t f = 0; f < families.size(); ++f) {
        cfg.data.family = families[f];
        const std::string label = to_string(families[f]);
        const SweepResult sweep = linear_strichartz_sweep(cfg, executor);
        for (const SweepPoint& pt : sweep.points) {
            report.csv_rows.push_back(sweep_row(id, label, pt, cfg.p, false));
            report.plot_rows.push_back({static_cast<double>(f), std::log(static_cast<double>(pt.N)), std::log(pt.normalized)});
        }
        per_family[label] = sweep_json(sweep);
        if (sweep.fit) {
            checks.push_back(banded("slope_" + label, sweep.fit->slope, *prediction, band));
            checks.push_back(at_most("upper_bound_" + label, sweep.fit->slope, *prediction + upper_slack));
        } else {
            checks.push_back({"slope_" + label, std::nan(""), *prediction, band, Verdict::inconclusive});
        }
    }
    report.summary["families"] = per_family;
    finalize(report, checks);
    return report;
}

// ---------------------------------------------------------------- bilinear

Report bilinear(Section& root, const std::string& id, std::uint64_t seed, const json& config,
                const Executor& executor) {
    SweepConfig cfg;
    cfg.phi = read_phase(root);
    cfg.interval = read_interval(root, "interval", Interval{0.0, 1.0});
    cfg.N_list = dyadic_list(root, "N_list", 1);
    if (root.has("K")) {
        const long long K = root.integer("K");
        if (K < 1 || (K & (K - 1)) != 0) bad_key("K", "must be a power of two");
        cfg.K = static_cast<int>(K);
    }
    if (root.has("K_list")) cfg.K_list = dyadic_list(root, "K_list", 3);
    if (!cfg.K && cfg.K_list.empty()) bad_key("K", "either 'K' or 'K_list' is required");
    if (cfg.K && cfg.N_list.size() < 3) bad_key("N_list", "needs at least 3 entries for an N-sweep");
    if (root.has("signs")) {
        const auto signs = root.int_list("signs");
        if (signs.size() != 2 || std::abs(signs[0]) != 1 || std::abs(signs[1]) != 1)
            bad_key("signs", "must be two entries from {-1, 1}");
        cfg.signs = {signs[0], signs[1]};
    }
    try {
        cfg.data.family = data_family_from_string(root.string("family", "flat_annulus"));
    } catch (const Error& e) {
        bad_key("family", e.what());
    }
    cfg.data.seed = seed;
    cfg.data.density = root.number("density", 1.0);
    if (!(cfg.data.density > 0.0 && cfg.data.density <= 1.0)) bad_key("density", "must lie in (0, 1]");
    cfg.data.extremizer = read_extremizer(root, seed);
    cfg.rel_tol = positive(root, "rel_tol", cfg.rel_tol);
    cfg.node_cap = static_cast<std::size_t>(root.unsigned_integer("node_cap", cfg.node_cap));
    const double band_N = positive(root, "band_N", 0.1);
    const double band_K = positive(root, "band_K", 0.15);
    const double prediction_N = root.number("prediction_N", 0.0);
    std::optional<double> prediction_K = root.optional_number("prediction_K");
    if (!prediction_K && cfg.phi.kind() == PhaseFunction::Kind::fractional && cfg.phi.exponent() < 1.0)
        prediction_K = (1.0 - cfg.phi.exponent()) / 2.0;

    struct PartitionConfig {
        int N = 0, K = 0;
        std::vector<double> fractions;
        Interval interval;
        double rel_tol = 1e-10;
        double tolerance = 1e-6;
    };
    std::optional<PartitionConfig> pcfg;
    if (root.has("partition")) {
        Section s = root.child("partition");
        PartitionConfig c;
        c.N = static_cast<int>(s.integer("N"));
        c.K = static_cast<int>(s.integer("K"));
        if (c.N < 1 || c.K < 1) bad_key(s.name("N"), "N and K must be positive");
        if (s.has("parts") == s.has("fractions")) bad_key(s.name("parts"), "give exactly one of 'parts' and 'fractions'");
        if (s.has("parts")) {
            const long long J = s.integer("parts");
            if (J < 2) bad_key(s.name("parts"), "must be at least 2");
            c.fractions = equal_fractions(static_cast<int>(J));
        } else {
            c.fractions = s.number_list("fractions");
            if (c.fractions.size() < 2) bad_key(s.name("fractions"), "needs at least 2 parts");
        }
        c.interval = read_interval(s, "interval", cfg.interval);
        c.rel_tol = positive(s, "rel_tol", c.rel_tol);
        c.tolerance = positive(s, "tolerance", c.tolerance);
        s.finish();
        pcfg = c;
    }
    root.finish();

    Report report = start_report("bilinear", id, config);
    report.summary["phase"] = cfg.phi.describe();
    report.csv_header = kSweepHeader;
    report.plot_header = {"series", "log_x", "log_normalized"};
    std::vector<Check> checks;
    const BilinearSweepResult result = bilinear_sweep(cfg, executor);
    if (result.in_N) {
        for (const SweepPoint& pt : result.in_N->points) {
            report.csv_rows.push_back(sweep_row(id, "in_N", pt, 2.0, false));
            report.plot_rows.push_back({0.0, std::log(static_cast<double>(pt.N)), std::log(pt.normalized)});
        }
        report.summary["in_N"] = sweep_json(*result.in_N);
        report.summary["prediction_N"] = prediction_N;
        if (result.in_N->fit) checks.push_back(banded("slope_in_N", result.in_N->fit->slope, prediction_N, band_N));
        else checks.push_back({"slope_in_N", std::nan(""), prediction_N, band_N, Verdict::inconclusive});
    }
    if (result.in_K) {
        for (const SweepPoint& pt : result.in_K->points) {
            report.csv_rows.push_back(sweep_row(id, "in_K", pt, 2.0, true));
            report.plot_rows.push_back({1.0, std::log(static_cast<double>(pt.K)), std::log(pt.normalized)});
        }
        report.summary["in_K"] = sweep_json(*result.in_K);
        report.summary["prediction_K"] = prediction_K ? json(*prediction_K) : json(nullptr);
        if (prediction_K) {
            if (result.in_K->fit) checks.push_back(banded("slope_in_K", result.in_K->fit->slope, *prediction_K, band_K));
            else checks.push_back({"slope_in_K", std::nan(""), *prediction_K, band_K, Verdict::inconclusive});
        }
    }
    if (pcfg) {
        BilinearSpec spec;
        spec.interval = pcfg->interval;
        spec.signs = cfg.signs;
        spec.rel_tol = pcfg->rel_tol;
        spec.node_cap = cfg.node_cap;
        const SpectralState high = make_annulus_data(cfg.data, cfg.phi, pcfg->N, 4.0, spec.interval, 0, executor);
        const SpectralState low = make_annulus_data(cfg.data, cfg.phi, pcfg->K, 4.0, spec.interval, 1, executor);
        const PartitionCheck check = interval_partition_check(high, low, cfg.phi, spec, pcfg->fractions, executor);
        report.summary["partition"] = {{"lhs", check.lhs},
                                       {"rhs", check.rhs},
                                       {"max_rel_dev", check.max_rel_dev},
                                       {"parts", check.parts.size()}};
        checks.push_back(at_most("partition_additivity", check.max_rel_dev, pcfg->tolerance));
    }
    finalize(report, checks);
    return report;
}

// ---------------------------------------------------------------- extremize

FrequencyBand read_band(Section& root, int dimension) {
    Section b = root.child("band");
    const std::string kind = b.string("kind");
    FrequencyBand band;
    if (kind == "dyadic") {
        const long long N = b.integer("N");
        if (N < 0) bad_key(b.name("N"), "must be nonnegative");
        band = DyadicBand{static_cast<int>(N)};
    } else if (kind == "cube") {
        CubeBand cube;
        cube.center = b.int_list("center");
        if (static_cast<int>(cube.center.size()) != dimension) bad_key(b.name("center"), "has the wrong dimension");
        const long long side = b.integer("side");
        if (side < 0) bad_key(b.name("side"), "must be nonnegative");
        cube.side = static_cast<int>(side);
        band = cube;
    } else {
        bad_key(b.name("kind"), "must be 'dyadic' or 'cube'");
    }
    b.finish();
    return band;
}

Report extremize(Section& root, const std::string& id, std::uint64_t seed, const json& config,
                 const Executor& executor) {
    const PhaseFunction phi = read_phase(root);
    const double p = read_p(root);
    if (p != std::round(p) || static_cast<int>(p) % 2 != 0) bad_key("p", "must be an even integer");
    const FrequencyBand band = read_band(root, phi.dimension());
    const Interval interval = read_interval(root, "interval", Interval{0.0, 1.0});
    ExtremizerOptions options;
    options.seed = seed;
    options.restarts = static_cast<int>(root.integer("restarts", options.restarts));
    options.max_iterations = static_cast<int>(root.integer("max_iterations", options.max_iterations));
    options.objective_rel_tol = positive(root, "rel_tol", options.objective_rel_tol);
    if (options.restarts < 1) bad_key("restarts", "must be positive");
    if (options.max_iterations < 1) bad_key("max_iterations", "must be positive");
    if (root.has("initial")) {
        try {
            options.initial = SpectralState::from_json(root.raw("initial"));
        } catch (const Error& e) {
            bad_key("initial", e.what());
        }
    }
    root.finish();

    const ExtremizerResult result =
        extremizer_search(phi, static_cast<int>(p), band, phi.dimension(), interval, options, executor);
    Report report = start_report("extremize", id, config);
    report.summary["phase"] = phi.describe();
    report.summary["result"] = {{"quotient", result.quotient},
                                {"objective", result.objective},
                                {"flat_quotient", result.flat_quotient},
                                {"below_flat", result.below_flat},
                                {"iterations", result.iterations},
                                {"converged", result.converged},
                                {"restarts_used", result.restarts_used},
                                {"support_size", result.data.nonzero_count()}};
    report.csv_header = {"config_id", "iteration", "objective", "quotient"};
    report.plot_header = {"iteration", "log_objective"};
    report.csv_rows.push_back({id, 0LL, std::pow(result.flat_quotient, p), result.flat_quotient});
    for (std::size_t k = 0; k < result.history.size(); ++k) {
        const double F = result.history[k];
        report.csv_rows.push_back({id, static_cast<long long>(k + 1), F, std::pow(F, 1.0 / p)});
        report.plot_rows.push_back({static_cast<double>(k + 1), std::log(F)});
    }
    if (result.history.empty())
        report.csv_rows.push_back({id, static_cast<long long>(result.iterations), result.objective, result.quotient});
    report.state = result.data.to_json();

    std::vector<Check> checks;
    checks.push_back({"not_below_flat", result.quotient, result.flat_quotient, 0.0,
                      result.below_flat ? Verdict::fail : Verdict::pass});
    checks.push_back({"converged", result.converged ? 1.0 : 0.0, 1.0, 0.0,
                      result.converged ? Verdict::pass : Verdict::inconclusive});
    finalize(report, checks);
    return report;
}

// ---------------------------------------------------------------- counterexample

Report counterexample(Section& root, const std::string& id, const json& config) {
    CounterexampleVariant variant{};
    try {
        variant = counterexample_variant_from_string(root.string("variant"));
    } catch (const Error& e) {
        bad_key("variant", e.what());
    }
    const double s = root.number("s", 0.0);
    if (s < 0.0) bad_key("s", "must be nonnegative");
    const double T = positive(root, "T", 1.0);
    const auto N_list = root.int_list("N_list");
    if (N_list.size() < 3) bad_key("N_list", "needs at least 3 entries");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1) bad_key("N_list", "entries must be positive");
        if (i > 0 && N_list[i] <= N_list[i - 1]) bad_key("N_list", "must be strictly increasing");
    }
    const double band = positive(root, "band", 0.1);
    const double ratio_spread = positive(root, "ratio_spread", 2.0);
    root.finish();

    const PhaseFunction phi = matching_phase(variant);
    const int d = growth_exponent(variant);
    struct Row {
        int N;
        PicardBound bound;
        double deviation;
    };
    std::vector<Row> rows;
    std::vector<FitPoint> points;
    for (int N : N_list) {
        const CounterexampleData data = build_counterexample(variant, N);
        const double deviation = verify_stationarity(data, phi);
        const PicardBound bound = picard_lower_bound(data, phi, s, T);
        rows.push_back({N, bound, deviation});
        points.push_back({std::log(static_cast<double>(N)), std::log(bound.hs_of_cubic)});
    }
    const FitResult fit = loglog_fit(points);

    Report report = start_report("counterexample", id, config);
    report.csv_header = {"config_id", "variant", "N", "s", "hs_norm", "cubic_hs_norm", "ratio", "fitted_exponent",
                         "stationarity_deviation"};
    report.plot_header = {"log_N", "log_cubic_hs_norm"};
    double ratio_min = rows.front().bound.ratio;
    double ratio_max = ratio_min;
    double deviation_max = 0.0;
    for (const Row& r : rows) {
        report.csv_rows.push_back({id, to_string(variant), static_cast<long long>(r.N), s, r.bound.hs_norm,
                                   r.bound.hs_of_cubic, r.bound.ratio, fit.slope, r.deviation});
        report.plot_rows.push_back({std::log(static_cast<double>(r.N)), std::log(r.bound.hs_of_cubic)});
        ratio_min = std::min(ratio_min, r.bound.ratio);
        ratio_max = std::max(ratio_max, r.bound.ratio);
        deviation_max = std::max(deviation_max, r.deviation);
    }
    report.summary["variant"] = to_string(variant);
    report.summary["growth_exponent"] = d;
    report.summary["threshold_s"] = threshold_table(variant);
    report.summary["fit"] = fit_json(fit);
    report.summary["ratio_min"] = ratio_min;
    report.summary["ratio_max"] = ratio_max;

    std::vector<Check> checks;
    checks.push_back(banded("picard_exponent", fit.slope, d + s, band));
    checks.push_back(at_most("ratio_spread", ratio_max / ratio_min, ratio_spread));
    checks.push_back(at_most("stationarity", deviation_max, 1e-12));
    finalize(report, checks);
    return report;
}

// ---------------------------------------------------------------- nls-probe

Report nls_probe(Section& root, const std::string& id, const json& config, const Executor& executor) {
    const PhaseFunction phi = read_phase(root);
    const double s = root.number("s");
    if (s < 0.0) bad_key("s", "must be nonnegative");
    const auto N_list = root.int_list("N_list");
    if (N_list.size() < 2) bad_key("N_list", "needs at least 2 entries");
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] < 1) bad_key("N_list", "entries must be positive");
        if (i > 0 && N_list[i] <= N_list[i - 1]) bad_key("N_list", "must be strictly increasing");
    }
    const double epsilon = root.number("epsilon", 0.01);
    if (!(epsilon > 0.0 && epsilon < 0.5)) bad_key("epsilon", "must lie in (0, 0.5)");
    const double T = positive(root, "T", 1.0);
    ProbeOptions options;
    options.dt = positive(root, "dt", options.dt);
    options.sign = read_sign(root, "sign", 1, true);
    options.families.clear();
    for (const std::string& name : root.string_list("families", {"wang"})) {
        try {
            options.families.push_back(probe_family_from_string(name));
        } catch (const Error& e) {
            bad_key("families", e.what());
        }
    }
    options.box_factor = static_cast<int>(root.integer("box_factor", options.box_factor));
    if (options.box_factor < 1) bad_key("box_factor", "must be at least 1");
    try {
        options.dealias = dealias_from_string(root.string("dealias", "alias_free_cubic"));
    } catch (const Error& e) {
        bad_key("dealias", e.what());
    }
    std::string expect = root.string("expect", "auto");
    if (expect != "auto" && expect != "growth" && expect != "bounded" && expect != "isometry" && expect != "none")
        bad_key("expect", "must be one of auto, growth, bounded, isometry, none");
    const double bounded_factor = positive(root, "bounded_factor", 4.0);
    root.finish();

    if (expect == "auto") {
        expect = "none";
        if (options.sign == 0) {
            expect = "isometry";
        } else if (phi.dimension() == 2 || phi.dimension() == 4) {
            const double threshold = threshold_table(phi.dimension() == 2 ? CounterexampleVariant::hyperbolic_2d
                                                                          : CounterexampleVariant::hyperbolic_4d);
            if (s < threshold) expect = "growth";
            if (s > threshold) expect = "bounded";
        }
    }

    const auto rows = wellposedness_probe(phi, s, N_list, epsilon, T, options, executor);
    Report report = start_report("nls-probe", id, config);
    report.summary["phase"] = phi.describe();
    report.summary["expect"] = expect;
    report.csv_header = {"config_id", "N", "s", "family", "epsilon", "modulus", "overflow_flag"};
    report.plot_header = {"family", "log_N", "log_modulus"};
    std::vector<Check> checks;
    for (ProbeFamily family : options.families) {
        std::vector<double> moduli;
        bool overflow = false;
        for (const ProbeRow& row : rows) {
            if (row.family != family) continue;
            report.csv_rows.push_back({id, static_cast<long long>(row.N), row.s, to_string(row.family), row.epsilon,
                                       row.modulus, static_cast<long long>(row.overflow ? 1 : 0)});
            report.plot_rows.push_back({static_cast<double>(family == ProbeFamily::wang),
                                        std::log(static_cast<double>(row.N)), std::log(row.modulus)});
            moduli.push_back(row.modulus);
            overflow = overflow || row.overflow;
        }
        const std::string label = to_string(family);
        const auto [lo, hi] = std::minmax_element(moduli.begin(), moduli.end());
        if (overflow) {
            checks.push_back({"overflow_" + label, 1.0, 0.0, 0.0, Verdict::inconclusive});
        } else if (expect == "growth") {
            bool increasing = true;
            for (std::size_t i = 1; i < moduli.size(); ++i) increasing = increasing && moduli[i] > moduli[i - 1];
            checks.push_back({"growth_" + label, moduli.back() / moduli.front(), 1.0, 0.0,
                              increasing ? Verdict::pass : Verdict::fail});
        } else if (expect == "bounded") {
            checks.push_back(at_most("bounded_" + label, *hi / *lo, bounded_factor));
        } else if (expect == "isometry") {
            double worst_dev = 0.0;
            for (double m : moduli) worst_dev = std::max(worst_dev, std::abs(m - 1.0));
            checks.push_back(at_most("isometry_" + label, worst_dev, 1e-10));
        }
    }
    finalize(report, checks);
    return report;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::IoFailure, "failed writing " + path.string());
}

}  // namespace

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::pass: return "PASS";
        case Verdict::inconclusive: return "INCONCLUSIVE";
        case Verdict::fail: return "FAIL";
    }
    return "INCONCLUSIVE";
}

Verdict judge(double measured, double prediction, double band) {
    const double deviation = std::abs(measured - prediction);
    if (!std::isfinite(deviation)) return Verdict::inconclusive;
    if (deviation <= band) return Verdict::pass;
    if (deviation > 2.0 * band) return Verdict::fail;
    return Verdict::inconclusive;
}

Verdict worst(Verdict a, Verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

const std::vector<std::string>& known_commands() {
    static const std::vector<std::string> commands = {"analyze-phase", "strichartz",     "bilinear",
                                                      "extremize",     "counterexample", "nls-probe"};
    return commands;
}

Report run_experiment(const std::string& command, const json& config, const RunOptions& options) {
    const auto& commands = known_commands();
    require(std::find(commands.begin(), commands.end(), command) != commands.end(), ErrorCode::ConfigInvalid,
            "unknown command '" + command + "'");
    Section root(config, "");
    const std::string schema = root.string("schema");
    if (schema != kConfigSchema) bad_key("schema", "must be \"" + std::string(kConfigSchema) + "\"");
    const std::string declared = root.string("command", command);
    if (declared != command) bad_key("command", "config is for '" + declared + "', not '" + command + "'");
    const std::string id = root.string("id", command);
    std::uint64_t seed = root.unsigned_integer("seed", 1);
    if (options.seed) seed = *options.seed;

    json echoed = config;
    echoed["seed"] = seed;
    const Executor executor(std::max(1u, options.threads));

    if (command == "analyze-phase") return analyze_phase(root, id, seed, echoed);
    if (command == "strichartz") return strichartz(root, id, seed, echoed, executor);
    if (command == "bilinear") return bilinear(root, id, seed, echoed, executor);
    if (command == "extremize") return extremize(root, id, seed, echoed, executor);
    if (command == "counterexample") return counterexample(root, id, echoed);
    return nls_probe(root, id, echoed, executor);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string render_csv(const Report& report) {
    std::string out;
    for (std::size_t i = 0; i < report.csv_header.size(); ++i)
        out += (i ? "," : "") + csv_escape(report.csv_header[i]);
    out += '\n';
    for (const auto& row : report.csv_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::visit(
                [&out](const auto& cell) {
                    using T = std::decay_t<decltype(cell)>;
                    if constexpr (std::is_same_v<T, std::string>) out += csv_escape(cell);
                    else if constexpr (std::is_same_v<T, double>) out += format_double(cell);
                    else out += std::to_string(cell);
                },
                row[i]);
        }
        out += '\n';
    }
    return out;
}

std::string render_plot(const Report& report) {
    std::string out = "#";
    for (std::size_t i = 0; i < report.plot_header.size(); ++i) out += (i ? "\t" : "") + report.plot_header[i];
    out += '\n';
    for (const auto& row : report.plot_rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "\t" : "") + format_double(row[i]);
        out += '\n';
    }
    return out;
}

std::string render_json(const json& doc) { return doc.dump(2) + "\n"; }

void emit_report(const Report& report, const std::filesystem::path& out_dir) {
    require(!report.csv_rows.empty(), ErrorCode::IoFailure, "refusing to write a report without result rows");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot create output directory " + out_dir.string() + ": " + ec.message());
    write_file(out_dir / "report.json", render_json(report.summary));
    write_file(out_dir / "data.csv", render_csv(report));
    if (!report.plot_rows.empty()) write_file(out_dir / "plotdata.tsv", render_plot(report));
    if (report.state) write_file(out_dir / "state.json", render_json(*report.state));
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot read config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        fail(ErrorCode::ConfigInvalid, "config " + path.string() + " is not valid JSON: " + e.what());
    }
}

int run_config(const std::string& command, const std::filesystem::path& config_path,
               const std::filesystem::path& out_dir, const RunOptions& options) {
    try {
        const Report report = run_experiment(command, load_config(config_path), options);
        emit_report(report, out_dir);
        std::cout << command << ": " << to_string(report.verdict) << '\n';
        return report.verdict == Verdict::fail ? 1 : 0;
    } catch (const Error& e) {
        std::cerr << "dlab: " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "dlab: internal error: " << e.what() << '\n';
    }
    return 2;
}

}  // namespace dlab
