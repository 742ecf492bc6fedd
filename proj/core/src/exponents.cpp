#include "dlab/exponents.hpp"

#include <algorithm>
#include <cmath>

#include "dlab/error.hpp"
#include "dlab/random.hpp"

namespace dlab {
namespace {

bool is_dyadic(int N) { return N >= 1 && (N & (N - 1)) == 0; }

void check_scale_list(const std::vector<int>& list, const std::string& name) {
    for (std::size_t i = 0; i < list.size(); ++i) {
        require(is_dyadic(list[i]), ErrorCode::InvalidArgument,
                name + " entry " + std::to_string(list[i]) + " is not a power of two");
        require(i == 0 || list[i] > list[i - 1], ErrorCode::InvalidArgument, name + " must be strictly increasing");
    }
}

std::optional<FitResult> fit_points(const std::vector<SweepPoint>& points, bool in_K) {
    if (points.size() < 3) return std::nullopt;
    std::vector<FitPoint> fp;
    for (const SweepPoint& pt : points)
        fp.push_back({std::log(static_cast<double>(in_K ? pt.K : pt.N)), std::log(pt.normalized)});
    return loglog_fit(fp);
}

}  // namespace

std::string to_string(DataFamily family) {
    switch (family) {
        case DataFamily::flat_annulus: return "flat_annulus";
        case DataFamily::random_phase: return "random_phase";
        case DataFamily::random_sparse: return "random_sparse";
        case DataFamily::extremized: return "extremized";
    }
    return "unknown";
}

DataFamily data_family_from_string(const std::string& name) {
    for (DataFamily f : {DataFamily::flat_annulus, DataFamily::random_phase, DataFamily::random_sparse,
                         DataFamily::extremized})
        if (to_string(f) == name) return f;
    fail(ErrorCode::ConfigInvalid, "unknown data family '" + name + "'");
}

SpectralState make_annulus_data(const DataSpec& spec, const PhaseFunction& phi, int N, double p,
                                const Interval& interval, std::uint64_t stream, const Executor& executor) {
    require(N >= 1, ErrorCode::InvalidArgument, "annulus scale must be positive");
    const int n = phi.dimension();
    if (spec.family == DataFamily::extremized) {
        require(p == std::round(p) && static_cast<int>(p) % 2 == 0, ErrorCode::InvalidArgument,
                "extremized data need an even p");
        ExtremizerOptions options = spec.extremizer;
        options.seed = derive_seed(derive_seed(spec.seed, stream), static_cast<std::uint64_t>(N));
        return extremizer_search(phi, static_cast<int>(p), DyadicBand{N}, n, interval, options, executor).data;
    }
    require(spec.density > 0.0 && spec.density <= 1.0, ErrorCode::InvalidArgument, "density must lie in (0, 1]");

    SpectralState state(n, 2 * N - 1);
    Rng rng(derive_seed(derive_seed(spec.seed, stream), static_cast<std::uint64_t>(N)));
    const DyadicBand band{N};
    std::vector<int> xi(static_cast<std::size_t>(n));
    auto coeffs = state.coefficients();
    std::size_t first = coeffs.size();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        state.lattice_point(i, xi);
        if (!in_band(band, xi)) continue;
        if (first == coeffs.size()) first = i;
        switch (spec.family) {
            case DataFamily::flat_annulus: coeffs[i] = 1.0; break;
            case DataFamily::random_phase: coeffs[i] = std::polar(1.0, rng.phase()); break;
            case DataFamily::random_sparse: {
                const double keep = rng.uniform();
                const double theta = rng.phase();
                if (keep < spec.density) coeffs[i] = std::polar(1.0, theta);
                break;
            }
            case DataFamily::extremized: break;
        }
    }
    require(first < coeffs.size(), ErrorCode::EmptyShell, "annulus N=" + std::to_string(N) + " has no lattice points");
    if (state.is_zero()) coeffs[first] = 1.0;  // sparse draw kept nothing
    return state;
}

SweepResult linear_strichartz_sweep(const SweepConfig& cfg, const Executor& executor) {
    require(!cfg.K.has_value() && cfg.K_list.empty(), ErrorCode::InvalidArgument, "linear sweeps take no K");
    check_scale_list(cfg.N_list, "N_list");
    require(cfg.N_list.size() >= 3, ErrorCode::InvalidArgument, "N_list needs at least 3 scales");

    NormSpec spec;
    spec.p = cfg.p;
    spec.interval = cfg.interval;
    spec.rel_tol = cfg.rel_tol;
    spec.node_cap = cfg.node_cap;

    SweepResult result;
    for (int N : cfg.N_list) {
        try {
            const SpectralState data = make_annulus_data(cfg.data, cfg.phi, N, cfg.p, cfg.interval, 0, executor);
            const QuadratureResult q = spacetime_lp_norm(data, cfg.phi, spec, executor);
            SweepPoint pt;
            pt.N = N;
            pt.norm = q.value;
            pt.data_l2 = data.l2_norm();
            pt.normalized = q.value / pt.data_l2;
            pt.est_rel_error = q.est_rel_error;
            pt.time_nodes = q.time_nodes_used;
            pt.spatial_M = q.spatial_M;
            result.points.push_back(pt);
        } catch (const Error& e) {
            result.partial = true;
            result.error = e.what();
            break;
        }
    }
    result.fit = fit_points(result.points, false);
    return result;
}

BilinearSweepResult bilinear_sweep(const SweepConfig& cfg, const Executor& executor) {
    check_scale_list(cfg.N_list, "N_list");
    check_scale_list(cfg.K_list, "K_list");
    require(!cfg.N_list.empty(), ErrorCode::InvalidArgument, "N_list must not be empty");
    require(cfg.K.has_value() || !cfg.K_list.empty(), ErrorCode::InvalidArgument, "bilinear sweeps need K or K_list");
    if (cfg.K) {
        require(is_dyadic(*cfg.K), ErrorCode::InvalidArgument, "K must be a power of two");
        for (int N : cfg.N_list)
            require(4 * *cfg.K <= N, ErrorCode::InvalidArgument, "bilinear sweeps need K <= N/4");
    }
    const int N_max = cfg.N_list.back();
    for (int K : cfg.K_list) require(4 * K <= N_max, ErrorCode::InvalidArgument, "bilinear sweeps need K <= N/4");

    BilinearSpec spec;
    spec.interval = cfg.interval;
    spec.signs = cfg.signs;
    spec.rel_tol = cfg.rel_tol;
    spec.node_cap = cfg.node_cap;

    // High-frequency factor draws from stream 0, low-frequency from stream 1.
    auto measure = [&](int N, int K, SweepResult& out) {
        try {
            const SpectralState high = make_annulus_data(cfg.data, cfg.phi, N, 4.0, cfg.interval, 0, executor);
            const SpectralState low = make_annulus_data(cfg.data, cfg.phi, K, 4.0, cfg.interval, 1, executor);
            const QuadratureResult q = bilinear_l2_norm(high, low, cfg.phi, spec, executor);
            SweepPoint pt;
            pt.N = N;
            pt.K = K;
            pt.norm = q.value;
            pt.data_l2 = high.l2_norm() * low.l2_norm();
            pt.normalized = q.value / pt.data_l2;
            pt.est_rel_error = q.est_rel_error;
            pt.time_nodes = q.time_nodes_used;
            pt.spatial_M = q.spatial_M;
            out.points.push_back(pt);
            return true;
        } catch (const Error& e) {
            out.partial = true;
            out.error = e.what();
            return false;
        }
    };

    BilinearSweepResult result;
    if (cfg.K && cfg.N_list.size() >= 2) {
        SweepResult sweep;
        for (int N : cfg.N_list)
            if (!measure(N, *cfg.K, sweep)) break;
        sweep.fit = fit_points(sweep.points, false);
        result.in_N = std::move(sweep);
    }
    if (!cfg.K_list.empty()) {
        SweepResult sweep;
        for (int K : cfg.K_list)
            if (!measure(N_max, K, sweep)) break;
        sweep.fit = fit_points(sweep.points, true);
        result.in_K = std::move(sweep);
    }
    return result;
}

}  // namespace dlab
