#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dlab/counterexample.hpp"
#include "dlab/error.hpp"
#include "dlab/nls.hpp"
#include "dlab/random.hpp"

using namespace dlab;

namespace {

constexpr double kPi = std::numbers::pi;

double distance(const SpectralState& a, const SpectralState& b) { return (a - b).l2_norm(); }

// Coefficient of conj(u) at xi is conj(c(-xi)).
SpectralState conjugate(const SpectralState& u) {
    SpectralState out(u.dimension(), u.box_radius());
    for (std::size_t i = 0; i < u.size(); ++i) {
        auto xi = u.lattice_point(i);
        for (int& x : xi) x = -x;
        out.at(xi) = std::conj(u.coefficients()[i]);
    }
    return out;
}

// Random data with <xi>^{-2} decay on |xi| <= K inside a box of radius R.
SpectralState smooth_data(int n, int K, int R, Rng& rng, double amplitude) {
    SpectralState s(n, R);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto xi = s.lattice_point(i);
        double r2 = 0.0;
        bool inside = true;
        for (int x : xi) {
            r2 += double(x) * x;
            inside = inside && std::abs(x) <= K;
        }
        if (inside) s.coefficients()[i] = amplitude * rng.complex_normal() / (1.0 + r2);
    }
    return s;
}

SpectralState run(const SpectralState& u0, SplitStepConfig cfg) {
    SplitStepper stepper(cfg);
    SpectralState u = u0;
    for (std::size_t k = 0; k < step_count(cfg); ++k) u = stepper.step(u);
    return u;
}

}  // namespace

TEST_CASE("grid sizes and configuration checks") {
    CHECK(split_step_grid_points(8, Dealias::alias_free_cubic) >= 49);
    CHECK(split_step_grid_points(8, Dealias::two_thirds) >= 26);
    CHECK(dealias_from_string(to_string(Dealias::two_thirds)) == Dealias::two_thirds);
    CHECK_THROWS_AS(dealias_from_string("none"), Error);
    SplitStepConfig bad;
    bad.sign = 2;
    CHECK_THROWS_AS(SplitStepper{bad}, Error);
    SplitStepConfig steps;
    steps.dt = 1e-3;
    steps.T = 0.25;
    CHECK(step_count(steps) == 250);
    steps.T = -0.25;
    CHECK_THROWS_AS(step_count(steps), Error);
    steps.T = 1e5;
    steps.dt = 1e-3;
    CHECK_THROWS_AS(step_count(steps), Error);
}

TEST_CASE("single mode: modulus preserved and exact phase rotation") {
    for (int sign : {-1, 1}) {
        SplitStepConfig cfg;
        cfg.phi = PhaseFunction::fractional(1.5, 1);
        cfg.sign = sign;
        cfg.dt = 1e-3;
        cfg.T = 0.1;
        cfg.box_radius = 6;
        SpectralState u0(1, 6);
        const Complex c(0.3, -0.4);
        u0.at({5}) = c;
        const auto u = run(u0, cfg);
        CHECK(std::abs(std::abs(u.at({5})) - std::abs(c)) < 1e-13);
        const double t = cfg.T;
        const Complex exact = c * std::polar(1.0, t * (std::pow(5.0, 1.5) - sign * std::norm(c)));
        CHECK(std::abs(u.at({5}) - exact) < 1e-12);
        double stray = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u.lattice_point(i)[0] != 5) stray = std::max(stray, std::abs(u.coefficients()[i]));
        CHECK(stray < 1e-13);

        // One nonlinear step vs the exact linear flow: equal moduli.
        SplitStepConfig one = cfg;
        one.T = one.dt;
        const auto stepped = step_strang(u0, one);
        const auto linear = propagate(u0, cfg.phi, cfg.dt);
        CHECK(std::abs(std::abs(stepped.at({5})) - std::abs(linear.at({5}))) < 1e-8);
    }
}

TEST_CASE("sign 0 is the exact linear flow") {
    Rng rng(3);
    const auto u0 = smooth_data(2, 4, 6, rng, 1.0);
    SplitStepConfig cfg;
    cfg.phi = PhaseFunction::quadratic({1, -1});
    cfg.sign = 0;
    cfg.dt = 0.01;
    cfg.T = 0.5;
    cfg.box_radius = 6;
    CHECK(distance(run(u0, cfg), propagate(u0, cfg.phi, 0.5)) < 1e-12 * u0.l2_norm());
}

TEST_CASE("Wang data: mass drift and agreement with the pointwise ODE") {
    const auto wang = build_counterexample(CounterexampleVariant::hyperbolic_2d, 4);
    SplitStepConfig cfg;
    cfg.phi = matching_phase(CounterexampleVariant::hyperbolic_2d);
    cfg.sign = 1;
    cfg.dt = 1e-3;
    cfg.T = 0.1;
    cfg.box_radius = 64;
    const auto traj = solve(wang.state.with_radius(64), cfg, 10);
    const double m0 = traj.mass_ledger.front().second;
    double drift = 0.0;
    for (const auto& [t, m] : traj.mass_ledger) drift = std::max(drift, std::abs(m - m0) / m0);
    CHECK(drift < 1e-10);
    CHECK(traj.steps == 100);

    // The flow stays on the null line, where it is u(y) e^{-i |u(y)|^2 t}
    // with y = x1 - x2. Oracle: a dense 1d DFT of that function.
    cfg.T = 0.01;
    const auto u = run(wang.state.with_radius(64), cfg);
    const int M = 4096;
    std::vector<Complex> g(M);
    for (int j = 0; j < M; ++j) {
        const double y = 2 * kPi * j / M;
        Complex v{};
        for (int k = -4; k <= 4; ++k) v += 0.5 * std::polar(1.0, k * y);
        g[j] = v * std::polar(1.0, -std::norm(v) * cfg.T);
    }
    double worst = 0.0;
    for (int k = -64; k <= 64; ++k) {
        Complex c{};
        for (int j = 0; j < M; ++j) c += g[j] * std::polar(1.0, -2 * kPi * double(k) * j / M);
        c /= double(M);
        worst = std::max(worst, std::abs(u.at({k, -k}) - c));
    }
    CHECK(worst < 1e-6);
    // Nothing leaves the null line.
    double off = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const auto xi = u.lattice_point(i);
        if (xi[0] != -xi[1]) off = std::max(off, std::abs(u.coefficients()[i]));
    }
    CHECK(off < 1e-12);
}

TEST_CASE("mass drift stays below 1e-8 for smooth data in a roomy box") {
    Rng rng(5);
    for (int n : {1, 2}) {
        const auto u0 = smooth_data(n, 4, n == 1 ? 48 : 24, rng, 0.3);
        SplitStepConfig cfg;
        cfg.phi = PhaseFunction::fractional(1.5, n);
        cfg.dt = 1e-3;
        cfg.T = 0.2;
        cfg.box_radius = u0.box_radius();
        const auto traj = solve(u0, cfg, 50);
        const double m0 = traj.mass_ledger.front().second;
        for (const auto& [t, m] : traj.mass_ledger) CHECK(std::abs(m - m0) <= 1e-8 * m0);
    }
}

TEST_CASE("zero data stay zero and trajectories are well formed") {
    SplitStepConfig cfg;
    cfg.phi = PhaseFunction::quadratic({1, 1});
    cfg.T = 0.05;
    cfg.box_radius = 3;
    const auto traj = solve(SpectralState(2, 3), cfg, 7, 1.0);
    for (const auto& [t, s] : traj.snapshots) CHECK(s.is_zero());
    CHECK(traj.snapshots.front().first == 0.0);
    for (std::size_t i = 1; i < traj.snapshots.size(); ++i)
        CHECK(traj.snapshots[i].first > traj.snapshots[i - 1].first);
    CHECK(traj.snapshots.back().first == doctest::Approx(0.05));
    CHECK(traj.hs_ledger.size() == traj.snapshots.size());
    CHECK(!traj.overflow);
}

TEST_CASE("conjugate data solve the equation with -phi and -sign") {
    Rng rng(7);
    const auto u0 = smooth_data(1, 5, 20, rng, 1.5);
    for (const auto& phi : {PhaseFunction::quadratic({1}), PhaseFunction::fractional(1.5, 1)}) {
        SplitStepConfig a;
        a.phi = phi;
        a.sign = 1;
        a.dt = 1e-3;
        a.T = 0.03;
        a.box_radius = 20;
        SplitStepConfig b = a;
        b.phi = phi.negated();
        b.sign = -1;
        const auto ta = solve(u0, a, 10);
        const auto tb = solve(conjugate(u0), b, 10);
        REQUIRE(ta.snapshots.size() == 4);
        for (std::size_t i = 1; i < ta.snapshots.size(); ++i)
            CHECK(distance(conjugate(ta.snapshots[i].second), tb.snapshots[i].second) < 1e-10);
    }
}

TEST_CASE("Strang splitting is second order") {
    Rng rng(11);
    const auto u0 = smooth_data(1, 6, 40, rng, 1.0);
    SplitStepConfig cfg;
    cfg.phi = PhaseFunction::fractional(1.5, 1);
    cfg.T = 0.1;
    cfg.box_radius = 40;
    std::vector<SpectralState> finals;
    for (double dt : {1e-2, 5e-3, 2.5e-3, 1.25e-3}) {
        cfg.dt = dt;
        finals.push_back(run(u0, cfg));
    }
    const double e1 = distance(finals[0], finals[1]);
    const double e2 = distance(finals[1], finals[2]);
    const double e3 = distance(finals[2], finals[3]);
    CHECK(e1 / e2 >= 3.0);
    CHECK(e1 / e2 <= 5.0);
    const double rate = std::log2(e2 / e3);
    CHECK(rate >= 1.8);
    CHECK(rate <= 2.2);
}

TEST_CASE("time reversibility") {
    Rng rng(13);
    const auto u0 = smooth_data(2, 3, 16, rng, 0.3);
    SplitStepConfig fwd;
    fwd.phi = PhaseFunction::quadratic({1, -1});
    fwd.dt = 1e-3;
    fwd.T = 0.1;
    fwd.box_radius = 16;
    SplitStepConfig back = fwd;
    back.dt = -1e-3;
    back.T = -0.1;
    const auto there = run(u0, fwd);
    CHECK(distance(there, u0) > 1e-3 * u0.l2_norm());
    CHECK(distance(run(there, back), u0) < 1e-6 * u0.l2_norm());
}

TEST_CASE("overflow guard halts the trajectory") {
    SpectralState u0(1, 2);
    u0.at({1}) = 2e12;
    SplitStepConfig cfg;
    cfg.box_radius = 2;
    cfg.T = 0.01;
    CHECK_THROWS_AS(step_strang(u0, cfg), Error);
    try {
        step_strang(u0, cfg);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Overflow);
    }
    const auto traj = solve(u0, cfg, 1);
    CHECK(traj.overflow);
    CHECK(traj.halt_time == 0.0);
    CHECK(traj.snapshots.size() == 1);
}

TEST_CASE("probe data are unit in H^s") {
    const auto phi = PhaseFunction::quadratic({1, -1});
    for (double s : {0.0, 0.25, 1.0}) {
        CHECK(sobolev_norm(probe_data(ProbeFamily::wang, phi, 4, s), s) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(sobolev_norm(probe_data(ProbeFamily::flat_annulus, phi, 4, s), s) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS(probe_data(ProbeFamily::wang, PhaseFunction::quadratic({1}), 4, 0), Error);
    CHECK(probe_family_from_string(to_string(ProbeFamily::flat_annulus)) == ProbeFamily::flat_annulus);
}

TEST_CASE("probe: the linear equation is an isometry") {
    ProbeOptions opts;
    opts.sign = 0;
    opts.dt = 1e-2;
    opts.families = {ProbeFamily::wang, ProbeFamily::flat_annulus};
    const auto rows = wellposedness_probe(PhaseFunction::quadratic({1, -1}), 0.5, {2, 4, 8}, 0.01, 0.5, opts);
    CHECK(rows.size() == 6);
    for (const auto& row : rows) {
        CHECK(std::abs(row.modulus - 1.0) < 1e-10);
        CHECK(!row.overflow);
    }
}

TEST_CASE("probe: Wang modulus grows below s = 1/2 and stays bounded above") {
    const auto phi = PhaseFunction::quadratic({1, -1});
    ProbeOptions opts;
    opts.dt = 2e-3;
    const std::vector<int> N = {2, 4, 8, 16};
    const auto low = wellposedness_probe(phi, 0.25, N, 0.01, 1.0, opts, Executor(2));
    for (std::size_t i = 1; i < low.size(); ++i) CHECK(low[i].modulus > low[i - 1].modulus);
    const auto high = wellposedness_probe(phi, 0.75, N, 0.01, 1.0, opts, Executor(2));
    double lo = 1e300, hi = 0.0;
    for (const auto& row : high) {
        lo = std::min(lo, row.modulus);
        hi = std::max(hi, row.modulus);
    }
    CHECK(hi / lo <= 4.0);
}

TEST_CASE("probe validates its inputs") {
    const auto phi = PhaseFunction::quadratic({1, -1});
    CHECK_THROWS_AS(wellposedness_probe(phi, -0.1, {4}, 0.01, 1.0), Error);
    CHECK_THROWS_AS(wellposedness_probe(phi, 0.5, {4}, 0.5, 1.0), Error);
    CHECK_THROWS_AS(wellposedness_probe(phi, 0.5, {}, 0.01, 1.0), Error);
}
