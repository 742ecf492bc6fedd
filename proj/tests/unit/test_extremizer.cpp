#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dlab/error.hpp"
#include "dlab/exponents.hpp"
#include "dlab/random.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

constexpr double kPi = std::numbers::pi;

double exact_quotient4(const SpectralState& u, const PhaseFunction& phi, Interval I) {
    const auto modes = oracle::modes_of(u);
    return std::pow(oracle::resonance_bilinear_sq(modes, modes, oracle::lattice_phase(phi), 1, 1, I.t0, I.t1,
                                                  u.dimension()),
                    0.25);
}

LpObjective::Coefficients random_unit(std::size_t size, Rng& rng) {
    LpObjective::Coefficients c(static_cast<Eigen::Index>(size));
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = rng.complex_normal();
    return c / c.norm();
}

}  // namespace

TEST_CASE("single lattice point band") {
    for (int p : {2, 4, 6}) {
        for (const auto& phi : {PhaseFunction::quadratic({1, 1}), PhaseFunction::fractional(1.5, 2)}) {
            const Interval I{0.0, 1.5};
            const auto r = extremizer_search(phi, p, CubeBand{{3, -2}, 1}, 2, I);
            CHECK(r.quotient == doctest::Approx(std::pow(1.5 * 4 * kPi * kPi, 1.0 / p)).epsilon(1e-12));
            CHECK(r.iterations == 1);
            CHECK(r.converged);
            CHECK(r.data.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("N=4 Schrodinger band beats flat data and matches the sign-vector oracle") {
    const auto phi = PhaseFunction::quadratic({1});
    const Interval I{0.0, 2 * kPi};
    ExtremizerOptions opts;
    opts.seed = 3;
    const auto r = extremizer_search(phi, 4, DyadicBand{4}, 1, I, opts);
    CHECK(std::abs(r.data.l2_norm() - 1.0) < 1e-12);
    CHECK(r.quotient >= r.flat_quotient * (1 - 1e-9));
    CHECK(!r.below_flat);
    CHECK(r.restarts_used == 5);
    // The reported quotient is the objective's; recompute it exactly.
    CHECK(std::abs(exact_quotient4(r.data, phi, I) - r.quotient) < 1e-10 * r.quotient);

    const std::vector<int> active = {-7, -6, -5, -4, 4, 5, 6, 7};
    double best = 0.0;
    for (int mask = 0; mask < 256; ++mask) {
        SpectralState s(1, 7);
        for (int k = 0; k < 8; ++k) s.at({active[k]}) = (mask >> k & 1 ? -1.0 : 1.0) / std::sqrt(8.0);
        best = std::max(best, exact_quotient4(s, phi, I));
    }
    CHECK(r.quotient >= best * 0.98);
    CHECK(r.quotient <= best * 1.02);
}

TEST_CASE("gradient matches central differences on the sphere") {
    const Interval I{0.0, 1.0};
    Rng rng(17);
    for (const auto& [phi, p, n, band] :
         {std::tuple{PhaseFunction::fractional(1.5, 1), 4, 1, FrequencyBand{DyadicBand{4}}},
          std::tuple{PhaseFunction::quadratic({1, -1}), 4, 2, FrequencyBand{DyadicBand{2}}},
          std::tuple{PhaseFunction::fractional(0.5, 1), 6, 1, FrequencyBand{CubeBand{{10}, 6}}}}) {
        const LpObjective F(phi, p, band, n, I);
        for (int trial = 0; trial < 10; ++trial) {
            const auto c = random_unit(F.size(), rng);
            LpObjective::Coefficients grad;
            F.value_and_gradient(c, grad);
            auto d = random_unit(F.size(), rng);
            d -= c.dot(d).real() * c;  // tangent direction
            const double h = 1e-5;
            auto at = [&](double s) {
                LpObjective::Coefficients x = c + s * d;
                return F.value(x / x.norm());
            };
            const double fd = (at(h) - at(-h)) / (2 * h);
            const double analytic = grad.dot(d).real();
            CHECK(std::abs(fd - analytic) <= 1e-4 * std::max(std::abs(analytic), grad.norm() * d.norm() * 1e-3));
        }
    }
}

TEST_CASE("objective value agrees with the norm engine") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    const Interval I{0.0, 1.0};
    const LpObjective F(phi, 6, DyadicBand{8}, 1, I);
    Rng rng(4);
    const auto c = random_unit(F.size(), rng);
    NormSpec spec;
    spec.p = 6;
    spec.rel_tol = 1e-12;
    CHECK(F.quotient(c) == doctest::Approx(spacetime_lp_norm(F.to_state(c), phi, spec).value).epsilon(1e-9));
    CHECK(F.from_state(F.to_state(c)) == c);
}

TEST_CASE("doubling the initial guess gives identical final data") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    Rng rng(8);
    SpectralState init(1, 15);
    for (int k = 8; k < 16; ++k) {
        init.at({k}) = rng.complex_normal();
        init.at({-k}) = rng.complex_normal();
    }
    ExtremizerOptions a;
    a.restarts = 1;
    a.initial = init;
    ExtremizerOptions b = a;
    auto twice = init;
    twice *= 2.0;
    b.initial = twice;
    const auto ra = extremizer_search(phi, 4, DyadicBand{8}, 1, {0, 1}, a);
    const auto rb = extremizer_search(phi, 4, DyadicBand{8}, 1, {0, 1}, b);
    CHECK(ra.data == rb.data);
    CHECK(ra.quotient == rb.quotient);
}

TEST_CASE("accepted iterations never decrease the objective") {
    ExtremizerOptions opts;
    opts.restarts = 2;
    opts.max_iterations = 60;
    const auto r = extremizer_search(PhaseFunction::quadratic({1, 1}), 4, DyadicBand{2}, 2, {0, 1}, opts);
    REQUIRE(r.history.size() >= 2);
    for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] >= r.history[i - 1]);
    CHECK(r.objective == doctest::Approx(r.history.back()));
}

TEST_CASE("extremizer is reproducible and validates its inputs") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    ExtremizerOptions opts;
    opts.restarts = 3;
    opts.max_iterations = 40;
    const auto a = extremizer_search(phi, 4, DyadicBand{4}, 1, {0, 1}, opts);
    const auto b = extremizer_search(phi, 4, DyadicBand{4}, 1, {0, 1}, opts, Executor(3));
    CHECK(a.data == b.data);

    CHECK_THROWS_AS(extremizer_search(phi, 3, DyadicBand{4}, 1, {0, 1}), Error);
    CHECK_THROWS_AS(extremizer_search(phi, 4, DyadicBand{4}, 2, {0, 1}), Error);
    ExtremizerOptions none;
    none.restarts = 0;
    CHECK_THROWS_AS(extremizer_search(phi, 4, DyadicBand{4}, 1, {0, 1}, none), Error);
    ExtremizerOptions empty_start;
    empty_start.restarts = 1;
    empty_start.initial = SpectralState(1, 2);
    CHECK_THROWS_AS(extremizer_search(phi, 4, DyadicBand{4}, 1, {0, 1}, empty_start), Error);
}
