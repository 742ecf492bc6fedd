#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dlab/error.hpp"
#include "dlab/norms.hpp"
#include "dlab/random.hpp"
#include "oracles.hpp"

using namespace dlab;

namespace {

constexpr double kPi = std::numbers::pi;

SpectralState flat_annulus(int n, int N) {
    SpectralState s(n, 2 * N - 1);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto xi = s.lattice_point(i);
        if (in_band(DyadicBand{N}, xi)) s.coefficients()[i] = 1.0;
    }
    return s;
}

SpectralState random_state(int n, int R, Rng& rng, double density = 1.0) {
    SpectralState s(n, R);
    for (auto& c : s.coefficients())
        if (rng.uniform() < density) c = rng.complex_normal();
    if (s.is_zero()) s.coefficients()[0] = 1.0;
    return s;
}

double l4_oracle(const SpectralState& u, const PhaseFunction& phi, Interval I) {
    const auto modes = oracle::modes_of(u);
    return std::pow(oracle::resonance_bilinear_sq(modes, modes, oracle::lattice_phase(phi), 1, 1, I.t0, I.t1,
                                                  u.dimension()),
                    0.25);
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("alias-free point counts") {
    CHECK(alias_free_points(1, 4) == 1);
    CHECK(alias_free_points(8, 2) == 8);
    CHECK(alias_free_points(8, 4) == 15);
    CHECK(alias_free_points(5, 6) == 13);
}

TEST_CASE("spacetime_lp_norm: single mode has constant modulus") {
    for (const auto& phi : {PhaseFunction::quadratic({1}), PhaseFunction::fractional(1.5, 1)}) {
        SpectralState s(1, 9);
        s.at({7}) = Complex(0.6, -0.8) * 2.5;
        NormSpec spec;
        spec.p = 4;
        const auto r = spacetime_lp_norm(s, phi, spec);
        CHECK(r.value == doctest::Approx(2.5 * std::pow(2 * kPi, 0.25)).epsilon(1e-13));
    }
}

TEST_CASE("spacetime_lp_norm: p = 2 is Parseval times |I|") {
    Rng rng(1);
    for (int n : {1, 2, 3}) {
        const auto u = random_state(n, n == 3 ? 3 : 6, rng);
        NormSpec spec;
        spec.p = 2;
        spec.interval = {0.0, 2.7};
        const auto phi = PhaseFunction::fractional(1.5, n);
        const double v = spacetime_lp_norm(u, phi, spec).value;
        const double expect = 2.7 * std::pow(2 * kPi, n) * u.l2_norm_squared();
        CHECK(std::abs(v * v - expect) <= 1e-10 * expect);
    }
}

TEST_CASE("spacetime_lp_norm: N=4 Schrodinger annulus against dense and exact oracles") {
    const auto phi = PhaseFunction::quadratic({1});
    const auto u = flat_annulus(1, 4);
    NormSpec spec;
    spec.p = 4;
    spec.interval = {0.0, 2 * kPi};
    const double value = spacetime_lp_norm(u, phi, spec).value;

    // Dense Riemann sum, M = 512 in space and 4096 in time.
    const auto modes = oracle::modes_of(u);
    const auto lattice = oracle::lattice_phase(phi);
    double riemann = 0.0;
    const int Mx = 512, Mt = 4096;
    std::vector<Complex> field(Mx);
    for (int k = 0; k < Mt; ++k) {
        const double t = 2 * kPi * k / Mt;
        riemann += oracle::torus_mean_1d(Mx, [&](double x) { return std::pow(std::norm(oracle::field(modes, lattice, t, {x})), 2); });
    }
    riemann *= 2 * kPi / Mt;
    CHECK(std::abs(value - std::pow(riemann, 0.25)) < 1e-4 * value);
    CHECK(std::abs(value - l4_oracle(u, phi, spec.interval)) < 1e-10 * value);
}

TEST_CASE("spacetime_lp_norm matches the resonance oracle for incommensurable phases") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 2;
        const auto u = random_state(n, n == 1 ? 9 : 3, rng, 0.6);
        const auto phi = trial % 3 ? PhaseFunction::fractional(1.5, n) : PhaseFunction::fractional(0.5, n);
        NormSpec spec;
        spec.p = 4;
        spec.interval = {0.3, 1.9};
        spec.rel_tol = 1e-10;
        const double v = spacetime_lp_norm(u, phi, spec).value;
        CHECK(std::abs(v - l4_oracle(u, phi, spec.interval)) < 1e-9 * v);
    }
}

TEST_CASE("spacetime_lp_norm with odd p uses the adaptive spatial rule") {
    // |1 + e^{i(x+t)}|^3 integrates to 64/3 over the torus at every t.
    SpectralState s(1, 1);
    s.at({0}) = 1.0;
    s.at({1}) = 1.0;
    NormSpec spec;
    spec.p = 3;
    spec.rel_tol = 1e-9;
    const auto r = spacetime_lp_norm(s, PhaseFunction::quadratic({1}), spec);
    CHECK(r.value == doctest::Approx(std::cbrt(64.0 / 3.0)).epsilon(1e-6));
    CHECK(r.spatial_M > 3);

    SpectralState one(1, 4);
    one.at({3}) = 2.0;
    spec.p = 3.5;
    CHECK(spacetime_lp_norm(one, PhaseFunction::quadratic({1}), spec).value ==
          doctest::Approx(2.0 * std::pow(2 * kPi, 1 / 3.5)).epsilon(1e-10));
}

TEST_CASE("spacetime_lp_norm errors") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    NormSpec spec;
    CHECK(code_of([&] { spacetime_lp_norm(SpectralState(1, 3), phi, spec); }) == ErrorCode::InvalidArgument);
    spec.p = 1;
    CHECK_THROWS_AS(spacetime_lp_norm(flat_annulus(1, 4), phi, spec), Error);
    spec.p = 4;
    spec.interval = {1.0, 1.0};
    CHECK_THROWS_AS(spacetime_lp_norm(flat_annulus(1, 4), phi, spec), Error);

    NormSpec starved;
    starved.p = 4;
    starved.interval = {0.0, 50.0};
    starved.rel_tol = 1e-14;
    starved.node_cap = 64;
    CHECK(code_of([&] { spacetime_lp_norm(flat_annulus(1, 64), phi, starved); }) == ErrorCode::QuadratureStalled);
}

TEST_CASE("bilinear_l2_norm examples") {
    const auto phi = PhaseFunction::quadratic({1});
    SpectralState a(1, 5), b(1, 5);
    a.at({5}) = 3.0;
    b.at({-2}) = Complex(0, 0.5);
    BilinearSpec spec;
    spec.interval = {0.0, 2.0};
    CHECK(bilinear_l2_norm(a, b, phi, spec).value == doctest::Approx(1.5 * std::sqrt(2.0 * 2 * kPi)).epsilon(1e-13));

    const auto high = flat_annulus(1, 16);
    const auto low = flat_annulus(1, 2);
    spec.interval = {0.0, 1.0};
    spec.rel_tol = 1e-10;
    const double v = bilinear_l2_norm(high, low, phi, spec).value;
    const double exact = std::sqrt(oracle::resonance_bilinear_sq(oracle::modes_of(high), oracle::modes_of(low),
                                                                 oracle::lattice_phase(phi), 1, 1, 0.0, 1.0, 1));
    CHECK(std::abs(v - exact) < 1e-4 * exact);
    CHECK(std::abs(v - exact) < 1e-9 * exact);
}

TEST_CASE("bilinear_l2_norm honours time-reversal signs") {
    Rng rng(5);
    const auto phi = PhaseFunction::fractional(1.5, 1);
    const auto A = random_state(1, 12, rng, 0.5);
    const auto B = random_state(1, 3, rng);
    for (auto [sa, sb] : {std::pair{1, -1}, std::pair{-1, 1}, std::pair{-1, -1}}) {
        BilinearSpec spec;
        spec.interval = {-0.5, 1.0};
        spec.signs = {sa, sb};
        spec.rel_tol = 1e-10;
        const double v = bilinear_l2_norm(A, B, phi, spec).value;
        const double exact = std::sqrt(oracle::resonance_bilinear_sq(oracle::modes_of(A), oracle::modes_of(B),
                                                                     oracle::lattice_phase(phi), sa, sb, -0.5, 1.0, 1));
        CHECK(std::abs(v - exact) < 1e-9 * exact);
    }
}

TEST_CASE("bilinear_l2_norm conjugation symmetry on real-symmetric data") {
    Rng rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        SpectralState A(1, 10), B(1, 4);
        for (int k = 0; k <= 10; ++k) {
            const Complex c = rng.complex_normal();
            A.at({k}) = k == 0 ? Complex(c.real()) : c;
            A.at({-k}) = std::conj(A.at({k}));
        }
        for (int k = 0; k <= 4; ++k) {
            const Complex c = rng.complex_normal();
            B.at({k}) = k == 0 ? Complex(c.real()) : c;
            B.at({-k}) = std::conj(B.at({k}));
        }
        const auto phi = PhaseFunction::fractional(1.5, 1);
        BilinearSpec pm, mp;
        pm.signs = {1, -1};
        mp.signs = {-1, 1};
        pm.rel_tol = mp.rel_tol = 1e-10;
        const double a = bilinear_l2_norm(A, B, phi, pm).value;
        const double b = bilinear_l2_norm(A, B, phi, mp).value;
        CHECK(std::abs(a - b) < 1e-9 * a);
    }
}

TEST_CASE("interval_partition_check examples") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    const auto high = flat_annulus(1, 64);
    const auto low = flat_annulus(1, 2);
    BilinearSpec spec;
    spec.interval = {0.0, 2.0};  // 16 parts of length 64^{-1/2}
    spec.rel_tol = 1e-10;
    const auto two = interval_partition_check(high, low, phi, spec, equal_fractions(2));
    CHECK(two.max_rel_dev < 1e-8);
    CHECK(two.parts.size() == 2);

    const auto sixteen = interval_partition_check(high, low, phi, spec, equal_fractions(16));
    CHECK(sixteen.max_rel_dev < 1e-6);
    CHECK(sixteen.parts.size() == 16);

    const auto uneven = interval_partition_check(high, low, phi, spec, {0.2, 0.3, 0.5});
    CHECK(uneven.max_rel_dev < 1e-8);
    double sum = 0.0;
    for (double p : uneven.parts) sum += p;
    CHECK(std::abs(sum - uneven.rhs) <= 1e-14 * sum);
    CHECK(std::abs(uneven.lhs - uneven.rhs) <= 1e-8 * uneven.lhs);

    CHECK_THROWS_AS(interval_partition_check(high, low, phi, spec, {0.5, 0.6}), Error);
    CHECK_THROWS_AS(interval_partition_check(high, low, phi, spec, equal_fractions(1)), Error);
}

TEST_CASE("Holder: bilinear norm is bounded by the product of L4 norms") {
    Rng rng(19);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 2;
        const auto phi = trial % 3 == 0 ? PhaseFunction::quadratic(std::vector<double>(n, 1.0))
                                         : PhaseFunction::fractional(trial % 3 == 1 ? 1.5 : 0.5, n);
        const auto A = random_state(n, n == 1 ? 10 : 4, rng, 0.4);
        const auto B = random_state(n, n == 1 ? 4 : 2, rng, 0.7);
        const Interval I{rng.uniform(), 1.0 + 2.0 * rng.uniform()};
        BilinearSpec bspec;
        bspec.interval = I;
        bspec.signs = {rng.uniform() < 0.5 ? 1 : -1, rng.uniform() < 0.5 ? 1 : -1};
        NormSpec nspec;
        nspec.p = 4;
        nspec.interval = I;
        const double lhs = bilinear_l2_norm(A, B, phi, bspec).value;
        const double rhs = spacetime_lp_norm(A, phi, nspec).value * spacetime_lp_norm(B, phi, nspec).value;
        CHECK(lhs <= rhs * (1 + 1e-6));
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("normalized Lp norms are nondecreasing in p") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 2;
        const auto u = random_state(n, n == 1 ? 8 : 3, rng, 0.5);
        const auto phi = PhaseFunction::fractional(1.5, n);
        const Interval I{0.0, 1.5};
        double prev = 0.0;
        for (int p : {2, 4, 6}) {
            NormSpec spec;
            spec.p = p;
            spec.interval = I;
            const double v = spacetime_lp_norm(u, phi, spec).value * std::pow(I.length() * std::pow(2 * kPi, n), -1.0 / p);
            CHECK(v >= prev * (1 - 1e-9));
            prev = v;
        }
    }
}

TEST_CASE("halving rel_tol moves the value by less than twice the estimate") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const auto u = random_state(1, 40, rng, 0.3);
        for (double tol : {1e-3, 1e-5}) {
            NormSpec coarse;
            coarse.p = 4;
            coarse.interval = {0.0, 3.0};
            coarse.rel_tol = tol;
            NormSpec fine = coarse;
            fine.rel_tol = tol / 2;
            const auto a = spacetime_lp_norm(u, phi, coarse);
            const auto b = spacetime_lp_norm(u, phi, fine);
            CHECK(a.est_rel_error <= tol);
            CHECK(std::abs(a.value - b.value) / b.value <= 2 * a.est_rel_error + 1e-15);
        }
    }
}

TEST_CASE("results do not depend on the thread count") {
    const auto phi = PhaseFunction::fractional(1.5, 2);
    Rng rng(41);
    const auto u = random_state(2, 6, rng, 0.5);
    NormSpec spec;
    spec.p = 6;
    const double serial = spacetime_lp_norm(u, phi, spec).value;
    CHECK(spacetime_lp_norm(u, phi, spec, Executor(3)).value == serial);
    BilinearSpec bspec;
    const auto v = random_state(2, 2, rng);
    CHECK(bilinear_l2_norm(u, v, phi, bspec, Executor(4)).value == bilinear_l2_norm(u, v, phi, bspec).value);
}
