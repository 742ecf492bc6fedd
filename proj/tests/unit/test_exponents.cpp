#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dlab/error.hpp"
#include "dlab/exponents.hpp"
#include "dlab/random.hpp"

using namespace dlab;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("data families") {
    const auto phi = PhaseFunction::quadratic({1});
    DataSpec flat;
    const auto f = make_annulus_data(flat, phi, 8, 4, {});
    CHECK(f.box_radius() == 15);
    CHECK(f.nonzero_count() == 16);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto xi = f.lattice_point(i);
        CHECK((f.coefficients()[i] == Complex(1.0)) == in_band(DyadicBand{8}, xi));
    }

    DataSpec rp;
    rp.family = DataFamily::random_phase;
    rp.seed = 5;
    const auto r = make_annulus_data(rp, phi, 8, 4, {});
    CHECK(r.nonzero_count() == 16);
    for (const auto& c : r.coefficients())
        if (c != Complex{}) CHECK(std::abs(std::abs(c) - 1.0) < 1e-15);
    CHECK(make_annulus_data(rp, phi, 8, 4, {}) == r);
    CHECK(make_annulus_data(rp, phi, 8, 4, {}, 1) != r);

    DataSpec sparse;
    sparse.family = DataFamily::random_sparse;
    sparse.density = 0.25;
    const auto s = make_annulus_data(sparse, PhaseFunction::quadratic({1, 1}), 16, 4, {});
    const auto full = make_annulus_data(flat, PhaseFunction::quadratic({1, 1}), 16, 4, {}).nonzero_count();
    CHECK(s.nonzero_count() > 0);
    CHECK(s.nonzero_count() < full / 2);

    sparse.density = 1e-9;
    CHECK(make_annulus_data(sparse, phi, 4, 4, {}).nonzero_count() == 1);

    for (auto fam : {DataFamily::flat_annulus, DataFamily::random_phase, DataFamily::random_sparse,
                     DataFamily::extremized})
        CHECK(data_family_from_string(to_string(fam)) == fam);
    CHECK_THROWS_AS(data_family_from_string("gaussian"), Error);
}

TEST_CASE("Schrodinger L4 sweep on flat data has slope near 0") {
    SweepConfig cfg;
    cfg.p = 4;
    cfg.interval = {0.0, 2 * kPi};
    cfg.N_list = {8, 16, 32, 64};
    const auto res = linear_strichartz_sweep(cfg);
    REQUIRE(res.fit.has_value());
    CHECK(!res.partial);
    CHECK(res.points.size() == 4);
    CHECK(std::abs(res.fit->slope) < 0.1);
    for (const auto& pt : res.points) {
        CHECK(pt.normalized == doctest::Approx(pt.norm / pt.data_l2).epsilon(1e-15));
        CHECK(pt.data_l2 == doctest::Approx(std::sqrt(2.0 * pt.N)).epsilon(1e-14));
    }
    CHECK(res.fit->points.size() == 4);
}

TEST_CASE("normalized norms are invariant under amplitude scaling") {
    const auto phi = PhaseFunction::fractional(1.5, 1);
    DataSpec rp;
    rp.family = DataFamily::random_phase;
    NormSpec spec;
    spec.p = 6;
    for (int N : {4, 8, 16}) {
        const auto u = make_annulus_data(rp, phi, N, 6, {});
        const double base = spacetime_lp_norm(u, phi, spec).value / u.l2_norm();
        SpectralState scaled;
        for (double factor : {4.0, 3.0, 1e-3}) {
            scaled = u;
            scaled *= factor;
            const double v = spacetime_lp_norm(scaled, phi, spec).value / scaled.l2_norm();
            CHECK(std::abs(v - base) <= 1e-14 * base);
        }
    }
}

TEST_CASE("sweeps are deterministic and thread-count independent") {
    SweepConfig cfg;
    cfg.phi = PhaseFunction::fractional(1.5, 1);
    cfg.p = 6;
    cfg.N_list = {4, 8, 16};
    cfg.data.family = DataFamily::random_sparse;
    cfg.data.density = 0.5;
    const auto a = linear_strichartz_sweep(cfg);
    const auto b = linear_strichartz_sweep(cfg, Executor(3));
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].norm == b.points[i].norm);
    CHECK(a.fit->slope == b.fit->slope);
}

TEST_CASE("quadrature failure leaves a flagged partial sweep") {
    SweepConfig cfg;
    cfg.phi = PhaseFunction::fractional(1.5, 1);
    cfg.p = 4;
    cfg.interval = {0.0, 20.0};
    cfg.N_list = {4, 8, 64, 128};
    cfg.rel_tol = 1e-13;
    cfg.node_cap = 256;
    const auto res = linear_strichartz_sweep(cfg);
    CHECK(res.partial);
    CHECK(res.error.find("QuadratureStalled") != std::string::npos);
    CHECK(res.points.size() < 4);
    CHECK(!res.fit.has_value());
}

TEST_CASE("bilinear sweep in N for Schrodinger shows no high-frequency loss") {
    SweepConfig cfg;
    cfg.K = 2;
    cfg.N_list = {16, 32, 64, 128};
    cfg.interval = {0.0, 1.0};
    const auto res = bilinear_sweep(cfg);
    REQUIRE(res.in_N.has_value());
    CHECK(!res.in_K.has_value());
    REQUIRE(res.in_N->fit.has_value());
    CHECK(std::abs(res.in_N->fit->slope) < 0.1);
    for (const auto& pt : res.in_N->points) CHECK(pt.K == 2);
}

TEST_CASE("bilinear sweep in K") {
    SweepConfig cfg;
    cfg.phi = PhaseFunction::fractional(0.5, 1);
    cfg.N_list = {64};
    cfg.K_list = {2, 4, 8, 16};
    cfg.interval = {0.0, 2 * kPi};
    const auto res = bilinear_sweep(cfg);
    CHECK(!res.in_N.has_value());
    REQUIRE(res.in_K.has_value());
    REQUIRE(res.in_K->fit.has_value());
    for (const auto& pt : res.in_K->points) CHECK(pt.N == 64);
    CHECK(res.in_K->points.size() == 4);
}

TEST_CASE("bilinear sweep rejects K > N/4") {
    SweepConfig cfg;
    cfg.K = 8;
    cfg.N_list = {16, 32, 64};
    CHECK_THROWS_AS(bilinear_sweep(cfg), Error);
    SweepConfig k;
    k.N_list = {32};
    k.K_list = {2, 4, 16};
    CHECK_THROWS_AS(bilinear_sweep(k), Error);
}

TEST_CASE("flat slope does not exceed the extremized slope by more than 0.05") {
    SweepConfig flat;
    flat.p = 4;
    flat.interval = {0.0, 2 * kPi};
    flat.N_list = {2, 4, 8};
    SweepConfig ext = flat;
    ext.data.family = DataFamily::extremized;
    ext.data.extremizer.restarts = 2;
    ext.data.extremizer.max_iterations = 100;
    const auto a = linear_strichartz_sweep(flat);
    const auto b = linear_strichartz_sweep(ext);
    REQUIRE(a.fit.has_value());
    REQUIRE(b.fit.has_value());
    CHECK(a.fit->slope <= b.fit->slope + 0.05);
    for (std::size_t i = 0; i < a.points.size(); ++i)
        CHECK(b.points[i].normalized >= a.points[i].normalized * (1 - 1e-6));
}
