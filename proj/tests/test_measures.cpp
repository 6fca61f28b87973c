#include <cmath>
#include <random>

#include "doctest.h"
#include "rdbounds/errors.hpp"
#include "rdbounds/measures.hpp"
#include "support.hpp"

using namespace rdbounds;
using rdtest::ex;

TEST_CASE("weights_from_params") {
    auto w1 = weights_from_params(Estimator::Thm1, {1, 1});
    CHECK(w1.nu == 1);
    CHECK(w1.c_lambda == 1);
    CHECK(w1.zeta == 1);
    CHECK(w1.chi == 2);
    CHECK(w1.c0 == 0);
    BoundParams p4{1, 1, 2};
    auto w4 = weights_from_params(Estimator::Thm4, p4);
    CHECK(w4.nu == 1);
    CHECK(w4.c_lambda == 1);
    CHECK(w4.zeta == doctest::Approx(0.5));
    CHECK(w4.chi == 2);
    CHECK_THROWS_AS(weights_from_params(Estimator::Thm1, {3, 1}), InputError);
    CHECK_THROWS_AS(weights_from_params(Estimator::Thm1, {1, 0.75}), InputError);
    CHECK_NOTHROW(weights_from_params(Estimator::Thm3, {1, 0.75}));
    BoundParams bad_rho{1, 1, 2, 1, 0.4};
    CHECK_THROWS_AS(weights_from_params(Estimator::Thm2, bad_rho), InputError);
    BoundParams rho{1, 1, 2, 2, 2};
    CHECK(weights_from_params(Estimator::Thm2, rho).c_lambda == doctest::Approx(1.0));
    CHECK(weights_from_params(Estimator::Thm2, rho).chi == 0);
}

TEST_CASE("error measure of the interpolated bilinear solution vanishes") {
    auto pc = rdtest::bilinear_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    EstimateContext ctx(pc, m);
    auto v = interpolate(pc.exact()->u, m);
    auto w = weights_from_params(Estimator::Thm1, {1, 1});
    CHECK(error_measure(v, w, ctx).total() < 1e-13);
}

TEST_CASE("gradient term against a closed form") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    ProblemCase pc(d, ex("1"), 1, 1, ex("0"), ex("x"), ex("0"), {RobinData{}, RobinData{ex("0"), ex("t")}}, ex("x*t"));
    auto m = build_mesh(d, 3, 3);
    EstimateContext ctx(pc, m);
    WeightTuple nu_only{1, 0, 0, 0, 0, "test"};
    CHECK(error_measure(interpolate(ex("0"), m), nu_only, ctx).total() == doctest::Approx(1.0 / 3).epsilon(1e-13));
    CHECK(error_measure(interpolate(ex("0"), m), WeightTuple{}, ctx).total() == 0.0);
    WeightTuple all{0, 0, 0, 1, 1, "test"};
    auto b = error_measure(interpolate(ex("0"), m), all, ctx);
    CHECK(b.terminal == doctest::Approx(1.0 / 3));
    CHECK(b.robin == 0.0);
}

TEST_CASE("error measure is homogeneous of degree two") {
    std::mt19937_64 rng(4);
    auto w = weights_from_params(Estimator::Thm1, {1, 1});
    w.c0 = 0.3;
    auto bil = rdtest::bilinear_case();
    auto mb = build_mesh(bil.domain(), 5, 5);
    EstimateContext cb(bil, mb);
    auto ub = interpolate(bil.exact()->u, mb);
    for (int trial = 0; trial < 10; ++trial) {
        auto d = rdtest::perturb(interpolate(ex("0"), mb), bil.domain(), 0.1, rng);
        auto b1 = error_measure(ub + d, w, cb);
        auto b3 = error_measure(ub + 3.0 * d, w, cb);
        CHECK(b3.gradient == doctest::Approx(9 * b1.gradient).epsilon(1e-10));
        CHECK(b3.reaction == doctest::Approx(9 * b1.reaction).epsilon(1e-10));
        CHECK(b3.terminal == doctest::Approx(9 * b1.terminal).epsilon(1e-10));
        CHECK(b3.robin == doctest::Approx(9 * b1.robin).epsilon(1e-10));
        CHECK(b1.total() > 0);
    }
}

TEST_CASE("combined norm") {
    auto pc = rdtest::bilinear_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    EstimateContext ctx(pc, m);
    auto u = interpolate(pc.exact()->u, m);
    auto p = interpolate_flux(pc.exact()->flux, m);
    CHECK(combined_norm(u, p, {1, 1, 1, 1}, ctx) < 1e-24);
    auto bubble = interpolate(ex("x*t*(1-x)"), m);
    const double direct = integrate_spacetime([&](double x, double t) { return std::pow(bubble.eval(x, t).dx, 2); }, m,
                                              QuadratureRule::gauss_legendre(5));
    CHECK(combined_norm(u + bubble, p, {1, 1, 0, 0}, ctx) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(combined_norm(u + bubble, p, {0, 0, 0, 0}, ctx) == 0.0);
    // theta = zeta = 0 reduces to the first and fourth terms of the error measure
    WeightTuple w{2, 0, 0, 3, 0, "test"};
    CHECK(combined_norm(u + bubble, p, {2, 0, 0, 3}, ctx) ==
          doctest::Approx(error_measure(u + bubble, w, ctx).total()).epsilon(1e-12));
}
