#include <cmath>
#include <random>

#include "doctest.h"
#include "rdbounds/errors.hpp"
#include "rdbounds/geometry.hpp"
#include "rdbounds/minorant.hpp"
#include "support.hpp"

using namespace rdbounds;
using rdtest::ex;

namespace {

KappaVector random_kappa(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.1, 3.0);
    KappaVector k;
    for (double& x : k.k) x = u(rng);
    return k;
}

}  // namespace

TEST_CASE("zero test function") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    EstimateContext ctx(pc, m);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    CHECK(minorant_value(v, FEFunction(m), KappaVector{}, ctx) == 0.0);
}

TEST_CASE("exact discrete solution gives zero") {
    auto pc = rdtest::bilinear_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    auto fine = m.refined();
    EstimateContext ctx(pc, fine);
    auto u = interpolate(pc.exact()->u, m);
    std::mt19937_64 rng(81);
    for (int trial = 0; trial < 10; ++trial) {
        auto eta = rdtest::perturb(FEFunction(fine), pc.domain(), 1.0, rng);
        CHECK(minorant_value(u, eta, random_kappa(rng), ctx) <= 1e-12);
    }
    auto res = maximize_minorant(u, KappaVector{}, ctx);
    CHECK(res.value <= 1e-12);
    CHECK(res.eta.max_abs() <= 1e-10);
}

TEST_CASE("value is quadratic along rays") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 5, 5);
    EstimateContext ctx(pc, m);
    std::mt19937_64 rng(82);
    auto v = rdtest::perturb(solve_fem(pc, m, TimeScheme::BackwardEuler), pc.domain(), 0.1, rng);
    for (PenaltyMode mode : {PenaltyMode::AWeighted, PenaltyMode::Plain}) {
        KappaVector k = random_kappa(rng);
        auto eta = rdtest::perturb(FEFunction(m), pc.domain(), 1.0, rng);
        const double v1 = minorant_value(v, eta, k, ctx, mode), v2 = minorant_value(v, 2.0 * eta, k, ctx, mode);
        const double quad = (2 * v1 - v2) / 2, lin = v1 + quad;
        CHECK(quad > 0);
        CHECK(minorant_value(v, 3.0 * eta, k, ctx, mode) == doctest::Approx(3 * lin - 9 * quad).epsilon(1e-12));
        CHECK(minorant_value(v, -0.5 * eta, k, ctx, mode) == doctest::Approx(-0.5 * lin - 0.25 * quad).epsilon(1e-12));
        auto res = maximize_minorant(v, k, ctx, mode);
        CHECK(minorant_value(v, res.eta, k, ctx, mode) == doctest::Approx(res.value).epsilon(1e-10));
        for (int trial = 0; trial < 10; ++trial) {
            auto other = res.eta + rdtest::perturb(FEFunction(m), pc.domain(), 0.01, rng);
            CHECK(minorant_value(v, other, k, ctx, mode) <= res.value);
        }
    }
}

TEST_CASE("minorant stays below the error measure") {
    std::mt19937_64 rng(83);
    for (const ProblemCase& pc : rdtest::all_cases()) {
        auto m = align_mesh(pc, build_mesh(pc.domain(), 6, 6));
        auto fine = m.refined();
        EstimateContext ctx(pc, fine);
        auto v0 = solve_fem(pc, m, TimeScheme::BackwardEuler);
        for (int trial = 0; trial < 20; ++trial) {
            auto v = rdtest::perturb(v0, pc.domain(), 0.05, rng);
            KappaVector k = random_kappa(rng);
            auto res = maximize_minorant(v, k, ctx);
            CHECK(res.value >= 0.0);
            CHECK(res.value <= error_measure(v, res.weights, ctx).total() * (1 + 1e-10));
            if (pc.nu2() <= 1.0) {
                auto plain = maximize_minorant(v, k, ctx, PenaltyMode::Plain);
                CHECK(plain.value <= error_measure(v, plain.weights, ctx).total() * (1 + 1e-10));
                CHECK(plain.notes.empty());
            }
        }
    }
}

TEST_CASE("refining the test mesh never lowers the value") {
    auto pc = rdtest::variable_A_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    double prev = 0.0;
    SpaceTimeMesh t = m;
    for (int level = 0; level < 3; ++level) {
        EstimateContext ctx(pc, t);
        const double val = maximize_minorant(v, KappaVector{}, ctx).value;
        CHECK(val >= prev * (1 - 1e-12));
        prev = val;
        t = t.refined();
    }
    EstimateContext coarse(pc, build_mesh(pc.domain(), 3, 4));
    CHECK_THROWS_AS(maximize_minorant(v, KappaVector{}, coarse), InputError);
}

TEST_CASE("pinned terminal and Robin values") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 6, 6);
    EstimateContext ctx(pc, m.refined());
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    KappaVector k;
    k[3] = 0.0;
    k[4] = 0.0;
    auto res = maximize_minorant(v, k, ctx);
    const auto& em = res.eta.mesh();
    for (std::size_t i = 0; i <= em.nx(); ++i) CHECK(res.eta(i, em.nt()) == 0.0);
    for (std::size_t n = 0; n <= em.nt(); ++n) CHECK(res.eta(em.nx(), n) == 0.0);
    CHECK(res.value <= error_measure(v, res.weights, ctx).total());
    CHECK(res.value <= maximize_minorant(v, KappaVector{}, ctx).value);
    KappaVector bad;
    bad[0] = 0.0;
    CHECK_THROWS_AS(maximize_minorant(v, bad, ctx), InputError);
    bad = KappaVector{};
    bad[2] = 0.0;
    CHECK_THROWS_AS(maximize_minorant(v, bad, ctx), InputError);
}

TEST_CASE("optimize_kappas") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 6, 6);
    EstimateContext ctx(pc, m.refined());
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    WeightTuple target{1.0, 0.0, 1.0, 1.0, 2.0, "target"};
    auto res = optimize_kappas(v, target, ctx);
    const double cf = friedrichs_constant(pc.domain());
    CHECK(res.kappa[3] == 2.0);
    CHECK(res.kappa[4] == 4.0);
    CHECK(res.kappa[2] == 2.0);
    CHECK(res.kappa[0] / 2 + res.kappa[1] / 2 * cf * cf / pc.nu1() == doctest::Approx(1.0));
    const double measure = error_measure(v, target, ctx).total();
    CHECK(res.value <= measure);
    CHECK(res.value <= error_measure(v, res.weights, ctx).total());
    KappaVector start{{1.0, pc.nu1() / (cf * cf), 2.0, 2.0, 4.0}};
    CHECK(res.value >= maximize_minorant(v, start, ctx).value);

    // lambda = 0: kappa3 is not used
    auto sine = rdtest::sine_case();
    EstimateContext cs(sine, m.refined());
    auto vs = solve_fem(sine, m, TimeScheme::BackwardEuler);
    auto rs = optimize_kappas(vs, target, cs);
    CHECK(rs.kappa[2] == 1.0);
    CHECK(rs.value <= error_measure(vs, target, cs).total());

    // c_lambda = 0 with lambda > 0 moves part of the L2 budget to kappa3
    WeightTuple no_reaction{1.0, 0.5, 0.0, 1.0, 2.0, "target"};
    auto rr = optimize_kappas(v, no_reaction, ctx);
    CHECK(rr.kappa[2] > 0.0);
    CHECK(rr.value <= error_measure(v, no_reaction, ctx).total());
    CHECK_THROWS_AS(optimize_kappas(v, WeightTuple{0.0, 0.0, 1.0, 1.0, 2.0, ""}, ctx), InputError);
}

TEST_CASE("efficiency on a smooth case") {
    auto pc = rdtest::sine_case();
    auto m = build_mesh(pc.domain(), 16, 16);
    EstimateContext ctx(pc, m.refined());
    auto v = solve_fem(pc, m, TimeScheme::CrankNicolson);
    WeightTuple target{1.0, 0.0, 1.0, 1.0, 2.0, "target"};
    auto res = optimize_kappas(v, target, ctx);
    const double ratio = std::sqrt(res.value / error_measure(v, target, ctx).total());
    MESSAGE("minorant efficiency " << ratio);
    CHECK(ratio <= 1.0);
    CHECK(ratio >= 0.5);
}
