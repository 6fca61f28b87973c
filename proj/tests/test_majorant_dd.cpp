#include <cmath>
#include <random>

#include "doctest.h"
#include "rdbounds/errors.hpp"
#include "rdbounds/majorant_dd.hpp"
#include "support.hpp"

using namespace rdbounds;
using rdtest::ex;

namespace {

ProblemCase reaction_case() {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    return manufacture(ex("sin(pi*x)*(1+t*x)"), ex("1+x^2"), ex("1+x"), {}, d, 1.0, 2.0);
}

DDParams random_dd(const EstimateContext& ctx, std::mt19937_64& rng, bool random_mu) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    DDParams p = initial_dd_params(ctx, std::uniform_real_distribution<double>(0.2, 2.0)(rng));
    for (auto& a : p.alpha) {
        const double w0 = u(rng), w1 = u(rng);
        a = {(w0 + w1) / (p.delta * w0), (w0 + w1) / (p.delta * w1)};
    }
    p.rho2 = 0.6 + 2 * u(rng);
    p.rho1 = 1 / (2 - 1 / p.rho2) + u(rng);
    p.gamma = 0.5 + u(rng);
    if (random_mu) {
        p.mu.resize(ctx.quad().num_points());
        for (std::size_t k = 0; k < p.mu.size(); ++k) p.mu[k] = ctx.data().lambda[k] > 0 ? u(rng) : 0.0;
    }
    return p;
}

}  // namespace

TEST_CASE("zero data gives a zero bound") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    ProblemCase pc(d, ex("1"), 1, 1, ex("1"), ex("0"), ex("0"), {}, ex("0"));
    auto m = build_mesh(d, 4, 4);
    EstimateContext ctx(pc, m);
    auto dd = decompose(d, {0.5});
    auto v = interpolate(ex("0"), m);
    auto y = interpolate_flux(ex("0"), m);
    CHECK(majorant_dd_general(v, y, dd, initial_dd_params(ctx, 1), ctx).total == 0.0);
    CHECK(majorant_dd_meanzero(v, y, dd, initial_dd_params(ctx, 1), ctx).total == 0.0);
}

TEST_CASE("single subdomain collapses to the Poincare form") {
    auto pc = rdtest::variable_A_case();
    auto m = build_mesh(pc.domain(), 6, 6);
    EstimateContext ctx(pc, m);
    auto dd = decompose(pc.domain(), {});
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    auto y = reconstruct_flux_averaged(v, pc);
    DDParams p = initial_dd_params(ctx, 1);
    auto rep = majorant_dd_general(v, y, dd, p, ctx);
    auto r = residual_samples(ctx.sample(v), ctx.sample(y), ctx);
    std::vector<double> sq(r.Rf.size());
    for (std::size_t k = 0; k < sq.size(); ++k) sq[k] = r.Rf[k] * r.Rf[k];
    const double cp = poincare_constant(1.0);
    CHECK(rep.term("poincare") == doctest::Approx(2.0 * cp * cp / pc.nu1() * ctx.quad().integrate(sq)).epsilon(1e-12));
    // lambda = 1: the mean term is |Omega| * mean^2
    double mean_direct = 0;
    for (std::size_t s = 0; s < ctx.quad().num_slices(); ++s) {
        double mean = 0;
        for (std::size_t pp = 0; pp < ctx.quad().num_space_points(); ++pp)
            mean += ctx.quad().space_points()[pp].weight * r.Rf[ctx.quad().index(s, pp)];
        mean_direct += ctx.quad().slices()[s].weight * mean * mean;
    }
    CHECK(rep.term("subdomain_mean") == doctest::Approx(mean_direct).epsilon(1e-10));
}

TEST_CASE("general form bounds the error measure") {
    auto pc = reaction_case();
    auto m = build_mesh(pc.domain(), 8, 8);
    EstimateContext ctx(pc, m);
    std::mt19937_64 rng(51);
    auto v0 = solve_fem(pc, m, TimeScheme::CrankNicolson);
    for (int trial = 0; trial < 100; ++trial) {
        auto dd = decompose(pc.domain(), trial % 3 == 0 ? std::vector<double>{} : std::vector<double>{0.25, 0.5, 0.75});
        auto v = rdtest::perturb(v0, pc.domain(), 0.05, rng);
        auto y = rdtest::perturb(reconstruct_flux_averaged(v, pc), 0.2, rng);
        auto p = random_dd(ctx, rng, true);
        auto rep = majorant_dd_general(v, y, dd, p, ctx);
        CHECK(error_measure(v, rep.weights, ctx).total() <= rep.total + 1e-10 * (1 + rep.total));
    }
}

TEST_CASE("enforce_mean_condition") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    ProblemCase pc(d, ex("1"), 1, 1, ex("0"), ex("2.5"), ex("0"), {});
    auto m = build_mesh(d, 4, 3);
    EstimateContext ctx(pc, m);
    auto dd = decompose(d, {});
    auto v = interpolate(ex("0"), m);
    auto y = interpolate_flux(ex("0"), m);
    auto yq = enforce_mean_condition(y, v, dd, {}, ctx);
    for (double x : {0.0, 0.3, 1.0})
        for (double t : {0.1, 0.55}) {
            CHECK(yq.eval(x, t).value == doctest::Approx(-2.5 * x).epsilon(1e-12));
            CHECK(yq.eval(x, t).dx == doctest::Approx(-2.5).epsilon(1e-12));
        }
    // already balanced: no change
    auto yq2 = enforce_mean_condition(yq, v, decompose(d, {0.5}), {}, ctx);
    for (double x : {0.2, 0.8}) CHECK(yq2.eval(x, 0.4).value == doctest::Approx(yq.eval(x, 0.4).value).epsilon(1e-12));

    std::mt19937_64 rng(61);
    auto rc = reaction_case();
    auto mr = build_mesh(rc.domain(), 8, 6);
    EstimateContext cr(rc, mr);
    auto v0 = solve_fem(rc, mr, TimeScheme::BackwardEuler);
    for (int trial = 0; trial < 100; ++trial) {
        auto dd4 = decompose(rc.domain(), trial % 2 ? std::vector<double>{0.5} : std::vector<double>{0.25, 0.5, 0.75});
        auto vv = rdtest::perturb(v0, rc.domain(), 0.1, rng);
        auto yy = rdtest::perturb(reconstruct_flux_averaged(vv, rc), 0.5, rng);
        auto p = random_dd(cr, rng, true);
        auto fixed = enforce_mean_condition(yy, vv, dd4, p.mu, cr);
        auto r = residual_samples(cr.sample(vv), cr.sample(fixed), cr);
        auto si = subdomain_integrals(r.Rf, p.mu, dd4, cr);
        double worst = 0, scale = 0;
        for (const auto& row : si.mean)
            for (double mval : row) worst = std::max(worst, std::abs(mval));
        for (double rv : r.Rf) scale = std::max(scale, std::abs(rv));
        CHECK(worst <= 1e-12 * (1 + scale));
        auto rep = majorant_dd_meanzero(vv, fixed, dd4, p, cr);
        CHECK(error_measure(vv, rep.weights, cr).total() <= rep.total + 1e-10 * (1 + rep.total));
    }
}

TEST_CASE("zero-mean form with lambda = 0 and mu = 0") {
    auto pc = rdtest::sine_case();
    auto m = build_mesh(pc.domain(), 8, 8);
    EstimateContext ctx(pc, m);
    auto dd = decompose(pc.domain(), {0.25, 0.5, 0.75});
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    auto y = enforce_mean_condition(reconstruct_flux_averaged(v, pc), v, dd, {}, ctx);
    DDParams p = initial_dd_params(ctx, 1);
    auto rep = majorant_dd_meanzero(v, y, dd, p, ctx);
    CHECK(rep.term("reaction") == 0.0);
    CHECK(std::isfinite(rep.total));
    const double measure = error_measure(v, rep.weights, ctx).total();
    CHECK(measure <= rep.total);
    auto t1 = optimize_majorant_I(v, ctx);
    CHECK(error_measure(v, t1.report.weights, ctx).total() <= t1.report.total);
    CHECK_THROWS_AS(majorant_dd_meanzero(v, reconstruct_flux_averaged(v, pc), dd, p, ctx), AssumptionError);
    CHECK_THROWS_AS(majorant_dd_general(v, y, dd, p, ctx), AssumptionError);
}

TEST_CASE("standing assumptions") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    EstimateContext ctx(pc, m);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    auto y = reconstruct_flux_averaged(v, pc);
    try {
        majorant_dd_general(v, y, decompose(pc.domain(), {}), initial_dd_params(ctx, 1), ctx);
        FAIL("expected an assumption error");
    } catch (const AssumptionError& e) {
        CHECK(std::string(e.what()).find("thm2") != std::string::npos);
    }
    CHECK_THROWS_AS(enforce_mean_condition(y, v, decompose(pc.domain(), {0.3}), {}, ctx), InputError);
}

TEST_CASE("splitting subdomains never increases the Poincare term") {
    auto pc = reaction_case();
    auto m = build_mesh(pc.domain(), 8, 4);
    EstimateContext ctx(pc, m);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    auto r = residual_samples(ctx.sample(v), ctx.sample(reconstruct_flux_averaged(v, pc)), ctx);
    DDParams p = initial_dd_params(ctx, 1);
    double prev = INFINITY;
    for (auto breaks : {std::vector<double>{}, {0.5}, {0.25, 0.5}, {0.25, 0.5, 0.75}, {0.125, 0.25, 0.5, 0.75}}) {
        auto t = dd_terms(r.Rf, r.Rd, p, decompose(pc.domain(), breaks), ctx, false);
        double sum = 0;
        for (double c : t.poincare_term) sum += c;
        CHECK(sum <= prev * (1 + 1e-14));
        prev = sum;
    }
}

TEST_CASE("subdomain lambda sampling") {
    auto pc = rdtest::piecewise_lambda_case();
    auto m = align_mesh(pc, build_mesh(pc.domain(), 4, 2));
    auto lam = subdomain_lambda(pc, decompose(pc.domain(), {0.5}), m);
    CHECK(lam[0][0] == doctest::Approx(1e-6));
    CHECK(lam[1][1] == doctest::Approx(1000));
    auto half = subdomain_lambda(pc, decompose(pc.domain(), {0.5}), m, 64, 0.5);
    CHECK(half[0][1] == doctest::Approx(500));
}
