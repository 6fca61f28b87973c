#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "rdbounds/errors.hpp"
#include "rdbounds/majorant.hpp"
#include "support.hpp"

using namespace rdbounds;
using rdtest::ex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MajorantParams random_params(const EstimateContext& ctx, std::mt19937_64& rng, double delta, double gamma) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    MajorantParams p = initial_params(ctx, delta, gamma);
    for (auto& a : p.alpha) {
        const double w[3] = {u(rng), u(rng), u(rng)};
        for (int i = 0; i < 3; ++i) a[i] = (w[0] + w[1] + w[2]) / (delta * w[i]);
    }
    p.mu.resize(ctx.quad().num_points());
    for (std::size_t k = 0; k < p.mu.size(); ++k) p.mu[k] = ctx.data().lambda[k] > 0 ? u(rng) : 0.0;
    return p;
}

double objective(const AlphaTriple& c, double delta, double s1, double s2) {
    const double s[3] = {s1, s2, 1 - s1 - s2};
    double sum = 0;
    for (int i = 0; i < 3; ++i) {
        if (c[i] == 0) continue;
        if (s[i] <= 0) return kInf;
        sum += c[i] / (delta * s[i]);
    }
    return sum;
}

// Minimum over the constraint manifold 1/alpha_i = delta s_i, s on the simplex.
double alpha_grid_oracle(const AlphaTriple& c, double delta) {
    double best = kInf, b1 = 1.0 / 3, b2 = 1.0 / 3, step = 1.0 / 200;
    for (int level = 0; level < 4; ++level) {
        const double c1 = b1, c2 = b2;
        for (int i = -200; i <= 200; ++i)
            for (int j = -200; j <= 200; ++j) {
                const double s1 = level == 0 ? (i + 200) * step / 2 : c1 + i * step;
                const double s2 = level == 0 ? (j + 200) * step / 2 : c2 + j * step;
                if (s1 < 0 || s2 < 0 || s1 + s2 > 1) continue;
                const double v = objective(c, delta, s1, s2);
                if (v < best) best = v, b1 = s1, b2 = s2;
            }
        step /= 100;
    }
    return best;
}

}  // namespace

TEST_CASE("residual evaluators") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    ResidualFields zero(interpolate(ex("0"), m), interpolate_flux(ex("0"), m), pc);
    for (double x : {0.1, 0.6})
        for (double t : {0.2, 0.7}) {
            CHECK(zero.Rf(x, t) == doctest::Approx(pc.f()(x, t)));
            CHECK(zero.Rd(x, t) == 0.0);
        }
    CHECK(zero.Rb(Side::Right, 0.3) == doctest::Approx(pc.robin(Side::Right).g(1, 0.3)));
    CHECK(zero.e0(0.4) == doctest::Approx(pc.phi()(0.4, 0)));

    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    ProblemCase unit(d, ex("1"), 1, 1, ex("1"), ex("x"), ex("x"), {RobinData{}, RobinData{ex("1"), ex("2")}});
    auto v = interpolate(ex("x*(1+t)"), m);
    auto y = reconstruct_flux_averaged(v, unit);
    auto shifted = y;
    for (double& s : shifted.values()) s += 0.7;
    ResidualFields a(v, y, unit), b(v, shifted, unit);
    CHECK(b.Rd(0.3, 0.4) - a.Rd(0.3, 0.4) == doctest::Approx(0.7));
    CHECK(b.Rf(0.3, 0.4) == doctest::Approx(a.Rf(0.3, 0.4)));
    CHECK(b.Rb(Side::Right, 0.4) - a.Rb(Side::Right, 0.4) == doctest::Approx(-0.7));
}

TEST_CASE("exactness") {
    auto pc = rdtest::bilinear_case();
    auto m = build_mesh(pc.domain(), 4, 4);
    EstimateContext ctx(pc, m);
    auto v = interpolate(pc.exact()->u, m);
    auto y = interpolate_flux(pc.exact()->flux, m);
    auto rep = majorant_I(v, y, initial_params(ctx, 1, 1), estimate_constants(pc), ctx);
    CHECK(rep.total <= 1e-11);
    auto opt = optimize_majorant_I(v, ctx);
    CHECK(opt.report.total <= 1e-11);
    CHECK(opt.report.trace.size() <= 3);
}

TEST_CASE("report bookkeeping and the mu = 0 abridged form") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 6, 6);
    EstimateContext ctx(pc, m);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    auto y = reconstruct_flux_averaged(v, pc);
    auto rep = majorant_I(v, y, initial_params(ctx, 1, 1), estimate_constants(pc), ctx);
    double sum = 0;
    for (const auto& t : rep.terms) sum += t.value;
    CHECK(rep.total == doctest::Approx(sum).epsilon(1e-12));
    CHECK(rep.term("reaction") == 0.0);
    CHECK(rep.weights.nu == 1);
    CHECK(rep.weights.chi == 2);
    MajorantParams bad = initial_params(ctx, 1, 1);
    bad.alpha[0][0] = 1.0;
    CHECK_THROWS_AS(majorant_I(v, y, bad, estimate_constants(pc), ctx), InputError);
    auto sine = rdtest::sine_case();
    EstimateContext cs(sine, m);
    MajorantParams mu = initial_params(cs, 1, 1);
    mu.mu.assign(cs.quad().num_points(), 0.5);
    CHECK_THROWS_AS(majorant_I(solve_fem(sine, m, TimeScheme::BackwardEuler), y, mu, estimate_constants(sine), cs),
                    InputError);
}

TEST_CASE("guarantee on random perturbations") {
    std::mt19937_64 rng(21);
    for (const ProblemCase& pc : rdtest::all_cases()) {
        auto m = align_mesh(pc, build_mesh(pc.domain(), 8, 8));
        EstimateContext ctx(pc, m);
        const auto c = estimate_constants(pc);
        auto v0 = solve_fem(pc, m, TimeScheme::BackwardEuler);
        for (int trial = 0; trial < 20; ++trial) {
            auto v = rdtest::perturb(v0, pc.domain(), 0.05, rng);
            auto y = rdtest::perturb(reconstruct_flux_averaged(v, pc), 0.2, rng);
            const double delta = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
            const double gamma = std::uniform_real_distribution<double>(1.0, 4.0)(rng);
            auto p = random_params(ctx, rng, delta, gamma);
            auto rep = majorant_I(v, y, p, c, ctx);
            const double measure = error_measure(v, rep.weights, ctx).total();
            CHECK(measure <= rep.total + 1e-10 * (1 + rep.total));
        }
    }
}

TEST_CASE("optimize_alphas") {
    auto a = optimize_alphas({1, 1, 1}, 1);
    CHECK(a.alpha[0] == doctest::Approx(3));
    CHECK(a.objective == doctest::Approx(9));
    auto b = optimize_alphas({4, 1, 0}, 2);
    CHECK(b.alpha[0] == doctest::Approx(0.75));
    CHECK(b.alpha[1] == doctest::Approx(1.5));
    CHECK(std::isinf(b.alpha[2]));
    CHECK(b.objective == doctest::Approx(4.5));
    auto z = optimize_alphas({0, 0, 0}, 0.5);
    CHECK(z.alpha[1] == doctest::Approx(6));
    CHECK(z.objective == 0);
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 5);
    for (int trial = 0; trial < 50; ++trial) {
        AlphaTriple c{u(rng), u(rng), trial % 5 == 0 ? 0.0 : u(rng)};
        const double delta = std::uniform_real_distribution<double>(0.1, 2)(rng);
        auto r = optimize_alphas(c, delta);
        double inv = 0, obj = 0;
        for (int i = 0; i < 3; ++i) {
            inv += 1 / r.alpha[i];
            if (c[i] > 0) obj += r.alpha[i] * c[i];
        }
        CHECK(inv == doctest::Approx(delta).epsilon(1e-12));
        CHECK(obj == doctest::Approx(r.objective).epsilon(1e-12));
        const double oracle = alpha_grid_oracle(c, delta);
        CHECK(r.objective <= oracle * (1 + 1e-12));
        CHECK(r.objective == doctest::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("optimize_mu") {
    CHECK(optimal_mu(0, 1, 1, 1, 1) == 0);
    CHECK(optimal_mu(1, 1, 1, 1, 1) == doctest::Approx(0.5));
    CHECK(optimal_mu(1e6, 1, 1, 1, 1) == doctest::Approx(0.999999).epsilon(1e-9));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.01, 10);
    for (int trial = 0; trial < 50; ++trial) {
        const double lam = u(rng), gamma = 1 + u(rng), a1 = u(rng), cf = u(rng) / 10, nu1 = u(rng);
        const double k2 = a1 * cf * cf / nu1;
        auto g = [&](double mu) { return gamma * mu * mu / lam + k2 * (1 - mu) * (1 - mu); };
        double best = kInf;
        for (int i = 0; i <= 200000; ++i) best = std::min(best, g(i / 200000.0));
        const double mu = optimal_mu(lam, gamma, a1, cf, nu1);
        CHECK(mu >= 0);
        CHECK(mu <= 1);
        CHECK(g(mu) <= best * (1 + 1e-12));
        CHECK(g(mu) == doctest::Approx(best).epsilon(1e-6));
        CHECK(optimal_mu(2 * lam, gamma, a1, cf, nu1) >= mu);
    }
}

TEST_CASE("flux minimization reproduces the exact steady flux") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    ProblemCase pc(d, ex("1"), 1, 1, ex("0"), ex("0"), ex("x"), {RobinData{}, RobinData{ex("1"), ex("2")}});
    auto m = build_mesh(d, 5, 3);
    EstimateContext ctx(pc, m);
    auto v = interpolate(ex("x"), m);
    auto y = reconstruct_flux_minimizing(v, initial_params(ctx, 1, 1), estimate_constants(pc), ctx);
    for (double val : y.values()) CHECK(std::abs(val - 1.0) < 1e-12);
}

TEST_CASE("flux minimization never increases the majorant") {
    std::mt19937_64 rng(31);
    auto all = rdtest::all_cases();
    for (int trial = 0; trial < 100; ++trial) {
        const ProblemCase& pc = all[trial % all.size()];
        auto m = align_mesh(pc, build_mesh(pc.domain(), 6, 5));
        EstimateContext ctx(pc, m);
        const auto c = estimate_constants(pc);
        auto v = rdtest::perturb(solve_fem(pc, m, TimeScheme::BackwardEuler), pc.domain(), 0.05, rng);
        auto p = random_params(ctx, rng, 1.0, 1.5);
        auto y_avg = reconstruct_flux_averaged(v, pc);
        auto y_min = reconstruct_flux_minimizing(v, p, c, ctx);
        const double a = majorant_I(v, y_avg, p, c, ctx).total;
        const double b = majorant_I(v, y_min, p, c, ctx).total;
        CHECK(b <= a * (1 + 1e-12));
        // y_min is a stationary point: random directions do not decrease it
        auto y_dir = rdtest::perturb(y_min, 1e-3, rng);
        CHECK(majorant_I(v, y_dir, p, c, ctx).total >= b * (1 - 1e-12));
        // convexity in y
        auto y1 = rdtest::perturb(y_avg, 0.5, rng), y2 = rdtest::perturb(y_avg, 0.5, rng);
        FluxFunction mid(m);
        for (std::size_t k = 0; k < mid.values().size(); ++k) mid.values()[k] = 0.5 * (y1.values()[k] + y2.values()[k]);
        const double m1 = majorant_I(v, y1, p, c, ctx).total, m2 = majorant_I(v, y2, p, c, ctx).total;
        CHECK(majorant_I(v, mid, p, c, ctx).total <= 0.5 * (m1 + m2) * (1 + 1e-12));
    }
}

TEST_CASE("flux minimization on one cell matches a grid search") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    ProblemCase pc(d, ex("1"), 1, 1, ex("0"), ex("1+x"), ex("0"), {});
    auto m = build_mesh(d, 1, 1);
    EstimateContext ctx(pc, m);
    const auto c = estimate_constants(pc);
    auto v = interpolate(ex("0"), m);
    auto p = initial_params(ctx, 1, 1);
    auto y = reconstruct_flux_minimizing(v, p, c, ctx);
    const double best_solver = majorant_I(v, y, p, c, ctx).total;
    double best = kInf;
    FluxFunction trial(m);
    std::vector<double> centre(y.values().begin(), y.values().end());
    for (double step : {0.2, 0.02, 0.002}) {
        std::vector<double> next = centre;
        for (int a = -5; a <= 5; ++a)
            for (int b = -5; b <= 5; ++b)
                for (int cc = -5; cc <= 5; ++cc)
                    for (int e = -5; e <= 5; ++e) {
                        const int off[4] = {a, b, cc, e};
                        for (int k = 0; k < 4; ++k) trial.values()[k] = centre[k] + step * off[k];
                        const double val = majorant_I(v, trial, p, c, ctx).total;
                        if (val < best) best = val, next.assign(trial.values().begin(), trial.values().end());
                    }
        centre = next;
    }
    CHECK(best_solver <= best * (1 + 1e-12));
    CHECK(best_solver == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("alternating minimization is monotone") {
    std::mt19937_64 rng(41);
    auto all = rdtest::all_cases();
    for (int trial = 0; trial < 100; ++trial) {
        const ProblemCase& pc = all[trial % all.size()];
        auto m = align_mesh(pc, build_mesh(pc.domain(), 6, 4));
        EstimateContext ctx(pc, m);
        auto v = rdtest::perturb(solve_fem(pc, m, TimeScheme::BackwardEuler), pc.domain(), 0.05, rng);
        MajorantOptions o;
        o.delta = std::uniform_real_distribution<double>(0.2, 2.0)(rng);
        o.gamma = std::uniform_real_distribution<double>(1.0, 3.0)(rng);
        auto r = optimize_majorant_I(v, ctx, o);
        const auto& tr = r.report.trace;
        REQUIRE(tr.size() >= 2);
        for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1]);
        CHECK(tr.back() <= tr.front());
        CHECK(r.report.total == tr.back());
        CHECK(error_measure(v, r.report.weights, ctx).total() <= r.report.total * (1 + 1e-10));
    }
}

TEST_CASE("ratio sweep picks an admissible pair") {
    auto pc = rdtest::sine_case();
    auto m = build_mesh(pc.domain(), 6, 6);
    EstimateContext ctx(pc, m);
    auto v = solve_fem(pc, m, TimeScheme::BackwardEuler);
    MajorantOptions o;
    o.sweep = true;
    o.max_iterations = 5;
    auto r = optimize_majorant_I(v, ctx, o);
    CHECK(r.report.scalars.delta > 0);
    CHECK(error_measure(v, r.report.weights, ctx).total() <= r.report.total);
}
