#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "rdbounds/errors.hpp"
#include "rdbounds/fe.hpp"
#include "rdbounds/quadrature.hpp"
#include "support.hpp"

using namespace rdbounds;
using rdtest::ex;

namespace {

const Domain kUnit(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);

double l2_error(const FEFunction& v, const ScalarExpr& u) {
    return std::sqrt(integrate_spacetime(
        [&](double x, double t) {
            const double e = u(x, t) - v.eval(x, t).value;
            return e * e;
        },
        v.mesh(), QuadratureRule::gauss_legendre(5)));
}

double slope(double e1, double e2) { return std::log2(e1 / e2); }

}  // namespace

TEST_CASE("gauss rule") {
    const auto r = QuadratureRule::gauss_legendre(5);
    double sum = 0;
    for (double w : r.weights()) {
        CHECK(w > 0);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.degree() == 9);
    CHECK_THROWS_AS(QuadratureRule::gauss_legendre(0), InputError);
}

TEST_CASE("integrate_spacetime") {
    const auto r = QuadratureRule::gauss_legendre(5);
    auto m = build_mesh(kUnit, 3, 2);
    CHECK(integrate_spacetime([](double, double) { return 1.0; }, m, r) == doctest::Approx(1.0));
    CHECK(integrate_spacetime([](double x, double t) { return x * t; }, m, r) == doctest::Approx(0.25));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 10; ++trial) {
        double a[10][10], exact = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                a[i][j] = u(rng);
                exact += a[i][j] / ((i + 1) * (j + 1));
            }
        auto poly = [&](double x, double t) {
            double s = 0;
            for (int i = 0; i < 10; ++i)
                for (int j = 0; j < 10; ++j) s += a[i][j] * std::pow(x, i) * std::pow(t, j);
            return s;
        };
        CHECK(std::abs(integrate_spacetime(poly, m, r) - exact) < 1e-13);
    }
    CHECK(integrate_space([](double x) { return x * x; }, m, r) == doctest::Approx(1.0 / 3));
    CHECK(integrate_time([](double t) { return 3 * t * t; }, m, r) == doctest::Approx(1.0));
    try {
        integrate_spacetime([](double x, double) { return x > 0.7 ? std::nan("") : 1.0; }, m, r);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("cell (2, 0)") != std::string::npos);
    }
}

TEST_CASE("space-time quadrature streams") {
    auto m = build_mesh(kUnit, 4, 3);
    SpaceTimeQuadrature q(m, QuadratureRule::gauss_legendre(3));
    CHECK(q.num_points() == 4 * 3 * 3 * 3);
    std::vector<double> ones(q.num_points(), 1.0);
    CHECK(q.integrate(ones) == doctest::Approx(1.0));
    auto cells = q.integrate_per_time_cell(ones);
    CHECK(cells.size() == 3);
    CHECK(cells[1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("interpolate") {
    auto m = build_mesh(kUnit, 3, 4);
    auto v = interpolate(ex("x*t"), m);
    for (double x : {0.1, 0.45, 0.9})
        for (double t : {0.05, 0.6}) {
            const auto pv = v.eval(x, t);
            CHECK(pv.value == doctest::Approx(x * t));
            CHECK(pv.dx == doctest::Approx(t));
            CHECK(pv.dt == doctest::Approx(x));
        }
    CHECK(interpolate(ex("0"), m).max_abs() == 0.0);
    CHECK_THROWS_AS(interpolate(ex("1/x"), m), InputError);
}

TEST_CASE("solve_fem reproduces a steady state") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    ProblemCase pc(d, ex("1"), 1, 1, ex("0"), ex("0"), ex("x"), {RobinData{}, RobinData{ex("1"), ex("2")}});
    auto m = build_mesh(d, 5, 7);
    for (auto scheme : {TimeScheme::BackwardEuler, TimeScheme::CrankNicolson}) {
        auto v = solve_fem(pc, m, scheme);
        for (std::size_t n = 0; n <= m.nt(); ++n)
            for (std::size_t i = 0; i <= m.nx(); ++i) CHECK(std::abs(v(i, n) - m.x_nodes()[i]) < 1e-12);
    }
}

TEST_CASE("solve_fem with zero data is zero") {
    ProblemCase pc(kUnit, ex("1"), 1, 1, ex("0"), ex("0"), ex("0"), {});
    auto v = solve_fem(pc, build_mesh(kUnit, 6, 6), TimeScheme::BackwardEuler);
    CHECK(v.max_abs() == 0.0);
}

TEST_CASE("solve_fem output is conforming and starts at the interpolant") {
    auto pc = rdtest::robin_case();
    auto m = build_mesh(pc.domain(), 8, 8);
    auto v = solve_fem(pc, m, TimeScheme::CrankNicolson);
    CHECK(v.dirichlet_conforming(pc.domain()));
    for (std::size_t i = 0; i <= m.nx(); ++i) CHECK(v(i, 0) == pc.phi()(m.x_nodes()[i], 0));
    auto pl = rdtest::piecewise_lambda_case();
    CHECK_THROWS_AS(solve_fem(pl, build_mesh(pl.domain(), 3, 3), TimeScheme::BackwardEuler), InputError);
    CHECK_NOTHROW(solve_fem(pl, align_mesh(pl, build_mesh(pl.domain(), 3, 3)), TimeScheme::BackwardEuler));
}

TEST_CASE("solve_fem converges at the expected rates") {
    auto pc = rdtest::sine_case();
    const auto& u = pc.exact()->u;
    std::vector<double> be, cn;
    for (std::size_t nx : {8, 16, 32}) {
        be.push_back(l2_error(solve_fem(pc, build_mesh(pc.domain(), nx, nx * nx / 4), TimeScheme::BackwardEuler), u));
        cn.push_back(l2_error(solve_fem(pc, build_mesh(pc.domain(), nx, nx), TimeScheme::CrankNicolson), u));
    }
    CHECK(slope(be[1], be[2]) > 1.8);
    CHECK(slope(cn[1], cn[2]) > 1.8);
    CHECK(be[2] < be[1]);
}

TEST_CASE("discrete energy does not grow without sources") {
    Domain d(1, 1, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    ProblemCase pc(d, ex("1+x"), 1, 2, ex("x*t"), ex("0"), ex("sin(3*x)"), {RobinData{}, RobinData{ex("1+t"), ex("0")}});
    auto m = build_mesh(d, 16, 20);
    const auto r = QuadratureRule::gauss_legendre(5);
    for (auto scheme : {TimeScheme::BackwardEuler, TimeScheme::CrankNicolson}) {
        auto v = solve_fem(pc, m, scheme);
        double prev = INFINITY;
        for (std::size_t n = 0; n <= m.nt(); ++n) {
            const double t = m.t_nodes()[n];
            const double e = integrate_space([&](double x) { return std::pow(v.eval(x, t).value, 2); }, m, r);
            CHECK(e <= prev * (1 + 1e-12));
            prev = e;
        }
    }
}

TEST_CASE("reconstruct_flux_averaged") {
    ProblemCase pc(kUnit, ex("1"), 1, 1, ex("0"), ex("0"), ex("0"), {});
    auto m = build_mesh(kUnit, 4, 2);
    auto y = reconstruct_flux_averaged(interpolate(ex("x*t"), m), pc);
    for (std::size_t n = 0; n <= m.nt(); ++n)
        for (std::size_t i = 0; i <= m.nx(); ++i) CHECK(y(i, n) == doctest::Approx(m.t_nodes()[n]));
    CHECK(reconstruct_flux_averaged(interpolate(ex("0"), m), pc).max_abs() == 0.0);
    auto m2 = build_mesh(kUnit, 2, 1);
    auto y2 = reconstruct_flux_averaged(interpolate(ex("x^2"), m2), pc);
    CHECK(y2(0, 0) == doctest::Approx(0.5));
    CHECK(y2(1, 0) == doctest::Approx(1.0));
    CHECK(y2(2, 0) == doctest::Approx(1.5));
}

TEST_CASE("prolongation keeps the function") {
    auto m = build_mesh(kUnit, 3, 2);
    auto v = interpolate(ex("sin(x)*t + x"), m);
    auto f = v.prolong(m.refined());
    for (double x : {0.1, 0.5, 0.77})
        for (double t : {0.2, 0.9}) CHECK(f.eval(x, t).value == doctest::Approx(v.eval(x, t).value).epsilon(1e-14));
}
