#include "rdbounds/problem.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

namespace rdbounds {

namespace {

template <class F>
void for_grid(const Domain& d, std::size_t n, F&& fn) {
    const std::size_t m = std::max<std::size_t>(n, 2);
    for (std::size_t j = 0; j < m; ++j) {
        const double t = d.horizon() * static_cast<double>(j) / static_cast<double>(m - 1);
        for (std::size_t i = 0; i < m; ++i) {
            const double x = d.length() * static_cast<double>(i) / static_cast<double>(m - 1);
            fn(x, t);
        }
    }
}

std::vector<double> merged_breaks(std::initializer_list<const ScalarExpr*> exprs, Var var) {
    std::vector<double> out;
    for (const ScalarExpr* e : exprs) {
        auto b = e->breakpoints(var);
        out.insert(out.end(), b.begin(), b.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace

ExactSolution make_exact(const ScalarExpr& u, const ScalarExpr& A) {
    ExactSolution ex;
    ex.u = u;
    ex.u_x = differentiate(u, Var::X);
    ex.u_t = differentiate(u, Var::T);
    ex.flux = A * ex.u_x;
    ex.flux_div = differentiate(ex.flux, Var::X);
    return ex;
}

ProblemCase::ProblemCase(Domain domain, ScalarExpr A, double nu1, double nu2, ScalarExpr lambda, ScalarExpr f,
                         ScalarExpr phi, std::array<RobinData, 2> robin, std::optional<ScalarExpr> exact_u)
    : domain_(domain), A_(std::move(A)), nu1_(nu1), nu2_(nu2), lambda_(std::move(lambda)), f_(std::move(f)),
      phi_(std::move(phi)), robin_(std::move(robin)) {
    if (!(nu1 > 0.0) || !(nu2 >= nu1) || !std::isfinite(nu2))
        throw InputError("coefficient bounds must satisfy 0 < nu1 <= nu2 < inf");
    for (Side s : {Side::Left, Side::Right}) {
        if (!domain_.is_robin(s)) robin_[s == Side::Left ? 0 : 1] = RobinData{};
        const RobinData& r = this->robin(s);
        if (r.sigma.depends_on(Var::X) || r.g.depends_on(Var::X))
            throw InputError("Robin data sigma and g may depend on t only");
    }
    if (phi_.depends_on(Var::T)) throw InputError("initial value phi may depend on x only");
    if (exact_u) exact_ = make_exact(*exact_u, A_);
}

bool ProblemCase::lambda_vanishes() const {
    auto c = lambda_.constant_value();
    return c && *c == 0.0;
}

void ProblemCase::validate(std::size_t n) const {
    const double tol = 1e-12;
    for_grid(domain_, n, [&](double x, double t) {
        const double a = A_(x, t);
        if (!(a >= nu1_ * (1.0 - tol)) || !(a <= nu2_ * (1.0 + tol)))
            throw InputError("A(" + std::to_string(x) + ", " + std::to_string(t) + ") = " + std::to_string(a) +
                             " violates nu1 <= A <= nu2");
        const double l = lambda_(x, t);
        if (!(l >= 0.0) || !std::isfinite(l))
            throw InputError("lambda must be finite and nonnegative, found " + std::to_string(l));
        if (!std::isfinite(f_(x, t))) throw InputError("f is not finite at sampled point");
    });
    for (Side s : domain_.robin_sides()) {
        for (std::size_t j = 0; j < n; ++j) {
            const double t = domain_.horizon() * static_cast<double>(j) / static_cast<double>(std::max<std::size_t>(n - 1, 1));
            const double sg = robin(s).sigma(0.0, t);
            if (!(sg >= 0.0) || !std::isfinite(sg)) throw InputError("sigma must be finite and nonnegative");
            if (!std::isfinite(robin(s).g(0.0, t))) throw InputError("g is not finite at sampled time");
        }
    }
    for (Side s : {Side::Left, Side::Right}) {
        if (domain_.is_robin(s)) continue;
        const double v = phi_(domain_.endpoint(s), 0.0);
        if (std::abs(v) > 1e-12) throw InputError("initial value phi must vanish on Dirichlet endpoints");
    }
}

std::vector<double> ProblemCase::x_breakpoints() const {
    return merged_breaks({&A_, &lambda_, &f_, &phi_}, Var::X);
}

std::vector<double> ProblemCase::t_breakpoints() const {
    return merged_breaks({&A_, &lambda_, &f_, &robin_[0].sigma, &robin_[0].g, &robin_[1].sigma, &robin_[1].g},
                         Var::T);
}

double ProblemCase::strong_residual(std::span<const std::array<double, 2>> points) const {
    if (!exact_) throw InputError("strong residual needs an exact solution");
    const ExactSolution& ex = *exact_;
    double worst = 0.0;
    for (auto [x, t] : points) {
        const double eq = ex.u_t(x, t) - ex.flux_div(x, t) + lambda_(x, t) * ex.u(x, t) - f_(x, t);
        worst = std::max(worst, std::abs(eq));
        worst = std::max(worst, std::abs(ex.u(x, 0.0) - phi_(x, 0.0)));
        for (Side s : {Side::Left, Side::Right}) {
            const double xb = domain_.endpoint(s);
            if (domain_.is_robin(s)) {
                const double bc = ex.flux(xb, t) * Domain::normal(s) + robin(s).sigma(xb, t) * ex.u(xb, t) -
                                  robin(s).g(xb, t);
                worst = std::max(worst, std::abs(bc));
            } else {
                worst = std::max(worst, std::abs(ex.u(xb, t)));
            }
        }
    }
    return worst;
}

ProblemCase manufacture(const ScalarExpr& u, const ScalarExpr& A, const ScalarExpr& lambda, const SigmaFields& sigma,
                        const Domain& domain, double nu1, double nu2) {
    for (Side s : {Side::Left, Side::Right}) {
        if (domain.is_robin(s)) continue;
        for (int j = 0; j <= 64; ++j) {
            const double t = domain.horizon() * j / 64.0;
            if (std::abs(u(domain.endpoint(s), t)) > 1e-12)
                throw InputError("exact solution does not vanish on the Dirichlet endpoint x = " +
                                 std::to_string(domain.endpoint(s)));
        }
    }
    const ExactSolution ex = make_exact(u, A);
    const ScalarExpr f = ex.u_t - ex.flux_div + lambda * u;
    const ScalarExpr phi = u.substitute(Var::T, 0.0);
    std::array<RobinData, 2> robin;
    for (Side s : domain.robin_sides()) {
        const double xb = domain.endpoint(s);
        const ScalarExpr& sg = s == Side::Left ? sigma.left : sigma.right;
        RobinData r;
        r.sigma = sg.substitute(Var::X, xb);
        r.g = (ex.flux * ScalarExpr::constant(Domain::normal(s)) + sg * u).substitute(Var::X, xb);
        robin[s == Side::Left ? 0 : 1] = r;
    }
    return ProblemCase(domain, A, nu1, nu2, lambda, f, phi, robin, u);
}

std::array<double, 2> sampled_bounds(const ScalarExpr& A, const Domain& domain, std::size_t n) {
    double lo = INFINITY, hi = -INFINITY;
    for_grid(domain, n, [&](double x, double t) {
        const double a = A(x, t);
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    });
    return {lo, hi};
}

}  // namespace rdbounds
