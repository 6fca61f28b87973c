#pragma once

#include <random>
#include <vector>

#include "rdbounds/fe.hpp"
#include "rdbounds/problem.hpp"

namespace rdtest {

using namespace rdbounds;

inline ScalarExpr ex(const char* s) { return parse_expr(s); }

/// u = sin(pi x)(1 + t), A = 1, lambda = 0, Dirichlet at both ends.
inline ProblemCase sine_case() {
    Domain d(1.0, 1.0, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    return manufacture(ex("sin(pi*x)*(1+t)"), ex("1"), ex("0"), {}, d, 1.0, 1.0);
}

/// u = x(1 + t), A = 1, lambda = 0, Dirichlet left, Robin right with sigma = 1.
inline ProblemCase bilinear_case() {
    Domain d(1.0, 1.0, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    return manufacture(ex("x*(1+t)"), ex("1"), ex("0"), {ex("0"), ex("1")}, d, 1.0, 1.0);
}

/// Variable coefficients with a Robin end.
inline ProblemCase robin_case() {
    Domain d(1.0, 1.0, BoundaryKind::Dirichlet, BoundaryKind::Robin);
    return manufacture(ex("x*exp(-t)*(2-x)+x*t"), ex("1+x/2"), ex("1+x*t"), {ex("0"), ex("1+t")}, d, 1.0, 1.5);
}

/// Strongly varying reaction coefficient, Dirichlet at both ends.
inline ProblemCase piecewise_lambda_case() {
    Domain d(1.0, 1.0, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    return manufacture(ex("sin(pi*x)*(1+t)"), ex("1"), ex("piecewise(x, 1e-6, 0.5, 1000)"), {}, d, 1.0, 1.0);
}

inline ProblemCase variable_A_case() {
    Domain d(1.0, 1.0, BoundaryKind::Dirichlet, BoundaryKind::Dirichlet);
    return manufacture(ex("sin(pi*x)*exp(-t)"), ex("2+sin(pi*x)"), ex("1"), {}, d, 2.0, 3.0);
}

inline std::vector<ProblemCase> all_cases() {
    return {sine_case(), bilinear_case(), robin_case(), piecewise_lambda_case(), variable_A_case()};
}

/// Random nodal perturbation that keeps the Dirichlet values.
inline FEFunction perturb(const FEFunction& v, const Domain& domain, double amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FEFunction out = v;
    const auto& m = v.mesh();
    for (std::size_t n = 0; n <= m.nt(); ++n)
        for (std::size_t i = 0; i <= m.nx(); ++i) {
            if (i == 0 && !domain.is_robin(Side::Left)) continue;
            if (i == m.nx() && !domain.is_robin(Side::Right)) continue;
            out(i, n) += amplitude * u(rng);
        }
    return out;
}

inline FluxFunction perturb(const FluxFunction& y, double amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    FluxFunction out = y;
    for (double& v : out.values()) v += amplitude * u(rng);
    return out;
}

}  // namespace rdtest
