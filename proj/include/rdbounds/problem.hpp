#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rdbounds/expr.hpp"
#include "rdbounds/geometry.hpp"

namespace rdbounds {

/// Symbolic exact solution with the derived fields the estimators need.
struct ExactSolution {
    ScalarExpr u;
    ScalarExpr u_x;
    ScalarExpr u_t;
    ScalarExpr flux;      // p = A u_x
    ScalarExpr flux_div;  // d/dx p
};

/// Robin data at one endpoint; both are functions of t only.
struct RobinData {
    ScalarExpr sigma;
    ScalarExpr g;
};

/// Data of u_t - (A u_x)_x + lambda u = f on (0, L) x (0, T), u(., 0) = phi,
/// u = 0 on Dirichlet endpoints, A u_x n + sigma u = g on Robin endpoints.
class ProblemCase {
public:
    ProblemCase(Domain domain, ScalarExpr A, double nu1, double nu2, ScalarExpr lambda, ScalarExpr f,
                ScalarExpr phi, std::array<RobinData, 2> robin, std::optional<ScalarExpr> exact_u = std::nullopt);

    const Domain& domain() const { return domain_; }
    const ScalarExpr& A() const { return A_; }
    double nu1() const { return nu1_; }
    double nu2() const { return nu2_; }
    const ScalarExpr& lambda() const { return lambda_; }
    const ScalarExpr& f() const { return f_; }
    const ScalarExpr& phi() const { return phi_; }
    /// sigma and g at an endpoint; identically zero on a Dirichlet endpoint.
    const RobinData& robin(Side side) const { return robin_[side == Side::Left ? 0 : 1]; }
    const std::optional<ExactSolution>& exact() const { return exact_; }
    bool lambda_vanishes() const;

    /// Sampled checks of nu1 <= A <= nu2, lambda >= 0, sigma >= 0 and phi = 0 on
    /// Dirichlet endpoints on an n x n grid of Q_T. Throws InputError.
    void validate(std::size_t samples_per_direction = 100) const;

    /// Break points of every piecewise coefficient over x (resp. t).
    std::vector<double> x_breakpoints() const;
    std::vector<double> t_breakpoints() const;

    /// Largest pointwise residual of the strong equations evaluated with the
    /// exact solution at the given points; requires exact().
    double strong_residual(std::span<const std::array<double, 2>> points) const;

private:
    Domain domain_;
    ScalarExpr A_;
    double nu1_;
    double nu2_;
    ScalarExpr lambda_;
    ScalarExpr f_;
    ScalarExpr phi_;
    std::array<RobinData, 2> robin_;
    std::optional<ExactSolution> exact_;
};

/// sigma per endpoint for manufacture(); ignored on Dirichlet endpoints.
struct SigmaFields {
    ScalarExpr left;
    ScalarExpr right;
};

/// Builds f, g and phi from an exact solution u (must vanish on Dirichlet endpoints).
ProblemCase manufacture(const ScalarExpr& u, const ScalarExpr& A, const ScalarExpr& lambda, const SigmaFields& sigma,
                        const Domain& domain, double nu1, double nu2);

/// Dense-sampled min/max of A over Q_T (used when a config omits nu1/nu2).
std::array<double, 2> sampled_bounds(const ScalarExpr& A, const Domain& domain, std::size_t samples_per_direction = 100);

ExactSolution make_exact(const ScalarExpr& u, const ScalarExpr& A);

}  // namespace rdbounds
