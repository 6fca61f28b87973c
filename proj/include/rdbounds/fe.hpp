#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "rdbounds/geometry.hpp"
#include "rdbounds/problem.hpp"
#include "rdbounds/quadrature.hpp"

namespace rdbounds {

enum class TimeScheme { BackwardEuler, CrankNicolson };

struct PointValue {
    double value = 0.0;
    double dx = 0.0;
    double dt = 0.0;
};

/// Continuous field, bilinear on every space-time cell, stored by node.
/// Node (i, n) sits at (x_i, t_n) and has flat index n * (nx + 1) + i.
class NodalField {
public:
    NodalField(SpaceTimeMesh mesh, std::vector<double> values);
    explicit NodalField(SpaceTimeMesh mesh);

    const SpaceTimeMesh& mesh() const { return mesh_; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    std::size_t index(std::size_t i, std::size_t n) const { return n * (mesh_.nx() + 1) + i; }
    double operator()(std::size_t i, std::size_t n) const { return values_[index(i, n)]; }
    double& operator()(std::size_t i, std::size_t n) { return values_[index(i, n)]; }

    /// Value and cellwise derivatives at a point; interior nodes belong to the right/upper cell.
    PointValue eval(double x, double t) const;
    PointValue eval_local(std::size_t i, std::size_t n, double xi, double tau) const;
    /// Values on one time node.
    std::vector<double> slice(std::size_t n) const;

    double max_abs() const;

protected:
    SpaceTimeMesh mesh_;
    std::vector<double> values_;
};

/// Approximation v, auxiliary w or test function eta.
class FEFunction : public NodalField {
public:
    using NodalField::NodalField;
    explicit FEFunction(NodalField field) : NodalField(std::move(field)) {}

    /// Nodal values on Dirichlet endpoints vanish for all time nodes.
    bool dirichlet_conforming(const Domain& domain, double tol = 0.0) const;
    /// Same function represented on a mesh that refines this one.
    FEFunction prolong(const SpaceTimeMesh& fine) const;

    FEFunction& operator+=(const FEFunction& other);
    FEFunction& operator-=(const FEFunction& other);
    FEFunction& operator*=(double s);
};

FEFunction operator+(FEFunction a, const FEFunction& b);
FEFunction operator-(FEFunction a, const FEFunction& b);
FEFunction operator*(double s, FEFunction a);

/// Piecewise-linear-in-x divergence correction q with q(0, t) = 0 and
/// d/dx q = c_i(t) on subdomain i. The c_i are stored at the Gauss nodes of
/// each time cell and interpolated by the Lagrange polynomial through them.
class DivergenceCorrection {
public:
    DivergenceCorrection(std::vector<double> bounds, std::vector<double> t_nodes, std::vector<double> tau_nodes,
                         std::vector<double> slopes);

    std::size_t subdomains() const { return bounds_.size() - 1; }
    /// c_i at local Gauss node q of time cell n.
    double slope(std::size_t n, std::size_t q, std::size_t i) const {
        return slopes_[(n * tau_.size() + q) * subdomains() + i];
    }
    /// (q, dq/dx) at a point.
    std::array<double, 2> eval(double x, double t) const;
    /// Sum of two corrections on the same time layout; space breaks are merged.
    DivergenceCorrection operator+(const DivergenceCorrection& other) const;

private:
    std::vector<double> bounds_;
    std::vector<double> t_;
    std::vector<double> tau_;
    std::vector<double> slopes_;
};

/// Dual variable y: bilinear nodal field plus an optional divergence correction.
class FluxFunction : public NodalField {
public:
    using NodalField::NodalField;
    explicit FluxFunction(NodalField field) : NodalField(std::move(field)) {}

    /// Value and x-derivative (dt is not populated).
    PointValue eval(double x, double t) const;
    const std::optional<DivergenceCorrection>& correction() const { return correction_; }
    void set_correction(DivergenceCorrection q) { correction_ = std::move(q); }
    bool has_correction() const { return correction_.has_value(); }

private:
    std::optional<DivergenceCorrection> correction_;
};

FEFunction interpolate(const ScalarExpr& expr, const SpaceTimeMesh& mesh);
FluxFunction interpolate_flux(const ScalarExpr& expr, const SpaceTimeMesh& mesh);

/// Nodes of the mesh plus every coefficient break point of the problem.
SpaceTimeMesh align_mesh(const ProblemCase& problem, const SpaceTimeMesh& mesh);
/// Throws InputError when a break point is not a mesh node.
void require_aligned(const ProblemCase& problem, const SpaceTimeMesh& mesh);

/// Galerkin P1 in space, backward Euler or Crank-Nicolson in time, consistent mass.
FEFunction solve_fem(const ProblemCase& problem, const SpaceTimeMesh& mesh, TimeScheme scheme,
                     const QuadratureRule& rule = QuadratureRule::gauss_legendre(5));

/// Node averages of the adjacent cell values of A dv/dx at each time node.
FluxFunction reconstruct_flux_averaged(const FEFunction& v, const ProblemCase& problem);

/// Solves a tridiagonal system in place; sub[0] and sup[n-1] are ignored.
void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs);

}  // namespace rdbounds
