#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rdbounds/geometry.hpp"

namespace rdbounds {

/// Gauss-Legendre rule on the unit interval [0, 1].
class QuadratureRule {
public:
    static QuadratureRule gauss_legendre(std::size_t points);

    std::size_t size() const { return points_.size(); }
    /// Highest polynomial degree integrated exactly.
    std::size_t degree() const { return 2 * points_.size() - 1; }
    std::span<const double> points() const { return points_; }
    std::span<const double> weights() const { return weights_; }

private:
    std::vector<double> points_;
    std::vector<double> weights_;
};

struct SpacePoint {
    double x;
    double weight;  // includes the cell width
    std::size_t cell;
    double xi;  // local coordinate in [0, 1]
};

struct TimeSlice {
    double t;
    double weight;  // includes the cell length
    std::size_t cell;
    double tau;
};

/// Tensor-product quadrature over every space-time cell of a mesh.
///
/// Points are ordered slice-major: index = slice * num_space_points() + p,
/// and slices of time cell k occupy [k * rule.size(), (k + 1) * rule.size()).
/// Every estimate in this library is a reduction over these streams.
class SpaceTimeQuadrature {
public:
    SpaceTimeQuadrature(const SpaceTimeMesh& mesh, const QuadratureRule& rule);

    const SpaceTimeMesh& mesh() const { return mesh_; }
    const QuadratureRule& rule() const { return rule_; }
    std::span<const SpacePoint> space_points() const { return space_; }
    std::span<const TimeSlice> slices() const { return slices_; }
    std::size_t num_space_points() const { return space_.size(); }
    std::size_t num_slices() const { return slices_.size(); }
    std::size_t num_points() const { return space_.size() * slices_.size(); }
    std::size_t index(std::size_t slice, std::size_t p) const { return slice * space_.size() + p; }
    std::size_t slices_per_cell() const { return rule_.size(); }
    double weight(std::size_t slice, std::size_t p) const { return slices_[slice].weight * space_[p].weight; }

    /// sum_points w * values
    double integrate(std::span<const double> values) const;
    /// Spatial integral of one slice.
    double integrate_slice(std::size_t slice, std::span<const double> values) const;
    /// Time-cell contributions of a space-time integral.
    std::vector<double> integrate_per_time_cell(std::span<const double> values) const;
    /// Time-cell contributions of a per-slice quantity F(t): sum_q w_q F(t_q).
    std::vector<double> integrate_slices_per_time_cell(std::span<const double> per_slice) const;

private:
    SpaceTimeMesh mesh_;
    QuadratureRule rule_;
    std::vector<SpacePoint> space_;
    std::vector<TimeSlice> slices_;
};

/// Integral over Q_T of a pointwise evaluator; throws NumericalError naming
/// the space-time cell if an evaluation is not finite.
double integrate_spacetime(const std::function<double(double, double)>& field, const SpaceTimeMesh& mesh,
                           const QuadratureRule& rule);
/// Integral over (0, L) at a fixed time.
double integrate_space(const std::function<double(double)>& field, const SpaceTimeMesh& mesh,
                       const QuadratureRule& rule);
/// Integral over (0, T), e.g. along a Robin endpoint.
double integrate_time(const std::function<double(double)>& field, const SpaceTimeMesh& mesh,
                      const QuadratureRule& rule);

}  // namespace rdbounds
