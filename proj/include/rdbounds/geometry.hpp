#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rdbounds {

enum class BoundaryKind { Dirichlet, Robin };
enum class Side { Left, Right };

/// Spatial interval (0, L) times the time horizon (0, T) with a boundary
/// condition kind at each endpoint.
class Domain {
public:
    Domain(double length, double horizon, BoundaryKind left, BoundaryKind right);

    double length() const { return length_; }
    double horizon() const { return horizon_; }
    BoundaryKind kind(Side side) const { return side == Side::Left ? left_ : right_; }
    bool is_robin(Side side) const { return kind(side) == BoundaryKind::Robin; }
    bool has_robin() const { return is_robin(Side::Left) || is_robin(Side::Right); }
    bool dirichlet_only() const { return !has_robin(); }
    double endpoint(Side side) const { return side == Side::Left ? 0.0 : length_; }
    /// Outward unit normal at an endpoint (-1 on the left, +1 on the right).
    static double normal(Side side) { return side == Side::Left ? -1.0 : 1.0; }
    std::vector<Side> robin_sides() const;

private:
    double length_;
    double horizon_;
    BoundaryKind left_;
    BoundaryKind right_;
};

/// Tensor-product space-time mesh. Nodes are strictly increasing and span
/// [0, L] x [0, T] exactly.
class SpaceTimeMesh {
public:
    SpaceTimeMesh(std::vector<double> x_nodes, std::vector<double> t_nodes);

    std::span<const double> x_nodes() const { return x_; }
    std::span<const double> t_nodes() const { return t_; }
    std::size_t nx() const { return x_.size() - 1; }
    std::size_t nt() const { return t_.size() - 1; }
    double length() const { return x_.back(); }
    double horizon() const { return t_.back(); }
    double hx(std::size_t cell) const { return x_[cell + 1] - x_[cell]; }
    double ht(std::size_t cell) const { return t_[cell + 1] - t_[cell]; }
    double max_hx() const;
    double max_ht() const;

    /// Cell containing x; points on an interior node go to the right cell.
    std::size_t locate_x(double x) const;
    std::size_t locate_t(double t) const;

    bool has_x_node(double x, double tol = 1e-12) const;
    bool has_t_node(double t, double tol = 1e-12) const;
    /// True when every node of `coarse` is a node of this mesh.
    bool refines(const SpaceTimeMesh& coarse) const;
    /// Uniform bisection of every space and time cell.
    SpaceTimeMesh refined() const;
    /// Copy with extra nodes inserted (duplicates within tolerance dropped).
    SpaceTimeMesh with_nodes(std::span<const double> extra_x, std::span<const double> extra_t) const;

    bool operator==(const SpaceTimeMesh&) const = default;

private:
    std::vector<double> x_;
    std::vector<double> t_;
};

SpaceTimeMesh build_mesh(const Domain& domain, std::size_t nx, std::size_t nt);

/// Non-overlapping intervals covering (0, L).
class SubdomainDecomposition {
public:
    SubdomainDecomposition(double length, std::vector<double> break_points);

    std::size_t size() const { return bounds_.size() - 1; }
    double left(std::size_t i) const { return bounds_[i]; }
    double right(std::size_t i) const { return bounds_[i + 1]; }
    double diameter(std::size_t i) const { return bounds_[i + 1] - bounds_[i]; }
    std::span<const double> break_points() const;
    /// Subdomain that owns a mesh cell with the given midpoint.
    std::size_t owner(double x) const;
    /// Each break point is a mesh node, so every space cell lies in one subdomain.
    bool nests(const SpaceTimeMesh& mesh) const;

private:
    std::vector<double> bounds_;
};

SubdomainDecomposition decompose(const Domain& domain, std::vector<double> break_points);

/// Embedding constants. `safety` multiplies every returned value.
double friedrichs_constant(const Domain& domain, double safety = 1.0);
double trace_constant(const Domain& domain, double safety = 1.0);
double poincare_constant(double subdomain_diameter, double safety = 1.0);

}  // namespace rdbounds
