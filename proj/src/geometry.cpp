#include "rdbounds/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

namespace {

void check_nodes(const std::vector<double>& nodes, const char* what) {
    if (nodes.size() < 2) throw InputError(std::string(what) + " needs at least two nodes");
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        if (!std::isfinite(nodes[i]) || !(nodes[i + 1] > nodes[i]))
            throw InputError(std::string(what) + " nodes must be finite and strictly increasing");
    }
    if (nodes.front() != 0.0) throw InputError(std::string(what) + " nodes must start at 0");
}

std::size_t locate(const std::vector<double>& nodes, double x) {
    auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    if (it == nodes.begin()) return 0;
    std::size_t cell = static_cast<std::size_t>(it - nodes.begin()) - 1;
    return std::min(cell, nodes.size() - 2);
}

bool contains_node(const std::vector<double>& nodes, double x, double tol) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), x - tol);
    return it != nodes.end() && std::abs(*it - x) <= tol;
}

std::vector<double> merge_nodes(const std::vector<double>& base, std::span<const double> extra) {
    std::vector<double> out = base;
    const double tol = 1e-12 * base.back();
    for (double x : extra) {
        if (x <= base.front() || x >= base.back()) continue;
        if (!contains_node(out, x, tol)) out.insert(std::upper_bound(out.begin(), out.end(), x), x);
    }
    return out;
}

std::vector<double> bisect(const std::vector<double>& nodes) {
    std::vector<double> out;
    out.reserve(2 * nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        out.push_back(nodes[i]);
        out.push_back(0.5 * (nodes[i] + nodes[i + 1]));
    }
    out.push_back(nodes.back());
    return out;
}

std::vector<double> uniform(double length, std::size_t cells) {
    std::vector<double> nodes(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        nodes[i] = length * static_cast<double>(i) / static_cast<double>(cells);
    nodes.back() = length;
    return nodes;
}

}  // namespace

Domain::Domain(double length, double horizon, BoundaryKind left, BoundaryKind right)
    : length_(length), horizon_(horizon), left_(left), right_(right) {
    if (!(length > 0.0) || !std::isfinite(length)) throw InputError("domain length must be positive");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("time horizon must be positive");
    if (left == BoundaryKind::Robin && right == BoundaryKind::Robin)
        throw InputError("at least one endpoint must carry a Dirichlet condition");
}

std::vector<Side> Domain::robin_sides() const {
    std::vector<Side> sides;
    if (is_robin(Side::Left)) sides.push_back(Side::Left);
    if (is_robin(Side::Right)) sides.push_back(Side::Right);
    return sides;
}

SpaceTimeMesh::SpaceTimeMesh(std::vector<double> x_nodes, std::vector<double> t_nodes)
    : x_(std::move(x_nodes)), t_(std::move(t_nodes)) {
    check_nodes(x_, "space");
    check_nodes(t_, "time");
}

double SpaceTimeMesh::max_hx() const {
    double h = 0.0;
    for (std::size_t i = 0; i < nx(); ++i) h = std::max(h, hx(i));
    return h;
}

double SpaceTimeMesh::max_ht() const {
    double h = 0.0;
    for (std::size_t n = 0; n < nt(); ++n) h = std::max(h, ht(n));
    return h;
}

std::size_t SpaceTimeMesh::locate_x(double x) const { return locate(x_, x); }
std::size_t SpaceTimeMesh::locate_t(double t) const { return locate(t_, t); }

bool SpaceTimeMesh::has_x_node(double x, double tol) const { return contains_node(x_, x, tol * length()); }
bool SpaceTimeMesh::has_t_node(double t, double tol) const { return contains_node(t_, t, tol * horizon()); }

bool SpaceTimeMesh::refines(const SpaceTimeMesh& coarse) const {
    if (std::abs(coarse.length() - length()) > 1e-12 * length()) return false;
    if (std::abs(coarse.horizon() - horizon()) > 1e-12 * horizon()) return false;
    return std::all_of(coarse.x_.begin(), coarse.x_.end(), [&](double x) { return has_x_node(x); }) &&
           std::all_of(coarse.t_.begin(), coarse.t_.end(), [&](double t) { return has_t_node(t); });
}

SpaceTimeMesh SpaceTimeMesh::refined() const { return SpaceTimeMesh(bisect(x_), bisect(t_)); }

SpaceTimeMesh SpaceTimeMesh::with_nodes(std::span<const double> extra_x, std::span<const double> extra_t) const {
    return SpaceTimeMesh(merge_nodes(x_, extra_x), merge_nodes(t_, extra_t));
}

SpaceTimeMesh build_mesh(const Domain& domain, std::size_t nx, std::size_t nt) {
    if (nx == 0 || nt == 0) throw InputError("mesh needs at least one space cell and one time cell");
    return SpaceTimeMesh(uniform(domain.length(), nx), uniform(domain.horizon(), nt));
}

SubdomainDecomposition::SubdomainDecomposition(double length, std::vector<double> break_points) {
    bounds_.reserve(break_points.size() + 2);
    bounds_.push_back(0.0);
    for (double b : break_points) {
        if (!(b > bounds_.back()) || !(b < length))
            throw InputError("break points must be strictly increasing and inside (0, L)");
        bounds_.push_back(b);
    }
    bounds_.push_back(length);
}

std::span<const double> SubdomainDecomposition::break_points() const {
    return std::span<const double>(bounds_).subspan(1, bounds_.size() - 2);
}

std::size_t SubdomainDecomposition::owner(double x) const { return locate(bounds_, x); }

bool SubdomainDecomposition::nests(const SpaceTimeMesh& mesh) const {
    auto br = break_points();
    return std::all_of(br.begin(), br.end(), [&](double b) { return mesh.has_x_node(b); });
}

SubdomainDecomposition decompose(const Domain& domain, std::vector<double> break_points) {
    return SubdomainDecomposition(domain.length(), std::move(break_points));
}

double friedrichs_constant(const Domain& domain, double safety) {
    // First eigenfunction sin(pi x / L) with two Dirichlet ends,
    // sin(pi x / 2L) when one end is free.
    const double L = domain.length();
    if (domain.dirichlet_only()) return safety * L / std::numbers::pi;
    return safety * 2.0 * L / std::numbers::pi;
}

double trace_constant(const Domain& domain, double safety) {
    if (!domain.has_robin()) throw InputError("trace constant requires a Robin endpoint");
    // eta(L)^2 = (int eta')^2 <= L ||eta'||^2, equality for the linear function.
    return safety * std::sqrt(domain.length());
}

double poincare_constant(double subdomain_diameter, double safety) {
    if (!(subdomain_diameter > 0.0)) throw InputError("subdomain diameter must be positive");
    return safety * subdomain_diameter / std::numbers::pi;
}

}  // namespace rdbounds
