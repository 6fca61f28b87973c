#include "rdbounds/fe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

NodalField::NodalField(SpaceTimeMesh mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != (mesh_.nx() + 1) * (mesh_.nt() + 1))
        throw InputError("nodal value count does not match the mesh");
}

NodalField::NodalField(SpaceTimeMesh mesh)
    : mesh_(std::move(mesh)), values_((mesh_.nx() + 1) * (mesh_.nt() + 1), 0.0) {}

PointValue NodalField::eval_local(std::size_t i, std::size_t n, double xi, double tau) const {
    const double v00 = (*this)(i, n);
    const double v10 = (*this)(i + 1, n);
    const double v01 = (*this)(i, n + 1);
    const double v11 = (*this)(i + 1, n + 1);
    PointValue out;
    out.value = (1 - xi) * (1 - tau) * v00 + xi * (1 - tau) * v10 + (1 - xi) * tau * v01 + xi * tau * v11;
    out.dx = ((1 - tau) * (v10 - v00) + tau * (v11 - v01)) / mesh_.hx(i);
    out.dt = ((1 - xi) * (v01 - v00) + xi * (v11 - v10)) / mesh_.ht(n);
    return out;
}

PointValue NodalField::eval(double x, double t) const {
    const std::size_t i = mesh_.locate_x(x);
    const std::size_t n = mesh_.locate_t(t);
    const double xi = (x - mesh_.x_nodes()[i]) / mesh_.hx(i);
    const double tau = (t - mesh_.t_nodes()[n]) / mesh_.ht(n);
    return eval_local(i, n, xi, tau);
}

std::vector<double> NodalField::slice(std::size_t n) const {
    const auto first = values_.begin() + static_cast<std::ptrdiff_t>(index(0, n));
    return {first, first + static_cast<std::ptrdiff_t>(mesh_.nx() + 1)};
}

double NodalField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool FEFunction::dirichlet_conforming(const Domain& domain, double tol) const {
    for (std::size_t n = 0; n <= mesh_.nt(); ++n) {
        if (!domain.is_robin(Side::Left) && std::abs((*this)(0, n)) > tol) return false;
        if (!domain.is_robin(Side::Right) && std::abs((*this)(mesh_.nx(), n)) > tol) return false;
    }
    return true;
}

FEFunction FEFunction::prolong(const SpaceTimeMesh& fine) const {
    if (!fine.refines(mesh_)) throw InputError("prolongation target does not refine the mesh");
    FEFunction out(fine);
    const auto xs = fine.x_nodes();
    const auto ts = fine.t_nodes();
    for (std::size_t n = 0; n < ts.size(); ++n)
        for (std::size_t i = 0; i < xs.size(); ++i) out(i, n) = eval(xs[i], ts[n]).value;
    return out;
}

namespace {

void require_same_mesh(const NodalField& a, const NodalField& b) {
    if (!(a.mesh() == b.mesh())) throw InputError("fields live on different meshes");
}

}  // namespace

FEFunction& FEFunction::operator+=(const FEFunction& other) {
    require_same_mesh(*this, other);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
    return *this;
}

FEFunction& FEFunction::operator-=(const FEFunction& other) {
    require_same_mesh(*this, other);
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
    return *this;
}

FEFunction& FEFunction::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

FEFunction operator+(FEFunction a, const FEFunction& b) { return a += b; }
FEFunction operator-(FEFunction a, const FEFunction& b) { return a -= b; }
FEFunction operator*(double s, FEFunction a) { return a *= s; }

DivergenceCorrection::DivergenceCorrection(std::vector<double> bounds, std::vector<double> t_nodes,
                                           std::vector<double> tau_nodes, std::vector<double> slopes)
    : bounds_(std::move(bounds)), t_(std::move(t_nodes)), tau_(std::move(tau_nodes)), slopes_(std::move(slopes)) {
    if (bounds_.size() < 2 || t_.size() < 2 || tau_.empty() ||
        slopes_.size() != (t_.size() - 1) * tau_.size() * (bounds_.size() - 1))
        throw InputError("inconsistent divergence correction layout");
}

std::array<double, 2> DivergenceCorrection::eval(double x, double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t n = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    n = std::min(n, t_.size() - 2);
    const double tau = (t - t_[n]) / (t_[n + 1] - t_[n]);
    std::vector<double> lagrange(tau_.size(), 1.0);
    for (std::size_t a = 0; a < tau_.size(); ++a)
        for (std::size_t b = 0; b < tau_.size(); ++b)
            if (a != b) lagrange[a] *= (tau - tau_[b]) / (tau_[a] - tau_[b]);
    auto c = [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t a = 0; a < tau_.size(); ++a) s += lagrange[a] * slope(n, a, i);
        return s;
    };
    double q = 0.0;
    std::size_t i = 0;
    while (i + 1 < subdomains() && x >= bounds_[i + 1]) {
        q += c(i) * (bounds_[i + 1] - bounds_[i]);
        ++i;
    }
    const double ci = c(i);
    return {q + ci * (x - bounds_[i]), ci};
}

DivergenceCorrection DivergenceCorrection::operator+(const DivergenceCorrection& other) const {
    if (t_ != other.t_ || tau_ != other.tau_)
        throw InputError("divergence corrections have different time layouts");
    if (bounds_.front() != other.bounds_.front() || bounds_.back() != other.bounds_.back())
        throw InputError("divergence corrections cover different intervals");
    std::vector<double> merged(bounds_);
    merged.insert(merged.end(), other.bounds_.begin(), other.bounds_.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    const std::size_t m = merged.size() - 1;
    auto owner = [](const std::vector<double>& b, double mid) {
        return static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), mid) - b.begin()) - 1;
    };
    std::vector<double> slopes((t_.size() - 1) * tau_.size() * m);
    for (std::size_t j = 0; j < m; ++j) {
        const double mid = 0.5 * (merged[j] + merged[j + 1]);
        const std::size_t a = owner(bounds_, mid), b = owner(other.bounds_, mid);
        for (std::size_t n = 0; n + 1 < t_.size(); ++n)
            for (std::size_t q = 0; q < tau_.size(); ++q)
                slopes[(n * tau_.size() + q) * m + j] = slope(n, q, a) + other.slope(n, q, b);
    }
    return DivergenceCorrection(std::move(merged), t_, tau_, std::move(slopes));
}

PointValue FluxFunction::eval(double x, double t) const {
    PointValue out = NodalField::eval(x, t);
    out.dt = 0.0;
    if (correction_) {
        const auto q = correction_->eval(x, t);
        out.value += q[0];
        out.dx += q[1];
    }
    return out;
}

namespace {

std::vector<double> nodal_values(const ScalarExpr& expr, const SpaceTimeMesh& mesh) {
    std::vector<double> values;
    values.reserve((mesh.nx() + 1) * (mesh.nt() + 1));
    for (double t : mesh.t_nodes()) {
        for (double x : mesh.x_nodes()) {
            const double v = expr(x, t);
            if (!std::isfinite(v))
                throw InputError("interpolated expression is not finite at (" + std::to_string(x) + ", " +
                                 std::to_string(t) + ")");
            values.push_back(v);
        }
    }
    return values;
}

}  // namespace

FEFunction interpolate(const ScalarExpr& expr, const SpaceTimeMesh& mesh) {
    return FEFunction(mesh, nodal_values(expr, mesh));
}

FluxFunction interpolate_flux(const ScalarExpr& expr, const SpaceTimeMesh& mesh) {
    return FluxFunction(mesh, nodal_values(expr, mesh));
}

SpaceTimeMesh align_mesh(const ProblemCase& problem, const SpaceTimeMesh& mesh) {
    const auto bx = problem.x_breakpoints();
    const auto bt = problem.t_breakpoints();
    std::vector<double> xs, ts;
    for (double b : bx)
        if (b > 0.0 && b < mesh.length()) xs.push_back(b);
    for (double b : bt)
        if (b > 0.0 && b < mesh.horizon()) ts.push_back(b);
    return mesh.with_nodes(xs, ts);
}

void require_aligned(const ProblemCase& problem, const SpaceTimeMesh& mesh) {
    for (double b : problem.x_breakpoints())
        if (b > 0.0 && b < mesh.length() && !mesh.has_x_node(b))
            throw InputError("coefficient break point x = " + std::to_string(b) + " is not a mesh node");
    for (double b : problem.t_breakpoints())
        if (b > 0.0 && b < mesh.horizon() && !mesh.has_t_node(b))
            throw InputError("coefficient break point t = " + std::to_string(b) + " is not a mesh node");
}

void solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> sup,
                       std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0 || !std::isfinite(diag[i - 1])) throw NumericalError("singular step matrix");
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (diag[n - 1] == 0.0 || !std::isfinite(diag[n - 1])) throw NumericalError("singular step matrix");
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

namespace {

struct Tridiagonal {
    std::vector<double> sub, diag, sup;
    explicit Tridiagonal(std::size_t n) : sub(n, 0.0), diag(n, 0.0), sup(n, 0.0) {}
    void add(std::size_t r, std::size_t c, double v) {
        if (c == r) diag[r] += v;
        else if (c + 1 == r) sub[r] += v;
        else sup[r] += v;
    }
    std::vector<double> apply(const std::vector<double>& u) const {
        std::vector<double> out(u.size());
        for (std::size_t r = 0; r < u.size(); ++r) {
            out[r] = diag[r] * u[r];
            if (r > 0) out[r] += sub[r] * u[r - 1];
            if (r + 1 < u.size()) out[r] += sup[r] * u[r + 1];
        }
        return out;
    }
};

struct SpatialSystem {
    Tridiagonal mass;
    Tridiagonal operator_;  // stiffness + reaction + Robin
    std::vector<double> load;
};

SpatialSystem assemble(const ProblemCase& problem, std::span<const double> xs, double t, const QuadratureRule& rule) {
    const std::size_t nodes = xs.size();
    SpatialSystem sys{Tridiagonal(nodes), Tridiagonal(nodes), std::vector<double>(nodes, 0.0)};
    for (std::size_t i = 0; i + 1 < nodes; ++i) {
        const double h = xs[i + 1] - xs[i];
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const double s = rule.points()[q];
            const double w = rule.weights()[q] * h;
            const double x = xs[i] + h * s;
            const double phi[2] = {1 - s, s};
            const double dphi[2] = {-1 / h, 1 / h};
            const double a = problem.A()(x, t);
            const double lam = problem.lambda()(x, t);
            const double f = problem.f()(x, t);
            for (int r = 0; r < 2; ++r) {
                sys.load[i + r] += w * f * phi[r];
                for (int c = 0; c < 2; ++c) {
                    sys.mass.add(i + r, i + c, w * phi[r] * phi[c]);
                    sys.operator_.add(i + r, i + c, w * (a * dphi[r] * dphi[c] + lam * phi[r] * phi[c]));
                }
            }
        }
    }
    for (Side side : problem.domain().robin_sides()) {
        const std::size_t node = side == Side::Left ? 0 : nodes - 1;
        sys.operator_.add(node, node, problem.robin(side).sigma(xs[node], t));
        sys.load[node] += problem.robin(side).g(xs[node], t);
    }
    return sys;
}

}  // namespace

FEFunction solve_fem(const ProblemCase& problem, const SpaceTimeMesh& mesh, TimeScheme scheme,
                     const QuadratureRule& rule) {
    const Domain& domain = problem.domain();
    if (std::abs(mesh.length() - domain.length()) > 1e-12 * domain.length() ||
        std::abs(mesh.horizon() - domain.horizon()) > 1e-12 * domain.horizon())
        throw InputError("mesh does not cover the problem domain");
    require_aligned(problem, mesh);

    const auto xs = mesh.x_nodes();
    const auto ts = mesh.t_nodes();
    const std::size_t nodes = xs.size();
    FEFunction v(mesh);
    for (std::size_t i = 0; i < nodes; ++i) v(i, 0) = problem.phi()(xs[i], 0.0);
    std::vector<bool> fixed(nodes, false);
    fixed[0] = !domain.is_robin(Side::Left);
    fixed[nodes - 1] = !domain.is_robin(Side::Right);

    std::vector<double> u = v.slice(0);
    SpatialSystem previous = assemble(problem, xs, ts[0], rule);
    const double theta = scheme == TimeScheme::BackwardEuler ? 1.0 : 0.5;
    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        const double dt = mesh.ht(n);
        SpatialSystem next = assemble(problem, xs, ts[n + 1], rule);
        Tridiagonal lhs(nodes);
        std::vector<double> rhs = previous.mass.apply(u);
        const std::vector<double> bu = previous.operator_.apply(u);
        for (std::size_t r = 0; r < nodes; ++r) {
            lhs.sub[r] = next.mass.sub[r] + theta * dt * next.operator_.sub[r];
            lhs.diag[r] = next.mass.diag[r] + theta * dt * next.operator_.diag[r];
            lhs.sup[r] = next.mass.sup[r] + theta * dt * next.operator_.sup[r];
            rhs[r] += dt * (theta * next.load[r] + (1 - theta) * (previous.load[r] - bu[r]));
        }
        for (std::size_t r = 0; r < nodes; ++r) {
            if (!fixed[r]) continue;
            lhs.sub[r] = 0.0;
            lhs.sup[r] = 0.0;
            lhs.diag[r] = 1.0;
            rhs[r] = 0.0;
            if (r > 0) lhs.sup[r - 1] = 0.0;
            if (r + 1 < nodes) lhs.sub[r + 1] = 0.0;
        }
        solve_tridiagonal(lhs.sub, lhs.diag, lhs.sup, rhs);
        u = std::move(rhs);
        for (std::size_t i = 0; i < nodes; ++i) v(i, n + 1) = u[i];
        previous = std::move(next);
    }
    return v;
}

FluxFunction reconstruct_flux_averaged(const FEFunction& v, const ProblemCase& problem) {
    const SpaceTimeMesh& mesh = v.mesh();
    const auto xs = mesh.x_nodes();
    const auto ts = mesh.t_nodes();
    FluxFunction y(mesh);
    const std::size_t nx = mesh.nx();
    for (std::size_t n = 0; n <= mesh.nt(); ++n) {
        std::vector<double> slope(nx);
        for (std::size_t i = 0; i < nx; ++i) slope[i] = (v(i + 1, n) - v(i, n)) / mesh.hx(i);
        for (std::size_t i = 0; i <= nx; ++i) {
            double s;
            if (i == 0) s = slope[0];
            else if (i == nx) s = slope[nx - 1];
            else s = 0.5 * (slope[i - 1] + slope[i]);
            y(i, n) = problem.A()(xs[i], ts[n]) * s;
        }
    }
    return y;
}

}  // namespace rdbounds
