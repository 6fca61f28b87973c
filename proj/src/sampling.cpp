#include "rdbounds/sampling.hpp"

#include <cmath>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

namespace {

void check(double v, const char* what, std::size_t slice) {
    if (!std::isfinite(v))
        throw NumericalError(std::string("non-finite ") + what + " in time slice " + std::to_string(slice));
}

}  // namespace

EstimateContext::EstimateContext(const ProblemCase& problem, const SpaceTimeMesh& mesh, const QuadratureRule& rule)
    : problem_(&problem), quad_(mesh, rule) {
    require_aligned(problem, mesh);
    const auto space = quad_.space_points();
    const auto slices = quad_.slices();
    const std::size_t np = quad_.num_points();
    data_.A.resize(np);
    data_.lambda.resize(np);
    data_.f.resize(np);
    for (std::size_t s = 0; s < slices.size(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = quad_.index(s, p);
            const double x = space[p].x, t = slices[s].t;
            data_.A[k] = problem.A()(x, t);
            data_.lambda[k] = problem.lambda()(x, t);
            data_.f[k] = problem.f()(x, t);
            check(data_.A[k], "A", s);
            check(data_.lambda[k], "lambda", s);
            check(data_.f[k], "f", s);
        }
    }
    data_.phi.resize(space.size());
    for (std::size_t p = 0; p < space.size(); ++p) data_.phi[p] = problem.phi()(space[p].x, 0.0);
    for (Side side : problem.domain().robin_sides()) {
        BoundarySamples b{side, problem.domain().endpoint(side), Domain::normal(side), {}, {}};
        for (const auto& sl : slices) {
            b.sigma.push_back(problem.robin(side).sigma(b.x, sl.t));
            b.g.push_back(problem.robin(side).g(b.x, sl.t));
        }
        data_.robin.push_back(std::move(b));
    }
}

PrimalSamples EstimateContext::sample(const NodalField& field) const {
    if (!mesh().refines(field.mesh())) throw InputError("field mesh is not refined by the quadrature mesh");
    const auto space = quad_.space_points();
    const auto slices = quad_.slices();
    const SpaceTimeMesh& fm = field.mesh();
    const bool same = fm == mesh();
    PrimalSamples out;
    const std::size_t np = quad_.num_points();
    out.value.resize(np);
    out.dx.resize(np);
    out.dt.resize(np);
    for (std::size_t s = 0; s < slices.size(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const PointValue pv = same ? field.eval_local(space[p].cell, slices[s].cell, space[p].xi, slices[s].tau)
                                       : field.eval(space[p].x, slices[s].t);
            const std::size_t k = quad_.index(s, p);
            out.value[k] = pv.value;
            out.dx[k] = pv.dx;
            out.dt[k] = pv.dt;
        }
    }
    const double T = mesh().horizon();
    for (const auto& p : space) {
        out.initial.push_back(field.eval(p.x, 0.0).value);
        out.terminal.push_back(field.eval(p.x, T).value);
    }
    for (const auto& b : data_.robin) {
        std::vector<double> vals;
        for (const auto& sl : slices) vals.push_back(field.eval(b.x, sl.t).value);
        out.boundary.push_back(std::move(vals));
    }
    return out;
}

FluxSamples EstimateContext::sample(const FluxFunction& y) const {
    if (!mesh().refines(y.mesh())) throw InputError("flux mesh is not refined by the quadrature mesh");
    const auto space = quad_.space_points();
    const auto slices = quad_.slices();
    const bool same = y.mesh() == mesh() && !y.has_correction();
    FluxSamples out;
    out.value.resize(quad_.num_points());
    out.dx.resize(quad_.num_points());
    for (std::size_t s = 0; s < slices.size(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const PointValue pv = same ? y.eval_local(space[p].cell, slices[s].cell, space[p].xi, slices[s].tau)
                                       : y.eval(space[p].x, slices[s].t);
            const std::size_t k = quad_.index(s, p);
            out.value[k] = pv.value;
            out.dx[k] = pv.dx;
        }
    }
    for (const auto& b : data_.robin) {
        std::vector<double> vals;
        for (const auto& sl : slices) vals.push_back(y.eval(b.x, sl.t).value);
        out.boundary.push_back(std::move(vals));
    }
    return out;
}

PrimalSamples EstimateContext::sample_exact() const {
    if (!problem_->exact()) throw InputError("problem has no exact solution");
    const ExactSolution& ex = *problem_->exact();
    const auto space = quad_.space_points();
    const auto slices = quad_.slices();
    PrimalSamples out;
    const std::size_t np = quad_.num_points();
    out.value.resize(np);
    out.dx.resize(np);
    out.dt.resize(np);
    for (std::size_t s = 0; s < slices.size(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = quad_.index(s, p);
            const double x = space[p].x, t = slices[s].t;
            out.value[k] = ex.u(x, t);
            out.dx[k] = ex.u_x(x, t);
            out.dt[k] = ex.u_t(x, t);
        }
    }
    const double T = mesh().horizon();
    for (const auto& p : space) {
        out.initial.push_back(ex.u(p.x, 0.0));
        out.terminal.push_back(ex.u(p.x, T));
    }
    for (const auto& b : data_.robin) {
        std::vector<double> vals;
        for (const auto& sl : slices) vals.push_back(ex.u(b.x, sl.t));
        out.boundary.push_back(std::move(vals));
    }
    return out;
}

FluxSamples EstimateContext::sample_exact_flux() const {
    if (!problem_->exact()) throw InputError("problem has no exact solution");
    const ExactSolution& ex = *problem_->exact();
    const auto space = quad_.space_points();
    const auto slices = quad_.slices();
    FluxSamples out;
    out.value.resize(quad_.num_points());
    out.dx.resize(quad_.num_points());
    for (std::size_t s = 0; s < slices.size(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = quad_.index(s, p);
            out.value[k] = ex.flux(space[p].x, slices[s].t);
            out.dx[k] = ex.flux_div(space[p].x, slices[s].t);
        }
    }
    for (const auto& b : data_.robin) {
        std::vector<double> vals;
        for (const auto& sl : slices) vals.push_back(ex.flux(b.x, sl.t));
        out.boundary.push_back(std::move(vals));
    }
    return out;
}

}  // namespace rdbounds
