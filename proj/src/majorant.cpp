#include "rdbounds/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdbounds/errors.hpp"

namespace rdbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weighted(double alpha, double cost) { return cost == 0.0 ? 0.0 : alpha * cost; }

}  // namespace

EstimateConstants estimate_constants(const ProblemCase& problem, double safety) {
    EstimateConstants c;
    c.friedrichs = friedrichs_constant(problem.domain(), safety);
    c.trace = problem.domain().has_robin() ? trace_constant(problem.domain(), safety) : 0.0;
    c.nu1 = problem.nu1();
    return c;
}

void MajorantParams::validate(const EstimateContext& ctx, double min_gamma, std::size_t alphas) const {
    if (!(delta > 0.0 && delta <= 2.0)) throw InputError("delta must lie in (0, 2]");
    if (!(gamma >= min_gamma)) throw InputError("gamma below its admissible range");
    if (!mu.empty() && mu.size() != ctx.quad().num_points()) throw InputError("mu does not match the quadrature");
    const auto& lam = ctx.data().lambda;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        if (!(mu[k] >= 0.0 && mu[k] <= 1.0)) throw InputError("mu must lie in [0, 1]");
        if (mu[k] > 0.0 && lam[k] <= 0.0) throw InputError("mu must vanish where lambda = 0");
    }
    if (alpha.size() != ctx.mesh().nt()) throw InputError("alpha needs one entry per time cell");
    for (const auto& a : alpha) {
        double sum = 0.0;
        for (std::size_t i = 0; i < alphas; ++i) {
            if (!(a[i] > 0.0)) throw InputError("alpha must be positive");
            sum += 1.0 / a[i];
        }
        if (std::abs(sum - delta) > 1e-12 * std::max(1.0, delta))
            throw InputError("sum of 1/alpha differs from delta");
    }
}

MajorantParams initial_params(const EstimateContext& ctx, double delta, double gamma) {
    MajorantParams p;
    p.delta = delta;
    p.gamma = gamma;
    p.alpha.assign(ctx.mesh().nt(), AlphaTriple{3.0 / delta, 3.0 / delta, 3.0 / delta});
    return p;
}

ResidualSamples residual_samples(const PrimalSamples& v, const FluxSamples& y, const EstimateContext& ctx) {
    const auto& d = ctx.data();
    ResidualSamples r;
    const std::size_t n = ctx.quad().num_points();
    r.Rf.resize(n);
    r.Rd.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        r.Rf[k] = d.f[k] - v.dt[k] - d.lambda[k] * v.value[k] + y.dx[k];
        r.Rd[k] = y.value[k] - d.A[k] * v.dx[k];
    }
    for (std::size_t b = 0; b < d.robin.size(); ++b) {
        std::vector<double> rb(ctx.quad().num_slices());
        for (std::size_t s = 0; s < rb.size(); ++s)
            rb[s] = d.robin[b].g[s] - d.robin[b].sigma[s] * v.boundary[b][s] - y.boundary[b][s] * d.robin[b].normal;
        r.Rb.push_back(std::move(rb));
    }
    r.e0.resize(d.phi.size());
    for (std::size_t p = 0; p < d.phi.size(); ++p) r.e0[p] = d.phi[p] - v.initial[p];
    return r;
}

ResidualFields::ResidualFields(FEFunction v, FluxFunction y, const ProblemCase& problem)
    : v_(std::move(v)), y_(std::move(y)), problem_(&problem) {}

double ResidualFields::Rf(double x, double t) const {
    const PointValue v = v_.eval(x, t);
    return problem_->f()(x, t) - v.dt - problem_->lambda()(x, t) * v.value + y_.eval(x, t).dx;
}

double ResidualFields::Rd(double x, double t) const {
    return y_.eval(x, t).value - problem_->A()(x, t) * v_.eval(x, t).dx;
}

double ResidualFields::Rb(Side side, double t) const {
    const double x = problem_->domain().endpoint(side);
    const RobinData& r = problem_->robin(side);
    return r.g(x, t) - r.sigma(x, t) * v_.eval(x, t).value - y_.eval(x, t).value * Domain::normal(side);
}

double ResidualFields::e0(double x) const { return problem_->phi()(x, 0.0) - v_.eval(x, 0.0).value; }

double MajorantReport::term(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return t.value;
    throw InputError("report has no term " + name);
}

CellCosts cell_costs(const ResidualSamples& r, const MajorantParams& params, const EstimateConstants& c,
                     const EstimateContext& ctx) {
    const auto& q = ctx.quad();
    const auto& d = ctx.data();
    const std::size_t n = q.num_points();
    std::vector<double> reac(n, 0.0), fr(n), fl(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double mu = params.mu_at(k);
        if (mu > 0.0) reac[k] = mu * mu * r.Rf[k] * r.Rf[k] / d.lambda[k];
        fr[k] = (1.0 - mu) * (1.0 - mu) * r.Rf[k] * r.Rf[k];
        fl[k] = r.Rd[k] * r.Rd[k] / d.A[k];
    }
    CellCosts out;
    out.reaction = q.integrate_per_time_cell(reac);
    out.friedrichs = q.integrate_per_time_cell(fr);
    for (double& v : out.friedrichs) v *= c.friedrichs * c.friedrichs / c.nu1;
    out.flux = q.integrate_per_time_cell(fl);
    std::vector<double> rb(q.num_slices(), 0.0);
    for (const auto& side : r.Rb)
        for (std::size_t s = 0; s < rb.size(); ++s) rb[s] += side[s] * side[s];
    out.robin = q.integrate_slices_per_time_cell(rb);
    for (double& v : out.robin) v *= c.trace * c.trace / c.nu1;
    return out;
}

MajorantReport majorant_I(const FEFunction& v, const FluxFunction& y, const MajorantParams& params,
                          const EstimateConstants& constants, const EstimateContext& ctx) {
    return majorant_I(ctx.sample(v), ctx.sample(y), params, constants, ctx);
}

MajorantReport majorant_I(const PrimalSamples& v, const FluxSamples& y, const MajorantParams& params,
                          const EstimateConstants& constants, const EstimateContext& ctx) {
    params.validate(ctx);
    const ResidualSamples r = residual_samples(v, y, ctx);
    const CellCosts costs = cell_costs(r, params, constants, ctx);
    double initial = 0.0;
    const auto space = ctx.quad().space_points();
    for (std::size_t p = 0; p < space.size(); ++p) initial += space[p].weight * r.e0[p] * r.e0[p];
    double reaction = 0.0, fr = 0.0, fl = 0.0, rb = 0.0;
    for (std::size_t k = 0; k < costs.flux.size(); ++k) {
        reaction += params.gamma * costs.reaction[k];
        fr += weighted(params.alpha[k][0], costs.friedrichs[k]);
        fl += weighted(params.alpha[k][1], costs.flux[k]);
        rb += weighted(params.alpha[k][2], costs.robin[k]);
    }
    MajorantReport rep;
    rep.estimator = "thm1";
    rep.terms = {{"initial", initial}, {"reaction", reaction}, {"friedrichs", fr}, {"flux", fl}, {"robin", rb}};
    rep.total = initial + reaction + fr + fl + rb;
    rep.scalars.delta = params.delta;
    rep.scalars.gamma = params.gamma;
    rep.weights = weights_from_params(Estimator::Thm1, rep.scalars);
    rep.constants = constants;
    rep.alpha = params.alpha;
    return rep;
}

AlphaChoice optimize_alphas(const AlphaTriple& costs, double delta) {
    if (!(delta > 0.0 && delta <= 2.0)) throw InputError("delta must lie in (0, 2]");
    double s = 0.0;
    for (double c : costs) {
        if (c < 0.0) throw InputError("costs must be nonnegative");
        s += std::sqrt(c);
    }
    AlphaChoice out{};
    if (s == 0.0) {
        out.alpha = {3.0 / delta, 3.0 / delta, 3.0 / delta};
        out.objective = 0.0;
        return out;
    }
    for (std::size_t i = 0; i < 3; ++i) out.alpha[i] = costs[i] > 0.0 ? s / (delta * std::sqrt(costs[i])) : kInf;
    out.objective = s * s / delta;
    return out;
}

double optimal_mu(double lambda, double gamma, double alpha1, double friedrichs, double nu1) {
    if (!(lambda > 0.0)) return 0.0;
    const double k2 = alpha1 * friedrichs * friedrichs / nu1;
    if (std::isinf(k2)) return 1.0;
    const double k1 = gamma / lambda;
    return std::clamp(k2 / (k1 + k2), 0.0, 1.0);
}

std::vector<double> optimize_mu(const EstimateContext& ctx, double gamma, const std::vector<AlphaTriple>& alpha,
                                const EstimateConstants& constants) {
    const auto& q = ctx.quad();
    const auto slices = q.slices();
    std::vector<double> mu(q.num_points());
    for (std::size_t s = 0; s < slices.size(); ++s) {
        const double a1 = alpha[slices[s].cell][0];
        for (std::size_t p = 0; p < q.num_space_points(); ++p) {
            const std::size_t k = q.index(s, p);
            mu[k] = optimal_mu(ctx.data().lambda[k], gamma, a1, constants.friedrichs, constants.nu1);
        }
    }
    return mu;
}

namespace {

struct Optimized {
    MajorantParams params;
    FluxFunction y;
    MajorantReport report;
};

Optimized run_alternating(const FEFunction& v, const EstimateContext& ctx, const EstimateConstants& c,
                          const MajorantOptions& o, double delta, double gamma) {
    const PrimalSamples vs = ctx.sample(v);
    MajorantParams params = initial_params(ctx, delta, gamma);
    FluxFunction y = reconstruct_flux_averaged(v, ctx.problem());
    MajorantReport rep = majorant_I(vs, ctx.sample(y), params, c, ctx);
    std::vector<double> trace{rep.total};
    for (std::size_t it = 0; it < o.max_iterations; ++it) {
        FluxFunction y_new = reconstruct_flux_minimizing(v, params, c, ctx);
        const FluxSamples ys = ctx.sample(y_new);
        const ResidualSamples r = residual_samples(vs, ys, ctx);
        const CellCosts costs = cell_costs(r, params, c, ctx);
        MajorantParams cand = params;
        for (std::size_t k = 0; k < cand.alpha.size(); ++k)
            cand.alpha[k] = optimize_alphas({costs.friedrichs[k], costs.flux[k], costs.robin[k]}, delta).alpha;
        cand.mu = optimize_mu(ctx, gamma, cand.alpha, c);
        MajorantReport next = majorant_I(vs, ys, cand, c, ctx);
        const double prev = trace.back();
        if (next.total > prev * (1.0 + 1e-9) + 1e-20)
            throw NumericalError("majorant increased during alternating minimization");
        if (next.total > prev) break;  // round-off level, keep the previous state
        params = std::move(cand);
        y = std::move(y_new);
        rep = std::move(next);
        trace.push_back(rep.total);
        if (prev - rep.total <= o.tolerance * prev) break;
    }
    rep.trace = std::move(trace);
    return {std::move(params), std::move(y), std::move(rep)};
}

}  // namespace

OptimizedMajorant optimize_majorant_I(const FEFunction& v, const EstimateContext& ctx, const MajorantOptions& options) {
    const EstimateConstants c = estimate_constants(ctx.problem(), options.safety);
    if (!options.sweep) {
        Optimized r = run_alternating(v, ctx, c, options, options.delta, options.gamma);
        return {std::move(r.params), std::move(r.y), std::move(r.report)};
    }
    if (!ctx.problem().exact()) throw InputError("a (delta, gamma) sweep needs an exact solution");
    const PrimalSamples vs = ctx.sample(v);
    std::optional<Optimized> best;
    double best_ratio = kInf;
    for (double delta : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        for (double gamma : {1.0, 2.0, 4.0, 8.0}) {
            Optimized r = run_alternating(v, ctx, c, options, delta, gamma);
            const double measure = error_measure(vs, r.report.weights, ctx).total();
            const double ratio = measure > 0.0 ? r.report.total / measure : r.report.total;
            if (!best || ratio < best_ratio) {
                best_ratio = ratio;
                best = std::move(r);
            }
        }
    }
    best->report.notes.push_back("delta and gamma chosen by ratio sweep");
    return {std::move(best->params), std::move(best->y), std::move(best->report)};
}

}  // namespace rdbounds
