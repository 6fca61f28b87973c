#include "rdbounds/majorant_adv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weighted(double alpha, double cost) { return cost == 0.0 ? 0.0 : alpha * cost; }

double terminal_norm(const PrimalSamples& w, const EstimateContext& ctx) {
    double s = 0.0;
    const auto space = ctx.quad().space_points();
    for (std::size_t p = 0; p < space.size(); ++p) s += space[p].weight * w.terminal[p] * w.terminal[p];
    return s;
}

void require_conforming(const FEFunction& w, const EstimateContext& ctx) {
    if (!w.dirichlet_conforming(ctx.domain(), 1e-12))
        throw InputError("auxiliary function w must vanish on the Dirichlet boundary");
}

struct Common {
    ResidualSamples r;
    double terminal;
    double L;
    double l;
};

Common common_terms(const FEFunction& v, const FluxFunction& y, const FEFunction& w, const EstimateContext& ctx) {
    require_conforming(w, ctx);
    const PrimalSamples vs = ctx.sample(v), ws = ctx.sample(w);
    return {adv_residual_samples(vs, ctx.sample(y), ws, ctx), terminal_norm(ws, ctx), functional_L(vs, ws, ctx),
            functional_l(vs, ws, ctx)};
}

MajorantReport assemble(const std::string& name, const Common& c, double epsilon, std::vector<Term> rest) {
    MajorantReport rep;
    rep.estimator = name;
    rep.terms = {{"terminal", c.terminal == 0.0 ? 0.0 : epsilon * c.terminal}, {"L", 2.0 * c.L}, {"l", c.l}};
    rep.terms.insert(rep.terms.end(), rest.begin(), rest.end());
    for (const auto& t : rep.terms) rep.total += t.value;
    rep.notes.push_back("not a sum of squares; only the inequality is guaranteed");
    return rep;
}

MajorantReport evaluate_II(const Common& c, const AdvParams& params, const EstimateConstants& constants,
                           const EstimateContext& ctx) {
    const CellCosts costs = cell_costs(c.r, params, constants, ctx);
    double reaction = 0.0, fr = 0.0, fl = 0.0, rb = 0.0;
    for (std::size_t k = 0; k < costs.flux.size(); ++k) {
        reaction += params.gamma * costs.reaction[k];
        fr += weighted(params.alpha[k][0], costs.friedrichs[k]);
        fl += weighted(params.alpha[k][1], costs.flux[k]);
        rb += weighted(params.alpha[k][2], costs.robin[k]);
    }
    MajorantReport rep = assemble("thm4", c, params.epsilon,
                                  {{"reaction", reaction}, {"friedrichs", fr}, {"flux", fl}, {"robin", rb}});
    rep.scalars.delta = params.delta;
    rep.scalars.gamma = params.gamma;
    rep.scalars.epsilon = params.epsilon;
    rep.weights = weights_from_params(Estimator::Thm4, rep.scalars);
    rep.constants = constants;
    rep.alpha = params.alpha;
    return rep;
}

}  // namespace

AdvParams initial_adv_params(const EstimateContext& ctx, double delta, double gamma, double epsilon) {
    AdvParams p;
    static_cast<MajorantParams&>(p) = initial_params(ctx, delta, gamma);
    p.epsilon = epsilon;
    return p;
}

AdvDDParams initial_adv_dd_params(const EstimateContext& ctx, double delta, double epsilon) {
    AdvDDParams p;
    static_cast<DDParams&>(p) = initial_dd_params(ctx, delta);
    p.epsilon = epsilon;
    return p;
}

ResidualSamples adv_residual_samples(const PrimalSamples& v, const FluxSamples& y, const PrimalSamples& w,
                                     const EstimateContext& ctx) {
    const auto& d = ctx.data();
    ResidualSamples r;
    const std::size_t n = ctx.quad().num_points();
    r.Rf.resize(n);
    r.Rd.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        r.Rf[k] = d.f[k] - v.dt[k] - w.dt[k] - d.lambda[k] * (v.value[k] - w.value[k]) + y.dx[k];
        r.Rd[k] = y.value[k] - d.A[k] * (v.dx[k] - w.dx[k]);
    }
    for (std::size_t b = 0; b < d.robin.size(); ++b) {
        std::vector<double> rb(ctx.quad().num_slices());
        for (std::size_t s = 0; s < rb.size(); ++s)
            rb[s] = d.robin[b].g[s] - d.robin[b].sigma[s] * (v.boundary[b][s] - w.boundary[b][s]) -
                    y.boundary[b][s] * d.robin[b].normal;
        r.Rb.push_back(std::move(rb));
    }
    r.e0.resize(d.phi.size());
    for (std::size_t p = 0; p < d.phi.size(); ++p) r.e0[p] = d.phi[p] - v.initial[p];
    return r;
}

double functional_L(const PrimalSamples& v, const PrimalSamples& w, const EstimateContext& ctx) {
    const auto& d = ctx.data();
    const auto& q = ctx.quad();
    std::vector<double> integrand(q.num_points());
    for (std::size_t k = 0; k < integrand.size(); ++k)
        integrand[k] = v.dt[k] * w.value[k] + d.A[k] * v.dx[k] * w.dx[k] + d.lambda[k] * v.value[k] * w.value[k] -
                       d.f[k] * w.value[k];
    double out = q.integrate(integrand);
    for (std::size_t b = 0; b < d.robin.size(); ++b) {
        double s = 0.0;
        for (std::size_t sl = 0; sl < q.num_slices(); ++sl)
            s += q.slices()[sl].weight * (d.robin[b].g[sl] - d.robin[b].sigma[sl] * v.boundary[b][sl]) *
                 w.boundary[b][sl];
        out -= s;
    }
    return out;
}

double functional_L(const FEFunction& v, const FEFunction& w, const EstimateContext& ctx) {
    return functional_L(ctx.sample(v), ctx.sample(w), ctx);
}

double functional_l(const PrimalSamples& v, const PrimalSamples& w, const EstimateContext& ctx) {
    const auto& phi = ctx.data().phi;
    const auto space = ctx.quad().space_points();
    double s = 0.0;
    for (std::size_t p = 0; p < space.size(); ++p) {
        const double gap = v.initial[p] - phi[p];
        s += space[p].weight * (gap * gap + 2.0 * w.initial[p] * gap);
    }
    return s;
}

double functional_l(const FEFunction& v, const FEFunction& w, const EstimateContext& ctx) {
    return functional_l(ctx.sample(v), ctx.sample(w), ctx);
}

MajorantReport majorant_II(const FEFunction& v, const FluxFunction& y, const FEFunction& w, const AdvParams& params,
                           const EstimateConstants& constants, const EstimateContext& ctx) {
    params.validate(ctx, 0.5);
    BoundParams bp;
    bp.gamma = params.gamma;
    bp.epsilon = params.epsilon;
    weights_from_params(Estimator::Thm4, bp);
    return evaluate_II(common_terms(v, y, w, ctx), params, constants, ctx);
}

MajorantReport majorant_II_dd(const FEFunction& v, const FluxFunction& y, const FEFunction& w,
                              const SubdomainDecomposition& dd, const AdvDDParams& params, DDVariant variant,
                              const EstimateContext& ctx) {
    const bool general = variant == DDVariant::General;
    const char* name = general ? "thm5" : "thm6";
    require_dd_assumptions(name, dd, ctx);
    params.validate(ctx);
    BoundParams bp;
    bp.delta = params.delta;
    bp.gamma = params.gamma;
    bp.rho1 = params.rho1;
    bp.rho2 = params.rho2;
    bp.epsilon = params.epsilon;
    const WeightTuple weights = weights_from_params(general ? Estimator::Thm5 : Estimator::Thm6, bp);
    const Common c = common_terms(v, y, w, ctx);
    const DDTerms t = dd_terms(c.r.Rf, c.r.Rd, params, dd, ctx, general);
    if (!general && t.max_abs_mean > 1e-10 * (1.0 + t.mean_scale))
        throw AssumptionError("thm6 requires zero subdomain means of (1 - mu) R_1; largest mean is " +
                              std::to_string(t.max_abs_mean));
    double mean = 0.0, poincare = 0.0, flux = 0.0;
    for (std::size_t n = 0; n < t.flux_term.size(); ++n) {
        mean += params.rho2 * t.mean_term[n];
        poincare += weighted(params.alpha[n][0], t.poincare_term[n]);
        flux += weighted(params.alpha[n][1], t.flux_term[n]);
    }
    std::vector<Term> rest;
    if (general) {
        rest = {{"reaction", params.rho1 * t.reaction}, {"subdomain_mean", mean}, {"poincare", poincare},
                {"flux", flux}};
    } else {
        rest = {{"reaction", params.gamma * t.reaction}, {"poincare", poincare}, {"flux", flux}};
    }
    MajorantReport rep = assemble(name, c, params.epsilon, std::move(rest));
    rep.weights = weights;
    rep.scalars = bp;
    rep.constants = estimate_constants(ctx.problem());
    for (const auto& a : params.alpha) rep.alpha.push_back({a[0], a[1], kInf});
    return rep;
}

FluxFunction enforce_mean_condition_II(const FluxFunction& y, const FEFunction& v, const FEFunction& w,
                                       const SubdomainDecomposition& dd, const std::vector<double>& mu,
                                       const EstimateContext& ctx) {
    const ResidualSamples r = adv_residual_samples(ctx.sample(v), ctx.sample(y), ctx.sample(w), ctx);
    return enforce_mean_condition(y, r.Rf, dd, mu, ctx);
}

OptimizedAdv optimize_majorant_II(const FEFunction& v, const FluxFunction& y, const FEFunction& w,
                                  const EstimateContext& ctx, double delta, double gamma, double epsilon,
                                  std::size_t max_iterations) {
    const EstimateConstants constants = estimate_constants(ctx.problem());
    AdvParams params = initial_adv_params(ctx, delta, gamma, epsilon);
    params.validate(ctx, 0.5);
    const Common c = common_terms(v, y, w, ctx);
    MajorantReport rep = evaluate_II(c, params, constants, ctx);
    std::vector<double> trace{rep.total};
    for (std::size_t it = 0; it < max_iterations; ++it) {
        AdvParams cand = params;
        const CellCosts costs = cell_costs(c.r, cand, constants, ctx);
        for (std::size_t k = 0; k < cand.alpha.size(); ++k)
            cand.alpha[k] = optimize_alphas({costs.friedrichs[k], costs.flux[k], costs.robin[k]}, delta).alpha;
        cand.mu = optimize_mu(ctx, gamma, cand.alpha, constants);
        MajorantReport next = evaluate_II(c, cand, constants, ctx);
        const double prev = rep.total;
        if (!(next.total <= prev + 1e-9 * std::abs(prev) + 1e-20)) break;
        params = std::move(cand);
        rep = std::move(next);
        trace.push_back(rep.total);
        if (prev - rep.total <= 1e-8 * std::abs(prev)) break;
    }
    rep.trace = std::move(trace);
    return {std::move(params), std::move(rep)};
}

double equivalence_factor(double delta, double beta, double epsilon) {
    if (!(delta > 0.0 && delta < 2.0)) throw InputError("equivalence factor needs delta in (0, 2)");
    if (!(beta > 0.0)) throw InputError("equivalence factor needs beta > 0");
    if (!(epsilon >= 1.0)) throw InputError("equivalence factor needs epsilon >= 1");
    const double dh = 2.0 - delta;
    const double a = 2.0 / delta * (1.0 + 2.0 / dh);
    const double b = std::isinf(beta) ? dh / delta : dh / delta * (1.0 + 2.0 / (beta * dh));
    return std::max({a, b, epsilon});
}

FEFunction coarse_correction(const FEFunction& v, const ProblemCase& problem, const SpaceTimeMesh& fine,
                             TimeScheme scheme) {
    if (!fine.refines(v.mesh())) throw InputError("coarse correction needs a refinement of v's mesh");
    return solve_fem(problem, fine, scheme) - v.prolong(fine);
}

}  // namespace rdbounds
