#include "rdbounds/measures.hpp"

#include <vector>

#include "rdbounds/errors.hpp"

namespace rdbounds {

const char* estimator_name(Estimator e) {
    switch (e) {
    case Estimator::Thm1: return "thm1";
    case Estimator::Thm2: return "thm2";
    case Estimator::Thm3: return "thm3";
    case Estimator::Thm4: return "thm4";
    case Estimator::Thm5: return "thm5";
    case Estimator::Thm6: return "thm6";
    }
    return "?";
}

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw InputError(message);
}

void check_delta(double delta) { require(delta > 0.0 && delta <= 2.0, "delta must lie in (0, 2]"); }

double rho_weight(const BoundParams& p) {
    require(p.rho1 > 0.0 && p.rho2 > 0.0, "rho1 and rho2 must be positive");
    const double theta = 2.0 - 1.0 / p.rho1 - 1.0 / p.rho2;
    require(theta >= 0.0, "rho1, rho2 give a negative reaction weight 2 - 1/rho1 - 1/rho2");
    return theta;
}

}  // namespace

WeightTuple weights_from_params(Estimator estimator, const BoundParams& p) {
    check_delta(p.delta);
    WeightTuple w;
    w.nu = 2.0 - p.delta;
    w.provenance = estimator_name(estimator);
    switch (estimator) {
    case Estimator::Thm1:
        require(p.gamma >= 1.0, "thm1 requires gamma >= 1");
        w.c_lambda = 2.0 - 1.0 / p.gamma;
        w.zeta = 1.0;
        w.chi = 2.0;
        break;
    case Estimator::Thm2:
        w.c_lambda = rho_weight(p);
        w.zeta = 1.0;
        break;
    case Estimator::Thm3:
        require(p.gamma >= 0.5, "thm3 requires gamma >= 1/2");
        w.c_lambda = 2.0 - 1.0 / p.gamma;
        w.zeta = 1.0;
        break;
    case Estimator::Thm4:
    case Estimator::Thm6:
        require(p.gamma >= 0.5, std::string(estimator_name(estimator)) + " requires gamma >= 1/2");
        require(p.epsilon >= 1.0, "epsilon must be >= 1");
        w.c_lambda = 2.0 - 1.0 / p.gamma;
        w.zeta = 1.0 - 1.0 / p.epsilon;
        w.chi = 2.0;
        break;
    case Estimator::Thm5:
        require(p.epsilon >= 1.0, "epsilon must be >= 1");
        w.c_lambda = rho_weight(p);
        w.zeta = 1.0 - 1.0 / p.epsilon;
        w.chi = 2.0;
        break;
    }
    return w;
}

MeasureBreakdown error_measure(const FEFunction& v, const WeightTuple& w, const EstimateContext& ctx) {
    return error_measure(ctx.sample(v), w, ctx);
}

MeasureBreakdown error_measure(const PrimalSamples& v, const WeightTuple& w, const EstimateContext& ctx) {
    const PrimalSamples u = ctx.sample_exact();
    const auto& q = ctx.quad();
    const auto& d = ctx.data();
    std::vector<double> grad(q.num_points()), reac(q.num_points());
    for (std::size_t k = 0; k < grad.size(); ++k) {
        const double ex = u.dx[k] - v.dx[k];
        const double e = u.value[k] - v.value[k];
        grad[k] = d.A[k] * ex * ex;
        reac[k] = (w.c0 + w.c_lambda * d.lambda[k]) * e * e;
    }
    MeasureBreakdown out;
    out.gradient = w.nu * q.integrate(grad);
    out.reaction = q.integrate(reac);
    double terminal = 0.0;
    const auto space = q.space_points();
    for (std::size_t p = 0; p < space.size(); ++p) {
        const double e = u.terminal[p] - v.terminal[p];
        terminal += space[p].weight * e * e;
    }
    out.terminal = w.zeta * terminal;
    double robin = 0.0;
    const auto slices = q.slices();
    for (std::size_t b = 0; b < d.robin.size(); ++b)
        for (std::size_t s = 0; s < slices.size(); ++s) {
            const double e = u.boundary[b][s] - v.boundary[b][s];
            robin += slices[s].weight * d.robin[b].sigma[s] * e * e;
        }
    out.robin = w.chi * robin;
    return out;
}

double combined_norm(const FEFunction& v, const FluxFunction& y, const CombinedWeightTuple& w,
                     const EstimateContext& ctx) {
    const PrimalSamples u = ctx.sample_exact();
    const FluxSamples p = ctx.sample_exact_flux();
    const PrimalSamples vs = ctx.sample(v);
    const FluxSamples ys = ctx.sample(y);
    const auto& q = ctx.quad();
    const auto& d = ctx.data();
    std::vector<double> g(q.num_points()), f(q.num_points()), dv(q.num_points());
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double ex = u.dx[k] - vs.dx[k];
        g[k] = d.A[k] * ex * ex;
        const double fe = ys.value[k] - p.value[k];
        f[k] = fe * fe / d.A[k];
        const double de = (p.dx[k] - ys.dx[k]) - (u.dt[k] - vs.dt[k]);
        dv[k] = de * de;
    }
    double terminal = 0.0;
    const auto space = q.space_points();
    for (std::size_t i = 0; i < space.size(); ++i) {
        const double e = u.terminal[i] - vs.terminal[i];
        terminal += space[i].weight * e * e;
    }
    return w.nu * q.integrate(g) + w.theta * q.integrate(f) + w.zeta * q.integrate(dv) + w.chi * terminal;
}

}  // namespace rdbounds
