#include "rdbounds/majorant_dd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rdbounds/errors.hpp"

namespace rdbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double weighted(double alpha, double cost) { return cost == 0.0 ? 0.0 : alpha * cost; }

std::vector<std::size_t> owners(const SubdomainDecomposition& dd, const EstimateContext& ctx) {
    std::vector<std::size_t> out;
    for (const auto& p : ctx.quad().space_points()) out.push_back(dd.owner(p.x));
    return out;
}

double initial_term(const ResidualSamples& r, const EstimateContext& ctx) {
    double s = 0.0;
    const auto space = ctx.quad().space_points();
    for (std::size_t p = 0; p < space.size(); ++p) s += space[p].weight * r.e0[p] * r.e0[p];
    return s;
}

}  // namespace

void DDParams::validate(const EstimateContext& ctx) const {
    const DDParams& p = *this;
    if (!(p.delta > 0.0 && p.delta <= 2.0)) throw InputError("delta must lie in (0, 2]");
    if (p.alpha.size() != ctx.mesh().nt()) throw InputError("alpha needs one entry per time cell");
    for (const auto& a : p.alpha) {
        if (!(a[0] > 0.0 && a[1] > 0.0)) throw InputError("alpha must be positive");
        if (std::abs(1.0 / a[0] + 1.0 / a[1] - p.delta) > 1e-12 * std::max(1.0, p.delta))
            throw InputError("1/alpha1 + 1/alpha2 differs from delta");
    }
    if (!p.mu.empty() && p.mu.size() != ctx.quad().num_points()) throw InputError("mu does not match the quadrature");
    for (std::size_t k = 0; k < p.mu.size(); ++k) {
        if (!(p.mu[k] >= 0.0 && p.mu[k] <= 1.0)) throw InputError("mu must lie in [0, 1]");
        if (p.mu[k] > 0.0 && ctx.data().lambda[k] <= 0.0) throw InputError("mu must vanish where lambda = 0");
    }
}

DDParams initial_dd_params(const EstimateContext& ctx, double delta) {
    DDParams p;
    p.delta = delta;
    p.alpha.assign(ctx.mesh().nt(), {2.0 / delta, 2.0 / delta});
    return p;
}

void require_dd_assumptions(const char* estimator, const SubdomainDecomposition& dd, const EstimateContext& ctx) {
    if (ctx.domain().has_robin())
        throw AssumptionError(std::string(estimator) + " assumes S_T = S_D: the case has a Robin endpoint");
    if (!dd.nests(ctx.mesh()))
        throw InputError(std::string(estimator) + ": subdomain break points must be mesh nodes");
}

std::vector<std::vector<double>> subdomain_lambda(const ProblemCase& problem, const SubdomainDecomposition& dd,
                                                  const SpaceTimeMesh& mesh, std::size_t samples, double safety) {
    if (samples < 2) throw InputError("need at least two lambda samples");
    const std::size_t tsamples = std::max<std::size_t>(2, samples / 4);
    std::vector<std::vector<double>> out(mesh.nt(), std::vector<double>(dd.size(), kInf));
    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        for (std::size_t i = 0; i < dd.size(); ++i) {
            double m = kInf;
            for (std::size_t a = 0; a < tsamples; ++a) {
                const double t = mesh.t_nodes()[n] + mesh.ht(n) * static_cast<double>(a) / (tsamples - 1);
                for (std::size_t b = 0; b < samples; ++b) {
                    const double x = dd.left(i) + dd.diameter(i) * static_cast<double>(b) / (samples - 1);
                    m = std::min(m, problem.lambda()(x, t));
                }
            }
            out[n][i] = m * safety;
        }
    }
    return out;
}

SubdomainIntegrals subdomain_integrals(const std::vector<double>& residual, const std::vector<double>& mu,
                                       const SubdomainDecomposition& dd, const EstimateContext& ctx) {
    const auto& q = ctx.quad();
    const auto space = q.space_points();
    const auto own = owners(dd, ctx);
    SubdomainIntegrals out;
    out.mean.assign(q.num_slices(), std::vector<double>(dd.size(), 0.0));
    out.squares.assign(q.num_slices(), std::vector<double>(dd.size(), 0.0));
    for (std::size_t s = 0; s < q.num_slices(); ++s) {
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = q.index(s, p);
            const double r = (1.0 - (mu.empty() ? 0.0 : mu[k])) * residual[k];
            out.mean[s][own[p]] += space[p].weight * r;
            out.squares[s][own[p]] += space[p].weight * r * r;
        }
        for (std::size_t i = 0; i < dd.size(); ++i) out.mean[s][i] /= dd.diameter(i);
    }
    return out;
}

DDTerms dd_terms(const std::vector<double>& residual, const std::vector<double>& flux_residual, const DDParams& params,
                 const SubdomainDecomposition& dd, const EstimateContext& ctx, bool need_lambda) {
    const auto& q = ctx.quad();
    const auto& d = ctx.data();
    const auto slices = q.slices();
    const auto space = q.space_points();
    const auto own = owners(dd, ctx);
    const SubdomainIntegrals si = subdomain_integrals(residual, params.mu, dd, ctx);
    std::vector<std::vector<double>> lam;
    if (need_lambda) {
        lam = subdomain_lambda(ctx.problem(), dd, ctx.mesh(), params.lambda_samples, params.lambda_safety);
        for (const auto& row : lam)
            for (double l : row)
                if (!(l > 0.0))
                    throw AssumptionError("the subdomain minimum of lambda vanishes; use the zero-mean form (thm3/thm6)");
    }
    const double nu1 = ctx.problem().nu1();
    DDTerms out;
    out.mean_term.assign(ctx.mesh().nt(), 0.0);
    out.poincare_term.assign(ctx.mesh().nt(), 0.0);
    std::vector<double> reac(q.num_points(), 0.0), fl(q.num_points());
    for (std::size_t k = 0; k < q.num_points(); ++k) {
        const double mu = params.mu_at(k);
        if (mu > 0.0) reac[k] = mu * mu * residual[k] * residual[k] / d.lambda[k];
        fl[k] = flux_residual[k] * flux_residual[k] / d.A[k];
    }
    out.reaction = q.integrate(reac);
    out.flux_term = q.integrate_per_time_cell(fl);
    for (std::size_t s = 0; s < slices.size(); ++s) {
        const std::size_t n = slices[s].cell;
        double r1 = 0.0, r2 = 0.0;
        for (std::size_t i = 0; i < dd.size(); ++i) {
            if (need_lambda) r1 += dd.diameter(i) / lam[n][i] * si.mean[s][i] * si.mean[s][i];
            const double cp = poincare_constant(dd.diameter(i));
            r2 += cp * cp / nu1 * si.squares[s][i];
            out.max_abs_mean = std::max(out.max_abs_mean, std::abs(si.mean[s][i]));
        }
        out.mean_term[n] += slices[s].weight * r1;
        out.poincare_term[n] += slices[s].weight * r2;
        std::vector<double> abs_int(dd.size(), 0.0);
        for (std::size_t p = 0; p < space.size(); ++p)
            abs_int[own[p]] += space[p].weight * std::abs((1.0 - params.mu_at(q.index(s, p))) * residual[q.index(s, p)]);
        for (std::size_t i = 0; i < dd.size(); ++i)
            out.mean_scale = std::max(out.mean_scale, abs_int[i] / dd.diameter(i));
    }
    return out;
}

MajorantReport majorant_dd_general(const FEFunction& v, const FluxFunction& y, const SubdomainDecomposition& dd,
                                   const DDParams& params, const EstimateContext& ctx) {
    require_dd_assumptions("thm2", dd, ctx);
    params.validate(ctx);
    BoundParams bp;
    bp.delta = params.delta;
    bp.rho1 = params.rho1;
    bp.rho2 = params.rho2;
    const WeightTuple w = weights_from_params(Estimator::Thm2, bp);
    const ResidualSamples r = residual_samples(ctx.sample(v), ctx.sample(y), ctx);
    const DDTerms t = dd_terms(r.Rf, r.Rd, params, dd, ctx, true);
    double mean = 0.0, poincare = 0.0, flux = 0.0;
    for (std::size_t n = 0; n < t.flux_term.size(); ++n) {
        mean += params.rho2 * t.mean_term[n];
        poincare += weighted(params.alpha[n][0], t.poincare_term[n]);
        flux += weighted(params.alpha[n][1], t.flux_term[n]);
    }
    MajorantReport rep;
    rep.estimator = "thm2";
    rep.terms = {{"initial", initial_term(r, ctx)},
                 {"reaction", params.rho1 * t.reaction},
                 {"subdomain_mean", mean},
                 {"poincare", poincare},
                 {"flux", flux}};
    for (const auto& term : rep.terms) rep.total += term.value;
    rep.weights = w;
    rep.scalars = bp;
    rep.constants = estimate_constants(ctx.problem());
    for (const auto& a : params.alpha) rep.alpha.push_back({a[0], a[1], kInf});
    return rep;
}

MajorantReport majorant_dd_meanzero(const FEFunction& v, const FluxFunction& y, const SubdomainDecomposition& dd,
                                    const DDParams& params, const EstimateContext& ctx) {
    require_dd_assumptions("thm3", dd, ctx);
    params.validate(ctx);
    BoundParams bp;
    bp.delta = params.delta;
    bp.gamma = params.gamma;
    const WeightTuple w = weights_from_params(Estimator::Thm3, bp);
    const ResidualSamples r = residual_samples(ctx.sample(v), ctx.sample(y), ctx);
    const DDTerms t = dd_terms(r.Rf, r.Rd, params, dd, ctx, false);
    if (t.max_abs_mean > 1e-10 * (1.0 + t.mean_scale))
        throw AssumptionError("thm3 requires zero subdomain means of (1 - mu) R_f; largest mean is " +
                              std::to_string(t.max_abs_mean));
    double poincare = 0.0, flux = 0.0;
    for (std::size_t n = 0; n < t.flux_term.size(); ++n) {
        poincare += weighted(params.alpha[n][0], t.poincare_term[n]);
        flux += weighted(params.alpha[n][1], t.flux_term[n]);
    }
    MajorantReport rep;
    rep.estimator = "thm3";
    rep.terms = {{"initial", initial_term(r, ctx)},
                 {"reaction", params.gamma * t.reaction},
                 {"poincare", poincare},
                 {"flux", flux}};
    for (const auto& term : rep.terms) rep.total += term.value;
    rep.weights = w;
    rep.scalars = bp;
    rep.constants = estimate_constants(ctx.problem());
    for (const auto& a : params.alpha) rep.alpha.push_back({a[0], a[1], kInf});
    return rep;
}

FluxFunction enforce_mean_condition(const FluxFunction& y, const std::vector<double>& residual,
                                    const SubdomainDecomposition& dd, const std::vector<double>& mu,
                                    const EstimateContext& ctx) {
    if (!dd.nests(ctx.mesh())) throw InputError("subdomain break points must be mesh nodes");
    const auto& q = ctx.quad();
    const auto space = q.space_points();
    const auto own = owners(dd, ctx);
    std::vector<double> slopes(q.num_slices() * dd.size(), 0.0);
    for (std::size_t s = 0; s < q.num_slices(); ++s) {
        std::vector<double> weight(dd.size(), 0.0), integral(dd.size(), 0.0), scale(dd.size(), 0.0);
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = q.index(s, p);
            const double m = 1.0 - (mu.empty() ? 0.0 : mu[k]);
            weight[own[p]] += space[p].weight * m;
            integral[own[p]] += space[p].weight * m * residual[k];
            scale[own[p]] += space[p].weight * std::abs(residual[k]);
        }
        for (std::size_t i = 0; i < dd.size(); ++i) {
            if (weight[i] > 0.0) {
                slopes[s * dd.size() + i] = -integral[i] / weight[i];
            } else if (std::abs(integral[i]) > 1e-14 * (1.0 + scale[i])) {
                throw AssumptionError("mean condition infeasible: 1 - mu vanishes on subdomain " + std::to_string(i));
            }
        }
    }
    std::vector<double> bounds{0.0};
    for (std::size_t i = 0; i < dd.size(); ++i) bounds.push_back(dd.right(i));
    const auto ts = ctx.mesh().t_nodes();
    const auto tau = q.rule().points();
    DivergenceCorrection corr(bounds, {ts.begin(), ts.end()}, {tau.begin(), tau.end()}, std::move(slopes));
    FluxFunction out = y;
    out.set_correction(y.has_correction() ? *y.correction() + corr : corr);
    return out;
}

FluxFunction enforce_mean_condition(const FluxFunction& y, const FEFunction& v, const SubdomainDecomposition& dd,
                                    const std::vector<double>& mu, const EstimateContext& ctx) {
    const ResidualSamples r = residual_samples(ctx.sample(v), ctx.sample(y), ctx);
    return enforce_mean_condition(y, r.Rf, dd, mu, ctx);
}

std::vector<std::array<double, 2>> optimize_dd_alphas(const std::vector<double>& c1, const std::vector<double>& c2,
                                                     double delta) {
    std::vector<std::array<double, 2>> out;
    for (std::size_t n = 0; n < c1.size(); ++n) {
        const double a = std::sqrt(std::max(c1[n], 0.0)), b = std::sqrt(std::max(c2[n], 0.0));
        if (a == 0.0 && b == 0.0) {
            out.push_back({2.0 / delta, 2.0 / delta});
        } else if (a == 0.0) {
            out.push_back({kInf, 1.0 / delta});
        } else if (b == 0.0) {
            out.push_back({1.0 / delta, kInf});
        } else {
            out.push_back({(a + b) / (delta * a), (a + b) / (delta * b)});
        }
    }
    return out;
}

}  // namespace rdbounds
