#include "rdbounds/harness.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "rdbounds/errors.hpp"
#include "rdbounds/majorant_adv.hpp"
#include "rdbounds/majorant_dd.hpp"

namespace rdbounds {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double tolerance(double measure) { return 1e-9 * (1.0 + measure); }

constexpr double kExactMeasure = 1e-13;

std::optional<double> efficiency(double bound, std::optional<double> measure) {
    if (!measure || *measure <= kExactMeasure) return std::nullopt;
    return std::sqrt(std::max(bound, 0.0) / *measure);
}

// alpha per time cell for the subdomain bounds from the residual costs.
template <class P>
void fit_dd_alphas(P& params, const std::vector<double>& residual, const std::vector<double>& flux_residual,
                   const SubdomainDecomposition& dd, const EstimateContext& ctx, bool need_lambda) {
    const DDTerms t = dd_terms(residual, flux_residual, params, dd, ctx, need_lambda);
    params.alpha = optimize_dd_alphas(t.poincare_term, t.flux_term, params.delta);
}

struct Run {
    const CaseConfig& config;
    ProblemCase problem;
    SpaceTimeMesh mesh;
    QuadratureRule rule;
    EstimateContext ctx;
    FEFunction v;
    std::optional<FluxFunction> y;
    CaseReport report;

    explicit Run(const CaseConfig& c)
        : config(c),
          problem(build_problem(c)),
          mesh(build_case_mesh(c, problem)),
          rule(QuadratureRule::gauss_legendre(c.quadrature_order)),
          ctx(problem, mesh, rule),
          v(mesh) {}

    void add(MajorantReport rep, const EstimateContext& mctx, Clock::time_point t0) {
        EstimateResult r;
        if (problem.exact()) {
            const double m = error_measure(v, rep.weights, mctx).total();
            r.measure = m;
            r.efficiency = efficiency(rep.total, m);
            if (!(m <= rep.total + tolerance(m)))
                report.violations.push_back(rep.estimator + ": measure " + std::to_string(m) + " exceeds bound " +
                                            std::to_string(rep.total));
        }
        r.report = std::move(rep);
        r.seconds = seconds_since(t0);
        report.majorants.push_back(std::move(r));
    }

    const FluxFunction& flux() {
        if (!y) y = reconstruct_flux_averaged(v, problem);
        return *y;
    }
};

}  // namespace

const EstimateResult* CaseReport::find(const std::string& estimator) const {
    for (const auto& m : majorants)
        if (m.report.estimator == estimator) return &m;
    return nullptr;
}

CombinedSummary combined_check(const FEFunction& v, const FluxFunction& y, double beta, const EstimateContext& ctx) {
    const ProblemCase& pc = ctx.problem();
    if (!pc.lambda_vanishes()) throw AssumptionError("the combined-norm check assumes lambda = 0");
    if (ctx.domain().has_robin()) throw AssumptionError("the combined-norm check assumes Dirichlet ends only");
    const PrimalSamples vs = ctx.sample(v);
    double gap = 0.0, scale = 0.0;
    for (std::size_t p = 0; p < vs.initial.size(); ++p) {
        gap = std::max(gap, std::abs(vs.initial[p] - ctx.data().phi[p]));
        scale = std::max(scale, std::abs(ctx.data().phi[p]));
    }
    if (gap > 1e-12 * (1.0 + scale)) throw AssumptionError("the combined-norm check assumes phi = v(., 0)");
    const EstimateConstants c = estimate_constants(pc);
    MajorantParams p = initial_params(ctx, 1.0, 1.0);
    for (auto& a : p.alpha) a = {(1.0 + beta) / beta, 1.0 + beta, INFINITY};
    CombinedSummary out;
    out.beta = beta;
    out.majorant = majorant_I(vs, ctx.sample(y), p, c, ctx).total;
    const CombinedWeightTuple cw{1.0 + beta, 1.0 + beta, (1.0 + 1.0 / beta) * c.friedrichs * c.friedrichs / c.nu1, 1.0};
    out.combined = combined_norm(v, y, cw, ctx);
    out.factor = std::max(1.0, 1.0 + beta) + beta + 2.0;
    const double tol = 1e-12 * (1.0 + out.combined);
    out.lower_ok = out.majorant <= out.combined + tol;
    out.upper_ok = out.combined <= out.factor * out.majorant + tol;
    return out;
}

CaseReport run_case(const CaseConfig& config) {
    Run run(config);
    CaseReport& rep = run.report;
    rep.name = config.name;
    rep.nx = run.mesh.nx();
    rep.nt = run.mesh.nt();
    rep.scheme = scheme_name(config.scheme);
    rep.exact_known = run.problem.exact().has_value();

    auto t0 = Clock::now();
    run.v = solve_fem(run.problem, run.mesh, config.scheme, run.rule);
    rep.solve_seconds = seconds_since(t0);
    const BoundParams& bp = config.params;
    const EstimateConstants constants = estimate_constants(run.problem, config.safety);
    auto wants = [&](const char* e) {
        for (const auto& s : config.estimators)
            if (s == e) return true;
        return false;
    };
    const SubdomainDecomposition dd = decompose(run.problem.domain(), config.breaks);

    if (wants("thm1")) {
        t0 = Clock::now();
        if (config.optimize) {
            MajorantOptions opt;
            opt.delta = bp.delta;
            opt.gamma = bp.gamma;
            opt.safety = config.safety;
            OptimizedMajorant o = optimize_majorant_I(run.v, run.ctx, opt);
            run.y = o.y;
            run.add(std::move(o.report), run.ctx, t0);
        } else {
            run.add(majorant_I(run.v, run.flux(), initial_params(run.ctx, bp.delta, bp.gamma), constants, run.ctx),
                    run.ctx, t0);
        }
    }
    if (wants("thm2")) {
        t0 = Clock::now();
        require_dd_assumptions("thm2", dd, run.ctx);
        DDParams p = initial_dd_params(run.ctx, bp.delta);
        p.rho1 = bp.rho1;
        p.rho2 = bp.rho2;
        p.lambda_safety = 1.0 / config.safety;
        if (config.optimize) {
            const ResidualSamples r = residual_samples(run.ctx.sample(run.v), run.ctx.sample(run.flux()), run.ctx);
            fit_dd_alphas(p, r.Rf, r.Rd, dd, run.ctx, true);
        }
        run.add(majorant_dd_general(run.v, run.flux(), dd, p, run.ctx), run.ctx, t0);
    }
    if (wants("thm3")) {
        t0 = Clock::now();
        require_dd_assumptions("thm3", dd, run.ctx);
        DDParams p = initial_dd_params(run.ctx, bp.delta);
        p.gamma = bp.gamma;
        const FluxFunction ym = enforce_mean_condition(run.flux(), run.v, dd, {}, run.ctx);
        if (config.optimize) {
            const ResidualSamples r = residual_samples(run.ctx.sample(run.v), run.ctx.sample(ym), run.ctx);
            fit_dd_alphas(p, r.Rf, r.Rd, dd, run.ctx, false);
        }
        run.add(majorant_dd_meanzero(run.v, ym, dd, p, run.ctx), run.ctx, t0);
    }

    const bool advanced = wants("thm4") || wants("thm5") || wants("thm6");
    if (advanced) {
        const SpaceTimeMesh wmesh = config.w_policy == "coarse" ? run.mesh.refined() : run.mesh;
        const EstimateContext wctx(run.problem, wmesh, run.rule);
        const FEFunction w =
            config.w_policy == "coarse" ? coarse_correction(run.v, run.problem, wmesh, config.scheme) : FEFunction(wmesh);
        if (wants("thm4")) {
            t0 = Clock::now();
            if (config.optimize) {
                OptimizedAdv o = optimize_majorant_II(run.v, run.flux(), w, wctx, bp.delta, bp.gamma, bp.epsilon);
                run.add(std::move(o.report), wctx, t0);
            } else {
                run.add(majorant_II(run.v, run.flux(), w, initial_adv_params(wctx, bp.delta, bp.gamma, bp.epsilon),
                                    constants, wctx),
                        wctx, t0);
            }
        }
        for (const char* name : {"thm5", "thm6"}) {
            if (!wants(name)) continue;
            t0 = Clock::now();
            const bool general = std::string(name) == "thm5";
            require_dd_assumptions(name, dd, wctx);
            AdvDDParams p = initial_adv_dd_params(wctx, bp.delta, bp.epsilon);
            p.gamma = bp.gamma;
            p.rho1 = bp.rho1;
            p.rho2 = bp.rho2;
            p.lambda_safety = 1.0 / config.safety;
            const FluxFunction yy = general ? run.flux() : enforce_mean_condition_II(run.flux(), run.v, w, dd, {}, wctx);
            if (config.optimize) {
                const ResidualSamples r =
                    adv_residual_samples(wctx.sample(run.v), wctx.sample(yy), wctx.sample(w), wctx);
                fit_dd_alphas(p, r.Rf, r.Rd, dd, wctx, general);
            }
            run.add(majorant_II_dd(run.v, yy, w, dd, p, general ? DDVariant::General : DDVariant::MeanZero, wctx),
                    wctx, t0);
        }
    }

    if (wants("minorant")) {
        t0 = Clock::now();
        SpaceTimeMesh tmesh = run.mesh;
        for (std::size_t i = 0; i < config.test_refinement; ++i) tmesh = tmesh.refined();
        const EstimateContext tctx(run.problem, tmesh, run.rule);
        WeightTuple target;
        if (const EstimateResult* t1 = rep.find("thm1")) {
            target = t1->report.weights;
        } else {
            target = weights_from_params(Estimator::Thm1, bp);
        }
        const MinorantResult m = optimize_kappas(run.v, target, tctx, config.penalty, config.optimize ? 2 : 0);
        MinorantSummary s;
        s.value = m.value;
        s.kappa = m.kappa;
        s.weights = m.weights;
        s.mode = m.mode;
        s.notes = m.notes;
        if (rep.exact_known) {
            const double measure = error_measure(run.v, m.weights, tctx).total();
            s.measure = measure;
            s.efficiency = efficiency(m.value, measure);
            if (!(m.value <= measure + tolerance(measure)))
                rep.violations.push_back("minorant " + std::to_string(m.value) + " exceeds measure " +
                                         std::to_string(measure));
        }
        s.seconds = seconds_since(t0);
        rep.minorant = s;
    }
    if (wants("combined")) {
        const CombinedSummary c = combined_check(run.v, run.flux(), config.beta, run.ctx);
        if (!c.lower_ok) rep.violations.push_back("combined norm below the majorant");
        if (!c.upper_ok) rep.violations.push_back("combined norm above factor times the majorant");
        rep.combined = c;
    }

    if (rep.exact_known) {
        bool all_zero = !rep.majorants.empty();
        for (const auto& m : rep.majorants) all_zero = all_zero && m.measure && *m.measure <= kExactMeasure;
        rep.exact = all_zero;
        if (rep.exact) rep.notes.push_back("exact: the error measure vanishes, efficiency indices are undefined");
    }
    return rep;
}

void check_guarantees(const CaseReport& report) {
    if (report.violations.empty()) return;
    std::string msg = report.name + ":";
    for (const auto& v : report.violations) msg += " " + v + ";";
    throw BoundViolation(msg);
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? json_number(*v) : nlohmann::json(nullptr);
}

nlohmann::json weights_json(const WeightTuple& w) {
    return {{"nu", json_number(w.nu)},
            {"c0", json_number(w.c0)},
            {"c_lambda", json_number(w.c_lambda)},
            {"zeta", json_number(w.zeta)},
            {"chi", json_number(w.chi)},
            {"provenance", w.provenance}};
}

}  // namespace

nlohmann::json to_json(const CaseReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["mesh"] = {{"nx", r.nx}, {"nt", r.nt}, {"scheme", r.scheme}};
    j["exact_known"] = r.exact_known;
    j["exact"] = r.exact;
    j["majorants"] = nlohmann::json::array();
    for (const auto& m : r.majorants) {
        nlohmann::json e;
        e["estimator"] = m.report.estimator;
        e["total"] = json_number(m.report.total);
        for (const auto& t : m.report.terms) e["terms"][t.name] = json_number(t.value);
        e["weights"] = weights_json(m.report.weights);
        e["constants"] = {{"friedrichs", json_number(m.report.constants.friedrichs)},
                          {"trace", json_number(m.report.constants.trace)},
                          {"nu1", json_number(m.report.constants.nu1)}};
        const BoundParams& s = m.report.scalars;
        e["params"] = {{"delta", s.delta}, {"gamma", s.gamma}, {"epsilon", s.epsilon}, {"rho1", s.rho1},
                       {"rho2", s.rho2}};
        e["alpha"] = nlohmann::json::array();
        for (const auto& a : m.report.alpha)
            e["alpha"].push_back({json_number(a[0]), json_number(a[1]), json_number(a[2])});
        e["trace"] = nlohmann::json::array();
        for (double t : m.report.trace) e["trace"].push_back(json_number(t));
        e["notes"] = m.report.notes;
        e["measure"] = optional_number(m.measure);
        e["efficiency"] = optional_number(m.efficiency);
        e["seconds"] = m.seconds;
        j["majorants"].push_back(std::move(e));
    }
    if (r.minorant) {
        const auto& m = *r.minorant;
        nlohmann::json k = nlohmann::json::array();
        for (double x : m.kappa.k) k.push_back(json_number(x));
        j["minorant"] = {{"value", json_number(m.value)},
                         {"kappa", k},
                         {"weights", weights_json(m.weights)},
                         {"penalty", penalty_name(m.mode)},
                         {"measure", optional_number(m.measure)},
                         {"efficiency", optional_number(m.efficiency)},
                         {"notes", m.notes},
                         {"seconds", m.seconds}};
    }
    if (r.combined) {
        const auto& c = *r.combined;
        j["combined"] = {{"beta", c.beta},         {"majorant", json_number(c.majorant)},
                         {"combined", json_number(c.combined)}, {"factor", c.factor},
                         {"lower_ok", c.lower_ok}, {"upper_ok", c.upper_ok}};
    }
    j["violations"] = r.violations;
    j["notes"] = r.notes;
    j["solve_seconds"] = r.solve_seconds;
    return j;
}

namespace {

std::optional<double> fit_slope(const std::vector<double>& h, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(y[i] > 0.0)) return std::nullopt;
        lx.push_back(std::log(h[i]));
        ly.push_back(std::log(y[i]));
    }
    const double n = static_cast<double>(lx.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ConvergenceTable convergence_study(const CaseConfig& config, std::size_t levels) {
    if (levels < 2) throw InputError("a convergence study needs at least two levels");
    CaseConfig c = config;
    c.estimators = {"thm1", "minorant"};
    ConvergenceTable table;
    for (std::size_t l = 0; l < levels; ++l) {
        c.nx = config.nx << l;
        c.nt = config.nt << l;
        const CaseReport r = run_case(c);
        if (!r.exact_known) throw InputError("a convergence study needs an exact solution");
        const EstimateResult& m = *r.find("thm1");
        const ProblemCase pc = build_problem(c);
        const SpaceTimeMesh mesh = build_case_mesh(c, pc);
        ConvergenceRow row;
        row.h = mesh.max_hx();
        row.dt = mesh.max_ht();
        row.measure = *m.measure;
        row.majorant = m.report.total;
        row.minorant = r.minorant->value;
        row.eff_upper = m.efficiency;
        if (r.minorant->measure) row.eff_lower = efficiency(row.minorant, *r.minorant->measure);
        table.rows.push_back(row);
        for (const auto& v : r.violations) table.notes.push_back("level " + std::to_string(l) + ": " + v);
    }
    std::vector<double> h, meas, maj;
    bool all_small = true;
    for (const auto& row : table.rows) {
        h.push_back(row.h);
        meas.push_back(row.measure);
        maj.push_back(row.majorant);
        all_small = all_small && row.measure <= kExactMeasure;
    }
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i].measure > table.rows[i - 1].measure && !all_small)
            table.notes.push_back("measure increases from level " + std::to_string(i - 1) + " to " +
                                  std::to_string(i));
    if (all_small) {
        table.notes.push_back("exact: measure vanishes on every level, slopes skipped");
        return table;
    }
    table.measure_slope = fit_slope(h, meas);
    table.majorant_slope = fit_slope(h, maj);
    table.rate_ok = table.measure_slope && table.majorant_slope &&
                    std::abs(*table.measure_slope - *table.majorant_slope) <= 0.4;
    return table;
}

std::string to_csv(const ConvergenceTable& t) {
    std::ostringstream os;
    os.precision(10);
    os << "h,dt,measure,majorant,minorant,eff_upper,eff_lower\n";
    auto opt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& r : t.rows)
        os << r.h << "," << r.dt << "," << r.measure << "," << r.majorant << "," << r.minorant << ","
           << opt(r.eff_upper) << "," << opt(r.eff_lower) << "\n";
    return os.str();
}

nlohmann::json to_json(const ConvergenceTable& t) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : t.rows)
        j["rows"].push_back({{"h", r.h},
                             {"dt", r.dt},
                             {"measure", json_number(r.measure)},
                             {"majorant", json_number(r.majorant)},
                             {"minorant", json_number(r.minorant)},
                             {"eff_upper", optional_number(r.eff_upper)},
                             {"eff_lower", optional_number(r.eff_lower)}});
    j["measure_slope"] = optional_number(t.measure_slope);
    j["majorant_slope"] = optional_number(t.majorant_slope);
    j["rate_ok"] = t.rate_ok;
    j["notes"] = t.notes;
    return j;
}

DoubleInequalityReport verify_double_inequality(const CaseConfig& config, double beta, std::size_t trials,
                                                std::uint64_t seed) {
    if (!(beta > 0.0)) throw InputError("beta must be positive");
    const ProblemCase pc = build_problem(config);
    const SpaceTimeMesh mesh = build_case_mesh(config, pc);
    const EstimateContext ctx(pc, mesh, QuadratureRule::gauss_legendre(config.quadrature_order));
    if (!pc.exact()) throw InputError("the combined-norm check needs an exact solution");
    const FEFunction v0 = solve_fem(pc, mesh, config.scheme);
    const FluxFunction y0 = reconstruct_flux_averaged(v0, pc);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    DoubleInequalityReport out;
    out.beta = beta;
    out.factor = std::max(1.0, 1.0 + beta) + beta + 2.0;
    for (std::size_t trial = 0; trial < trials; ++trial) {
        FEFunction v = v0;
        FluxFunction y = y0;
        if (trial > 0) {
            const double av = 0.1 * (u(rng) + 1.0), ay = 0.5 * (u(rng) + 1.0);
            for (std::size_t n = 1; n <= mesh.nt(); ++n)
                for (std::size_t i = 1; i < mesh.nx(); ++i) v(i, n) += av * u(rng);
            for (double& val : y.values()) val += ay * u(rng);
        }
        const CombinedSummary c = combined_check(v, y, beta, ctx);
        out.trials.push_back({c.majorant, c.combined, c.lower_ok, c.upper_ok});
        if (!c.lower_ok || !c.upper_ok) ++out.violations;
    }
    return out;
}

std::vector<SweepRow> parameter_sweep(const CaseConfig& config, const std::vector<double>& deltas,
                                      const std::vector<double>& gammas) {
    const ProblemCase pc = build_problem(config);
    const SpaceTimeMesh mesh = build_case_mesh(config, pc);
    const EstimateContext ctx(pc, mesh, QuadratureRule::gauss_legendre(config.quadrature_order));
    const FEFunction v = solve_fem(pc, mesh, config.scheme);
    std::vector<SweepRow> rows;
    for (double d : deltas)
        for (double g : gammas) {
            MajorantOptions opt;
            opt.delta = d;
            opt.gamma = g;
            opt.safety = config.safety;
            const OptimizedMajorant o = optimize_majorant_I(v, ctx, opt);
            SweepRow row{d, g, o.report.total, std::nullopt, std::nullopt};
            if (pc.exact()) {
                row.measure = error_measure(v, o.report.weights, ctx).total();
                if (*row.measure > kExactMeasure) row.ratio = o.report.total / *row.measure;
            }
            rows.push_back(row);
        }
    return rows;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os.precision(10);
    os << "delta,gamma,majorant,measure,ratio\n";
    for (const auto& r : rows)
        os << r.delta << "," << r.gamma << "," << r.majorant << "," << (r.measure ? std::to_string(*r.measure) : "")
           << "," << (r.ratio ? std::to_string(*r.ratio) : "") << "\n";
    return os.str();
}

}  // namespace rdbounds
