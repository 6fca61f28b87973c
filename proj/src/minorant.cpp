#include "rdbounds/minorant.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "rdbounds/errors.hpp"
#include "rdbounds/geometry.hpp"

namespace rdbounds {

namespace {

struct Basis {
    std::array<std::size_t, 4> node;
    std::array<double, 4> value, dx, dt;
};

// Bilinear basis of space cell i, time cell n at local (xi, tau).
Basis local_basis(const SpaceTimeMesh& m, std::size_t i, std::size_t n, double xi, double tau) {
    const double hx = m.x_nodes()[i + 1] - m.x_nodes()[i];
    const double ht = m.t_nodes()[n + 1] - m.t_nodes()[n];
    const std::size_t row = m.nx() + 1;
    Basis b;
    b.node = {n * row + i, n * row + i + 1, (n + 1) * row + i, (n + 1) * row + i + 1};
    b.value = {(1 - xi) * (1 - tau), xi * (1 - tau), (1 - xi) * tau, xi * tau};
    b.dx = {-(1 - tau) / hx, (1 - tau) / hx, -tau / hx, tau / hx};
    b.dt = {-(1 - xi) / ht, -xi / ht, (1 - xi) / ht, xi / ht};
    return b;
}

bool lambda_vanishes(const EstimateContext& ctx) {
    for (double l : ctx.data().lambda)
        if (l != 0.0) return false;
    return true;
}

void check_kappa(const KappaVector& kappa, const EstimateContext& ctx) {
    for (double k : kappa.k)
        if (!(k >= 0.0) || !std::isfinite(k)) throw InputError("kappa must be finite and nonnegative");
    if (!(kappa[0] > 0.0 && kappa[1] > 0.0)) throw InputError("kappa1 and kappa2 must be positive");
    if (kappa[2] == 0.0 && !lambda_vanishes(ctx)) throw InputError("kappa3 must be positive where lambda > 0");
}

double quad_or_pinned(double kappa, double square) {
    if (square == 0.0) return 0.0;
    return kappa == 0.0 ? INFINITY : square / (2.0 * kappa);
}

}  // namespace

const char* penalty_name(PenaltyMode mode) { return mode == PenaltyMode::AWeighted ? "a-weighted" : "plain"; }

WeightTuple minorant_weights(const KappaVector& kappa) {
    WeightTuple w;
    w.nu = kappa[0] / 2;
    w.c0 = kappa[1] / 2;
    w.c_lambda = kappa[2] / 2;
    w.zeta = kappa[3] / 2;
    w.chi = kappa[4] / 2;
    w.provenance = "minorant";
    return w;
}

double minorant_value(const FEFunction& v, const FEFunction& eta, const KappaVector& kappa,
                      const EstimateContext& test_ctx, PenaltyMode mode) {
    check_kappa(kappa, test_ctx);
    if (!eta.dirichlet_conforming(test_ctx.domain(), 1e-12))
        throw InputError("eta must vanish on the Dirichlet boundary");
    const auto& q = test_ctx.quad();
    const auto& d = test_ctx.data();
    const PrimalSamples vs = test_ctx.sample(v), es = test_ctx.sample(eta);
    std::vector<double> integrand(q.num_points());
    for (std::size_t k = 0; k < integrand.size(); ++k) {
        const double a = d.A[k], lam = d.lambda[k];
        const double pen = (mode == PenaltyMode::AWeighted ? a : 1.0) * es.dx[k] * es.dx[k] / (2.0 * kappa[0]);
        double reaction = 0.0;
        if (lam != 0.0) reaction = lam * (-vs.value[k] * es.value[k] - es.value[k] * es.value[k] / (2.0 * kappa[2]));
        integrand[k] = -es.dx[k] * a * vs.dx[k] - pen + es.dt[k] * vs.value[k] -
                       es.dt[k] * es.dt[k] / (2.0 * kappa[1]) + reaction + d.f[k] * es.value[k];
    }
    double value = q.integrate(integrand);
    const auto space = q.space_points();
    for (std::size_t p = 0; p < space.size(); ++p) {
        const double eT = es.terminal[p];
        value += space[p].weight * (-vs.terminal[p] * eT - quad_or_pinned(kappa[3], eT * eT) +
                                    d.phi[p] * es.initial[p]);
    }
    for (std::size_t b = 0; b < d.robin.size(); ++b)
        for (std::size_t s = 0; s < q.num_slices(); ++s) {
            const double e = es.boundary[b][s], sg = d.robin[b].sigma[s];
            value += q.slices()[s].weight *
                     (sg * (-vs.boundary[b][s] * e) - (sg == 0.0 ? 0.0 : sg * quad_or_pinned(kappa[4], e * e)) +
                      d.robin[b].g[s] * e);
        }
    return value;
}

namespace {

// kappa-independent pieces: K(kappa) = sum_j parts[j] / kappa_j.
struct MinorantSystem {
    std::vector<long> index;
    long free = 0;
    Eigen::VectorXd b;
    std::array<Eigen::SparseMatrix<double>, 5> parts;
};

MinorantSystem assemble_system(const FEFunction& v, bool pin_terminal, bool pin_robin, const EstimateContext& test_ctx,
                               PenaltyMode mode) {
    const SpaceTimeMesh& m = test_ctx.mesh();
    if (!m.refines(v.mesh())) throw InputError("the test mesh must refine the mesh of v");
    const Domain& dom = test_ctx.domain();
    const std::size_t row = m.nx() + 1, nodes = row * (m.nt() + 1);

    // Free nodes: not on a Dirichlet end, not pinned by kappa4 = 0 or kappa5 = 0.
    MinorantSystem sys;
    std::vector<long>& index = sys.index;
    index.assign(nodes, -1);
    long free = 0;
    for (std::size_t n = 0; n <= m.nt(); ++n)
        for (std::size_t i = 0; i < row; ++i) {
            const bool left = i == 0, right = i + 1 == row;
            if ((left && !dom.is_robin(Side::Left)) || (right && !dom.is_robin(Side::Right))) continue;
            if ((left || right) && pin_robin) continue;
            if (n == m.nt() && pin_terminal) continue;
            index[n * row + i] = free++;
        }
    sys.free = free;

    const auto& q = test_ctx.quad();
    const auto& d = test_ctx.data();
    const PrimalSamples vs = test_ctx.sample(v);
    Eigen::VectorXd& b = sys.b;
    b = Eigen::VectorXd::Zero(free);
    std::array<std::vector<Eigen::Triplet<double>>, 5> trip;
    const auto space = q.space_points();
    const auto slices = q.slices();
    for (std::size_t s = 0; s < slices.size(); ++s)
        for (std::size_t p = 0; p < space.size(); ++p) {
            const std::size_t k = q.index(s, p);
            const double w = slices[s].weight * space[p].weight;
            const Basis bs = local_basis(m, space[p].cell, slices[s].cell, space[p].xi, slices[s].tau);
            const double a = d.A[k], lam = d.lambda[k];
            const double ax = mode == PenaltyMode::AWeighted ? a : 1.0;
            for (int r = 0; r < 4; ++r) {
                const long ir = index[bs.node[r]];
                if (ir < 0) continue;
                b[ir] += w * (-bs.dx[r] * a * vs.dx[k] + bs.dt[r] * vs.value[k] - lam * vs.value[k] * bs.value[r] +
                              d.f[k] * bs.value[r]);
                for (int c = 0; c < 4; ++c) {
                    const long ic = index[bs.node[c]];
                    if (ic < 0) continue;
                    trip[0].emplace_back(ir, ic, w * ax * bs.dx[r] * bs.dx[c]);
                    trip[1].emplace_back(ir, ic, w * bs.dt[r] * bs.dt[c]);
                    if (lam != 0.0) trip[2].emplace_back(ir, ic, w * lam * bs.value[r] * bs.value[c]);
                }
            }
        }
    // Initial and terminal lines.
    for (std::size_t p = 0; p < space.size(); ++p) {
        const std::size_t i = space[p].cell;
        const double xi = space[p].xi, w = space[p].weight;
        const std::array<double, 2> shape{1 - xi, xi};
        for (int r = 0; r < 2; ++r) {
            const long i0 = index[i + r];
            if (i0 >= 0) b[i0] += w * d.phi[p] * shape[r];
            const long iT = index[m.nt() * row + i + r];
            if (iT < 0) continue;
            b[iT] -= w * vs.terminal[p] * shape[r];
            for (int c = 0; c < 2; ++c) {
                const long jT = index[m.nt() * row + i + c];
                if (jT >= 0) trip[3].emplace_back(iT, jT, w * shape[r] * shape[c]);
            }
        }
    }
    // Robin ends.
    for (std::size_t rb = 0; rb < d.robin.size(); ++rb) {
        const std::size_t i = d.robin[rb].side == Side::Left ? 0 : m.nx();
        for (std::size_t s = 0; s < slices.size(); ++s) {
            const std::size_t n = slices[s].cell;
            const double tau = slices[s].tau, w = slices[s].weight, sg = d.robin[rb].sigma[s];
            const std::array<double, 2> shape{1 - tau, tau};
            for (int r = 0; r < 2; ++r) {
                const long ir = index[(n + r) * row + i];
                if (ir < 0) continue;
                b[ir] += w * (d.robin[rb].g[s] - sg * vs.boundary[rb][s]) * shape[r];
                if (sg == 0.0) continue;
                for (int c = 0; c < 2; ++c) {
                    const long ic = index[(n + c) * row + i];
                    if (ic >= 0) trip[4].emplace_back(ir, ic, w * sg * shape[r] * shape[c]);
                }
            }
        }
    }
    for (int j = 0; j < 5; ++j) {
        sys.parts[j].resize(free, free);
        sys.parts[j].setFromTriplets(trip[j].begin(), trip[j].end());
    }
    return sys;
}

class MinorantSolver {
public:
    MinorantSolver(const FEFunction& v, const KappaVector& pins, const EstimateContext& test_ctx, PenaltyMode mode)
        : sys_(assemble_system(v, pins[3] == 0.0, pins[4] == 0.0, test_ctx, mode)),
          mesh_(test_ctx.mesh()),
          mode_(mode),
          plain_note_(mode == PenaltyMode::Plain && test_ctx.problem().nu2() > 1.0) {}

    MinorantResult solve(const KappaVector& kappa) {
        MinorantResult out{0.0, FEFunction(mesh_), kappa, minorant_weights(kappa), mode_, {}};
        if (plain_note_) out.notes.push_back("plain penalty bounds the measure only when A <= 1");
        if (sys_.free == 0) return out;
        Eigen::SparseMatrix<double> K(sys_.free, sys_.free);
        for (int j = 0; j < 5; ++j)
            if (kappa[j] > 0.0) K += sys_.parts[j] * (1.0 / kappa[j]);
        if (!analyzed_) {
            ldlt_.analyzePattern(K);
            analyzed_ = true;
        }
        ldlt_.factorize(K);
        if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= 0.0).any())
            throw NumericalError("minorant quadratic form is not positive definite");
        const Eigen::VectorXd eta = ldlt_.solve(sys_.b);
        out.value = std::max(0.5 * sys_.b.dot(eta), 0.0);
        for (std::size_t node = 0; node < sys_.index.size(); ++node)
            if (sys_.index[node] >= 0) out.eta.values()[node] = eta[sys_.index[node]];
        return out;
    }

private:
    MinorantSystem sys_;
    SpaceTimeMesh mesh_;
    PenaltyMode mode_;
    bool plain_note_;
    bool analyzed_ = false;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

}  // namespace

MinorantResult maximize_minorant(const FEFunction& v, const KappaVector& kappa, const EstimateContext& test_ctx,
                                 PenaltyMode mode) {
    check_kappa(kappa, test_ctx);
    return MinorantSolver(v, kappa, test_ctx, mode).solve(kappa);
}

MinorantResult optimize_kappas(const FEFunction& v, const WeightTuple& target, const EstimateContext& test_ctx,
                               PenaltyMode mode, std::size_t sweeps) {
    if (!(target.nu > 0.0)) throw InputError("target weight nu must be positive");
    if (!(target.c0 >= 0.0 && target.c_lambda >= 0.0 && target.zeta >= 0.0 && target.chi >= 0.0))
        throw InputError("target weights must be nonnegative");
    const ProblemCase& pc = test_ctx.problem();
    const double cf = friedrichs_constant(pc.domain());
    const double transfer = target.nu * pc.nu1() / (cf * cf);
    const bool no_lambda = lambda_vanishes(test_ctx);
    double lambda_max = 0.0;
    for (double l : test_ctx.data().lambda) lambda_max = std::max(lambda_max, l);
    const auto [lo, hi] = sampled_bounds(pc.lambda(), pc.domain(), 257);
    (void)lo;
    lambda_max = std::max(lambda_max, hi);
    const bool split = !no_lambda && target.c_lambda == 0.0;

    auto make = [&](double s, double r) {
        KappaVector k;
        const double budget = target.c0 + s * transfer;
        k[0] = 2.0 * target.nu * (1.0 - s);
        k[1] = 2.0 * budget * (split ? 1.0 - r : 1.0);
        k[2] = no_lambda ? 1.0 : split ? 2.0 * budget * r / lambda_max : 2.0 * target.c_lambda;
        k[3] = 2.0 * target.zeta;
        k[4] = 2.0 * target.chi;
        return k;
    };
    const KappaVector first = make(0.5, 0.5);
    check_kappa(first, test_ctx);
    MinorantSolver solver(v, first, test_ctx, mode);
    auto value = [&](double s, double r) { return solver.solve(make(s, r)).value; };

    auto golden = [](auto&& f, double a, double b, double x0, double f0) {
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 30; ++it) {
            if (fc >= fd) {
                b = d, d = c, fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c, c = d, fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        const double x = fc >= fd ? c : d, fx = std::max(fc, fd);
        return fx > f0 ? std::pair{x, fx} : std::pair{x0, f0};
    };

    const double eps = 1e-6;
    double s = 0.5, r = split ? 0.5 : 0.0;
    double best = value(s, r);
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        std::tie(s, best) = golden([&](double x) { return value(x, r); }, eps, 1.0 - eps, s, best);
        if (split) std::tie(r, best) = golden([&](double x) { return value(s, x); }, eps, 1.0 - eps, r, best);
    }
    MinorantResult out = solver.solve(make(s, r));
    out.weights = target;
    out.weights.provenance = "minorant target";
    return out;
}

}  // namespace rdbounds
