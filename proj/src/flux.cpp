#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>

#include "rdbounds/errors.hpp"
#include "rdbounds/majorant.hpp"

namespace rdbounds {

namespace {

// Infinite alphas (switched-off terms) get a tiny share of delta so the
// quadratic form stays finite; the increase in the majorant is of relative size kShare.
constexpr double kShare = 1e-10;

AlphaTriple finite_alphas(const AlphaTriple& a, double delta, bool robin) {
    const std::size_t used = robin ? 3 : 2;
    std::size_t infinite = 0;
    for (std::size_t i = 0; i < used; ++i)
        if (std::isinf(a[i])) ++infinite;
    if (infinite == 0) return a;
    AlphaTriple out = a;
    for (std::size_t i = 0; i < used; ++i)
        out[i] = std::isinf(a[i]) ? static_cast<double>(infinite) / (kShare * delta) : a[i] / (1.0 - kShare);
    return out;
}

}  // namespace

FluxFunction reconstruct_flux_minimizing(const FEFunction& v, const MajorantParams& params,
                                         const EstimateConstants& c, const EstimateContext& ctx) {
    const SpaceTimeMesh& mesh = ctx.mesh();
    if (!(v.mesh() == mesh)) throw InputError("flux minimization needs v on the quadrature mesh");
    params.validate(ctx, 0.5);
    const PrimalSamples vs = ctx.sample(v);
    const auto& q = ctx.quad();
    const auto& d = ctx.data();
    const auto space = q.space_points();
    const auto slices = q.slices();
    const std::size_t nq = q.slices_per_cell();
    const std::size_t row = mesh.nx() + 1;
    const std::size_t unknowns = row * (mesh.nt() + 1);
    const bool robin = !d.robin.empty();
    const double cf = c.friedrichs * c.friedrichs / c.nu1;
    const double ct = c.trace * c.trace / c.nu1;

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.nx() * mesh.nt() * 16 + d.robin.size() * mesh.nt() * 4);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns));

    for (std::size_t n = 0; n < mesh.nt(); ++n) {
        const AlphaTriple a = finite_alphas(params.alpha[n], params.delta, robin);
        for (std::size_t i = 0; i < mesh.nx(); ++i) {
            const std::array<std::size_t, 4> nodes{n * row + i, n * row + i + 1, (n + 1) * row + i,
                                                   (n + 1) * row + i + 1};
            double K[4][4] = {};
            double b[4] = {};
            const double hx = mesh.hx(i);
            for (std::size_t sq = 0; sq < nq; ++sq) {
                const std::size_t s = n * nq + sq;
                const double tau = slices[s].tau;
                for (std::size_t pq = 0; pq < nq; ++pq) {
                    const std::size_t p = i * nq + pq;
                    const double xi = space[p].xi;
                    const std::size_t k = q.index(s, p);
                    const double w = q.weight(s, p);
                    const double phi[4] = {(1 - xi) * (1 - tau), xi * (1 - tau), (1 - xi) * tau, xi * tau};
                    const double dphi[4] = {-(1 - tau) / hx, (1 - tau) / hx, -tau / hx, tau / hx};
                    const double mu = params.mu_at(k);
                    double wf = a[0] * cf * (1 - mu) * (1 - mu);
                    if (mu > 0.0) wf += params.gamma * mu * mu / d.lambda[k];
                    const double wd = a[1] / d.A[k];
                    const double r0 = d.f[k] - vs.dt[k] - d.lambda[k] * vs.value[k];
                    const double flux = d.A[k] * vs.dx[k];
                    for (int r = 0; r < 4; ++r) {
                        b[r] += w * (-wf * r0 * dphi[r] + wd * flux * phi[r]);
                        for (int cc = 0; cc < 4; ++cc) K[r][cc] += w * (wf * dphi[r] * dphi[cc] + wd * phi[r] * phi[cc]);
                    }
                }
            }
            for (int r = 0; r < 4; ++r) {
                rhs[static_cast<Eigen::Index>(nodes[r])] += b[r];
                for (int cc = 0; cc < 4; ++cc)
                    triplets.emplace_back(static_cast<int>(nodes[r]), static_cast<int>(nodes[cc]), K[r][cc]);
            }
        }
        for (std::size_t side = 0; side < d.robin.size(); ++side) {
            const auto& bd = d.robin[side];
            const std::size_t i = bd.side == Side::Left ? 0 : mesh.nx();
            const std::array<std::size_t, 2> nodes{n * row + i, (n + 1) * row + i};
            const double kappa = a[2] * ct;
            for (std::size_t sq = 0; sq < nq; ++sq) {
                const std::size_t s = n * nq + sq;
                const double tau = slices[s].tau;
                const double phi[2] = {1 - tau, tau};
                const double b0 = bd.g[s] - bd.sigma[s] * vs.boundary[side][s];
                for (int r = 0; r < 2; ++r) {
                    rhs[static_cast<Eigen::Index>(nodes[r])] += slices[s].weight * kappa * b0 * bd.normal * phi[r];
                    for (int cc = 0; cc < 2; ++cc)
                        triplets.emplace_back(static_cast<int>(nodes[r]), static_cast<int>(nodes[cc]),
                                              slices[s].weight * kappa * phi[r] * phi[cc]);
                }
            }
        }
    }

    Eigen::SparseMatrix<double> K(static_cast<Eigen::Index>(unknowns), static_cast<Eigen::Index>(unknowns));
    K.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw NumericalError("flux system is not positive definite");
    const Eigen::VectorXd y = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw NumericalError("flux solve failed");
    std::vector<double> values(y.data(), y.data() + y.size());
    return FluxFunction(mesh, std::move(values));
}

}  // namespace rdbounds
