#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rdbounds/geometry.hpp"
#include "rdbounds/majorant.hpp"

namespace rdbounds {

/// Parameters of the subdomain majorants. rho1, rho2 enter the general form,
/// gamma the zero-mean form; 1/alpha1 + 1/alpha2 = delta on every time cell.
struct DDParams {
    double delta = 1.0;
    double gamma = 1.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
    std::vector<double> mu;  // per quadrature point, empty = 0
    std::vector<std::array<double, 2>> alpha;
    std::size_t lambda_samples = 64;
    double lambda_safety = 1.0;

    double mu_at(std::size_t k) const { return mu.empty() ? 0.0 : mu[k]; }
    void validate(const EstimateContext& ctx) const;
};

DDParams initial_dd_params(const EstimateContext& ctx, double delta);

/// Sampled minimum of lambda over each subdomain and time cell, times `safety`;
/// indexed [time cell][subdomain].
std::vector<std::vector<double>> subdomain_lambda(const ProblemCase& problem, const SubdomainDecomposition& dd,
                                                  const SpaceTimeMesh& mesh, std::size_t samples = 64,
                                                  double safety = 1.0);

/// Per slice and subdomain: int (1-mu) R and int (1-mu)^2 R^2.
struct SubdomainIntegrals {
    std::vector<std::vector<double>> mean;     // [slice][subdomain], the mean value
    std::vector<std::vector<double>> squares;  // [slice][subdomain]
};

SubdomainIntegrals subdomain_integrals(const std::vector<double>& residual, const std::vector<double>& mu,
                                       const SubdomainDecomposition& dd, const EstimateContext& ctx);

/// Shared evaluation of the subdomain bounds on an arbitrary equation residual
/// R (R_f, or R_1 for the variants with an auxiliary function).
struct DDTerms {
    double reaction = 0.0;                  // int mu^2 R^2 / lambda
    std::vector<double> mean_term;          // per time cell: int R_{I,1}^2 dt
    std::vector<double> poincare_term;      // per time cell: int R_{I,2}^2 dt
    std::vector<double> flux_term;          // per time cell: int ||R_d||_{A^-1}^2 dt
    double max_abs_mean = 0.0;
    double mean_scale = 0.0;
};

DDTerms dd_terms(const std::vector<double>& residual, const std::vector<double>& flux_residual, const DDParams& params,
                 const SubdomainDecomposition& dd, const EstimateContext& ctx, bool need_lambda);

/// General subdomain majorant with rho1, rho2 (requires lambda_i > 0).
MajorantReport majorant_dd_general(const FEFunction& v, const FluxFunction& y, const SubdomainDecomposition& dd,
                                   const DDParams& params, const EstimateContext& ctx);

/// Subdomain majorant under the zero-mean condition (call enforce_mean_condition first).
MajorantReport majorant_dd_meanzero(const FEFunction& v, const FluxFunction& y, const SubdomainDecomposition& dd,
                                    const DDParams& params, const EstimateContext& ctx);

/// y + q with d/dx q constant on each subdomain at every time quadrature node,
/// chosen so that int_{Omega_i} (1 - mu) R(y + q) = 0. `residual` holds R(y).
FluxFunction enforce_mean_condition(const FluxFunction& y, const std::vector<double>& residual,
                                    const SubdomainDecomposition& dd, const std::vector<double>& mu,
                                    const EstimateContext& ctx);
/// Same with R = R_f(v, y).
FluxFunction enforce_mean_condition(const FluxFunction& y, const FEFunction& v, const SubdomainDecomposition& dd,
                                    const std::vector<double>& mu, const EstimateContext& ctx);

/// Closed-form alpha per time cell for the two-term constraint.
std::vector<std::array<double, 2>> optimize_dd_alphas(const std::vector<double>& c1, const std::vector<double>& c2,
                                                     double delta);

/// Throws AssumptionError naming `estimator` when the case has a Robin end
/// or the decomposition does not nest the mesh.
void require_dd_assumptions(const char* estimator, const SubdomainDecomposition& dd, const EstimateContext& ctx);

}  // namespace rdbounds
