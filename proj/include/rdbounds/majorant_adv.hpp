#pragma once

#include <cstddef>
#include <vector>

#include "rdbounds/majorant.hpp"
#include "rdbounds/majorant_dd.hpp"

namespace rdbounds {

/// Parameters of the majorant with an auxiliary function w.
struct AdvParams : MajorantParams {
    double epsilon = 2.0;
};

struct AdvDDParams : DDParams {
    double epsilon = 2.0;
};

enum class DDVariant { General, MeanZero };

AdvParams initial_adv_params(const EstimateContext& ctx, double delta, double gamma, double epsilon);
AdvDDParams initial_adv_dd_params(const EstimateContext& ctx, double delta, double epsilon);

/// R_1, R_2, R_3 stored in the Rf, Rd, Rb slots; e0 = phi - v(., 0).
/// With w = 0 these are the plain residuals.
ResidualSamples adv_residual_samples(const PrimalSamples& v, const FluxSamples& y, const PrimalSamples& w,
                                     const EstimateContext& ctx);

/// L(v, w): space-time part minus the Robin boundary part.
double functional_L(const PrimalSamples& v, const PrimalSamples& w, const EstimateContext& ctx);
double functional_L(const FEFunction& v, const FEFunction& w, const EstimateContext& ctx);

/// l(v, w) = int (v(x,0) - phi)^2 - 2 w(x,0) (phi - v(x,0)) dx.
double functional_l(const PrimalSamples& v, const PrimalSamples& w, const EstimateContext& ctx);
double functional_l(const FEFunction& v, const FEFunction& w, const EstimateContext& ctx);

/// Advanced majorant ("thm4"). Not a sum of squares: it can be negative for a
/// poor w and only the inequality is guaranteed.
MajorantReport majorant_II(const FEFunction& v, const FluxFunction& y, const FEFunction& w, const AdvParams& params,
                           const EstimateConstants& constants, const EstimateContext& ctx);

/// Subdomain variants: General is "thm5" (rho1, rho2), MeanZero is "thm6"
/// and needs zero subdomain means of (1 - mu) R_1.
MajorantReport majorant_II_dd(const FEFunction& v, const FluxFunction& y, const FEFunction& w,
                              const SubdomainDecomposition& dd, const AdvDDParams& params, DDVariant variant,
                              const EstimateContext& ctx);

/// enforce_mean_condition on R_1(v, y, w).
FluxFunction enforce_mean_condition_II(const FluxFunction& y, const FEFunction& v, const FEFunction& w,
                                       const SubdomainDecomposition& dd, const std::vector<double>& mu,
                                       const EstimateContext& ctx);

/// Alternates closed-form alpha and mu updates for fixed y and w.
struct OptimizedAdv {
    AdvParams params;
    MajorantReport report;
};

OptimizedAdv optimize_majorant_II(const FEFunction& v, const FluxFunction& y, const FEFunction& w,
                                  const EstimateContext& ctx, double delta = 1.0, double gamma = 1.0,
                                  double epsilon = 2.0, std::size_t max_iterations = 20);

/// max{(2/delta)(1 + 2/dh), (dh/delta)(1 + 2/(beta dh)), epsilon}, dh = 2 - delta.
double equivalence_factor(double delta, double beta, double epsilon);

/// w = v_fine - prolong(v) where v_fine solves the problem on `fine`, a
/// refinement of v's mesh.
FEFunction coarse_correction(const FEFunction& v, const ProblemCase& problem, const SpaceTimeMesh& fine,
                             TimeScheme scheme);

}  // namespace rdbounds
