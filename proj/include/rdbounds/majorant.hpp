#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rdbounds/fe.hpp"
#include "rdbounds/measures.hpp"
#include "rdbounds/sampling.hpp"

namespace rdbounds {

struct EstimateConstants {
    double friedrichs = 0.0;
    double trace = 0.0;  // 0 without a Robin endpoint
    double nu1 = 1.0;
};

EstimateConstants estimate_constants(const ProblemCase& problem, double safety = 1.0);

using AlphaTriple = std::array<double, 3>;

/// delta, gamma, mu per quadrature point (empty = 0), alpha per time cell.
/// An alpha of +infinity switches its term off (1/alpha = 0).
struct MajorantParams {
    double delta = 1.0;
    double gamma = 1.0;
    std::vector<double> mu;
    std::vector<AlphaTriple> alpha;

    double mu_at(std::size_t k) const { return mu.empty() ? 0.0 : mu[k]; }
    /// Throws InputError when the constraints fail on ctx.
    void validate(const EstimateContext& ctx, double min_gamma = 1.0, std::size_t alphas = 3) const;
};

/// alpha_i = 3/delta on every cell, mu = 0.
MajorantParams initial_params(const EstimateContext& ctx, double delta, double gamma);

/// Sampled residuals R_f, R_d, R_b (per Robin side and slice) and e0 = phi - v(., 0).
struct ResidualSamples {
    std::vector<double> Rf, Rd;
    std::vector<std::vector<double>> Rb;
    std::vector<double> e0;
};

ResidualSamples residual_samples(const PrimalSamples& v, const FluxSamples& y, const EstimateContext& ctx);

/// Pointwise residual evaluators.
class ResidualFields {
public:
    ResidualFields(FEFunction v, FluxFunction y, const ProblemCase& problem);
    double Rf(double x, double t) const;
    double Rd(double x, double t) const;
    double Rb(Side side, double t) const;
    double e0(double x) const;

private:
    FEFunction v_;
    FluxFunction y_;
    const ProblemCase* problem_;
};

struct Term {
    std::string name;
    double value;
};

struct MajorantReport {
    std::string estimator;
    double total = 0.0;
    std::vector<Term> terms;
    WeightTuple weights;
    EstimateConstants constants;
    BoundParams scalars;
    std::vector<AlphaTriple> alpha;
    std::vector<double> trace;
    std::vector<std::string> notes;

    double term(const std::string& name) const;
};

/// Unweighted per-time-cell integrals of the thm1 terms.
struct CellCosts {
    std::vector<double> reaction;    // int mu^2 R_f^2 / lambda
    std::vector<double> friedrichs;  // C_F^2/nu1 int (1-mu)^2 R_f^2
    std::vector<double> flux;        // int R_d^2 / A
    std::vector<double> robin;       // C_tr^2/nu1 int R_b^2 over Robin sides
};

CellCosts cell_costs(const ResidualSamples& r, const MajorantParams& params, const EstimateConstants& c,
                     const EstimateContext& ctx);

MajorantReport majorant_I(const FEFunction& v, const FluxFunction& y, const MajorantParams& params,
                          const EstimateConstants& constants, const EstimateContext& ctx);
MajorantReport majorant_I(const PrimalSamples& v, const FluxSamples& y, const MajorantParams& params,
                          const EstimateConstants& constants, const EstimateContext& ctx);

struct AlphaChoice {
    AlphaTriple alpha;
    double objective;
};

/// Minimizes sum alpha_i c_i subject to sum 1/alpha_i = delta.
AlphaChoice optimize_alphas(const AlphaTriple& costs, double delta);

/// Pointwise minimizer of gamma mu^2 R^2/lambda + alpha1 C_F^2/nu1 (1-mu)^2 R^2.
double optimal_mu(double lambda, double gamma, double alpha1, double friedrichs, double nu1);
std::vector<double> optimize_mu(const EstimateContext& ctx, double gamma, const std::vector<AlphaTriple>& alpha,
                                const EstimateConstants& constants);

/// Minimizer of the thm1 majorant over the bilinear flux space of v's mesh
/// for fixed parameters; one sparse symmetric positive definite solve.
FluxFunction reconstruct_flux_minimizing(const FEFunction& v, const MajorantParams& params,
                                         const EstimateConstants& constants, const EstimateContext& ctx);

struct MajorantOptions {
    std::size_t max_iterations = 50;
    double tolerance = 1e-8;
    double delta = 1.0;
    double gamma = 1.0;
    /// Scan a (delta, gamma) grid and keep the pair with the smallest
    /// majorant / measure ratio; needs an exact solution.
    bool sweep = false;
    double safety = 1.0;
};

struct OptimizedMajorant {
    MajorantParams params;
    FluxFunction y;
    MajorantReport report;
};

OptimizedMajorant optimize_majorant_I(const FEFunction& v, const EstimateContext& ctx,
                                      const MajorantOptions& options = {});

}  // namespace rdbounds
