#pragma once

#include <string>

#include "rdbounds/fe.hpp"
#include "rdbounds/sampling.hpp"

namespace rdbounds {

/// Weights of the error measure
///   nu ||e_x||_A^2 + int (c0 + c_lambda lambda) e^2 + zeta ||e(T)||^2 + chi ||sqrt(sigma) e||^2_{S_R}.
struct WeightTuple {
    double nu = 0.0;
    double c0 = 0.0;
    double c_lambda = 0.0;
    double zeta = 0.0;
    double chi = 0.0;
    std::string provenance;
};

struct CombinedWeightTuple {
    double nu = 0.0;
    double theta = 0.0;
    double zeta = 0.0;
    double chi = 0.0;
};

enum class Estimator { Thm1, Thm2, Thm3, Thm4, Thm5, Thm6 };

const char* estimator_name(Estimator e);

/// Free scalars of the upper bounds. Entries a given estimator does not use are ignored.
struct BoundParams {
    double delta = 1.0;
    double gamma = 1.0;
    double epsilon = 2.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
};

/// Checks the admissible range of the estimator and returns the weights its left-hand side carries.
WeightTuple weights_from_params(Estimator estimator, const BoundParams& params);

struct MeasureBreakdown {
    double gradient = 0.0;
    double reaction = 0.0;
    double terminal = 0.0;
    double robin = 0.0;
    double total() const { return gradient + reaction + terminal + robin; }
};

/// Weighted distance between the exact solution and v.
MeasureBreakdown error_measure(const FEFunction& v, const WeightTuple& w, const EstimateContext& ctx);
/// Same with v already sampled.
MeasureBreakdown error_measure(const PrimalSamples& v, const WeightTuple& w, const EstimateContext& ctx);

/// nu ||e_x||_A^2 + theta ||y - p||_{A^-1}^2 + zeta ||div(p - y) - (u - v)_t||^2 + chi ||e(T)||^2
double combined_norm(const FEFunction& v, const FluxFunction& y, const CombinedWeightTuple& w,
                     const EstimateContext& ctx);

}  // namespace rdbounds
