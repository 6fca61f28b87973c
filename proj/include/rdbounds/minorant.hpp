#pragma once

#include <array>
#include <string>
#include <vector>

#include "rdbounds/fe.hpp"
#include "rdbounds/measures.hpp"
#include "rdbounds/sampling.hpp"

namespace rdbounds {

/// kappa_1..kappa_5. kappa_1, kappa_2 > 0. kappa_3 may be 0 only when lambda
/// vanishes. kappa_4 = 0 pins eta(., T) = 0 and kappa_5 = 0 pins eta on the
/// Robin ends, the limits of the respective terms.
struct KappaVector {
    std::array<double, 5> k{1.0, 1.0, 1.0, 1.0, 1.0};

    double operator[](std::size_t i) const { return k[i]; }
    double& operator[](std::size_t i) { return k[i]; }
};

enum class PenaltyMode { AWeighted, Plain };

const char* penalty_name(PenaltyMode mode);

/// (kappa1/2, kappa2/2, kappa3/2, kappa4/2, kappa5/2).
WeightTuple minorant_weights(const KappaVector& kappa);

struct MinorantResult {
    double value = 0.0;
    FEFunction eta;
    KappaVector kappa;
    WeightTuple weights;
    PenaltyMode mode = PenaltyMode::AWeighted;
    std::vector<std::string> notes;
};

/// sum G_i(eta) + F(eta). The context's mesh must refine the meshes of v and eta.
double minorant_value(const FEFunction& v, const FEFunction& eta, const KappaVector& kappa,
                     const EstimateContext& test_ctx, PenaltyMode mode = PenaltyMode::AWeighted);

/// Maximizer over the Dirichlet-conforming bilinear space of test_ctx's mesh,
/// which must refine v's mesh. One sparse symmetric positive definite solve.
MinorantResult maximize_minorant(const FEFunction& v, const KappaVector& kappa, const EstimateContext& test_ctx,
                                 PenaltyMode mode = PenaltyMode::AWeighted);

/// Chooses kappa so that the bounded measure does not exceed the target
/// weights, then searches the remaining freedom for the largest value.
/// kappa4 = 2 zeta, kappa5 = 2 chi, kappa3 = 2 c_lambda; the L2 weight kappa2
/// is funded by c0 plus a share s of nu through the Friedrichs inequality.
/// When c_lambda = 0 and lambda does not vanish, part of that L2 budget is
/// moved to kappa3 through max lambda. The result records the target weights.
MinorantResult optimize_kappas(const FEFunction& v, const WeightTuple& target, const EstimateContext& test_ctx,
                               PenaltyMode mode = PenaltyMode::AWeighted, std::size_t sweeps = 2);

}  // namespace rdbounds
