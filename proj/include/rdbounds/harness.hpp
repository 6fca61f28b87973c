#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rdbounds/config.hpp"
#include "rdbounds/majorant.hpp"
#include "rdbounds/minorant.hpp"

namespace rdbounds {

struct EstimateResult {
    MajorantReport report;
    std::optional<double> measure;     // with the report's weights, when u is known
    std::optional<double> efficiency;  // sqrt(Maj / measure)
    double seconds = 0.0;
};

struct MinorantSummary {
    double value = 0.0;
    KappaVector kappa;
    WeightTuple weights;
    PenaltyMode mode = PenaltyMode::AWeighted;
    std::optional<double> measure;
    std::optional<double> efficiency;  // sqrt(Min / measure)
    std::vector<std::string> notes;
    double seconds = 0.0;
};

/// Majorant with delta = 1, mu = 0 against the combined primal-dual norm.
struct CombinedSummary {
    double beta = 1.0;
    double majorant = 0.0;
    double combined = 0.0;
    double factor = 0.0;  // max{1, 1+beta} + beta + 2
    bool lower_ok = false;
    bool upper_ok = false;
};

struct CaseReport {
    std::string name;
    std::size_t nx = 0, nt = 0;
    std::string scheme;
    bool exact_known = false;
    bool exact = false;  // measure vanishes: efficiencies are undefined
    std::vector<EstimateResult> majorants;
    std::optional<MinorantSummary> minorant;
    std::optional<CombinedSummary> combined;
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    double solve_seconds = 0.0;

    const EstimateResult* find(const std::string& estimator) const;
};

/// solve, reconstruct, estimate; AssumptionError names the estimator whose
/// standing assumption fails.
CaseReport run_case(const CaseConfig& config);

/// Throws BoundViolation listing report.violations.
void check_guarantees(const CaseReport& report);

nlohmann::json to_json(const CaseReport& report);

struct ConvergenceRow {
    double h = 0.0, dt = 0.0;
    double measure = 0.0, majorant = 0.0, minorant = 0.0;
    std::optional<double> eff_upper, eff_lower;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    std::optional<double> measure_slope;  // least-squares slope in log h
    std::optional<double> majorant_slope;
    bool rate_ok = true;                  // slopes within 0.4
    std::vector<std::string> notes;
};

/// Doubles nx and nt per level; thm1 (optimized) and the minorant per level.
ConvergenceTable convergence_study(const CaseConfig& config, std::size_t levels);
std::string to_csv(const ConvergenceTable& table);
nlohmann::json to_json(const ConvergenceTable& table);

struct DoubleInequalityTrial {
    double majorant = 0.0, combined = 0.0;
    bool lower_ok = false, upper_ok = false;
};

struct DoubleInequalityReport {
    double beta = 1.0;
    double factor = 0.0;
    std::vector<DoubleInequalityTrial> trials;
    std::size_t violations = 0;
};

/// Needs lambda = 0, Dirichlet ends and phi = v(., 0); the first trial uses the
/// discrete solution with the averaged flux, the rest random perturbations of both.
DoubleInequalityReport verify_double_inequality(const CaseConfig& config, double beta, std::size_t trials,
                                                std::uint64_t seed);
CombinedSummary combined_check(const FEFunction& v, const FluxFunction& y, double beta, const EstimateContext& ctx);

struct SweepRow {
    double delta = 0.0, gamma = 0.0;
    double majorant = 0.0;
    std::optional<double> measure, ratio;
};

/// optimize_majorant_I at every (delta, gamma) pair.
std::vector<SweepRow> parameter_sweep(const CaseConfig& config, const std::vector<double>& deltas,
                                      const std::vector<double>& gammas);
std::string to_csv(const std::vector<SweepRow>& rows);

/// Number as JSON; non-finite values become "inf", "-inf" or "nan".
nlohmann::json json_number(double v);

}  // namespace rdbounds
