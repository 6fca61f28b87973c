#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdbounds/fe.hpp"
#include "rdbounds/measures.hpp"
#include "rdbounds/minorant.hpp"
#include "rdbounds/problem.hpp"

namespace rdbounds {

/// One run: problem data, discretization and estimator selection.
/// Coefficients are expression strings. With `exact_u` set, f, phi and g are
/// manufactured and the f/phi/g fields are ignored.
struct CaseConfig {
    std::string name = "case";
    double length = 1.0;
    double horizon = 1.0;
    BoundaryKind left = BoundaryKind::Dirichlet;
    BoundaryKind right = BoundaryKind::Dirichlet;
    std::string A = "1";
    std::string lambda = "0";
    std::optional<double> nu1, nu2;  // sampled from A when absent
    std::string sigma_left = "0", sigma_right = "0";
    std::optional<std::string> exact_u;
    std::string f = "0", phi = "0", g_left = "0", g_right = "0";

    std::size_t nx = 16, nt = 16;
    TimeScheme scheme = TimeScheme::CrankNicolson;
    std::size_t quadrature_order = 5;
    std::size_t test_refinement = 1;

    /// thm1..thm6, minorant, combined
    std::vector<std::string> estimators{"thm1", "minorant"};
    bool optimize = true;
    BoundParams params;
    std::vector<double> breaks;
    PenaltyMode penalty = PenaltyMode::AWeighted;
    std::string w_policy = "zero";  // zero | coarse
    double beta = 1.0;              // combined-norm check
    double safety = 1.0;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
};

/// Throws InputError with the offending key.
CaseConfig parse_config(std::string_view toml_text);
CaseConfig load_config(const std::string& path);
std::string to_toml(const CaseConfig& config);

std::vector<std::string> preset_names();
CaseConfig preset(const std::string& name);
/// Preset name or path to a TOML file.
CaseConfig resolve_config(const std::string& name_or_path);

ProblemCase build_problem(const CaseConfig& config);
/// Uniform nx x nt mesh plus coefficient and decomposition break points.
SpaceTimeMesh build_case_mesh(const CaseConfig& config, const ProblemCase& problem);

TimeScheme parse_scheme(const std::string& s);
const char* scheme_name(TimeScheme s);

}  // namespace rdbounds
