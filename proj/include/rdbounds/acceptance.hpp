#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rdbounds {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

/// Criteria are numbered 1 to 9; `seed` drives every random perturbation.
CriterionResult run_criterion(int id, std::uint64_t seed = 1);
std::vector<CriterionResult> run_acceptance(std::uint64_t seed = 1);
constexpr int kCriteria = 9;

}  // namespace rdbounds
