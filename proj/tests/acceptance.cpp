#include <cstdio>
#include <cstdlib>
#include <string>

#include "rdbounds/acceptance.hpp"

// Usage: acceptance [criterion ...]
int main(int argc, char** argv) {
    bool all_pass = true;
    auto report = [&](const rdbounds::CriterionResult& r) {
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
        all_pass = all_pass && r.pass;
    };
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) report(rdbounds::run_criterion(std::atoi(argv[i])));
    } else {
        for (int id = 1; id <= rdbounds::kCriteria; ++id) report(rdbounds::run_criterion(id));
    }
    return all_pass ? 0 : 1;
}
