#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rdbounds/acceptance.hpp"
#include "rdbounds/config.hpp"
#include "rdbounds/errors.hpp"
#include "rdbounds/harness.hpp"

namespace fs = std::filesystem;
using namespace rdbounds;

namespace {

struct Options {
    std::string config = "sine";
    std::string out;
    std::size_t levels = 4;
    std::optional<std::uint64_t> seed;
    bool deterministic = true;
    std::optional<std::size_t> quadrature_order;
    std::vector<double> deltas{0.25, 0.5, 1.0, 1.5};
    std::vector<double> gammas{1.0, 2.0, 4.0};
    std::vector<int> criteria;
};

CaseConfig load(const Options& o) {
    CaseConfig c = resolve_config(o.config);
    if (o.quadrature_order) c.quadrature_order = *o.quadrature_order;
    if (o.seed) c.seed = *o.seed;
    if (!o.out.empty()) c.output_dir = o.out;
    return c;
}

fs::path output_file(const CaseConfig& c, const std::string& suffix) {
    fs::create_directories(c.output_dir);
    return fs::path(c.output_dir) / (c.name + suffix);
}

void write(const fs::path& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    f << text;
    std::cout << "wrote " << path.string() << "\n";
}

int cmd_solve(const Options& o) {
    const CaseConfig c = load(o);
    const ProblemCase pc = build_problem(c);
    const SpaceTimeMesh m = build_case_mesh(c, pc);
    const FEFunction v = solve_fem(pc, m, c.scheme, QuadratureRule::gauss_legendre(c.quadrature_order));
    std::string csv = "x,t,v\n";
    char line[96];
    for (std::size_t n = 0; n <= m.nt(); ++n)
        for (std::size_t i = 0; i <= m.nx(); ++i) {
            std::snprintf(line, sizeof line, "%.12g,%.12g,%.17g\n", m.x_nodes()[i], m.t_nodes()[n], v(i, n));
            csv += line;
        }
    std::cout << c.name << ": " << m.nx() << "x" << m.nt() << " " << scheme_name(c.scheme) << "\n";
    write(output_file(c, "_solution.csv"), csv);
    return 0;
}

int cmd_estimate(const Options& o) {
    const CaseConfig c = load(o);
    const CaseReport r = run_case(c);
    std::printf("%-10s %14s %14s %10s\n", "estimator", "bound", "measure", "index");
    for (const auto& m : r.majorants)
        std::printf("%-10s %14.6e %14.6e %10.4f\n", m.report.estimator.c_str(), m.report.total,
                    m.measure.value_or(NAN), m.efficiency.value_or(NAN));
    if (r.minorant)
        std::printf("%-10s %14.6e %14.6e %10.4f\n", "minorant", r.minorant->value, r.minorant->measure.value_or(NAN),
                    r.minorant->efficiency.value_or(NAN));
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    write(output_file(c, ".json"), to_json(r).dump(2) + "\n");
    check_guarantees(r);
    return 0;
}

int cmd_sweep(const Options& o) {
    const CaseConfig c = load(o);
    const auto rows = parameter_sweep(c, o.deltas, o.gammas);
    const std::string csv = to_csv(rows);
    std::cout << csv;
    write(output_file(c, "_sweep.csv"), csv);
    for (const auto& r : rows)
        if (r.measure && *r.measure > r.majorant + 1e-9 * (1 + *r.measure))
            throw BoundViolation("sweep: measure exceeds the majorant at delta " + std::to_string(r.delta));
    return 0;
}

int cmd_convergence(const Options& o) {
    const CaseConfig c = load(o);
    const ConvergenceTable t = convergence_study(c, o.levels);
    const std::string csv = to_csv(t);
    std::cout << csv;
    if (t.measure_slope && t.majorant_slope)
        std::printf("slopes: measure %.4f, majorant %.4f (%s)\n", *t.measure_slope, *t.majorant_slope,
                    t.rate_ok ? "within 0.4" : "differ by more than 0.4");
    for (const auto& n : t.notes) std::cout << "note: " << n << "\n";
    write(output_file(c, "_convergence.csv"), csv);
    write(output_file(c, "_convergence.json"), to_json(t).dump(2) + "\n");
    for (const auto& r : t.rows)
        if (r.measure > r.majorant + 1e-9 * (1 + r.measure))
            throw BoundViolation("convergence: measure exceeds the majorant at h = " + std::to_string(r.h));
    return 0;
}

int cmd_verify(const Options& o) {
    const std::uint64_t seed = o.seed.value_or(1);
    std::vector<int> ids = o.criteria;
    if (ids.empty())
        for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
    nlohmann::json j = nlohmann::json::array();
    bool ok = true;
    for (int id : ids) {
        const CriterionResult r = run_criterion(id, seed);
        std::printf("%s criterion %d (%s): %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
        ok = ok && r.pass;
    }
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        write(fs::path(o.out) / "acceptance.json", j.dump(2) + "\n");
    }
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Guaranteed error bounds for 1D parabolic reaction-diffusion problems"};
    app.require_subcommand(1);
    Options o;
    app.add_option("--config", o.config, "preset name or TOML file")->capture_default_str();
    app.add_option("--out", o.out, "output directory (overrides the config)");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--quadrature-order", o.quadrature_order, "Gauss points per direction")->check(CLI::Range(1, 20));
    app.add_flag("--deterministic,!--no-deterministic", o.deterministic, "fixed-order reductions")
        ->capture_default_str();

    auto* solve = app.add_subcommand("solve", "discrete solution to CSV");
    auto* estimate = app.add_subcommand("estimate", "bounds for one case, JSON report");
    auto* sweep = app.add_subcommand("sweep", "majorant over a (delta, gamma) grid");
    sweep->add_option("--deltas", o.deltas)->capture_default_str();
    sweep->add_option("--gammas", o.gammas)->capture_default_str();
    auto* verify = app.add_subcommand("verify", "acceptance criteria");
    verify->add_option("--criterion", o.criteria, "run only these criteria")->check(CLI::Range(1, kCriteria));
    auto* convergence = app.add_subcommand("convergence", "refinement study, CSV table");
    convergence->add_option("--levels", o.levels, "number of levels")->capture_default_str();
    for (auto* sub : {solve, estimate, sweep, verify, convergence}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*solve) return cmd_solve(o);
        if (*estimate) return cmd_estimate(o);
        if (*sweep) return cmd_sweep(o);
        if (*verify) return cmd_verify(o);
        return cmd_convergence(o);
    } catch (const AssumptionError& e) {
        std::cerr << "assumption violated: " << e.what() << "\n";
        return 2;
    } catch (const BoundViolation& e) {
        std::cerr << "bound violated: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
