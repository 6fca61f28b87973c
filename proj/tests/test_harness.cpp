#include "doctest.h"

#include "rdbounds/errors.hpp"
#include "rdbounds/harness.hpp"

using namespace rdbounds;

namespace {

CaseConfig quick(const std::string& name) {
    CaseConfig c = preset(name);
    c.nx = 8;
    c.nt = 8;
    return c;
}

nlohmann::json strip_timings(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("seconds");
        j.erase("solve_seconds");
        for (auto& [k, v] : j.items()) v = strip_timings(v);
    } else if (j.is_array()) {
        for (auto& v : j) v = strip_timings(v);
    }
    return j;
}

}  // namespace

TEST_CASE("config parse errors name the key or line") {
    CHECK_THROWS_AS(parse_config("name = 1\n"), InputError);
    CHECK_THROWS_WITH_AS(parse_config("[mesh\nnx = 4\n"), doctest::Contains("line"), InputError);
    CHECK_THROWS_AS(resolve_config("no-such-preset-or-file"), InputError);
}

TEST_CASE("presets round-trip through toml") {
    for (const auto& name : preset_names()) {
        const CaseConfig a = preset(name);
        const CaseConfig b = parse_config(to_toml(a));
        CHECK(to_toml(b) == to_toml(a));
        CHECK(b.estimators == a.estimators);
    }
}

TEST_CASE("every preset runs without violations") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const CaseReport r = run_case(quick(name));
        CHECK(r.violations.empty());
        CHECK_NOTHROW(check_guarantees(r));
        for (const auto& m : r.majorants) {
            REQUIRE(m.measure);
            CHECK(*m.measure <= m.report.total * (1 + 1e-9) + 1e-12);
        }
        REQUIRE(r.minorant);
        CHECK(r.minorant->value <= *r.minorant->measure * (1 + 1e-9) + 1e-12);
    }
}

TEST_CASE("bilinear exactness is flagged") {
    CaseConfig c = preset("bilinear");
    c.scheme = TimeScheme::BackwardEuler;
    const CaseReport r = run_case(c);
    CHECK(r.exact);
    for (const auto& m : r.majorants) {
        CHECK(m.report.total <= 1e-12);
        CHECK_FALSE(m.efficiency);
    }
    CHECK(r.minorant->value <= 1e-12);
}

TEST_CASE("subdomain estimators reject a Robin end") {
    CaseConfig c = quick("robin");
    c.estimators = {"thm2"};
    CHECK_THROWS_WITH_AS(run_case(c), doctest::Contains("thm2"), AssumptionError);
}

TEST_CASE("convergence needs two levels") {
    CHECK_THROWS_AS(convergence_study(quick("sine"), 1), InputError);
    const ConvergenceTable t = convergence_study(quick("sine"), 2);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1].h == doctest::Approx(t.rows[0].h / 2));
    CHECK(t.measure_slope);
    CHECK(to_csv(t).find("h,dt,measure") == 0);
}

TEST_CASE("reports are reproducible") {
    const CaseConfig c = quick("variable-A");
    CHECK(strip_timings(to_json(run_case(c))) == strip_timings(to_json(run_case(c))));
}

TEST_CASE("json numbers") {
    CHECK(json_number(INFINITY) == "inf");
    CHECK(json_number(-INFINITY) == "-inf");
    CHECK(json_number(NAN) == "nan");
    CHECK(json_number(1.5) == 1.5);
}

TEST_CASE("combined check assumptions") {
    CHECK_THROWS_AS(verify_double_inequality(quick("robin"), 1.0, 2, 1), AssumptionError);
    CHECK_THROWS_AS(verify_double_inequality(quick("sine"), 0.0, 2, 1), InputError);
}

TEST_CASE("parameter sweep") {
    const auto rows = parameter_sweep(quick("sine"), {0.5, 1.0}, {1.0});
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) CHECK(*r.ratio >= 1.0 - 1e-9);
    CHECK(to_csv(rows).find("delta,gamma") == 0);
}
