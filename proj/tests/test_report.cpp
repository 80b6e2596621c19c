#include "heisolv/fixtures.hpp"
#include "heisolv/kernel.hpp"
#include "heisolv/report.hpp"
#include "heisolv/symplectic.hpp"
#include "heisolv/twisted.hpp"
#include "heisolv/verify.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

using namespace heisolv;

namespace {

AnalysisInput fixture_input(const std::string& name) {
    AnalysisInput in;
    in.spec = fixture(name);
    in.spec.alpha += 0.5;
    in.source = "fixture:" + name;
    return in;
}

Json load_golden(const std::string& name) {
    std::ifstream f(std::string(HEISOLV_GOLDEN_DIR) + "/" + name + ".json");
    REQUIRE(f.good());
    return Json::parse(f);
}

bool all_numbers_finite(const Json& j) {
    if (j.is_number_float()) return std::isfinite(j.get<double>());
    if (j.is_structured())
        for (const auto& x : j)
            if (!all_numbers_finite(x)) return false;
    return true;
}

}  // namespace

TEST_SUITE("cli-report") {

TEST_CASE("reports match the golden files") {
    for (const auto& f : fixture_list()) {
        const Json r = analysis_report(fixture_input(f.name));
        const auto diffs = compare_reports(load_golden(f.name), r);
        for (const auto& d : diffs) MESSAGE(f.name, ": ", d);
        CHECK_MESSAGE(diffs.empty(), f.name);
    }
}

TEST_CASE("reports are byte-stable and finite") {
    for (const auto& f : fixture_list()) {
        const Json a = analysis_report(fixture_input(f.name));
        const Json b = analysis_report(fixture_input(f.name));
        CHECK(a.dump() == b.dump());
        CHECK(all_numbers_finite(a));
        CHECK(a["schema_version"] == kSchemaVersion);
        for (const char* key : {"tool", "source", "spec", "options", "tolerances", "structure", "verdict",
                                "kernel_checks", "null_fields"})
            CHECK_MESSAGE(a.contains(key), key);
    }
}

TEST_CASE("non-finite numbers become null with a reason") {
    Json j = {{"a", 1.0},
              {"b", std::numeric_limits<double>::quiet_NaN()},
              {"c", {{"d", std::numeric_limits<double>::infinity()}, {"e", Json::array({1.0, -std::numeric_limits<double>::infinity()})}}}};
    finalize_nulls(j);
    CHECK(j["b"].is_null());
    CHECK(j["c"]["d"].is_null());
    CHECK(j["c"]["e"][1].is_null());
    CHECK(j["a"] == 1.0);
    REQUIRE(j["null_fields"].size() == 3);
    CHECK(j["null_fields"][0]["path"] == "/b");
    CHECK(j["null_fields"][0]["reason"] == "not applicable or undefined");
    CHECK(j["null_fields"][1]["path"] == "/c/d");
    CHECK(j["null_fields"][1]["reason"] == "infinite");
    CHECK(j["null_fields"][2]["path"] == "/c/e/1");
}

TEST_CASE("field-wise comparison") {
    const Json e = {{"x", 1.0}, {"s", "a"}, {"v", {1.0, 2.0}}, {"tool", {{"version", "0"}}}};
    Json a = e;
    CHECK(compare_reports(e, a).empty());
    a["x"] = 1.0 + 1e-10;
    CHECK(compare_reports(e, a).empty());
    a["x"] = 1.001;
    CHECK(compare_reports(e, a).size() == 1);
    a = e;
    a["s"] = "b";
    a["v"][1] = 3.0;
    a["tool"]["version"] = "1";
    CHECK(compare_reports(e, a).size() == 3);
    CHECK(compare_reports(e, a, 1e-7, 1e-9, {"tool", "s", "v"}).empty());
    a = e;
    a.erase("x");
    CHECK(compare_reports(e, a).size() == 1);
}

TEST_CASE("complex and matrix serialization") {
    CHECK(to_json(Complex(1.5, -2.0)) == Json::array({1.5, -2.0}));
    CMatrix M(1, 2);
    M << Complex(1.0, 0.0), Complex(0.0, 1.0);
    CHECK(to_json(M).dump() == "[[[1.0,0.0],[0.0,1.0]]]");
    const Json s = to_json(fixture("sublaplacian_n1"));
    CHECK(load_spec_json(s.dump()).A == fixture("sublaplacian_n1").A);
}

TEST_CASE("kernel CSV carries the Mehler values") {
    const Grid g{1, 16, 4.0};
    const KernelHat k = kernel_hat(hamilton_from_A(fixture("sublaplacian_n1").A), 1.0, 0.1);
    GridFunction f(g);
    for (std::size_t i = 0; i < g.size(); ++i) f.values[i] = gamma_hat(k, g.point(i).cast<Complex>());
    std::istringstream csv(to_csv(f));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "x1,y1,re,im");
    int rows = 0;
    double worst = 0.0;
    while (std::getline(csv, line)) {
        double x, y, re, im;
        char c;
        std::istringstream ls(line);
        ls >> x >> c >> y >> c >> re >> c >> im;
        const Complex m = mehler_hat(0.1, x, y);
        worst = std::max(worst, std::abs(Complex(re, im) - m) / std::abs(m));
        ++rows;
    }
    CHECK(rows == 256);
    CHECK(worst < 1e-10);
}

TEST_CASE("verify rows") {
    const auto rows = verify_suite("structure", fixture("rotation_family_n2"));
    CHECK_FALSE(rows.empty());
    for (const auto& r : rows) CHECK_MESSAGE(r.passed, r.name);
    const std::string text = format_rows(rows);
    CHECK(text.find("PASS") != std::string::npos);
    CHECK(text.find("FAIL") == std::string::npos);
    CHECK_THROWS_AS(verify_suite("nonsense", fixture("sublaplacian_n1")), InputError);
    CHECK(first_focal_time(hamilton_from_A(fixture("rotation_family_n2").A)) == doctest::Approx(0.25));
    CHECK(std::isinf(first_focal_time(hamilton_from_A(fixture("sublaplacian_n1").A))));
}

}
