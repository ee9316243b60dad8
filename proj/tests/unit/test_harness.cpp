#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "fbfp/harness.hpp"

using namespace fbfp;

namespace {

const char* kSmallProjection = R"({
  "problem": {"generator": "projection", "params": {"d": 5, "rank": 2}, "seed": 3},
  "solver": "fbf",
  "stop": {"max_iter": 3000, "tol_gap": 0, "tol_step": 0},
  "diagnostics": {"fejer": true, "vi_residual_samples": 20, "certificate_horizon": 1000}
})";

std::string csv(const RunOutcome& out) {
    std::ostringstream os;
    write_trace_csv(os, out.trace, out.dual_blocks);
    return os.str();
}

std::vector<std::string> issue_fields(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        std::vector<std::string> f;
        for (const auto& i : e.issues()) f.push_back(i.field);
        return f;
    }
    return {};
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("malformed JSON reports a line and column") {
    const auto f = issue_fields("{\n  \"problem\": {\n    \"generator\": \"projection\",\n  \"solver\" \"fbf\"\n}");
    REQUIRE(f.size() == 1);
    CHECK(f[0].rfind("line 4, column", 0) == 0);
}

TEST_CASE("schema problems are all collected") {
    const auto f = issue_fields(R"({
      "problem": {"generator": "projection", "params": {"d": 4, "rank": 1, "bogus": 1}},
      "solver": "tseng",
      "stop": {"max_iter": -5},
      "extra": true
    })");
    auto has = [&](const std::string& s) { return std::find(f.begin(), f.end(), s) != f.end(); };
    CHECK(has("/problem/params/bogus"));
    CHECK(has("/solver"));
    CHECK(has("/stop/max_iter"));
    CHECK(has("/extra"));
    CHECK(issue_fields(R"({"solver": "fbf"})") == std::vector<std::string>{"/problem"});
    CHECK(issue_fields(R"({"problem": {"generator": "projection", "params": {"d": 3}}, "schedule": {"kind": "cosine"}})") ==
          std::vector<std::string>{"/schedule/kind"});
}

TEST_CASE("alpha 0.2 exits as infeasible, before iterating") {
    const auto cfg = parse_config(R"({
      "problem": {"generator": "projection", "params": {"d": 4, "rank": 1}},
      "solver": "fbf",
      "schedule": {"kind": "power_law", "alpha_target": 0.2}
    })");
    const auto out = execute(cfg);
    CHECK(out.exit_code == kExitInfeasible);
    CHECK(out.summary["status"] == "infeasible_schedule");
    CHECK(out.trace.empty());
    CHECK(validate_config(cfg).exit_code == kExitInfeasible);
}

TEST_CASE("fbf refuses composite problems") {
    const auto cfg = parse_config(R"({
      "problem": {"generator": "composite", "params": {"d": 4, "m": 1}},
      "solver": "fbf"
    })");
    const auto out = execute(cfg);
    CHECK(out.exit_code == kExitConfig);
    CHECK(out.summary["issues"][0]["field"] == "/solver");
}

TEST_CASE("a run produces the documented summary") {
    const auto out = execute(parse_config(kSmallProjection));
    REQUIRE(out.exit_code == kExitOk);
    const auto& s = out.summary;
    CHECK(s["status"] == "ok");
    CHECK(s["iterations"] == 3000);
    CHECK(s["stop_reason"] == "max_iter");
    CHECK(s["iterate_dist"].get<double>() < 0.05);
    CHECK(s["schedule"]["feasibility"]["feasible"] == true);
    CHECK(s["certificate"]["verdict"] == "converging");
    CHECK(s["vi_residual"]["samples"] == 20);
    CHECK(s["fejer"].is_object());
    CHECK(s["wall_time_seconds"].get<double>() >= 0.0);
    CHECK(s.contains("final_gap_norm"));
    CHECK(out.trace.back().iteration == 3000);
}

TEST_CASE("trace CSV: header, 17 digits, empty optionals") {
    std::vector<TraceRecord> t(2);
    t[0].n = 1;
    t[0].lambda = 0.1;
    t[0].beta = 1.0 / 3.0;
    t[0].iterate_dist = 2.0;
    t[1].n = 2;
    t[1].lambda = 1e-300;
    t[1].dual_gaps = {0.5};
    std::ostringstream os;
    write_trace_csv(os, t, 1);
    std::istringstream in(os.str());
    std::string header, r1, r2;
    std::getline(in, header);
    std::getline(in, r1);
    std::getline(in, r2);
    CHECK(header == "n,lambda,beta,alpha,step_norm,gap_norm,iterate_dist,ergodic_dist,fejer_excess,dual_gap_1");
    CHECK(r1 == "1,0.10000000000000001,0.33333333333333331,0,0,0,2,,,");
    CHECK(r2 == "2,1e-300,0,0,0,0,,,,0.5");
    // 17 significant digits round-trip
    CHECK(std::strtod("0.33333333333333331", nullptr) == 1.0 / 3.0);
}

TEST_CASE("same configuration, same trace bytes") {
    const auto cfg = parse_config(kSmallProjection);
    CHECK(csv(execute(cfg)) == csv(execute(cfg)));
}

TEST_CASE("divergence keeps the partial trace") {
    const auto out = execute(parse_config(R"({
      "problem": {"generator": "projection", "params": {"d": 4, "rank": 1}},
      "solver": "fbf",
      "schedule": {"kind": "constant", "lambda": 50, "beta": 50, "enforce": false}
    })"));
    CHECK(out.exit_code == kExitDiverged);
    CHECK_FALSE(out.trace.empty());
    CHECK(out.summary["status"] == "diverged");
    CHECK(out.summary["schedule"]["feasibility"]["feasible"] == false);
}

TEST_CASE("unwritable output path is an I/O error") {
    auto cfg = parse_config(kSmallProjection);
    cfg.stop.max_iter = 10;
    cfg.summary_path = "/nonexistent-dir/x/summary.json";
    CHECK(execute(cfg).exit_code == kExitIo);
    CHECK_THROWS_AS(load_config("/nonexistent-dir/config.json"), IoError);
}

TEST_CASE("tag expressions") {
    const std::set<std::string> tags{"strongly_monotone", "penalty_active"};
    CHECK(tags_match("", tags));
    CHECK(tags_match("strongly_monotone", tags));
    CHECK(tags_match("ergodic_only,penalty_active", tags));
    CHECK(tags_match("strongly_monotone+penalty_active", tags));
    CHECK_FALSE(tags_match("strongly_monotone+ergodic_only", tags));
    CHECK_FALSE(tags_match("reduction_check", tags));
}

TEST_CASE("suite filter matching nothing is an empty success") {
    const auto rep = run_suite("no_such_tag");
    CHECK(rep.cases.empty());
    CHECK(rep.failures() == 0);
    CHECK(rep.to_json()["cases"].empty());
}

TEST_CASE("reduction battery passes") {
    const auto rep = run_suite("reduction_check");
    REQUIRE(rep.cases.size() == 1);
    CHECK(rep.cases[0].pass());
}

}
