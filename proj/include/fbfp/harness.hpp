#pragma once

#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbfp/errors.hpp"
#include "fbfp/problem_suite.hpp"

namespace fbfp {

// Process exit codes of the batch front-end.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,      // suite: at least one check failed
    kExitConfig = 2,
    kExitDiverged = 3,
    kExitInfeasible = 4,
    kExitIo = 5,
    kExitInternal = 6,
};

struct ConfigIssue {
    std::string field;  // JSON pointer-like path, or "line L, column C" for syntax errors
    std::string message;
};

class ConfigError : public InvalidInput {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    ConfigError(std::string field, std::string message);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

enum class SolverKind { fbf, primal_dual, minimization };

struct ScheduleSpec {
    std::string kind = "default";  // default (fitted to the problem), power_law or constant
    PowerLawFamily family = default_family();
    double lambda = 0.0, beta = 0.0, alpha = 0.0, sigma = 0.0;  // constant kind
    // Constant kind only: run even if the feasibility inequality fails
    // (for probing divergence). The report still records the violation.
    bool enforce = true;
};

struct RunConfig {
    nlohmann::json problem;     // {"generator": ..} or {"inline": ..}
    SolverKind solver = SolverKind::minimization;
    ScheduleSpec schedule;
    StoppingRule stop;
    std::optional<Vector> x0, x1;
    std::string trace_path, summary_path;
    bool fejer = false;
    int vi_residual_samples = 0;
    long certificate_horizon = 0;  // 0: no certificate
    std::vector<Vector> certificate_samples;
};

// Parses and validates a configuration document. Collects every problem it
// finds and throws ConfigError listing them.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Builds the instance a configuration refers to. Throws ConfigError.
ProblemInstance build_instance(const RunConfig& cfg);

struct RunOutcome {
    int exit_code = kExitOk;
    std::string message;
    nlohmann::json summary;
    std::vector<TraceRecord> trace;
    std::size_t dual_blocks = 0;
};

// Runs a parsed configuration. Never throws for solver-level failures; they
// become exit codes. Writes the trace and summary when paths are set.
RunOutcome execute(const RunConfig& cfg);

// Schema and schedule feasibility, without iterating.
RunOutcome validate_config(const RunConfig& cfg);

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t dual_blocks);
void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace, std::size_t dual_blocks);

struct SuiteCheck {
    std::string name;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct SuiteCaseReport {
    std::string id;
    std::set<std::string> tags;
    std::vector<SuiteCheck> checks;
    std::string error;
    bool pass() const;
};

struct SuiteReport {
    std::vector<SuiteCaseReport> cases;
    int failures() const;
    nlohmann::json to_json() const;
};

// Tag expression: comma-separated alternatives of '+'-joined tags, e.g.
// "strongly_monotone,ergodic_only+penalty_active". Empty matches everything.
bool tags_match(const std::string& filter, const std::set<std::string>& tags);

SuiteReport run_suite(const std::string& filter, std::ostream* progress = nullptr);

// Family used for merely convex, ergodic-regime instances: slower step decay
// so that sum lambda_n grows quickly, with the penalty coupling at 98% of the
// largest value the feasibility inequality allows.
PowerLawFamily ergodic_family();

}  // namespace fbfp
