#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fbfp/linalg.hpp"
#include "fbfp/operators.hpp"
#include "fbfp/schedule.hpp"
#include "fbfp/trace.hpp"

namespace fbfp {

using Projection = std::function<Vector(const Vector&)>;

// 0 in Ax + Dx + N_M(x) with M = zer B.
struct InclusionProblem {
    ResolventOperator A;
    LipschitzOperator D;   // monotone, 1/eta-Lipschitz
    LipschitzOperator B;   // monotone, 1/mu-Lipschitz
    Projection M_projection;  // optional, diagnostics only

    // Checks dimensions and monotone flags, then audits D and B by sampling.
    // Throws InvalidInput or AuditFailure.
    static InclusionProblem make(ResolventOperator A, LipschitzOperator D, LipschitzOperator B,
                                 Projection M_projection = {}, bool run_audit = true);

    Index dim() const { return A.dim(); }
    // +inf when B is the zero operator.
    double mu() const;
    // +inf when D is the zero operator.
    double eta() const;
};

struct SolverState {
    long n = 0;          // schedule index of x_curr
    Vector x_prev;
    Vector x_curr;
    Vector p_curr;       // p from the last step (empty before the first)
    Vector z_accum;      // sum of lambda_k x_k
    double tau = 0.0;    // sum of lambda_k
    long steps = 0;

    // Filled by each step.
    double lambda = 0.0, beta = 0.0, alpha = 0.0;
    double step_norm = 0.0;
    double gap_norm = 0.0;

    Vector ergodic() const { return z_accum / tau; }
};

// State before the first step: x_{n0-1} = x0, x_{n0} = x1.
SolverState initial_state(const Schedule& s, const Vector& x0, const Vector& x1);

// One forward-backward-forward penalty step in place. B and D are evaluated
// exactly once at x_n and once at p_n. Throws Divergence (with an empty trace)
// on a non-finite iterate.
void fbf_advance(const InclusionProblem& prob, const Schedule& s, SolverState& state);

// Value-returning form of fbf_advance.
SolverState fbf_step(const InclusionProblem& prob, const Schedule& s, SolverState state);

struct StoppingRule {
    long max_iter = 100000;
    // Stop once ||x_n - p_n|| <= tol_gap and ||x_{n+1} - x_n|| <= tol_step.
    // The rule is off unless both are positive.
    double tol_gap = 1e-8;
    double tol_step = 1e-8;
};

struct RunOptions {
    std::optional<Vector> reference;                     // u_ref for distances and Fejer excesses
    std::function<double(const Vector&)> distance;       // overrides ||. - reference|| (e.g. distance to a set)
    bool check_schedule = true;                          // abort when the feasibility inequality fails
    std::function<void(const TraceRecord&, const Vector& x, const Vector& z)> on_record;
};

struct RunResult {
    std::vector<TraceRecord> trace;
    Vector x_final;
    Vector z_final;
    long iterations = 0;
    std::string stop_reason;  // "tolerance" or "max_iter"
};

inline constexpr long kDenseTraceLength = 10000;

// Whether iteration k (1-based) is written to the trace.
bool trace_keeps(long k);

RunResult run(const InclusionProblem& prob, const Schedule& s, const Vector& x0, const Vector& x1,
              const StoppingRule& stop = {}, const RunOptions& options = {});

// A point of the graph of the full operator: w in (A + D + N_M)(u).
struct GraphSample {
    Vector u;
    Vector w;
};

// min over samples of <u - candidate, w>; +inf for no samples.
double vi_residual(const Vector& candidate, std::span<const GraphSample> samples);

struct FejerReport {
    double excess_partial_sum = 0.0;
    double phi_limit_estimate = 0.0;   // mean of phi over the final half
    double tail_growth = 0.0;          // increase of the excess sum over the final half
    bool flagged = false;              // tail_growth above the tolerance
};

inline constexpr double kFejerTailTolerance = 1e-6;

// From a trace recorded with a reference point.
FejerReport fejer_diagnostic(std::span<const TraceRecord> trace, double tolerance = kFejerTailTolerance);

// From raw iterates x_0, x_1, ... and inertia weights alphas[k] used at x_k.
FejerReport fejer_diagnostic(std::span<const Vector> iterates, std::span<const double> alphas, const Vector& u_ref,
                             double tolerance = kFejerTailTolerance);

// Increase of (step_sq_sum, gap_sq_sum) between the record closest to
// iteration `from` (at or before it) and the last record.
std::pair<double, double> partial_sum_increments(std::span<const TraceRecord> trace, long from);

}  // namespace fbfp
