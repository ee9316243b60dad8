#include "fbfp/fbf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbfp/errors.hpp"
#include "detail/drive.hpp"

namespace fbfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

InclusionProblem InclusionProblem::make(ResolventOperator A, LipschitzOperator D, LipschitzOperator B,
                                        Projection M_projection, bool run_audit) {
    if (A.dim() <= 0) throw InvalidInput("InclusionProblem: A must be set");
    if (D.dim() != A.dim() || B.dim() != A.dim()) throw InvalidInput("InclusionProblem: dimension mismatch");
    if (!D.monotone()) throw InvalidInput("InclusionProblem: D must be monotone");
    if (!B.monotone()) throw InvalidInput("InclusionProblem: B must be monotone");
    if (run_audit) {
        audit(D);
        audit(B);
    }
    return InclusionProblem{std::move(A), std::move(D), std::move(B), std::move(M_projection)};
}

double InclusionProblem::mu() const { return B.lipschitz() > 0.0 ? 1.0 / B.lipschitz() : kInf; }
double InclusionProblem::eta() const { return D.lipschitz() > 0.0 ? 1.0 / D.lipschitz() : kInf; }

SolverState initial_state(const Schedule& s, const Vector& x0, const Vector& x1) {
    if (x0.size() != x1.size()) throw InvalidInput("initial_state: seed dimensions differ");
    require_finite(x0, "x0");
    require_finite(x1, "x1");
    SolverState st;
    st.n = s.n0();
    st.x_prev = x0;
    st.x_curr = x1;
    const double lam = s.lambda(st.n);
    st.z_accum = lam * x1;
    st.tau = lam;
    return st;
}

void fbf_advance(const InclusionProblem& prob, const Schedule& s, SolverState& st) {
    if (st.x_curr.size() != prob.dim()) throw InvalidInput("fbf_step: state dimension mismatch");
    const long n = st.n;
    const double lam = s.lambda(n), bet = s.beta(n), alp = s.alpha(n);
    const Vector& x = st.x_curr;

    // Forward evaluations at x_n, reused by the correction.
    const bool has_B = !prob.B.is_zero(), has_D = !prob.D.is_zero();
    Vector Bx, Dx;
    Vector arg = x;
    if (has_D) {
        Dx = prob.D(x);
        arg -= lam * Dx;
    }
    if (has_B) {
        Bx = prob.B(x);
        arg -= (lam * bet) * Bx;
    }
    if (alp != 0.0) arg += alp * (x - st.x_prev);

    Vector p = prob.A.resolve(lam, arg);
    Vector x_next = p;
    if (has_B) x_next += (lam * bet) * (Bx - prob.B(p));
    if (has_D) x_next += lam * (Dx - prob.D(p));

    if (!all_finite(p) || !all_finite(x_next)) {
        throw Divergence("non-finite iterate at n = " + std::to_string(n), {});
    }

    st.lambda = lam;
    st.beta = bet;
    st.alpha = alp;
    st.gap_norm = (x - p).norm();
    st.step_norm = (x_next - x).norm();
    st.x_prev = std::move(st.x_curr);
    st.x_curr = std::move(x_next);
    st.p_curr = std::move(p);
    st.n = n + 1;
    st.steps += 1;
    const double lam_next = s.lambda(st.n);
    st.z_accum += lam_next * st.x_curr;
    st.tau += lam_next;
}

SolverState fbf_step(const InclusionProblem& prob, const Schedule& s, SolverState state) {
    fbf_advance(prob, s, state);
    return state;
}

bool trace_keeps(long k) {
    if (k <= kDenseTraceLength) return true;
    const long stride = (k + kDenseTraceLength - 1) / kDenseTraceLength;
    return k % stride == 0;
}

RunResult run(const InclusionProblem& prob, const Schedule& s, const Vector& x0, const Vector& x1,
              const StoppingRule& stop, const RunOptions& opt) {
    if (x1.size() != prob.dim()) throw InvalidInput("run: seed dimension does not match the problem");
    SolverState st = initial_state(s, x0, x1);
    return detail::drive(
        s, st, x0, stop, opt, [&](SolverState& state) { fbf_advance(prob, s, state); },
        [](const SolverState& state) -> const Vector& { return state.x_curr; },
        [](const SolverState& state) { return state.ergodic(); }, [](TraceRecord&, const SolverState&) {});
}

double vi_residual(const Vector& candidate, std::span<const GraphSample> samples) {
    double r = kInf;
    for (const auto& s : samples) r = std::min(r, inner(s.u - candidate, s.w));
    return r;
}

namespace {

FejerReport summarize_fejer(std::span<const long> iters, std::span<const double> sums, std::span<const double> phis,
                            double tolerance) {
    FejerReport rep;
    if (iters.empty()) return rep;
    const long last = iters.back();
    const long half = last / 2;
    rep.excess_partial_sum = sums.back();
    // Sum at the last record not after the midpoint.
    double at_half = 0.0;
    for (std::size_t i = 0; i < iters.size() && iters[i] <= half; ++i) at_half = sums[i];
    rep.tail_growth = rep.excess_partial_sum - at_half;
    double acc = 0.0;
    long cnt = 0;
    for (std::size_t i = 0; i < iters.size(); ++i) {
        if (iters[i] > half) {
            acc += phis[i];
            ++cnt;
        }
    }
    rep.phi_limit_estimate = cnt ? acc / static_cast<double>(cnt) : phis.back();
    rep.flagged = rep.tail_growth > tolerance;
    return rep;
}

}  // namespace

FejerReport fejer_diagnostic(std::span<const TraceRecord> trace, double tolerance) {
    std::vector<long> iters;
    std::vector<double> sums, phis;
    for (const auto& r : trace) {
        if (!r.fejer_excess || !r.iterate_dist) {
            throw InvalidInput("fejer_diagnostic: trace was recorded without a reference point");
        }
        iters.push_back(r.iteration);
        sums.push_back(r.fejer_excess_sum);
        phis.push_back(*r.iterate_dist * *r.iterate_dist);
    }
    return summarize_fejer(iters, sums, phis, tolerance);
}

FejerReport fejer_diagnostic(std::span<const Vector> iterates, std::span<const double> alphas, const Vector& u_ref,
                             double tolerance) {
    if (alphas.size() + 1 < iterates.size()) throw InvalidInput("fejer_diagnostic: need one alpha per step");
    std::vector<long> iters;
    std::vector<double> sums, phis;
    if (iterates.size() < 3) return {};
    std::vector<double> phi(iterates.size());
    for (std::size_t k = 0; k < iterates.size(); ++k) phi[k] = (iterates[k] - u_ref).squaredNorm();
    double s = 0.0;
    // Excess of step k uses phi_{k+1}, phi_k, phi_{k-1} and the weight at x_k.
    for (std::size_t k = 1; k + 1 < iterates.size(); ++k) {
        s += std::max(0.0, phi[k + 1] - phi[k] - alphas[k] * (phi[k] - phi[k - 1]));
        iters.push_back(static_cast<long>(k));
        sums.push_back(s);
        phis.push_back(phi[k + 1]);
    }
    return summarize_fejer(iters, sums, phis, tolerance);
}

std::pair<double, double> partial_sum_increments(std::span<const TraceRecord> trace, long from) {
    if (trace.empty()) return {0.0, 0.0};
    const TraceRecord* base = nullptr;
    for (const auto& r : trace) {
        if (r.iteration <= from) base = &r;
        else break;
    }
    const auto& last = trace.back();
    const double s0 = base ? base->step_sq_sum : 0.0, g0 = base ? base->gap_sq_sum : 0.0;
    return {last.step_sq_sum - s0, last.gap_sq_sum - g0};
}

}  // namespace fbfp
