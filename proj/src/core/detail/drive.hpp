#pragma once

// Shared iteration loop for the plain and primal-dual solvers: schedule gate,
// stopping rule, trace thinning, running sums and Fejer excesses.

#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "fbfp/errors.hpp"
#include "fbfp/fbf.hpp"

namespace fbfp::detail {

// Advance(st) performs one step; Primal(st) and PrimalErgodic(st) give the
// primal iterate and ergodic average; Decorate(record, st) adds extra columns.
template <class State, class Advance, class Primal, class PrimalErgodic, class Decorate>
RunResult drive(const Schedule& s, State& st, const Vector& x0, const StoppingRule& stop, const RunOptions& opt,
                Advance advance, Primal primal, PrimalErgodic primal_ergodic, Decorate decorate) {
    if (stop.max_iter < 0) throw InvalidInput("run: max_iter must be >= 0");
    RunResult res;
    const bool tol_rule = stop.tol_gap > 0.0 && stop.tol_step > 0.0;

    auto dist = [&](const Vector& v) -> std::optional<double> {
        if (opt.distance) return opt.distance(v);
        if (opt.reference) return (v - *opt.reference).norm();
        return std::nullopt;
    };
    std::array<double, 2> phi{};  // phi_{n-1}, phi_n
    if (opt.reference) {
        if (opt.reference->size() != x0.size()) throw InvalidInput("run: reference dimension mismatch");
        phi[0] = (x0 - *opt.reference).squaredNorm();
        phi[1] = (primal(st) - *opt.reference).squaredNorm();
    }

    TraceRecord totals;
    res.stop_reason = "max_iter";
    for (long k = 1; k <= stop.max_iter; ++k) {
        if (opt.check_schedule) {
            const double lhs = s.feasibility_lhs(st.n);
            if (!(lhs <= 1.0)) {
                throw InfeasibleSchedule("feasibility inequality violated at n = " + std::to_string(st.n) +
                                         " (lhs = " + std::to_string(lhs) + ")");
            }
        }
        try {
            advance(st);
        } catch (const Divergence& e) {
            throw Divergence(e.what(), std::move(res.trace));
        }

        totals.iteration = k;
        totals.step_sq_sum += st.step_norm * st.step_norm;
        totals.gap_sq_sum += st.gap_norm * st.gap_norm;
        std::optional<double> excess;
        if (opt.reference) {
            const double phi_next = (primal(st) - *opt.reference).squaredNorm();
            excess = std::max(0.0, phi_next - phi[1] - st.alpha * (phi[1] - phi[0]));
            totals.fejer_excess_sum += *excess;
            phi = {phi[1], phi_next};
        }

        const bool done = tol_rule && st.gap_norm <= stop.tol_gap && st.step_norm <= stop.tol_step;
        if (trace_keeps(k) || done || k == stop.max_iter) {
            TraceRecord r = totals;
            r.n = st.n - 1;
            r.lambda = st.lambda;
            r.beta = st.beta;
            r.alpha = st.alpha;
            r.step_norm = st.step_norm;
            r.gap_norm = st.gap_norm;
            r.fejer_excess = excess;
            const Vector z = primal_ergodic(st);
            r.iterate_dist = dist(primal(st));
            r.ergodic_dist = dist(z);
            decorate(r, st);
            if (opt.on_record) opt.on_record(r, primal(st), z);
            res.trace.push_back(std::move(r));
        }
        if (done) {
            res.stop_reason = "tolerance";
            break;
        }
    }
    res.iterations = st.steps;
    res.x_final = primal(st);
    res.z_final = primal_ergodic(st);
    return res;
}

}  // namespace fbfp::detail
