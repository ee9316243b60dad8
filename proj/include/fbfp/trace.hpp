#pragma once

#include <optional>
#include <vector>

namespace fbfp {

// One row of the iteration trace. Optional distances are present only when a
// reference solution was supplied to the run.
struct TraceRecord {
    long n = 0;
    double lambda = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    double step_norm = 0.0;  // ||x_{n+1} - x_n||
    double gap_norm = 0.0;   // ||x_n - p_n||
    std::optional<double> iterate_dist;
    std::optional<double> ergodic_dist;
    std::optional<double> fejer_excess;
    std::vector<double> dual_gaps;  // ||v_{i,n} - q_{i,n}||, primal-dual runs only

    // Running totals over every iteration, including thinned-out ones.
    long iteration = 0;
    double step_sq_sum = 0.0;
    double gap_sq_sum = 0.0;
    double fejer_excess_sum = 0.0;
};

}  // namespace fbfp
