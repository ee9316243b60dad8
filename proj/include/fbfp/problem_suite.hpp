#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "fbfp/minimization.hpp"

namespace fbfp {

using AnyProblem = std::variant<InclusionProblem, PrimalDualProblem, MinimizationProblem>;

struct ProblemInstance {
    std::string id;
    AnyProblem problem;
    std::optional<Vector> oracle_solution;
    std::string oracle_method;
    std::set<std::string> regime_tags;  // strongly_monotone, ergodic_only, penalty_active, reduction_check
    // When nonempty the solution set is the convex hull of these points.
    std::vector<Vector> solution_vertices;
    nlohmann::json description;  // importable problem document

    const MinimizationProblem& minimization() const;
    // Distance to the solution set (hull of the vertices, else the single oracle point).
    double distance_to_solution_set(const Vector& x) const;
};

// min 1/2 ||x - c||^2 subject to Lx = 0, with L (rank x d) of full row rank
// and unit spectral norm. Requires 1 <= rank < d.
ProblemInstance gen_projection_problem(Index d, Index rank, std::uint64_t seed);
ProblemInstance projection_problem(const Matrix& L, const Vector& c, std::string id = "projection");

// min ||x - c||_1 subject to Lx = 0. Requires 1 <= rank <= d <= 16. The
// oracle enumerates the vertices of the (polyhedral) solution set exactly.
ProblemInstance gen_l1_constrained_problem(Index d, Index rank, std::uint64_t seed);
ProblemInstance l1_constrained_problem(const Matrix& L, const Vector& c, std::string id = "l1_constrained");

// min f(x) + sum_i env_{g_i}(L_i x) + h(x) subject to L_psi x = 0, with f a
// strongly convex quadratic, h a convex quadratic, and each g_i smoothed by
// l_i = ||.||^2 / 2 (nu_i = 1). g_i is the l1 norm, or 1/2 ||. - b_i||^2 when
// `strongly_convex_duals` is set. Requires m >= 1.
ProblemInstance gen_composite_problem(Index d, Index m, std::uint64_t seed, bool strongly_convex_duals = false);

// Random linear monotone data for path-equivalence checks: A, C, B, the B_i^{-1}
// and D_i^{-1} are x -> Mx with M = (PSD part) + (skew part), L_i random.
// B is omitted when `with_penalty` is false; m may be 0.
PrimalDualProblem gen_random_primal_dual(Index d, Index m, Index dual_dim, std::uint64_t seed,
                                         bool with_penalty = true);

// Builds a minimization problem from its JSON document:
// {"dim": d, "f": {catalog}, "h": {"kind": "quadratic", "Q": .., "b": ..},
//  "blocks": [{"g": {catalog}, "nu": .., "L": ..}],
//  "psi": {"kind": "half_sq_linmap", "L": ..} | {"kind": "zero"}}.
// Throws InvalidInput / CatalogMiss naming the offending field.
MinimizationProblem min_problem_from_json(const nlohmann::json& doc);

nlohmann::json export_instance(const ProblemInstance& inst);
ProblemInstance import_instance(const nlohmann::json& doc);

// Points (u, w) with u in M and w in (df + grad h + sum L_i^T grad env_i(L_i .) + N_M)(u).
// Minimization instances only.
std::vector<GraphSample> graph_samples(const ProblemInstance& inst, int count, std::uint64_t seed);

// Distance from x to conv(vertices).
double distance_to_hull(const Vector& x, const std::vector<Vector>& vertices);

}  // namespace fbfp
