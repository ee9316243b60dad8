#pragma once

#include <span>
#include <vector>

#include "fbfp/fbf.hpp"

namespace fbfp {

// One parallel-sum block, accessed through its dual pieces.
struct DualBlock {
    ResolventOperator B_inv;   // resolvent of B_i^{-1} on R^{d_i}
    LipschitzOperator D_inv;   // D_i^{-1}, monotone, nu_i-Lipschitz
    LinearMap L;               // R^d -> R^{d_i}
};

// 0 in Ax + sum L_i^T (B_i [] D_i)(L_i x) + Cx + N_M(x), M = zer B.
struct PrimalDualProblem {
    ResolventOperator A;
    LipschitzOperator C;
    LipschitzOperator B;
    std::vector<DualBlock> blocks;
    Projection M_projection;

    // Filled by make().
    std::vector<double> L_norms;
    double beta = 0.0;  // composite Lipschitz constant of the product forward operator

    // Validates dimensions and monotone flags, audits C, B and every D_i^{-1},
    // and caches the operator norms of the L_i.
    static PrimalDualProblem make(ResolventOperator A, LipschitzOperator C, LipschitzOperator B,
                                  std::vector<DualBlock> blocks, Projection M_projection = {}, bool run_audit = true);

    Index primal_dim() const { return A.dim(); }
    Index product_dim() const;
    std::vector<Index> offsets() const;  // start of each dual block in the stacked vector
    double mu() const;
    // 1 / beta, or +inf when the product forward operator vanishes.
    double eta() const;
};

// max{nu, nu_1, ..., nu_m} + sqrt(sum ||L_i||^2).
double composite_lipschitz_constant(double nu, std::span<const double> nus, std::span<const double> L_norms);
double composite_lipschitz_constant(const PrimalDualProblem& prob);

// The equivalent inclusion on R^{d + sum d_i}: blockwise resolvent,
// D~(x, v) = (sum L_i^T v_i + Cx, D_i^{-1} v_i - L_i x), B~(x, v) = (Bx, 0).
InclusionProblem build_product_problem(const PrimalDualProblem& prob, bool run_audit = true);

Vector stack(const Vector& x, std::span<const Vector> v);

struct ProductState {
    long n = 0;
    Vector x_prev, x;
    std::vector<Vector> v_prev, v;
    Vector p;
    std::vector<Vector> q;
    Vector z_accum;   // full product vector, lambda-weighted
    double tau = 0.0;
    long steps = 0;

    double lambda = 0.0, beta = 0.0, alpha = 0.0;
    double step_norm = 0.0;  // product norm of w_{n+1} - w_n
    double gap_norm = 0.0;   // product norm of w_n - (p_n, q_n)
    std::vector<double> dual_gaps;  // ||v_{i,n} - q_{i,n}||

    Vector stacked() const { return stack(x, v); }
    Vector primal_ergodic() const { return z_accum.head(x.size()) / tau; }
};

struct PdSeeds {
    Vector x0, x1;
    std::vector<Vector> v0, v1;  // empty means zero duals
};

ProductState initial_product_state(const PrimalDualProblem& prob, const Schedule& s, const PdSeeds& seeds);

// One step of the primal-dual scheme in place.
void pd_advance(const PrimalDualProblem& prob, const Schedule& s, ProductState& st);
ProductState pd_step(const PrimalDualProblem& prob, const Schedule& s, ProductState st);

struct PdRunResult {
    RunResult primal;              // trace, primal x_final and ergodic z_final
    std::vector<Vector> duals_final;
    Vector z_product;              // ergodic average of the full product vector
};

// Distances and Fejer excesses in options refer to the primal block.
PdRunResult pd_run(const PrimalDualProblem& prob, const Schedule& s, const PdSeeds& seeds,
                   const StoppingRule& stop = {}, const RunOptions& options = {});

}  // namespace fbfp
