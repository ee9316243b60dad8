#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fbfp/primal_dual.hpp"
#include "fbfp/prox_catalog.hpp"

namespace fbfp {

using ScalarFn = std::function<double(const Vector&)>;

// Differentiable convex function with a Lipschitz gradient.
struct SmoothTerm {
    ScalarFn value;
    LipschitzOperator gradient;
};

// 1/2 x^T Q x + b^T x, Q symmetric PSD.
SmoothTerm make_quadratic_smooth(const Matrix& Q, Vector b = {});

// Composite term (g [] l)(Lx), handled through g* and grad l*.
struct MinBlock {
    ProxEntry g;
    LipschitzOperator l_conj_grad;               // grad l*, nu_i-Lipschitz
    LinearMap L;
    DomainKind l_domain = DomainKind::full_space;
    ScalarFn envelope;                           // closed form of (g [] l), when known
    double nu = 0.0;
};

// l = ||.||^2 / (2 nu): grad l* = nu id and g [] l is the Moreau envelope of g
// with parameter nu. Throws InvalidInput unless 0 < nu < inf.
MinBlock moreau_block(ProxEntry g, LinearMap L, double nu);

// Penalty function Psi with min Psi = 0 and M = argmin Psi.
struct Penalty {
    std::string kind;
    ScalarFn value;
    LipschitzOperator gradient;      // 1/mu-Lipschitz
    ScalarFn conjugate_value;        // optional
    Projection M_projection;         // optional
    std::optional<LinearMap> L;      // set for half_sq_linmap
};

// Psi(x) = 1/2 ||Lx||^2, M = ker L.
Penalty half_sq_linmap(const LinearMap& L);
// Psi = 0, M = whole space.
Penalty zero_penalty(Index dim);

struct MinimizationProblem {
    Index dim = 0;
    ProxEntry f;
    std::optional<SmoothTerm> h;
    std::vector<MinBlock> blocks;
    Penalty psi;

    // Dimensions, gradient audits, and min Psi = 0 / grad Psi = 0 on M when
    // a projection is available. Throws InvalidInput or AuditFailure.
    void validate(bool run_audit = true) const;

    // f + h + sum of the composite terms that have a closed form.
    double objective(const Vector& x) const;
    // True when every composite term entered objective().
    bool objective_complete() const;
};

// A = df, C = grad h, B = grad Psi, B_i^{-1} via prox of g_i* (Moreau), D_i^{-1} = grad l_i*.
PrimalDualProblem lower_problem(const MinimizationProblem& prob, bool run_audit = true);

// The same data as a plain inclusion; only for problems without composite blocks.
InclusionProblem lower_to_inclusion(const MinimizationProblem& prob, bool run_audit = true);

// Power-law schedule with mu from B and eta = 1 / (composite constant).
Schedule schedule_for(const PrimalDualProblem& prob, const PowerLawFamily& family,
                      bool require_penalty_summability = false);
// schedule_for with default_family(mu).
Schedule default_schedule(const PrimalDualProblem& prob, bool require_penalty_summability = false);

struct ObjectiveRecord {
    long iteration = 0;
    double F_x = 0.0;
    double F_z = 0.0;
    double psi_x = 0.0;
    double psi_z = 0.0;
};

struct MinResult {
    PdRunResult run;
    std::vector<ObjectiveRecord> objective_trace;
    bool objective_complete = true;
};

MinResult solve_min(const MinimizationProblem& prob, const Schedule& s, const PdSeeds& seeds,
                    const StoppingRule& stop = {}, const RunOptions& options = {});
MinResult solve_min(const MinimizationProblem& prob, const PowerLawFamily& family, const PdSeeds& seeds,
                    const StoppingRule& stop = {}, const RunOptions& options = {});

enum class Verdict { converging, diverging, inconclusive };
std::string_view to_string(Verdict v);

struct PenaltyCertificate {
    std::vector<Vector> p_samples;
    std::vector<double> partial_sums;    // index n-1 holds the sum over k <= n, all samples
    std::vector<double> sample_totals;   // per sample at the horizon
    double lambda_over_beta_sum = 0.0;
    std::optional<double> decade_ratio;  // sum over (h/10, h] divided by sum over (h/100, h/10]
    Verdict verdict = Verdict::inconclusive;
    std::string basis;                   // how the verdict was reached
};

// Truncated sums of lambda_n beta_n Psi*(p / beta_n) for Psi = 1/2 ||L.||^2,
// where Psi*(q) = 1/2 <q, (L^T L)^+ q> on ran L^T. Throws InvalidSample for
// p outside ran L^T.
PenaltyCertificate penalty_certificate_quadratic(const LinearMap& L, const Schedule& s,
                                                 std::span<const Vector> p_samples, long horizon);

enum class Circumstance { full_domain, unknown };
std::string_view to_string(Circumstance c);

struct QualificationReport {
    bool satisfied = false;
    Circumstance circumstance = Circumstance::unknown;
    std::vector<bool> block_full_domain;
};

// Advisory only: satisfied exactly when dom g_i + dom l_i is the whole space
// for every block, as far as the domain descriptors can tell.
QualificationReport qualification_check(const MinimizationProblem& prob);

}  // namespace fbfp
