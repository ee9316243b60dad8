#include "fbfp/minimization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "fbfp/errors.hpp"

namespace fbfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (L^T L)^+ and the projector onto ran L^T, cutoff relative to the top eigenvalue.
struct GramPseudoInverse {
    Matrix pinv;
    Matrix range_projector;

    explicit GramPseudoInverse(const LinearMap& L) {
        const Matrix G = L.matrix().transpose() * L.matrix();
        Eigen::SelfAdjointEigenSolver<Matrix> es(G);
        const auto& ev = es.eigenvalues();
        const Matrix& U = es.eigenvectors();
        const double cutoff = 1e-12 * std::max(ev.maxCoeff(), 0.0);
        const Index n = G.rows();
        pinv = Matrix::Zero(n, n);
        range_projector = Matrix::Zero(n, n);
        for (Index i = 0; i < n; ++i) {
            if (ev[i] > cutoff && ev[i] > 0.0) {
                pinv += (1.0 / ev[i]) * U.col(i) * U.col(i).transpose();
                range_projector += U.col(i) * U.col(i).transpose();
            }
        }
    }
};

}  // namespace

SmoothTerm make_quadratic_smooth(const Matrix& Q, Vector b) {
    require_finite(Q, "quadratic Q");
    if (Q.rows() != Q.cols() || Q.rows() == 0) throw InvalidInput("quadratic: Q must be square");
    const Index d = Q.rows();
    if (b.size() == 0) b = Vector::Zero(d);
    if (b.size() != d) throw InvalidInput("quadratic: b has the wrong dimension");
    require_finite(b, "quadratic b");
    const Matrix Qs = 0.5 * (Q + Q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(Qs, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-10 * std::max(1.0, std::abs(hi))) throw InvalidInput("quadratic: Q must be positive semidefinite");
    SmoothTerm t;
    t.value = [Qs, b](const Vector& x) { return 0.5 * x.dot(Qs * x) + b.dot(x); };
    t.gradient = LipschitzOperator(d, [Qs, b](const Vector& x) { return Vector(Qs * x + b); }, std::max(hi, 0.0), true);
    return t;
}

MinBlock moreau_block(ProxEntry g, LinearMap L, double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw InvalidInput("composite block: nu must be finite and positive (exact, unsmoothed terms are not supported)");
    }
    if (L.rows() == 0) throw InvalidInput("composite block: L must be set");
    MinBlock b;
    b.g = g;
    b.L = std::move(L);
    b.nu = nu;
    b.l_conj_grad = LipschitzOperator::scaled_identity(b.L.rows(), nu);
    b.l_domain = DomainKind::full_space;
    b.envelope = [g, nu](const Vector& y) {
        const Vector u = g.prox(nu, y);
        return g.value(u) + (y - u).squaredNorm() / (2.0 * nu);
    };
    return b;
}

Penalty half_sq_linmap(const LinearMap& L) {
    if (L.cols() == 0) throw InvalidInput("half_sq_linmap: L must be set");
    Penalty p;
    p.kind = "half_sq_linmap";
    p.L = L;
    const Matrix G = L.matrix().transpose() * L.matrix();
    p.value = [L](const Vector& x) { return 0.5 * L.apply(x).squaredNorm(); };
    p.gradient = LipschitzOperator::linear(G);
    auto gp = std::make_shared<GramPseudoInverse>(L);
    p.conjugate_value = [gp](const Vector& q) {
        if ((q - gp->range_projector * q).norm() > 1e-8 * std::max(1.0, q.norm())) return kInf;
        return 0.5 * q.dot(gp->pinv * q);
    };
    AffineProjector proj(L.matrix());
    p.M_projection = [proj](const Vector& x) { return proj(x); };
    return p;
}

Penalty zero_penalty(Index dim) {
    Penalty p;
    p.kind = "zero";
    p.value = [](const Vector&) { return 0.0; };
    p.gradient = LipschitzOperator::zero(dim);
    p.conjugate_value = [](const Vector& q) { return q.norm() == 0.0 ? 0.0 : kInf; };
    p.M_projection = [](const Vector& x) { return x; };
    return p;
}

void MinimizationProblem::validate(bool run_audit) const {
    if (dim <= 0) throw InvalidInput("minimization problem: dimension must be positive");
    if (f.name().empty()) throw InvalidInput("minimization problem: f is missing");
    if (!psi.value || psi.gradient.dim() != dim) throw InvalidInput("minimization problem: psi is missing or mis-sized");
    if (h && h->gradient.dim() != dim) throw InvalidInput("minimization problem: h gradient has the wrong dimension");
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::string tag = "block " + std::to_string(i);
        if (b.L.cols() != dim) throw InvalidInput(tag + ": L has the wrong number of columns");
        if (b.l_conj_grad.dim() != b.L.rows()) throw InvalidInput(tag + ": grad l* has the wrong dimension");
        if (!(b.l_conj_grad.lipschitz() > 0.0)) {
            throw InvalidInput(tag + ": grad l* must have a positive Lipschitz constant");
        }
    }
    if (!run_audit) return;
    audit(psi.gradient);
    if (h) audit(h->gradient);
    for (const auto& b : blocks) audit(b.l_conj_grad);
    if (psi.M_projection) {
        std::mt19937_64 rng(0x5eed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int k = 0; k < 20; ++k) {
            Vector x(dim);
            for (Index i = 0; i < dim; ++i) x[i] = g(rng);
            const Vector u = psi.M_projection(x);
            if (psi.value(u) > 1e-10) throw AuditFailure("psi: minimum value on M is not zero");
            if (psi.gradient(u).norm() > 1e-8) throw AuditFailure("psi: gradient does not vanish on M");
        }
    }
}

double MinimizationProblem::objective(const Vector& x) const {
    double F = f.value(x);
    if (h) F += h->value(x);
    for (const auto& b : blocks) {
        if (b.envelope) F += b.envelope(b.L.apply(x));
    }
    return F;
}

bool MinimizationProblem::objective_complete() const {
    return std::all_of(blocks.begin(), blocks.end(), [](const MinBlock& b) { return static_cast<bool>(b.envelope); });
}

PrimalDualProblem lower_problem(const MinimizationProblem& prob, bool run_audit) {
    prob.validate(run_audit);
    std::vector<DualBlock> blocks;
    for (const auto& b : prob.blocks) {
        const ProxEntry g = b.g;
        ResolventOperator B_inv(
            b.L.rows(), [g](double gam, const Vector& y) { return g.conjugate_prox_by_moreau(gam, y); },
            g.conjugate_strong_convexity());
        blocks.push_back(DualBlock{std::move(B_inv), b.l_conj_grad, b.L});
    }
    LipschitzOperator C = prob.h ? prob.h->gradient : LipschitzOperator::zero(prob.dim);
    // validate() already audited the forward operators.
    return PrimalDualProblem::make(prob.f.resolvent(prob.dim), std::move(C), prob.psi.gradient, std::move(blocks),
                                   prob.psi.M_projection, false);
}

InclusionProblem lower_to_inclusion(const MinimizationProblem& prob, bool run_audit) {
    if (!prob.blocks.empty()) throw InvalidInput("lower_to_inclusion: composite blocks need the primal-dual solver");
    prob.validate(run_audit);
    LipschitzOperator D = prob.h ? prob.h->gradient : LipschitzOperator::zero(prob.dim);
    return InclusionProblem::make(prob.f.resolvent(prob.dim), std::move(D), prob.psi.gradient, prob.psi.M_projection,
                                  false);
}

Schedule schedule_for(const PrimalDualProblem& prob, const PowerLawFamily& family, bool require_penalty_summability) {
    return build_power_law_schedule(family, prob.mu(), prob.eta(), require_penalty_summability);
}

Schedule default_schedule(const PrimalDualProblem& prob, bool require_penalty_summability) {
    return schedule_for(prob, default_family(prob.mu()), require_penalty_summability);
}

MinResult solve_min(const MinimizationProblem& prob, const Schedule& s, const PdSeeds& seeds, const StoppingRule& stop,
                    const RunOptions& options) {
    const PrimalDualProblem pd = lower_problem(prob);
    MinResult out;
    out.objective_complete = prob.objective_complete();
    RunOptions opt = options;
    opt.on_record = [&](const TraceRecord& r, const Vector& x, const Vector& z) {
        out.objective_trace.push_back(
            ObjectiveRecord{r.iteration, prob.objective(x), prob.objective(z), prob.psi.value(x), prob.psi.value(z)});
        if (options.on_record) options.on_record(r, x, z);
    };
    out.run = pd_run(pd, s, seeds, stop, opt);
    return out;
}

MinResult solve_min(const MinimizationProblem& prob, const PowerLawFamily& family, const PdSeeds& seeds,
                    const StoppingRule& stop, const RunOptions& options) {
    const Schedule s = schedule_for(lower_problem(prob), family);
    return solve_min(prob, s, seeds, stop, options);
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::converging: return "converging";
        case Verdict::diverging: return "diverging";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string_view to_string(Circumstance c) { return c == Circumstance::full_domain ? "full_domain" : "unknown"; }

PenaltyCertificate penalty_certificate_quadratic(const LinearMap& L, const Schedule& s,
                                                 std::span<const Vector> p_samples, long horizon) {
    if (horizon < 1) throw InvalidInput("certificate: horizon must be >= 1");
    if (L.cols() == 0) throw InvalidInput("certificate: L must be set");
    const GramPseudoInverse gp(L);
    PenaltyCertificate c;
    std::vector<double> quad;
    for (std::size_t i = 0; i < p_samples.size(); ++i) {
        const Vector& p = p_samples[i];
        if (p.size() != L.cols()) throw InvalidInput("certificate: sample " + std::to_string(i) + " has wrong dimension");
        const double residual = (p - gp.range_projector * p).norm();
        if (residual > 1e-8) {
            throw InvalidSample("certificate: sample " + std::to_string(i) + " is not in the range of L^T (residual " +
                                std::to_string(residual) + "); the certificate sum is +inf");
        }
        quad.push_back(p.dot(gp.pinv * p));
        c.p_samples.push_back(p);
    }
    double q_total = 0.0;
    for (double q : quad) q_total += q;

    c.partial_sums.reserve(static_cast<std::size_t>(horizon));
    c.sample_totals.assign(quad.size(), 0.0);
    double acc = 0.0, lob = 0.0;
    // Sums of lambda/beta over the last two decades below the horizon.
    double dec_prev = 0.0, dec_last = 0.0;
    const long h10 = horizon / 10, h100 = horizon / 100;
    for (long n = 1; n <= horizon; ++n) {
        const double w = s.lambda(n) / s.beta(n);
        lob += w;
        if (n > h10) dec_last += w;
        else if (n > h100) dec_prev += w;
        acc += 0.5 * w * q_total;
        for (std::size_t i = 0; i < quad.size(); ++i) c.sample_totals[i] += 0.5 * w * quad[i];
        c.partial_sums.push_back(acc);
    }
    c.lambda_over_beta_sum = lob;
    if (horizon >= 100 && dec_prev > 0.0) c.decade_ratio = dec_last / dec_prev;

    if (q_total == 0.0) {
        c.verdict = Verdict::converging;
        c.basis = "all samples give zero summands";
    } else if (s.family()) {
        const auto& f = *s.family();
        c.verdict = f.exp_lambda + f.exp_beta > 1.0 ? Verdict::converging : Verdict::diverging;
        c.basis = "power-law exponents: sum lambda/beta converges iff exp_lambda + exp_beta > 1";
    } else if (c.decade_ratio) {
        const double r = *c.decade_ratio;
        c.verdict = r < 0.9 ? Verdict::converging : (r >= 0.99 ? Verdict::diverging : Verdict::inconclusive);
        c.basis = "decade ratio of sum lambda/beta";
    } else {
        c.verdict = Verdict::inconclusive;
        c.basis = "horizon below 100, no tail test possible";
    }
    return c;
}

QualificationReport qualification_check(const MinimizationProblem& prob) {
    QualificationReport r;
    bool all = true;
    for (const auto& b : prob.blocks) {
        const bool full = b.g.domain() == DomainKind::full_space || b.l_domain == DomainKind::full_space;
        r.block_full_domain.push_back(full);
        all = all && full;
    }
    r.satisfied = all;
    r.circumstance = all ? Circumstance::full_domain : Circumstance::unknown;
    return r;
}

}  // namespace fbfp
