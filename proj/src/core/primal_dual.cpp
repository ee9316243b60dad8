#include "fbfp/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "detail/drive.hpp"
#include "fbfp/errors.hpp"

namespace fbfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double lipschitz_or_zero(const LipschitzOperator& op) { return op.is_zero() ? 0.0 : op.lipschitz(); }

}  // namespace

PrimalDualProblem PrimalDualProblem::make(ResolventOperator A, LipschitzOperator C, LipschitzOperator B,
                                          std::vector<DualBlock> blocks, Projection M_projection, bool run_audit) {
    const Index d = A.dim();
    if (d <= 0) throw InvalidInput("PrimalDualProblem: A must be set");
    if (C.dim() != d || B.dim() != d) throw InvalidInput("PrimalDualProblem: C and B must act on the primal space");
    if (!C.monotone() || !B.monotone()) throw InvalidInput("PrimalDualProblem: C and B must be monotone");
    PrimalDualProblem p;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        const std::string tag = "block " + std::to_string(i);
        if (b.L.cols() != d) throw InvalidInput(tag + ": L has " + std::to_string(b.L.cols()) + " columns, expected " +
                                                std::to_string(d));
        if (b.B_inv.dim() != b.L.rows() || b.D_inv.dim() != b.L.rows()) {
            throw InvalidInput(tag + ": dual operators must act on R^" + std::to_string(b.L.rows()));
        }
        if (!b.D_inv.monotone()) throw InvalidInput(tag + ": D_inv must be monotone");
        if (run_audit) audit(b.D_inv);
        // A zero coupling map is allowed and has norm 0.
        p.L_norms.push_back(b.L.is_zero() ? 0.0 : operator_norm(b.L));
    }
    if (run_audit) {
        audit(C);
        audit(B);
    }
    p.A = std::move(A);
    p.C = std::move(C);
    p.B = std::move(B);
    p.blocks = std::move(blocks);
    p.M_projection = std::move(M_projection);
    std::vector<double> nus;
    for (const auto& b : p.blocks) nus.push_back(lipschitz_or_zero(b.D_inv));
    p.beta = composite_lipschitz_constant(lipschitz_or_zero(p.C), nus, p.L_norms);
    return p;
}

Index PrimalDualProblem::product_dim() const {
    Index n = primal_dim();
    for (const auto& b : blocks) n += b.L.rows();
    return n;
}

std::vector<Index> PrimalDualProblem::offsets() const {
    std::vector<Index> off;
    Index at = primal_dim();
    for (const auto& b : blocks) {
        off.push_back(at);
        at += b.L.rows();
    }
    return off;
}

double PrimalDualProblem::mu() const { return B.is_zero() || B.lipschitz() == 0.0 ? kInf : 1.0 / B.lipschitz(); }
double PrimalDualProblem::eta() const { return beta > 0.0 ? 1.0 / beta : kInf; }

double composite_lipschitz_constant(double nu, std::span<const double> nus, std::span<const double> L_norms) {
    if (nus.size() != L_norms.size()) throw InvalidInput("composite_lipschitz_constant: one nu_i per block");
    double m = nu, sq = 0.0;
    for (double v : nus) m = std::max(m, v);
    for (double l : L_norms) sq += l * l;
    return m + std::sqrt(sq);
}

double composite_lipschitz_constant(const PrimalDualProblem& prob) { return prob.beta; }

Vector stack(const Vector& x, std::span<const Vector> v) {
    Index n = x.size();
    for (const auto& vi : v) n += vi.size();
    Vector w(n);
    w.head(x.size()) = x;
    Index at = x.size();
    for (const auto& vi : v) {
        w.segment(at, vi.size()) = vi;
        at += vi.size();
    }
    return w;
}

InclusionProblem build_product_problem(const PrimalDualProblem& prob, bool run_audit) {
    if (prob.blocks.empty()) {
        return InclusionProblem::make(prob.A, prob.C, prob.B, prob.M_projection, run_audit);
    }
    const Index d = prob.primal_dim(), N = prob.product_dim();
    const auto off = prob.offsets();
    const auto blocks = prob.blocks;
    const auto A = prob.A;
    const auto C = prob.C;
    const auto B = prob.B;

    ResolventOperator At(N, [=](double g, const Vector& w) {
        Vector out(N);
        out.head(d) = A.resolve(g, w.head(d));
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const Index di = blocks[i].L.rows();
            out.segment(off[i], di) = blocks[i].B_inv.resolve(g, w.segment(off[i], di));
        }
        return out;
    });

    // One fused pass: Cx, every L_i x and L_i^T v_i.
    LipschitzOperator Dt(
        N,
        [=](const Vector& w) {
            Vector out(N);
            const Vector x = w.head(d);
            Vector top = Vector::Zero(d);
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                const Index di = blocks[i].L.rows();
                const Vector vi = w.segment(off[i], di);
                top += blocks[i].L.apply_adjoint(vi);
                out.segment(off[i], di) = blocks[i].D_inv(vi) - blocks[i].L.apply(x);
            }
            if (!C.is_zero()) top += C(x);
            out.head(d) = top;
            return out;
        },
        prob.beta, true);

    LipschitzOperator Bt = B.is_zero() ? LipschitzOperator::zero(N)
                                       : LipschitzOperator(
                                             N,
                                             [=](const Vector& w) {
                                                 Vector out = Vector::Zero(N);
                                                 out.head(d) = B(w.head(d));
                                                 return out;
                                             },
                                             B.lipschitz(), true);

    Projection proj;
    if (prob.M_projection) {
        proj = [d, P = prob.M_projection](const Vector& w) {
            Vector out = w;
            out.head(d) = P(w.head(d));
            return out;
        };
    }
    return InclusionProblem::make(std::move(At), std::move(Dt), std::move(Bt), std::move(proj), run_audit);
}

ProductState initial_product_state(const PrimalDualProblem& prob, const Schedule& s, const PdSeeds& seeds) {
    const Index d = prob.primal_dim();
    if (seeds.x0.size() != d || seeds.x1.size() != d) throw InvalidInput("pd seeds: primal dimension mismatch");
    require_finite(seeds.x0, "x0");
    require_finite(seeds.x1, "x1");
    auto duals = [&](const std::vector<Vector>& given, const char* what) {
        std::vector<Vector> v;
        if (given.empty()) {
            for (const auto& b : prob.blocks) v.push_back(Vector::Zero(b.L.rows()));
            return v;
        }
        if (given.size() != prob.blocks.size()) throw InvalidInput(std::string(what) + ": one dual seed per block");
        for (std::size_t i = 0; i < given.size(); ++i) {
            if (given[i].size() != prob.blocks[i].L.rows()) {
                throw InvalidInput(std::string(what) + ": dual seed " + std::to_string(i) + " has wrong dimension");
            }
            require_finite(given[i], what);
        }
        return given;
    };
    ProductState st;
    st.n = s.n0();
    st.x_prev = seeds.x0;
    st.x = seeds.x1;
    st.v_prev = duals(seeds.v0, "v0");
    st.v = duals(seeds.v1, "v1");
    const double lam = s.lambda(st.n);
    st.z_accum = lam * st.stacked();
    st.tau = lam;
    st.dual_gaps.assign(prob.blocks.size(), 0.0);
    return st;
}

void pd_advance(const PrimalDualProblem& prob, const Schedule& s, ProductState& st) {
    const long n = st.n;
    const double lam = s.lambda(n), bet = s.beta(n), alp = s.alpha(n);
    const std::size_t m = prob.blocks.size();
    const Vector& x = st.x;
    const bool has_B = !prob.B.is_zero(), has_C = !prob.C.is_zero();

    // Forward pieces at (x_n, v_n).
    Vector Ltv = Vector::Zero(x.size());
    std::vector<Vector> Lx(m), Dv(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& b = prob.blocks[i];
        Ltv += b.L.apply_adjoint(st.v[i]);
        Lx[i] = b.L.apply(x);
        Dv[i] = b.D_inv(st.v[i]);
    }
    Vector top_x = Ltv;
    if (has_C) top_x += prob.C(x);
    Vector Bx;

    Vector arg = x - lam * top_x;
    if (has_B) {
        Bx = prob.B(x);
        arg -= (lam * bet) * Bx;
    }
    if (alp != 0.0) arg += alp * (x - st.x_prev);
    Vector p = prob.A.resolve(lam, arg);

    std::vector<Vector> q(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& b = prob.blocks[i];
        Vector a = st.v[i] - lam * (Dv[i] - Lx[i]);
        if (alp != 0.0) a += alp * (st.v[i] - st.v_prev[i]);
        q[i] = b.B_inv.resolve(lam, a);
    }

    // Forward pieces at (p_n, q_n), summed in block order.
    Vector Ltq = Vector::Zero(x.size());
    std::vector<Vector> v_next(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& b = prob.blocks[i];
        Ltq += b.L.apply_adjoint(q[i]);
        const Vector Dq_minus_Lp = b.D_inv(q[i]) - b.L.apply(p);
        v_next[i] = q[i] + lam * ((Dv[i] - Lx[i]) - Dq_minus_Lp);
    }
    Vector top_p = Ltq;
    if (has_C) top_p += prob.C(p);
    Vector x_next = p;
    if (has_B) x_next += (lam * bet) * (Bx - prob.B(p));
    x_next += lam * (top_x - top_p);

    bool finite = p.allFinite() && x_next.allFinite();
    for (std::size_t i = 0; i < m && finite; ++i) finite = q[i].allFinite() && v_next[i].allFinite();
    if (!finite) throw Divergence("non-finite iterate at n = " + std::to_string(n), {});

    double step_sq = (x_next - x).squaredNorm(), gap_sq = (x - p).squaredNorm();
    st.dual_gaps.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        step_sq += (v_next[i] - st.v[i]).squaredNorm();
        const double g = (st.v[i] - q[i]).squaredNorm();
        gap_sq += g;
        st.dual_gaps[i] = std::sqrt(g);
    }
    st.lambda = lam;
    st.beta = bet;
    st.alpha = alp;
    st.step_norm = std::sqrt(step_sq);
    st.gap_norm = std::sqrt(gap_sq);
    st.x_prev = std::move(st.x);
    st.x = std::move(x_next);
    st.v_prev = std::move(st.v);
    st.v = std::move(v_next);
    st.p = std::move(p);
    st.q = std::move(q);
    st.n = n + 1;
    st.steps += 1;
    const double lam_next = s.lambda(st.n);
    st.z_accum += lam_next * st.stacked();
    st.tau += lam_next;
}

ProductState pd_step(const PrimalDualProblem& prob, const Schedule& s, ProductState st) {
    pd_advance(prob, s, st);
    return st;
}

PdRunResult pd_run(const PrimalDualProblem& prob, const Schedule& s, const PdSeeds& seeds, const StoppingRule& stop,
                   const RunOptions& opt) {
    ProductState st = initial_product_state(prob, s, seeds);
    PdRunResult out;
    out.primal = detail::drive(
        s, st, seeds.x0, stop, opt, [&](ProductState& state) { pd_advance(prob, s, state); },
        [](const ProductState& state) -> const Vector& { return state.x; },
        [](const ProductState& state) { return state.primal_ergodic(); },
        [](TraceRecord& r, const ProductState& state) { r.dual_gaps = state.dual_gaps; });
    out.duals_final = st.v;
    out.z_product = st.z_accum / st.tau;
    return out;
}

}  // namespace fbfp
