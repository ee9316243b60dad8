#include "fbfp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "fbfp/errors.hpp"

namespace fbfp {

LipschitzOperator::LipschitzOperator(Index dim, Fn eval, double lipschitz_constant, bool monotone)
    : dim_(dim), eval_(std::move(eval)), lipschitz_(lipschitz_constant), monotone_(monotone) {
    if (dim <= 0) throw InvalidInput("LipschitzOperator: dimension must be positive");
    if (!eval_) throw InvalidInput("LipschitzOperator: missing evaluation function");
    if (!(lipschitz_constant >= 0.0) || !std::isfinite(lipschitz_constant)) {
        throw InvalidInput("LipschitzOperator: Lipschitz constant must be finite and nonnegative");
    }
}

LipschitzOperator LipschitzOperator::zero(Index dim) {
    LipschitzOperator op(dim, [dim](const Vector&) { return Vector(Vector::Zero(dim)); }, 0.0, true);
    op.zero_ = true;
    return op;
}

LipschitzOperator LipschitzOperator::scaled_identity(Index dim, double scale) {
    if (!(scale >= 0.0)) throw InvalidInput("scaled_identity: scale must be nonnegative");
    if (scale == 0.0) return zero(dim);
    return LipschitzOperator(dim, [scale](const Vector& x) { return Vector(scale * x); }, scale, true);
}

LipschitzOperator LipschitzOperator::linear(const Matrix& M) {
    require_finite(M, "linear operator");
    if (M.rows() != M.cols()) throw InvalidInput("linear operator must be square");
    const Index n = M.rows();
    if (M.cwiseAbs().maxCoeff() == 0.0) return zero(n);
    const double L = operator_norm(LinearMap(M));
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const bool monotone = es.eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, L);
    return LipschitzOperator(n, [M](const Vector& x) { return Vector(M * x); }, L, monotone);
}

void audit(const LipschitzOperator& op, const AuditOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> g(0.0, opt.scale);
    const Index n = op.dim();
    for (int k = 0; k < opt.pairs; ++k) {
        Vector x(n), y(n);
        for (Index i = 0; i < n; ++i) {
            x[i] = g(rng);
            y[i] = g(rng);
        }
        const Vector fx = op(x), fy = op(y);
        if (fx.size() != n || fy.size() != n) throw AuditFailure("audit: operator changed dimension");
        const Vector dx = x - y, df = fx - fy;
        const double dxn = dx.norm();
        const double slack = opt.tol * std::max(1.0, op.lipschitz() * dxn);
        if (df.norm() > op.lipschitz() * dxn + slack) {
            throw AuditFailure("audit: Lipschitz bound " + std::to_string(op.lipschitz()) +
                               " violated (ratio " + std::to_string(df.norm() / dxn) + ")");
        }
        if (op.monotone() && dx.dot(df) < -opt.tol * std::max(1.0, dxn * df.norm())) {
            throw AuditFailure("audit: monotonicity violated");
        }
    }
}

ResolventOperator::ResolventOperator(Index dim, Fn resolve, double strong_monotonicity)
    : dim_(dim), resolve_(std::move(resolve)), strong_(strong_monotonicity) {
    if (dim <= 0) throw InvalidInput("ResolventOperator: dimension must be positive");
    if (!resolve_) throw InvalidInput("ResolventOperator: missing resolvent");
    if (!(strong_monotonicity >= 0.0)) {
        throw InvalidInput("ResolventOperator: strong monotonicity must be nonnegative");
    }
}

ResolventOperator ResolventOperator::zero(Index dim) {
    return ResolventOperator(dim, [](double, const Vector& x) { return x; });
}

ResolventOperator ResolventOperator::linear(const Matrix& M) {
    require_finite(M, "linear resolvent");
    if (M.rows() != M.cols()) throw InvalidInput("linear resolvent: matrix must be square");
    const Index n = M.rows();
    const Matrix sym = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (lo < -1e-12) throw InvalidInput("linear resolvent: operator is not monotone");
    return ResolventOperator(
        n,
        [M](double gamma, const Vector& x) {
            Matrix K = Matrix::Identity(M.rows(), M.cols()) + gamma * M;
            return Vector(K.partialPivLu().solve(x));
        },
        std::max(0.0, lo));
}

Vector ResolventOperator::resolve(double gamma, const Vector& x) const {
    if (!(gamma > 0.0)) throw InvalidInput("resolve: gamma must be positive");
    if (x.size() != dim_) throw InvalidInput("resolve: dimension mismatch");
    return resolve_(gamma, x);
}

double firm_nonexpansiveness_violation(const ResolventOperator& R, double gamma, int pairs,
                                       std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < pairs; ++k) {
        Vector x(R.dim()), y(R.dim());
        for (Index i = 0; i < R.dim(); ++i) {
            x[i] = g(rng);
            y[i] = g(rng);
        }
        const Vector d = R.resolve(gamma, x) - R.resolve(gamma, y);
        worst = std::max(worst, d.squaredNorm() - (x - y).dot(d));
    }
    return worst;
}

ResolventOperator normal_cone_resolvent(Index dim, std::function<Vector(const Vector&)> projection) {
    if (!projection) throw InvalidInput("normal_cone_resolvent: missing projection");
    return ResolventOperator(dim, [proj = std::move(projection)](double, const Vector& x) { return proj(x); });
}

double resolvent_inverse_identity_check(const ResolventOperator& R, const ResolventOperator& R_inv,
                                        double gamma, std::span<const Vector> samples) {
    if (R.dim() != R_inv.dim()) throw InvalidInput("identity check: dimension mismatch");
    double worst = 0.0;
    for (const Vector& x : samples) {
        const Vector r = R.resolve(gamma, x) + gamma * R_inv.resolve(1.0 / gamma, x / gamma) - x;
        worst = std::max(worst, r.norm());
    }
    return worst;
}

AffineProjector::AffineProjector(const Matrix& A, Vector b) {
    require_finite(A, "affine constraint");
    const Index n = A.cols();
    if (n <= 0) throw InvalidInput("AffineProjector: empty constraint matrix");
    if (b.size() == 0) b = Vector::Zero(A.rows());
    if (b.size() != A.rows()) throw InvalidInput("AffineProjector: rhs dimension mismatch");
    if (A.rows() == 0) {
        P_ = Matrix::Identity(n, n);
        x0_ = Vector::Zero(n);
        return;
    }

    // Full row rank: P = I - A^T (A A^T)^{-1} A via Cholesky. Otherwise fall
    // back to a rank-revealing factorization.
    Eigen::LLT<Matrix> llt(A * A.transpose());
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    rank_ = cod.rank();
    if (rank_ == A.rows() && llt.info() == Eigen::Success) {
        P_ = Matrix::Identity(n, n) - A.transpose() * llt.solve(A);
        x0_ = A.transpose() * llt.solve(b);
    } else {
        const Matrix pinv = cod.pseudoInverse();
        P_ = Matrix::Identity(n, n) - pinv * A;
        x0_ = pinv * b;
        if ((A * x0_ - b).norm() > 1e-9 * std::max(1.0, b.norm())) {
            throw InvalidInput("AffineProjector: constraint set is empty");
        }
    }
    P_ = 0.5 * (P_ + P_.transpose());
}

Vector AffineProjector::operator()(const Vector& x) const {
    if (x.size() != P_.rows()) throw InvalidInput("AffineProjector: dimension mismatch");
    return x0_ + P_ * (x - x0_);
}

}  // namespace fbfp
