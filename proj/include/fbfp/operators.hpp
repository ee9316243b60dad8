#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "fbfp/linalg.hpp"

namespace fbfp {

// Single-valued operator with a declared Lipschitz constant. Holds B, D, C,
// the dual forward maps D_i^{-1}, and gradients of smooth functions.
class LipschitzOperator {
public:
    using Fn = std::function<Vector(const Vector&)>;

    LipschitzOperator() = default;
    LipschitzOperator(Index dim, Fn eval, double lipschitz_constant, bool monotone);

    static LipschitzOperator zero(Index dim);
    static LipschitzOperator scaled_identity(Index dim, double scale);
    // x -> Mx with the spectral norm as constant; monotone iff sym(M) is PSD.
    static LipschitzOperator linear(const Matrix& M);

    Vector operator()(const Vector& x) const { return eval_(x); }
    Index dim() const { return dim_; }
    double lipschitz() const { return lipschitz_; }
    bool monotone() const { return monotone_; }
    bool is_zero() const { return zero_; }

private:
    Index dim_ = 0;
    Fn eval_;
    double lipschitz_ = 0.0;
    bool monotone_ = true;
    bool zero_ = false;
};

struct AuditOptions {
    int pairs = 100;
    double tol = 1e-8;
    double scale = 1.0;  // sampling radius
    std::uint64_t seed = 0xA0D17;
};

// Samples pairs and checks the Lipschitz bound (and monotonicity when
// flagged) with a relative tolerance. Throws AuditFailure on violation.
void audit(const LipschitzOperator& op, const AuditOptions& opt = {});

// Maximally monotone operator accessed only through its resolvent J_{gamma A}.
class ResolventOperator {
public:
    using Fn = std::function<Vector(double, const Vector&)>;

    ResolventOperator() = default;
    ResolventOperator(Index dim, Fn resolve, double strong_monotonicity = 0.0);

    // Resolvent of the zero operator (the identity map for every gamma).
    static ResolventOperator zero(Index dim);
    // Resolvent of a linear monotone operator x -> Mx, i.e. (I + gamma M)^{-1}.
    static ResolventOperator linear(const Matrix& M);

    Vector resolve(double gamma, const Vector& x) const;
    Index dim() const { return dim_; }
    double strong_monotonicity() const { return strong_; }

private:
    Index dim_ = 0;
    Fn resolve_;
    double strong_ = 0.0;
};

// Largest violation of ||Jx - Jy||^2 <= <x - y, Jx - Jy> over random pairs.
double firm_nonexpansiveness_violation(const ResolventOperator& R, double gamma, int pairs,
                                       std::uint64_t seed, double scale = 1.0);

// The normal cone N_M presented through its resolvent, which is the
// projection onto M for every gamma.
ResolventOperator normal_cone_resolvent(Index dim, std::function<Vector(const Vector&)> projection);

// max over samples of || J_{gamma A}(x) + gamma J_{A^{-1}/gamma}(x / gamma) - x ||.
double resolvent_inverse_identity_check(const ResolventOperator& R, const ResolventOperator& R_inv,
                                        double gamma, std::span<const Vector> samples);

// Metric projection onto {x : Ax = b}.
class AffineProjector {
public:
    AffineProjector() = default;
    explicit AffineProjector(const Matrix& A, Vector b = {});

    Vector operator()(const Vector& x) const;
    // Orthogonal projector onto ker A.
    const Matrix& kernel_projector() const { return P_; }
    // Minimum-norm solution of Ax = b.
    const Vector& offset() const { return x0_; }
    Index dim() const { return P_.rows(); }
    Index rank() const { return rank_; }

private:
    Matrix P_;
    Vector x0_;
    Index rank_ = 0;
};

}  // namespace fbfp
