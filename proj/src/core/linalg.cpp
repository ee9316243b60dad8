#include "fbfp/linalg.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fbfp/errors.hpp"

namespace fbfp {

double inner(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) {
        throw InvalidInput("inner: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()) + ")");
    }
    return a.dot(b);
}

double norm(const Vector& a) { return a.norm(); }

void require_finite(const Vector& v, std::string_view what) {
    if (!v.allFinite()) throw InvalidInput(std::string(what) + ": entries must be finite");
}

void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) throw InvalidInput(std::string(what) + ": entries must be finite");
}

Vector make_vector(std::span<const double> entries) {
    if (entries.empty()) throw InvalidInput("vector must have positive dimension");
    Vector v = Eigen::Map<const Vector>(entries.data(), static_cast<Index>(entries.size()));
    require_finite(v, "vector");
    return v;
}

LinearMap::LinearMap(Matrix m) : m_(std::move(m)) { require_finite(m_, "linear map"); }

LinearMap LinearMap::zero(Index rows, Index cols) { return LinearMap(Matrix::Zero(rows, cols)); }

LinearMap LinearMap::identity(Index n) { return LinearMap(Matrix::Identity(n, n)); }

Vector LinearMap::apply(const Vector& x) const {
    if (x.size() != m_.cols()) throw InvalidInput("LinearMap::apply: dimension mismatch");
    return m_ * x;
}

Vector LinearMap::apply_adjoint(const Vector& y) const {
    if (y.size() != m_.rows()) throw InvalidInput("LinearMap::apply_adjoint: dimension mismatch");
    return m_.transpose() * y;
}

LinearMap LinearMap::adjoint() const { return LinearMap(Matrix(m_.transpose())); }

bool LinearMap::is_zero() const { return m_.size() == 0 || m_.cwiseAbs().maxCoeff() == 0.0; }

double operator_norm(const LinearMap& L, double tol, int max_iter, std::uint64_t seed) {
    if (!(tol > 0.0)) throw InvalidInput("operator_norm: tol must be positive");
    if (L.is_zero()) throw InvalidInput("operator_norm: map must be nonzero");

    std::mt19937_64 rng(seed);
    Vector v = random_unit(L.cols(), rng);
    const Matrix& M = L.matrix();
    double estimate = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Vector w = M.transpose() * (M * v);
        const double wn = w.norm();
        if (wn == 0.0) {
            // Start landed in the kernel; reseed.
            v = random_unit(L.cols(), rng);
            continue;
        }
        // Rayleigh quotient of L^T L at the unit vector v.
        const double next = std::sqrt(v.dot(w));
        v = w / wn;
        if (it > 0 && std::abs(next - estimate) <= tol * next) return next;
        estimate = next;
    }
    throw EstimationFailure("operator_norm: power iteration did not converge in " +
                                std::to_string(max_iter) + " iterations",
                            v);
}

}  // namespace fbfp
