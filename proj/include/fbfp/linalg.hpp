#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace fbfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Euclidean inner product; throws InvalidInput on dimension mismatch.
double inner(const Vector& a, const Vector& b);
double norm(const Vector& a);

// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(const Vector& v, std::string_view what);
void require_finite(const Matrix& m, std::string_view what);

Vector make_vector(std::span<const double> entries);

// Dense linear map from R^cols to R^rows.
class LinearMap {
public:
    LinearMap() = default;
    explicit LinearMap(Matrix m);

    static LinearMap zero(Index rows, Index cols);
    static LinearMap identity(Index n);

    Index rows() const { return m_.rows(); }
    Index cols() const { return m_.cols(); }
    const Matrix& matrix() const { return m_; }

    Vector apply(const Vector& x) const;
    Vector apply_adjoint(const Vector& y) const;
    LinearMap adjoint() const;
    bool is_zero() const;

private:
    Matrix m_;
};

inline constexpr double kNormTolerance = 1e-9;
inline constexpr std::uint64_t kNormSeed = 0x9e3779b97f4a7c15ULL;

// Largest singular value by power iteration on L^T L from a seeded random unit
// start. Stops when the relative change of the estimate drops below `tol`.
// Throws EstimationFailure after `max_iter` iterations.
double operator_norm(const LinearMap& L, double tol = kNormTolerance, int max_iter = 100000,
                     std::uint64_t seed = kNormSeed);

// Random unit vector, deterministic in the supplied engine state.
template <class Engine>
Vector random_unit(Index dim, Engine& rng);

}  // namespace fbfp

#include <random>

namespace fbfp {

template <class Engine>
Vector random_unit(Index dim, Engine& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(dim);
    do {
        for (Index i = 0; i < dim; ++i) v[i] = g(rng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

}  // namespace fbfp
