#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>

#include "fbfp/errors.hpp"
#include "fbfp/linalg.hpp"
#include "helpers.hpp"

using namespace fbfp;
using testutil::vec;

TEST_SUITE("linalg") {

TEST_CASE("inner products of small vectors") {
    CHECK(inner(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK(inner(vec({2, 3}), vec({2, 3})) == 13.0);
    CHECK(inner(vec({1, 2, 3}), vec({4, 5, 6})) == 32.0);
    CHECK(norm(vec({3, 4})) == doctest::Approx(5.0));
    CHECK_THROWS_AS(inner(vec({1, 2}), vec({1, 2, 3})), InvalidInput);
}

TEST_CASE("require_finite rejects nan and inf") {
    CHECK_NOTHROW(require_finite(vec({1, 2}), "v"));
    CHECK_THROWS_AS(require_finite(vec({1, NAN}), "v"), InvalidInput);
    Matrix m = Matrix::Identity(2, 2);
    m(1, 0) = INFINITY;
    CHECK_THROWS_AS(require_finite(m, "m"), InvalidInput);
}

TEST_CASE("operator norm on hand-checkable maps") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 3;
    d(1, 1) = 1;
    CHECK(operator_norm(LinearMap(d)) == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(operator_norm(LinearMap::identity(4)) == doctest::Approx(1.0).epsilon(1e-8));
    Matrix row(1, 2);
    row << 1, 1;
    CHECK(operator_norm(LinearMap(row)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-8));
    CHECK_THROWS_AS(operator_norm(LinearMap::zero(3, 2)), InvalidInput);
}

TEST_CASE("operator norm agrees with a singular value decomposition") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix M = testutil::randn(rng, 3 + trial % 4, 2 + trial % 5);
        const double svd = Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
        CHECK(operator_norm(LinearMap(M), 1e-12) == doctest::Approx(svd).epsilon(1e-6));
    }
}

TEST_CASE("adjoint is the transpose") {
    Matrix m(2, 2);
    m << 1, 2, 3, 4;
    Matrix t(2, 2);
    t << 1, 3, 2, 4;
    CHECK(LinearMap(m).adjoint().matrix() == t);

    Matrix s(2, 2);
    s << 2, -1, -1, 5;
    CHECK(LinearMap(s).adjoint().matrix() == s);

    CHECK(LinearMap::zero(3, 2).adjoint().is_zero());
    CHECK(LinearMap::zero(3, 2).adjoint().rows() == 2);

    // <Lx, y> = <x, L^T y>
    std::mt19937_64 rng(9);
    const LinearMap L(testutil::randn(rng, 4, 3));
    const Vector x = testutil::randn(rng, 3), y = testutil::randn(rng, 4);
    CHECK(inner(L.apply(x), y) == doctest::Approx(inner(x, L.apply_adjoint(y))));
}

TEST_CASE("apply checks dimensions") {
    const LinearMap L = LinearMap::identity(3);
    CHECK_THROWS_AS(L.apply(vec({1, 2})), InvalidInput);
    CHECK_THROWS_AS(L.apply_adjoint(vec({1, 2})), InvalidInput);
}

TEST_CASE("random_unit is deterministic in the seed") {
    std::mt19937_64 a(3), b(3);
    const Vector u = random_unit(6, a), v = random_unit(6, b);
    CHECK(u == v);
    CHECK(u.norm() == doctest::Approx(1.0));
}

}
