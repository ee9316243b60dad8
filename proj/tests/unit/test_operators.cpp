#include <doctest.h>

#include <cmath>
#include <vector>

#include "fbfp/errors.hpp"
#include "fbfp/operators.hpp"
#include "fbfp/prox_catalog.hpp"
#include "helpers.hpp"

using namespace fbfp;
using testutil::vec;

TEST_SUITE("operators") {

TEST_CASE("resolvent identity for A = identity") {
    // J_A(x) = x/2, A^{-1} = id, so J_{A^{-1}}(x) = x/2 as well
    const auto A = ResolventOperator::linear(Matrix::Identity(1, 1));
    CHECK(A.resolve(1.0, vec({4}))[0] == doctest::Approx(2.0));
    const std::vector<Vector> xs{vec({4}), vec({-1.5}), vec({0})};
    CHECK(resolvent_inverse_identity_check(A, A, 1.0, xs) <= 1e-15);
}

TEST_CASE("resolvent identity for the absolute value and its inverse") {
    const auto f = make_l1_norm();
    const auto A = f.resolvent(1);
    const auto A_inv = f.conjugate_resolvent(1);
    // x = 3: soft threshold gives 2, projection onto [-1, 1] gives 1
    CHECK(A.resolve(1.0, vec({3}))[0] == doctest::Approx(2.0));
    CHECK(A_inv.resolve(1.0, vec({3}))[0] == doctest::Approx(1.0));
    const std::vector<Vector> xs{vec({3}), vec({0.4}), vec({-7})};
    for (double g : {0.1, 1.0, 3.0}) CHECK(resolvent_inverse_identity_check(A, A_inv, g, xs) <= 1e-12);
}

TEST_CASE("resolvent identity for a random PSD quadratic on R^5") {
    std::mt19937_64 rng(17);
    const Matrix Q = testutil::random_psd(rng, 5) + 0.1 * Matrix::Identity(5, 5);
    const auto A = ResolventOperator::linear(Q);
    const auto A_inv = ResolventOperator::linear(Q.inverse());
    std::vector<Vector> xs;
    for (int i = 0; i < 20; ++i) xs.push_back(testutil::randn(rng, 5));
    for (double g : {0.3, 1.0, 4.0}) {
        CHECK(resolvent_inverse_identity_check(A, A_inv, g, xs) <= 1e-10);
        // direct solve as the reference for the forward resolvent
        const Matrix I = Matrix::Identity(5, 5);
        for (const auto& x : xs) CHECK(testutil::max_abs(A.resolve(g, x) - (I + g * Q).lu().solve(x)) <= 1e-12);
    }
}

TEST_CASE("resolvents are firmly nonexpansive") {
    std::mt19937_64 rng(2);
    const Matrix Q = testutil::random_psd(rng, 4);
    CHECK(firm_nonexpansiveness_violation(ResolventOperator::linear(Q), 1.7, 200, 1) <= 1e-12);
    CHECK(firm_nonexpansiveness_violation(make_l1_norm().resolvent(4), 0.5, 200, 2) <= 1e-12);
    // a map that expands is caught
    const ResolventOperator bad(2, [](double, const Vector& x) { return Vector(2.0 * x); });
    CHECK(firm_nonexpansiveness_violation(bad, 1.0, 50, 3) > 0.1);
}

TEST_CASE("normal cone resolvent is a projection") {
    Matrix A(1, 2);
    A << 1, 1;
    const AffineProjector P(A);
    const auto N = normal_cone_resolvent(2, P);
    const Vector p = N.resolve(5.0, vec({1, 0}));
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(-0.5));
    CHECK(P.rank() == 1);

    // M = R^d: identity
    const auto full = normal_cone_resolvent(3, [](const Vector& x) { return x; });
    CHECK(full.resolve(2.0, vec({1, 2, 3})) == vec({1, 2, 3}));

    // M = {0}
    const AffineProjector origin(Matrix::Identity(3, 3));
    CHECK(testutil::max_abs(origin(vec({4, -1, 2}))) <= 1e-15);
}

TEST_CASE("affine projector handles offsets and rank deficiency") {
    Matrix A(2, 3);
    A << 1, 0, 1, 2, 0, 2;  // rank 1
    const AffineProjector P(A, vec({1, 2}));
    CHECK(P.rank() == 1);
    const Vector y = P(vec({5, 7, -1}));
    CHECK(y[0] + y[2] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(7.0));
    // idempotent
    CHECK(testutil::max_abs(P(y) - y) <= 1e-12);
    // inconsistent system
    CHECK_THROWS_AS(AffineProjector(A, vec({1, 5})), InvalidInput);
}

TEST_CASE("audit catches a wrong Lipschitz constant and non-monotone maps") {
    Matrix M(2, 2);
    M << 2, 0, 0, 1;
    CHECK_NOTHROW(audit(LipschitzOperator::linear(M)));
    const LipschitzOperator understated(2, [M](const Vector& x) { return Vector(M * x); }, 1.0, true);
    CHECK_THROWS_AS(audit(understated), AuditFailure);
    const LipschitzOperator not_monotone(2, [](const Vector& x) { return Vector(-x); }, 1.0, true);
    CHECK_THROWS_AS(audit(not_monotone), AuditFailure);
    // skew maps are monotone
    Matrix S(2, 2);
    S << 0, 1, -1, 0;
    const auto skew = LipschitzOperator::linear(S);
    CHECK(skew.monotone());
    CHECK(skew.lipschitz() == doctest::Approx(1.0));
    CHECK_NOTHROW(audit(skew));
}

TEST_CASE("zero and scaled identity operators") {
    const auto z = LipschitzOperator::zero(3);
    CHECK(z.is_zero());
    CHECK(z(vec({1, 2, 3})) == Vector::Zero(3));
    const auto s = LipschitzOperator::scaled_identity(2, 0.5);
    CHECK(s.lipschitz() == 0.5);
    CHECK(s(vec({2, 4})) == vec({1, 2}));
    CHECK(ResolventOperator::zero(2).resolve(9.0, vec({1, -1})) == vec({1, -1}));
}

}
