#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fbfp/errors.hpp"
#include "fbfp/primal_dual.hpp"
#include "fbfp/problem_suite.hpp"
#include "helpers.hpp"

using namespace fbfp;
using testutil::vec;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("primal_dual") {

TEST_CASE("composite Lipschitz constant") {
    const std::vector<double> one{2.0}, norm3{3.0};
    CHECK(composite_lipschitz_constant(1.0, one, norm3) == doctest::Approx(5.0));
    const std::vector<double> halves{0.5, 0.5}, ones{1.0, 1.0};
    CHECK(composite_lipschitz_constant(0.5, halves, ones) == doctest::Approx(0.5 + std::sqrt(2.0)));
    CHECK(composite_lipschitz_constant(0.7, {}, {}) == doctest::Approx(0.7));
}

TEST_CASE("m = 0 gives back the original inclusion") {
    const auto pd = gen_random_primal_dual(5, 0, 0, 3, true);
    CHECK(pd.product_dim() == 5);
    const auto prod = build_product_problem(pd);
    std::mt19937_64 rng(1);
    for (int k = 0; k < 10; ++k) {
        const Vector x = testutil::randn(rng, 5);
        CHECK(testutil::max_abs(prod.D(x) - pd.C(x)) <= 1e-15);
        CHECK(testutil::max_abs(prod.B(x) - pd.B(x)) <= 1e-15);
        CHECK(testutil::max_abs(prod.A.resolve(0.3, x) - pd.A.resolve(0.3, x)) <= 1e-15);
    }
    // and the runs agree
    const auto s = build_constant_schedule(0.2 * pd.eta(), 0.2 * pd.mu(), 0.05, 0.1, pd.mu(), pd.eta());
    const Vector x0 = testutil::randn(rng, 5), x1 = testutil::randn(rng, 5);
    const StoppingRule stop{300, 0.0, 0.0};
    const auto a = pd_run(pd, s, PdSeeds{x0, x1, {}, {}}, stop);
    const auto b = run(prod, s, x0, x1, stop);
    CHECK(testutil::max_abs(a.primal.x_final - b.x_final) <= 1e-12);
}

TEST_CASE("product forward operator is monotone and beta-Lipschitz") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto pd = gen_random_primal_dual(4, 2, 3, seed);
        const auto prod = build_product_problem(pd);
        CHECK(prod.eta() == doctest::Approx(1.0 / composite_lipschitz_constant(pd)));
        std::mt19937_64 rng(seed + 50);
        for (int k = 0; k < 100; ++k) {
            const Vector w = testutil::randn(rng, pd.product_dim(), 3.0);
            const Vector u = testutil::randn(rng, pd.product_dim(), 3.0);
            const Vector dd = prod.D(w) - prod.D(u);
            CHECK(dd.dot(w - u) >= -1e-10);
            CHECK(dd.norm() <= pd.beta * (w - u).norm() * (1 + 1e-12));
        }
    }
}

TEST_CASE("zero coupling decouples the dual update") {
    const Index d = 3, di = 2;
    DualBlock blk{ResolventOperator::linear(Matrix::Identity(di, di)), LipschitzOperator::scaled_identity(di, 0.5),
                  LinearMap::zero(di, d)};
    const auto pd = PrimalDualProblem::make(ResolventOperator::linear(Matrix::Identity(d, d)), LipschitzOperator::zero(d),
                                            LipschitzOperator::zero(d), {blk});
    CHECK(pd.L_norms[0] == 0.0);
    const auto s = build_constant_schedule(0.3, 1.0, 0.0, 0.25, kInf, pd.eta());
    const std::vector<Vector> v{vec({1, -1})};
    ProductState a = initial_product_state(pd, s, PdSeeds{vec({1, 2, 3}), vec({1, 2, 3}), v, v});
    ProductState b = initial_product_state(pd, s, PdSeeds{vec({-5, 0, 9}), vec({4, 4, 4}), v, v});
    for (int k = 0; k < 50; ++k) {
        pd_advance(pd, s, a);
        pd_advance(pd, s, b);
        REQUIRE(testutil::max_abs(a.v[0] - b.v[0]) == 0.0);
    }
}

TEST_CASE("stacked equivalence with the product-space step") {
    std::mt19937_64 rng(77);
    const auto pd = gen_random_primal_dual(4, 2, 3, 12345);
    const auto prod = build_product_problem(pd);
    PowerLawFamily f;
    f.c_beta *= pd.mu();
    const auto s = build_power_law_schedule(f, pd.mu(), pd.eta());
    PdSeeds seeds{testutil::randn(rng, 4), testutil::randn(rng, 4), {}, {}};
    for (int i = 0; i < 2; ++i) {
        seeds.v0.push_back(testutil::randn(rng, 3));
        seeds.v1.push_back(testutil::randn(rng, 3));
    }
    ProductState ps = initial_product_state(pd, s, seeds);
    SolverState fs = initial_state(s, stack(seeds.x0, seeds.v0), stack(seeds.x1, seeds.v1));
    double worst = 0.0;
    for (int k = 0; k < 200; ++k) {
        ps = pd_step(pd, s, ps);
        fs = fbf_step(prod, s, fs);
        worst = std::max(worst, testutil::max_abs(ps.stacked() - fs.x_curr));
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("without penalty and inertia: the error-free primal-dual scheme") {
    const auto pd = gen_random_primal_dual(4, 2, 3, 9, false);
    const auto s = build_constant_schedule(0.4 * pd.eta(), 1.0, 0.0, 0.25, kInf, pd.eta());
    std::mt19937_64 rng(13);
    const Vector x0 = testutil::randn(rng, 4);
    std::vector<Vector> v{testutil::randn(rng, 3), testutil::randn(rng, 3)};
    ProductState st = initial_product_state(pd, s, PdSeeds{x0, x0, v, v});
    Vector x = x0;
    for (int k = 0; k < 300; ++k) {
        const double lam = s.lambda(st.n);
        Vector fx = pd.C(x);
        for (std::size_t i = 0; i < v.size(); ++i) fx += pd.blocks[i].L.matrix().transpose() * v[i];
        const Vector p = pd.A.resolve(lam, Vector(x - lam * fx));
        std::vector<Vector> q(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Matrix& L = pd.blocks[i].L.matrix();
            q[i] = pd.blocks[i].B_inv.resolve(lam, Vector(v[i] + lam * (L * x - pd.blocks[i].D_inv(v[i]))));
        }
        Vector fp = pd.C(p);
        for (std::size_t i = 0; i < v.size(); ++i) fp += pd.blocks[i].L.matrix().transpose() * q[i];
        const Vector xn = p + lam * (fx - fp);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Matrix& L = pd.blocks[i].L.matrix();
            v[i] = q[i] + lam * ((pd.blocks[i].D_inv(v[i]) - L * x) - (pd.blocks[i].D_inv(q[i]) - L * p));
        }
        x = xn;
        pd_advance(pd, s, st);
        REQUIRE(testutil::max_abs(st.x - x) <= 1e-12);
        for (std::size_t i = 0; i < v.size(); ++i) REQUIRE(testutil::max_abs(st.v[i] - v[i]) <= 1e-12);
    }
}

TEST_CASE("construction errors") {
    DualBlock bad{ResolventOperator::zero(2), LipschitzOperator::zero(3), LinearMap::zero(2, 4)};
    CHECK_THROWS_AS(PrimalDualProblem::make(ResolventOperator::zero(4), LipschitzOperator::zero(4),
                                            LipschitzOperator::zero(4), {bad}),
                    InvalidInput);
    DualBlock wrong_cols{ResolventOperator::zero(2), LipschitzOperator::zero(2), LinearMap::zero(2, 3)};
    CHECK_THROWS_AS(PrimalDualProblem::make(ResolventOperator::zero(4), LipschitzOperator::zero(4),
                                            LipschitzOperator::zero(4), {wrong_cols}),
                    InvalidInput);
}

TEST_CASE("primal ergodic average and dual gaps") {
    const auto pd = gen_random_primal_dual(3, 1, 2, 5);
    PowerLawFamily f;
    f.c_beta *= pd.mu();
    const auto s = build_power_law_schedule(f, pd.mu(), pd.eta());
    const auto res = pd_run(pd, s, PdSeeds{vec({1, 0, 0}), vec({1, 0, 0}), {}, {}}, StoppingRule{100, 0.0, 0.0});
    REQUIRE(res.duals_final.size() == 1);
    CHECK(res.z_product.size() == 5);
    CHECK(testutil::max_abs(res.z_product.head(3) - res.primal.z_final) <= 1e-14);
    CHECK(res.primal.trace.back().dual_gaps.size() == 1);
}

}
