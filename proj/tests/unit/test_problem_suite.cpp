#include <doctest.h>

#include <cmath>

#include "fbfp/errors.hpp"
#include "fbfp/json_io.hpp"
#include "fbfp/problem_suite.hpp"
#include "helpers.hpp"

using namespace fbfp;
using testutil::vec;

namespace {

Vector center_of(const ProblemInstance& inst) {
    return vector_from_json(inst.minimization().f.parameters()["center"], "center");
}

// Subgradient descent in kernel coordinates: an independent estimate of the
// optimal value of ||x - c||_1 over ker L.
double l1_value_by_subgradient(const Matrix& L, const Vector& c) {
    const Eigen::FullPivLU<Matrix> lu(L);
    const Matrix N = lu.kernel();
    Vector t = Vector::Zero(N.cols());
    double best = (N * t - c).lpNorm<1>();
    for (int k = 1; k <= 400000; ++k) {
        const Vector r = N * t - c;
        best = std::min(best, r.lpNorm<1>());
        const Vector g = N.transpose() * r.unaryExpr([](double v) { return double((v > 0) - (v < 0)); });
        if (g.norm() == 0) break;
        t -= (0.5 / std::sqrt(double(k))) * g / g.norm();
    }
    return best;
}

}  // namespace

TEST_SUITE("problem_suite") {

TEST_CASE("line projection oracle") {
    Matrix L(1, 2);
    L << 1, 1;
    const auto inst = projection_problem(L, vec({1, 0}));
    REQUIRE(inst.oracle_solution);
    CHECK((*inst.oracle_solution - vec({0.5, -0.5})).norm() <= 1e-14);
}

TEST_CASE("generated projection problem against the pseudo-inverse formula") {
    const auto inst = gen_projection_problem(10, 3, 42);
    const auto& mp = inst.minimization();
    const Matrix L = mp.psi.L->matrix();
    CHECK(L.rows() == 3);
    CHECK(L.cols() == 10);
    const Vector c = center_of(inst);
    const Vector oracle = c - L.transpose() * (L * L.transpose()).ldlt().solve(L * c);
    CHECK((*inst.oracle_solution - oracle).norm() <= 1e-12);
    CHECK(inst.regime_tags.count("strongly_monotone") == 1);
    CHECK(inst.regime_tags.count("penalty_active") == 1);
    // same seed, same instance
    const auto again = gen_projection_problem(10, 3, 42);
    CHECK(*again.oracle_solution == *inst.oracle_solution);
}

TEST_CASE("generator preconditions") {
    CHECK_THROWS_AS(gen_projection_problem(5, 0, 1), InvalidInput);
    CHECK_THROWS_AS(gen_projection_problem(5, 5, 1), InvalidInput);
    CHECK_THROWS_AS(gen_l1_constrained_problem(5, 0, 1), InvalidInput);
    CHECK_THROWS_AS(gen_l1_constrained_problem(20, 2, 1), OracleFailure);
    CHECK_THROWS_AS(gen_composite_problem(4, 0, 1), InvalidInput);
}

TEST_CASE("l1 with M = {0}") {
    Matrix L(1, 1);
    L << 1;
    const auto inst = l1_constrained_problem(L, vec({3}));
    CHECK(std::abs((*inst.oracle_solution)[0]) <= 1e-14);
}

TEST_CASE("l1 on the diagonal has a segment of solutions") {
    Matrix L(1, 2);
    L << 1, -1;
    const auto inst = l1_constrained_problem(L, vec({2, 0}));
    REQUIRE(inst.solution_vertices.size() == 2);
    CHECK(inst.distance_to_solution_set(vec({1, 1})) <= 1e-12);
    CHECK(inst.distance_to_solution_set(vec({0.5, 0.5})) <= 1e-12);
    CHECK(inst.distance_to_solution_set(vec({3, 3})) == doctest::Approx(std::sqrt(2.0)));
    CHECK(inst.distance_to_solution_set(vec({1, 0})) == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(inst.distance_to_solution_set(vec({-1, -1})) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("random l1 instance: oracle value matches a subgradient method") {
    const auto inst = gen_l1_constrained_problem(6, 2, 42);
    const auto& mp = inst.minimization();
    const Matrix L = mp.psi.L->matrix();
    const Vector x = *inst.oracle_solution;
    CHECK((L * x).norm() <= 1e-10);
    const double val = mp.f.value(x);
    for (const auto& v : inst.solution_vertices) {
        CHECK((L * v).norm() <= 1e-10);
        CHECK(mp.f.value(v) == doctest::Approx(val).epsilon(1e-10));
    }
    const Vector c = -vector_from_json(mp.f.parameters()["shift"], "shift");
    CHECK((x - c).lpNorm<1>() == doctest::Approx(val).epsilon(1e-12));
    const double sg = l1_value_by_subgradient(L, c);
    CHECK(val <= sg + 1e-9);
    CHECK(sg <= val + 1e-3);
}

TEST_CASE("composite oracle is stationary on the constraint set") {
    for (bool sc : {false, true}) {
        const auto inst = gen_composite_problem(3, 1, 7, sc);
        const auto& mp = inst.minimization();
        REQUIRE(mp.objective_complete());
        const Vector x = *inst.oracle_solution;
        const Matrix Lp = mp.psi.L->matrix();
        CHECK((Lp * x).norm() <= 1e-9);
        // central differences of the objective, projected onto ker L_psi
        Vector g(3);
        const double h = 1e-6;
        for (Index i = 0; i < 3; ++i) {
            Vector e = Vector::Zero(3);
            e[i] = h;
            g[i] = (mp.objective(x + e) - mp.objective(x - e)) / (2 * h);
        }
        const Matrix P = Matrix::Identity(3, 3) - Lp.transpose() * (Lp * Lp.transpose()).ldlt().solve(Lp);
        CHECK((P * g).norm() <= 1e-5);
        CHECK(inst.regime_tags.count(sc ? "strongly_monotone" : "ergodic_only") == 1);
    }
}

TEST_CASE("inline problem with mismatched block dimensions") {
    nlohmann::json doc = {{"dim", 3},
                          {"f", {{"name", "squared_l2"}}},
                          {"blocks", {{{"g", {{"name", "l1_norm"}}}, {"nu", 1.0}, {"L", {{1, 0}, {0, 1}}}}}},
                          {"psi", {{"kind", "zero"}}}};
    CHECK_THROWS_AS(min_problem_from_json(doc), InvalidInput);
    doc["blocks"][0]["L"] = {{1, 0, 0}, {0, 1, 0}};
    CHECK_NOTHROW(min_problem_from_json(doc));
    doc["f"]["name"] = "nope";
    CHECK_THROWS_AS(min_problem_from_json(doc), CatalogMiss);
}

TEST_CASE("graph samples") {
    const auto inst = gen_projection_problem(6, 2, 3);
    CHECK(graph_samples(inst, 0, 1).empty());
    const auto gs = graph_samples(inst, 100, 1);
    CHECK(gs.size() == 100);
    const auto& mp = inst.minimization();
    const Matrix L = mp.psi.L->matrix();
    const Vector c = center_of(inst);
    for (const auto& s : gs) {
        CHECK((L * s.u).norm() <= 1e-10);
        // w - grad f(u) must be normal to ker L, i.e. in the row space of L
        const Vector r = s.w - (s.u - c);
        const Vector in_kernel = r - L.transpose() * (L * L.transpose()).ldlt().solve(L * r);
        CHECK(in_kernel.norm() <= 1e-9 * (1 + r.norm()));
    }
    CHECK(vi_residual(*inst.oracle_solution, gs) >= -1e-8);
}

TEST_CASE("export and import round trip") {
    const auto inst = gen_composite_problem(4, 2, 11, true);
    const auto back = import_instance(export_instance(inst));
    CHECK(back.id == inst.id);
    CHECK((*back.oracle_solution - *inst.oracle_solution).norm() == 0.0);
    std::mt19937_64 rng(2);
    for (int k = 0; k < 5; ++k) {
        const Vector x = testutil::randn(rng, 4);
        CHECK(back.minimization().objective(x) == doctest::Approx(inst.minimization().objective(x)).epsilon(1e-14));
    }
}

TEST_CASE("distance to a hull") {
    const std::vector<Vector> tri{vec({0, 0}), vec({1, 0}), vec({0, 1})};
    CHECK(distance_to_hull(vec({0.2, 0.2}), tri) <= 1e-12);
    CHECK(distance_to_hull(vec({1, 1}), tri) == doctest::Approx(std::sqrt(0.5)));
    CHECK(distance_to_hull(vec({-1, -1}), tri) == doctest::Approx(std::sqrt(2.0)));
    CHECK(distance_to_hull(vec({2, 0}), tri) == doctest::Approx(1.0));
}

}
