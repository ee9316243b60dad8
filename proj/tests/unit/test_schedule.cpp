#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "fbfp/errors.hpp"
#include "fbfp/schedule.hpp"

using namespace fbfp;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Schedule harmonic(std::function<double(long)> beta) {
    Schedule::Parts p;
    p.lambda = [](long n) { return 1.0 / static_cast<double>(n); };
    p.beta = std::move(beta);
    p.alpha = [](long) { return 0.0; };
    p.sigma = 0.25;
    return Schedule(p);
}
}  // namespace

TEST_SUITE("schedule") {

TEST_CASE("n0 from the power-law family matches a direct scan") {
    PowerLawFamily f{1.0, 1.0, 1.0, 0.5, 0.15, false};
    const Schedule s = build_power_law_schedule(f, 1.0, 1.0);
    long oracle = 1;
    auto ok = [](long n) {
        const double t = std::pow(n, -0.5) + 1.0 / n;
        return 1.725 * t * t <= 0.125;
    };
    while (!ok(oracle)) ++oracle;
    CHECK(s.n0() == oracle);
    CHECK(s.sigma() == doctest::Approx(0.0625));
    CHECK(s.alpha_bar() == doctest::Approx(0.15));
    // holds everywhere after n0
    for (long n = oracle; n < oracle + 100000; n += 37) REQUIRE(ok(n));
    const auto rep = check_feasibility(s, s.n0() + 100000);
    CHECK(rep.feasible);
    CHECK(rep.analytic_tail);
}

TEST_CASE("alpha 0.2 leaves no room") {
    PowerLawFamily f;
    f.alpha_target = 0.2;
    CHECK_THROWS_AS(build_power_law_schedule(f, 1.0, 1.0), InfeasibleSchedule);
    CHECK_THROWS_AS(coupling_threshold(0.2), InvalidInput);
    // a constant schedule with alpha 0.2 fails for every sigma > 0
    for (double sigma : {1e-6, 0.01, 0.1}) {
        const auto s = build_constant_schedule(1e-6, 1.0, 0.2, sigma, 1.0, kInf);
        const auto rep = check_feasibility(s, 100);
        CHECK_FALSE(rep.feasible);
        CHECK(rep.first_violation == 1);
    }
}

TEST_CASE("constant coupling 0.2 is feasible, 0.5 is not") {
    const auto good = build_constant_schedule(0.2, 1.0, 0.15, 0.05, 1.0, kInf);
    CHECK(good.coupling(1) == doctest::Approx(0.2));
    CHECK(good.feasibility_lhs(1) == doctest::Approx(0.918));
    CHECK(check_feasibility(good, 1000).feasible);

    const auto bad = build_constant_schedule(0.5, 1.0, 0.15, 0.05, 1.0, kInf);
    CHECK(bad.feasibility_lhs(1) == doctest::Approx(1.275));
    const auto rep = check_feasibility(bad, 1000);
    CHECK_FALSE(rep.feasible);
    CHECK(rep.first_violation == bad.n0());
}

TEST_CASE("without a penalty operator only lambda / eta matters") {
    // alpha = 0, sigma = 1/4: 1.5 (lambda/eta)^2 <= 0.5
    const double edge = 1.0 / std::sqrt(3.0);
    CHECK(check_feasibility(build_constant_schedule(0.99 * edge, 1e9, 0.0, 0.25, kInf, 1.0), 100).feasible);
    CHECK_FALSE(check_feasibility(build_constant_schedule(1.01 * edge, 1e-9, 0.0, 0.25, kInf, 1.0), 100).feasible);
}

TEST_CASE("default family is feasible from n0 with strict margin") {
    const Schedule s = build_power_law_schedule(default_family(), 1.0, kInf);
    CHECK(s.n0() == 1);
    const auto rep = check_feasibility(s, 200000);
    CHECK(rep.feasible);
    for (long n = s.n0(); n <= 200000; ++n) {
        const double t = s.lambda(n) * s.beta(n);
        REQUIRE(1.0 - t * t - s.alpha(n) > 0.0);
    }
    CHECK(rep.min_strict_margin > 0.0);
}

TEST_CASE("default family scaled by mu keeps n0 small") {
    for (double mu : {0.01, 0.5, 1.0, 30.0}) {
        const Schedule s = build_power_law_schedule(default_family(mu), mu, kInf);
        CHECK(s.n0() == 1);
        CHECK(s.coupling(1) == doctest::Approx(0.475));
    }
}

TEST_CASE("coupling threshold at alpha 0.05") {
    const double t = coupling_threshold(0.05);
    const double s = 0.1875;
    CHECK(0.25 + 2 * s + (1 + 0.2 + 2 * s) * t * t == doctest::Approx(1.0));
}

TEST_CASE("bad families are rejected") {
    PowerLawFamily f;
    f.exp_lambda = 0.5;
    CHECK_THROWS_AS(build_power_law_schedule(f, 1.0, 1.0), InvalidInput);
    f = PowerLawFamily{};
    f.c_lambda = -1;
    CHECK_THROWS_AS(build_power_law_schedule(f, 1.0, 1.0), InvalidInput);
    f = PowerLawFamily{};
    f.exp_beta = 0.95;  // beta outgrows 1/lambda
    CHECK_THROWS_AS(build_power_law_schedule(f, 1.0, 1.0), InfeasibleSchedule);
    f = PowerLawFamily{};
    f.exp_lambda = 0.6;
    f.exp_beta = 0.3;  // sum lambda/beta diverges
    CHECK_NOTHROW(build_power_law_schedule(f, 1.0, 1.0));
    CHECK_THROWS_AS(build_power_law_schedule(f, 1.0, 1.0, true), SummabilityError);
}

TEST_CASE("alpha must be nondecreasing") {
    Schedule::Parts p;
    p.lambda = [](long) { return 0.01; };
    p.beta = [](long) { return 1.0; };
    p.alpha = [](long n) { return n % 2 ? 0.05 : 0.04; };
    p.alpha_bar = 0.05;
    p.sigma = 0.1;
    p.eta = kInf;
    CHECK_FALSE(check_feasibility(Schedule(p), 10).feasible);
}

TEST_CASE("summability partial sums against harmonic and Basel asymptotics") {
    const double gamma = 0.57721566490153286;
    const double N = 1000.0;
    const double harmonic_N = std::log(N) + gamma + 1 / (2 * N) - 1 / (12 * N * N);
    const double basel_N = std::numbers::pi * std::numbers::pi / 6 - 1 / N + 1 / (2 * N * N);

    const auto r = summability_report(harmonic([](long n) { return static_cast<double>(n); }), 1000);
    CHECK(r.partial_sum_lambda == doctest::Approx(harmonic_N).epsilon(1e-10));
    CHECK(r.partial_sum_lambda == doctest::Approx(7.485).epsilon(1e-4));
    CHECK(r.partial_sum_lambda_sq == doctest::Approx(basel_N).epsilon(1e-8));
    CHECK(r.partial_sum_lambda_sq == doctest::Approx(1.6439).epsilon(1e-4));
    CHECK(r.partial_sum_lambda_over_beta == doctest::Approx(basel_N).epsilon(1e-8));

    Schedule::Parts p;
    p.lambda = [](long) { return 1.0; };
    p.beta = [](long) { return 1.0; };
    p.alpha = [](long) { return 0.0; };
    CHECK(summability_report(Schedule(p), 500).partial_sum_lambda == 500.0);
}

TEST_CASE("horizon before n0 is an error") {
    PowerLawFamily f{1.0, 1.0, 1.0, 0.5, 0.15, false};
    const Schedule s = build_power_law_schedule(f, 1.0, 1.0);
    REQUIRE(s.n0() > 1);
    CHECK_THROWS_AS(check_feasibility(s, s.n0() - 1), InvalidInput);
}

}
