#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "fbfp/harness.hpp"

namespace fbfp {

namespace {

using nlohmann::json;

SuiteCheck at_most(std::string name, double value, double threshold) {
    return {std::move(name), value <= threshold, value, threshold};
}

SuiteCheck at_least(std::string name, double value, double threshold) {
    return {std::move(name), value >= threshold, value, threshold};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

Vector random_vector(std::mt19937_64& rng, Index n) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Common diagnostics of an oracle run.
void oracle_checks(SuiteCaseReport& rep, const ProblemInstance& inst, const RunResult& r, bool ergodic) {
    const auto& mp = inst.minimization();
    if (ergodic) {
        rep.checks.push_back(at_most("ergodic_dist", inst.distance_to_solution_set(r.z_final), 1e-2));
    } else {
        rep.checks.push_back(at_most("iterate_dist", inst.distance_to_solution_set(r.x_final), 1e-3));
        rep.checks.push_back(at_most("psi_final", mp.psi.value(r.x_final), 1e-4));
        rep.checks.push_back(at_most("fejer_tail_growth", fejer_diagnostic(r.trace).tail_growth, 1e-6));
    }
    const auto inc = partial_sum_increments(r.trace, r.iterations / 10);
    rep.checks.push_back(at_most("last_decade_step_sq", inc.first, 1e-8));
    rep.checks.push_back(at_most("last_decade_gap_sq", inc.second, 1e-8));
    const auto gs = graph_samples(inst, 100, 7);
    rep.checks.push_back(at_least("oracle_vi_residual", vi_residual(*inst.oracle_solution, gs), -1e-6));
}

RunOptions oracle_options(const ProblemInstance& inst) {
    RunOptions o;
    o.reference = inst.oracle_solution;
    if (!inst.solution_vertices.empty()) {
        o.distance = [&inst](const Vector& v) { return inst.distance_to_solution_set(v); };
    }
    return o;
}

const StoppingRule kFullHorizon{100000, 0.0, 0.0};

SuiteCaseReport projection_case() {
    SuiteCaseReport rep{"projection_d10_r3", {"strongly_monotone", "penalty_active"}, {}, {}};
    const auto inst = gen_projection_problem(10, 3, 42);
    const auto& mp = inst.minimization();
    const Vector zero = Vector::Zero(mp.dim);
    const auto res = solve_min(mp, default_schedule(lower_problem(mp)), PdSeeds{zero, zero, {}, {}}, kFullHorizon,
                               oracle_options(inst));
    oracle_checks(rep, inst, res.run.primal, false);
    return rep;
}

SuiteCaseReport l1_case() {
    SuiteCaseReport rep{"l1_constrained_d6_r2", {"ergodic_only", "penalty_active"}, {}, {}};
    const auto inst = gen_l1_constrained_problem(6, 2, 42);
    const auto& mp = inst.minimization();
    const Vector zero = Vector::Zero(mp.dim);
    const auto res = solve_min(mp, ergodic_family(), PdSeeds{zero, zero, {}, {}}, kFullHorizon, oracle_options(inst));
    oracle_checks(rep, inst, res.run.primal, true);
    return rep;
}

SuiteCaseReport composite_case() {
    SuiteCaseReport rep{"composite_d8_m2", {"strongly_monotone", "penalty_active"}, {}, {}};
    const auto inst = gen_composite_problem(8, 2, 42, true);
    const auto& mp = inst.minimization();
    const Vector zero = Vector::Zero(mp.dim);
    const auto res = solve_min(mp, default_schedule(lower_problem(mp)), PdSeeds{zero, zero, {}, {}}, kFullHorizon,
                               oracle_options(inst));
    const auto& r = res.run.primal;
    rep.checks.push_back(at_most("iterate_dist", (r.x_final - *inst.oracle_solution).norm(), 1e-2));
    const auto gs = graph_samples(inst, 100, 7);
    rep.checks.push_back(at_least("oracle_vi_residual", vi_residual(*inst.oracle_solution, gs), -1e-6));
    return rep;
}

SuiteCaseReport reduction_case() {
    SuiteCaseReport rep{"reductions", {"reduction_check"}, {}, {}};
    std::mt19937_64 rng(2024);

    // Without penalty and inertia the step is Tseng's; with inertia it is the
    // inertial variant. Both are coded directly here.
    {
        const auto pd = gen_random_primal_dual(6, 0, 0, 11, false);
        const auto prob = build_product_problem(pd);
        for (double alpha : {0.0, 0.1}) {
            PowerLawFamily f = default_family();
            f.alpha_target = alpha;
            const Schedule s = build_power_law_schedule(f, prob.mu(), prob.eta());
            const Vector x0 = random_vector(rng, 6);
            const Vector x1 = alpha == 0.0 ? x0 : Vector(random_vector(rng, 6));
            SolverState st = initial_state(s, x0, x1);
            Vector xp = x0, x = x1;
            double worst = 0.0;
            for (int k = 0; k < 1000; ++k) {
                const long n = st.n;
                const double lam = s.lambda(n), a = s.alpha(n);
                const Vector Dx = prob.D(x);
                const Vector p = prob.A.resolve(lam, Vector(x - lam * Dx + a * (x - xp)));
                const Vector xn = lam * (Dx - prob.D(p)) + p;
                xp = x;
                x = xn;
                fbf_advance(prob, s, st);
                worst = std::max(worst, max_abs_diff(st.x_curr, x));
            }
            rep.checks.push_back(at_most(alpha == 0.0 ? "tseng_identity" : "inertial_identity", worst, 1e-12));
        }
    }

    // Direct primal-dual step against the plain step on the product space.
    {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const auto pd = gen_random_primal_dual(4, 2, 3, 100 + seed);
            const auto prod = build_product_problem(pd);
            const Schedule s = default_schedule(pd);
            PdSeeds seeds{random_vector(rng, 4), random_vector(rng, 4), {}, {}};
            for (int i = 0; i < 2; ++i) {
                seeds.v0.push_back(random_vector(rng, 3));
                seeds.v1.push_back(random_vector(rng, 3));
            }
            ProductState ps = initial_product_state(pd, s, seeds);
            SolverState fs = initial_state(s, stack(seeds.x0, seeds.v0), stack(seeds.x1, seeds.v1));
            for (int k = 0; k < 200; ++k) {
                pd_advance(pd, s, ps);
                fbf_advance(prod, s, fs);
                worst = std::max(worst, max_abs_diff(ps.stacked(), fs.x_curr));
            }
        }
        rep.checks.push_back(at_most("product_space_identity", worst, 1e-12));
    }
    return rep;
}

struct SuiteEntry {
    std::string id;
    std::set<std::string> tags;
    std::function<SuiteCaseReport()> run;
};

std::vector<SuiteEntry> registry() {
    return {
        {"projection_d10_r3", {"strongly_monotone", "penalty_active"}, projection_case},
        {"l1_constrained_d6_r2", {"ergodic_only", "penalty_active"}, l1_case},
        {"composite_d8_m2", {"strongly_monotone", "penalty_active"}, composite_case},
        {"reductions", {"reduction_check"}, reduction_case},
    };
}

}  // namespace

PowerLawFamily ergodic_family() {
    PowerLawFamily f;
    f.c_lambda = 0.3;
    f.exp_lambda = 0.55;
    f.exp_beta = 0.55;
    f.alpha_target = 0.05;
    f.c_beta = 0.98 * coupling_threshold(f.alpha_target) / f.c_lambda;
    return f;
}

bool SuiteCaseReport::pass() const {
    return error.empty() && std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
}

int SuiteReport::failures() const {
    return static_cast<int>(std::count_if(cases.begin(), cases.end(), [](const auto& c) { return !c.pass(); }));
}

json SuiteReport::to_json() const {
    json out = json::array();
    for (const auto& c : cases) {
        json checks = json::array();
        for (const auto& k : c.checks) {
            checks.push_back({{"name", k.name}, {"pass", k.pass}, {"value", k.value}, {"threshold", k.threshold}});
        }
        json j = {{"id", c.id}, {"tags", c.tags}, {"pass", c.pass()}, {"checks", checks}};
        if (!c.error.empty()) j["error"] = c.error;
        out.push_back(std::move(j));
    }
    return {{"cases", out}, {"failures", failures()}};
}

bool tags_match(const std::string& filter, const std::set<std::string>& tags) {
    if (trim(filter).empty()) return true;
    for (const auto& alt : split(filter, ',')) {
        bool all = !trim(alt).empty();
        for (const auto& t : split(alt, '+')) all = all && tags.count(trim(t)) > 0;
        if (all) return true;
    }
    return false;
}

SuiteReport run_suite(const std::string& filter, std::ostream* progress) {
    SuiteReport report;
    for (const auto& e : registry()) {
        if (!tags_match(filter, e.tags)) continue;
        SuiteCaseReport rep;
        try {
            rep = e.run();
        } catch (const std::exception& ex) {
            rep.id = e.id;
            rep.tags = e.tags;
            rep.error = ex.what();
        }
        if (progress) {
            *progress << (rep.pass() ? "PASS " : "FAIL ") << rep.id;
            for (const auto& c : rep.checks) {
                *progress << "  " << c.name << "=" << c.value << (c.pass ? "" : " (limit " + std::to_string(c.threshold) + ")");
            }
            if (!rep.error.empty()) *progress << "  error: " << rep.error;
            *progress << '\n';
        }
        report.cases.push_back(std::move(rep));
    }
    return report;
}

}  // namespace fbfp
