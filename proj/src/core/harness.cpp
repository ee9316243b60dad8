#include "fbfp/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "fbfp/json_io.hpp"

namespace fbfp {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string s = "invalid configuration";
    for (const auto& i : issues) s += "\n  " + i.field + ": " + i.message;
    return s;
}

// Converts a byte offset into "line L, column C" (1-based).
std::string position_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class Checker {
public:
    std::vector<ConfigIssue> issues;

    void add(std::string field, std::string msg) { issues.push_back({std::move(field), std::move(msg)}); }

    void only_keys(const json& obj, const std::string& at, std::initializer_list<const char*> keys) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const char* k : keys) known = known || it.key() == k;
            if (!known) add(at + "/" + it.key(), "unknown field");
        }
    }

    std::optional<double> number(const json& obj, const std::string& at, const char* key) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj[key];
        if (!v.is_number()) {
            add(at + "/" + key, "expected a number");
            return std::nullopt;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
            add(at + "/" + key, "must be finite");
            return std::nullopt;
        }
        return d;
    }

    std::optional<long> integer(const json& obj, const std::string& at, const char* key, long lo, long hi) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj[key];
        if (!v.is_number_integer()) {
            add(at + "/" + key, "expected an integer");
            return std::nullopt;
        }
        const long x = v.get<long>();
        if (x < lo || x > hi) {
            add(at + "/" + key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::string> string(const json& obj, const std::string& at, const char* key) {
        if (!obj.contains(key)) return std::nullopt;
        if (!obj[key].is_string()) {
            add(at + "/" + key, "expected a string");
            return std::nullopt;
        }
        return obj[key].get<std::string>();
    }

    bool object(const json& root, const char* key) {
        if (!root.contains(key)) return false;
        if (!root[key].is_object()) {
            add(std::string("/") + key, "expected an object");
            return false;
        }
        return true;
    }

    std::optional<Vector> vec(const json& obj, const std::string& at, const char* key) {
        if (!obj.contains(key)) return std::nullopt;
        try {
            return vector_from_json(obj[key], at + "/" + key);
        } catch (const InvalidInput& e) {
            add(at + "/" + key, "expected an array of finite numbers");
            return std::nullopt;
        }
    }
};

void parse_problem(Checker& c, const json& root, RunConfig& cfg) {
    if (!root.contains("problem")) {
        c.add("/problem", "missing");
        return;
    }
    const auto& p = root["problem"];
    if (!p.is_object()) {
        c.add("/problem", "expected an object");
        return;
    }
    const bool gen = p.contains("generator"), inl = p.contains("inline");
    if (gen == inl) {
        c.add("/problem", "give exactly one of 'generator' or 'inline'");
        return;
    }
    if (gen) {
        c.only_keys(p, "/problem", {"generator", "params", "seed"});
        const auto name = c.string(p, "/problem", "generator");
        if (name && *name != "projection" && *name != "l1_constrained" && *name != "composite") {
            c.add("/problem/generator", "expected projection, l1_constrained or composite");
        }
        c.integer(p, "/problem", "seed", 0, std::numeric_limits<long>::max());
        if (p.contains("params")) {
            if (!p["params"].is_object()) {
                c.add("/problem/params", "expected an object");
            } else {
                const auto& q = p["params"];
                c.only_keys(q, "/problem/params", {"d", "rank", "m", "strongly_convex_duals"});
                c.integer(q, "/problem/params", "d", 1, 10000);
                c.integer(q, "/problem/params", "rank", 1, 10000);
                c.integer(q, "/problem/params", "m", 1, 64);
                if (q.contains("strongly_convex_duals") && !q["strongly_convex_duals"].is_boolean()) {
                    c.add("/problem/params/strongly_convex_duals", "expected a boolean");
                }
            }
        }
    } else {
        c.only_keys(p, "/problem", {"inline", "oracle", "id"});
        if (!p["inline"].is_object()) c.add("/problem/inline", "expected an object");
        c.vec(p, "/problem", "oracle");
        c.string(p, "/problem", "id");
    }
    cfg.problem = p;
}

void parse_schedule(Checker& c, const json& root, RunConfig& cfg) {
    if (!c.object(root, "schedule")) return;
    const auto& s = root["schedule"];
    const auto kind = c.string(s, "/schedule", "kind").value_or("power_law");
    auto& spec = cfg.schedule;
    if (kind == "default") {
        c.only_keys(s, "/schedule", {"kind"});
        return;
    }
    if (kind == "power_law") {
        spec.kind = "power_law";
        c.only_keys(s, "/schedule", {"kind", "c_lambda", "exp_lambda", "c_beta", "exp_beta", "alpha_target",
                                     "constant_alpha"});
        auto& f = spec.family;
        f.c_lambda = c.number(s, "/schedule", "c_lambda").value_or(f.c_lambda);
        f.exp_lambda = c.number(s, "/schedule", "exp_lambda").value_or(f.exp_lambda);
        f.c_beta = c.number(s, "/schedule", "c_beta").value_or(f.c_beta);
        f.exp_beta = c.number(s, "/schedule", "exp_beta").value_or(f.exp_beta);
        f.alpha_target = c.number(s, "/schedule", "alpha_target").value_or(f.alpha_target);
        if (s.contains("constant_alpha")) {
            if (s["constant_alpha"].is_boolean()) f.constant_alpha = s["constant_alpha"].get<bool>();
            else c.add("/schedule/constant_alpha", "expected a boolean");
        }
        if (!(f.c_lambda > 0.0)) c.add("/schedule/c_lambda", "must be > 0");
        if (!(f.c_beta > 0.0)) c.add("/schedule/c_beta", "must be > 0");
        if (!(f.exp_lambda > 0.5 && f.exp_lambda <= 1.0)) c.add("/schedule/exp_lambda", "must lie in (0.5, 1]");
        if (!(f.exp_beta >= 0.0)) c.add("/schedule/exp_beta", "must be >= 0");
        if (!(f.alpha_target >= 0.0)) c.add("/schedule/alpha_target", "must be >= 0");
        return;
    }
    if (kind == "constant") {
        spec.kind = "constant";
        c.only_keys(s, "/schedule", {"kind", "lambda", "beta", "alpha", "sigma", "enforce"});
        if (s.contains("enforce")) {
            if (s["enforce"].is_boolean()) spec.enforce = s["enforce"].get<bool>();
            else c.add("/schedule/enforce", "expected a boolean");
        }
        spec.lambda = c.number(s, "/schedule", "lambda").value_or(0.0);
        spec.beta = c.number(s, "/schedule", "beta").value_or(1.0);
        spec.alpha = c.number(s, "/schedule", "alpha").value_or(0.0);
        spec.sigma = c.number(s, "/schedule", "sigma").value_or((1.0 - 5.0 * spec.alpha) / 4.0);
        if (!(spec.lambda > 0.0)) c.add("/schedule/lambda", "must be > 0");
        if (!(spec.beta > 0.0)) c.add("/schedule/beta", "must be > 0");
        if (!(spec.alpha >= 0.0)) c.add("/schedule/alpha", "must be >= 0");
        if (!(spec.sigma > 0.0)) c.add("/schedule/sigma", "must be > 0");
        return;
    }
    c.add("/schedule/kind", "expected power_law, constant or default");
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : InvalidInput(join_issues(issues)), issues_(std::move(issues)) {}

ConfigError::ConfigError(std::string field, std::string message)
    : ConfigError(std::vector<ConfigIssue>{{std::move(field), std::move(message)}}) {}

RunConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(position_of(text, e.byte > 0 ? e.byte - 1 : 0), "malformed JSON");
    }
    Checker c;
    RunConfig cfg;
    if (!root.is_object()) throw ConfigError("/", "expected an object");
    c.only_keys(root, "", {"problem", "solver", "schedule", "stop", "seeds", "outputs", "diagnostics", "comment"});

    parse_problem(c, root, cfg);

    if (auto s = c.string(root, "", "solver")) {
        if (*s == "fbf") cfg.solver = SolverKind::fbf;
        else if (*s == "primal_dual") cfg.solver = SolverKind::primal_dual;
        else if (*s == "minimization") cfg.solver = SolverKind::minimization;
        else c.add("/solver", "expected fbf, primal_dual or minimization");
    }

    parse_schedule(c, root, cfg);

    if (c.object(root, "stop")) {
        const auto& s = root["stop"];
        c.only_keys(s, "/stop", {"max_iter", "tol_gap", "tol_step"});
        cfg.stop.max_iter = c.integer(s, "/stop", "max_iter", 0, 100'000'000).value_or(cfg.stop.max_iter);
        cfg.stop.tol_gap = c.number(s, "/stop", "tol_gap").value_or(cfg.stop.tol_gap);
        cfg.stop.tol_step = c.number(s, "/stop", "tol_step").value_or(cfg.stop.tol_step);
        if (cfg.stop.tol_gap < 0.0) c.add("/stop/tol_gap", "must be >= 0");
        if (cfg.stop.tol_step < 0.0) c.add("/stop/tol_step", "must be >= 0");
    }

    if (c.object(root, "seeds")) {
        const auto& s = root["seeds"];
        c.only_keys(s, "/seeds", {"x0", "x1"});
        cfg.x0 = c.vec(s, "/seeds", "x0");
        cfg.x1 = c.vec(s, "/seeds", "x1");
    }

    if (c.object(root, "outputs")) {
        const auto& s = root["outputs"];
        c.only_keys(s, "/outputs", {"trace_path", "summary_path"});
        cfg.trace_path = c.string(s, "/outputs", "trace_path").value_or("");
        cfg.summary_path = c.string(s, "/outputs", "summary_path").value_or("");
    }

    if (c.object(root, "diagnostics")) {
        const auto& s = root["diagnostics"];
        c.only_keys(s, "/diagnostics", {"fejer", "vi_residual_samples", "certificate_horizon", "certificate_samples"});
        if (s.contains("fejer")) {
            if (s["fejer"].is_boolean()) cfg.fejer = s["fejer"].get<bool>();
            else c.add("/diagnostics/fejer", "expected a boolean");
        }
        cfg.vi_residual_samples =
            static_cast<int>(c.integer(s, "/diagnostics", "vi_residual_samples", 0, 100000).value_or(0));
        cfg.certificate_horizon = c.integer(s, "/diagnostics", "certificate_horizon", 0, 100'000'000).value_or(0);
        if (s.contains("certificate_samples")) {
            if (!s["certificate_samples"].is_array()) {
                c.add("/diagnostics/certificate_samples", "expected an array of vectors");
            } else {
                for (std::size_t i = 0; i < s["certificate_samples"].size(); ++i) {
                    try {
                        cfg.certificate_samples.push_back(vector_from_json(s["certificate_samples"][i], "sample"));
                    } catch (const InvalidInput&) {
                        c.add("/diagnostics/certificate_samples/" + std::to_string(i), "expected an array of numbers");
                    }
                }
            }
        }
    }

    if (!c.issues.empty()) throw ConfigError(std::move(c.issues));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read configuration file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ProblemInstance build_instance(const RunConfig& cfg) {
    const auto& p = cfg.problem;
    try {
        if (p.contains("generator")) {
            const std::string g = p["generator"].get<std::string>();
            const json q = p.value("params", json::object());
            const auto seed = p.value("seed", std::uint64_t{42});
            const Index d = q.value("d", Index{0});
            if (d < 1) throw ConfigError("/problem/params/d", "required");
            if (g == "projection") return gen_projection_problem(d, q.value("rank", Index{1}), seed);
            if (g == "l1_constrained") return gen_l1_constrained_problem(d, q.value("rank", Index{1}), seed);
            return gen_composite_problem(d, q.value("m", Index{1}), seed, q.value("strongly_convex_duals", false));
        }
        ProblemInstance inst;
        inst.id = p.value("id", "inline");
        inst.problem = min_problem_from_json(p["inline"]);
        inst.description = p["inline"];
        if (p.contains("oracle")) {
            inst.oracle_solution = vector_from_json(p["oracle"], "/problem/oracle");
            inst.oracle_method = "supplied in configuration";
            if (inst.oracle_solution->size() != inst.minimization().dim) {
                throw ConfigError("/problem/oracle", "dimension does not match the problem");
            }
        }
        return inst;
    } catch (const ConfigError&) {
        throw;
    } catch (const OracleFailure&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(p.contains("generator") ? "/problem/params" : "/problem/inline", e.what());
    }
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace, std::size_t dual_blocks) {
    os << "n,lambda,beta,alpha,step_norm,gap_norm,iterate_dist,ergodic_dist,fejer_excess";
    for (std::size_t i = 1; i <= dual_blocks; ++i) os << ",dual_gap_" << i;
    os << '\n';
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << buf;
    };
    auto opt = [&](const std::optional<double>& v) {
        os << ',';
        if (v) num(*v);
    };
    for (const auto& r : trace) {
        os << r.n << ',';
        num(r.lambda);
        os << ',';
        num(r.beta);
        os << ',';
        num(r.alpha);
        os << ',';
        num(r.step_norm);
        os << ',';
        num(r.gap_norm);
        opt(r.iterate_dist);
        opt(r.ergodic_dist);
        opt(r.fejer_excess);
        for (std::size_t i = 0; i < dual_blocks; ++i) {
            os << ',';
            if (i < r.dual_gaps.size()) num(r.dual_gaps[i]);
        }
        os << '\n';
    }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace, std::size_t dual_blocks) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write trace file '" + path + "'");
    write_trace_csv(out, trace, dual_blocks);
    if (!out) throw IoError("error while writing trace file '" + path + "'");
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_json(const std::optional<double>& v) { return v ? finite_or_null(*v) : json(nullptr); }

std::string solver_name(SolverKind k) {
    switch (k) {
        case SolverKind::fbf: return "fbf";
        case SolverKind::primal_dual: return "primal_dual";
        case SolverKind::minimization: return "minimization";
    }
    return "minimization";
}

json schedule_json(const Schedule& s, const ScheduleSpec& spec, const FeasibilityReport& fr) {
    json j = {{"kind", spec.kind},  {"n0", s.n0()},          {"alpha_bar", s.alpha_bar()},
              {"sigma", s.sigma()}, {"mu", finite_or_null(s.mu())}, {"eta", finite_or_null(s.eta())}};
    if (s.family()) {
        const auto& f = *s.family();
        j["family"] = {{"c_lambda", f.c_lambda},
                       {"exp_lambda", f.exp_lambda},
                       {"c_beta", f.c_beta},
                       {"exp_beta", f.exp_beta},
                       {"alpha_target", f.alpha_target}};
    }
    j["feasibility"] = {{"feasible", fr.feasible},
                        {"first_violation", fr.first_violation ? json(*fr.first_violation) : json(nullptr)},
                        {"margin_at_horizon", fr.margin_at_horizon},
                        {"min_strict_margin", finite_or_null(fr.min_strict_margin)},
                        {"verified_up_to", fr.verified_up_to},
                        {"analytic_tail", fr.analytic_tail}};
    return j;
}

Schedule make_schedule(const RunConfig& cfg, const PrimalDualProblem& pd, bool want_certificate) {
    if (cfg.schedule.kind == "constant") {
        const auto& sp = cfg.schedule;
        return build_constant_schedule(sp.lambda, sp.beta, sp.alpha, sp.sigma, pd.mu(), pd.eta());
    }
    const PowerLawFamily f = cfg.schedule.kind == "default" ? default_family(pd.mu()) : cfg.schedule.family;
    return build_power_law_schedule(f, pd.mu(), pd.eta(), want_certificate);
}

long scan_horizon(const Schedule& s, const StoppingRule& stop) {
    return std::min(s.n0() + std::max<long>(stop.max_iter, 1), s.n0() + kScheduleIndexCap);
}

void write_summary(const std::string& path, const json& summary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write summary file '" + path + "'");
    out << summary.dump(2) << '\n';
    if (!out) throw IoError("error while writing summary file '" + path + "'");
}

struct Prepared {
    ProblemInstance inst;
    PrimalDualProblem pd;
    Schedule schedule;
    FeasibilityReport feasibility;
};

// Problem and schedule construction shared by run and validate. Returns an
// exit code other than OK when preparation fails.
int prepare(const RunConfig& cfg, Prepared& out, RunOutcome& res) {
    try {
        out.inst = build_instance(cfg);
        const auto& mp = out.inst.minimization();
        if (cfg.solver == SolverKind::fbf && !mp.blocks.empty()) {
            throw ConfigError("/solver", "fbf cannot handle composite blocks; use primal_dual or minimization");
        }
        for (const auto* seed : {&cfg.x0, &cfg.x1}) {
            if (*seed && (*seed)->size() != mp.dim) {
                throw ConfigError("/seeds", "seed dimension does not match the problem dimension " +
                                                  std::to_string(mp.dim));
            }
        }
        out.pd = lower_problem(mp);
    } catch (const ConfigError& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
        json issues = json::array();
        for (const auto& i : e.issues()) issues.push_back({{"field", i.field}, {"message", i.message}});
        res.summary = {{"status", "config_error"}, {"exit_code", kExitConfig}, {"issues", issues}};
        return res.exit_code;
    } catch (const Error& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
        res.summary = {{"status", "config_error"},
                       {"exit_code", kExitConfig},
                       {"issues", json::array({{{"field", "/problem"}, {"message", e.what()}}})}};
        return res.exit_code;
    }
    const bool want_cert = cfg.certificate_horizon > 0 && out.inst.minimization().psi.kind == "half_sq_linmap";
    try {
        out.schedule = make_schedule(cfg, out.pd, want_cert);
        out.feasibility = check_feasibility(out.schedule, scan_horizon(out.schedule, cfg.stop));
        if (!out.feasibility.feasible && cfg.schedule.enforce) {
            throw InfeasibleSchedule("schedule violates the feasibility inequality at n = " +
                                     std::to_string(*out.feasibility.first_violation));
        }
    } catch (const InfeasibleSchedule& e) {
        res.exit_code = kExitInfeasible;
        res.message = e.what();
    } catch (const SummabilityError& e) {
        res.exit_code = kExitInfeasible;
        res.message = e.what();
    } catch (const InvalidInput& e) {
        res.exit_code = kExitConfig;
        res.message = e.what();
    }
    if (res.exit_code != kExitOk) {
        res.summary = {{"status", res.exit_code == kExitInfeasible ? "infeasible_schedule" : "config_error"},
                       {"exit_code", res.exit_code},
                       {"message", res.message}};
        if (res.exit_code == kExitConfig) {
            res.summary["issues"] = json::array({{{"field", "/schedule"}, {"message", res.message}}});
        }
    }
    return res.exit_code;
}

}  // namespace

RunOutcome validate_config(const RunConfig& cfg) {
    RunOutcome res;
    Prepared prep;
    if (prepare(cfg, prep, res) != kExitOk) return res;
    const auto& mp = prep.inst.minimization();
    const auto q = qualification_check(mp);
    res.summary = {{"status", "valid"},
                   {"exit_code", kExitOk},
                   {"instance_id", prep.inst.id},
                   {"solver", solver_name(cfg.solver)},
                   {"dim", mp.dim},
                   {"blocks", mp.blocks.size()},
                   {"composite_beta", prep.pd.beta},
                   {"schedule", schedule_json(prep.schedule, cfg.schedule, prep.feasibility)},
                   {"qualification",
                    {{"satisfied", q.satisfied}, {"circumstance", std::string(to_string(q.circumstance))}}}};
    res.message = "configuration valid";
    return res;
}

RunOutcome execute(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome res;
    Prepared prep;
    if (prepare(cfg, prep, res) != kExitOk) {
        if (!cfg.summary_path.empty()) {
            try {
                write_summary(cfg.summary_path, res.summary);
            } catch (const IoError&) {
            }
        }
        return res;
    }
    const auto& inst = prep.inst;
    const auto& mp = inst.minimization();
    const Schedule& s = prep.schedule;
    res.dual_blocks = cfg.solver == SolverKind::fbf ? 0 : mp.blocks.size();

    const Vector x0 = cfg.x0.value_or(Vector::Zero(mp.dim));
    const Vector x1 = cfg.x1.value_or(x0);
    RunOptions opt;
    opt.check_schedule = cfg.schedule.enforce;
    if (inst.oracle_solution) opt.reference = inst.oracle_solution;
    if (!inst.solution_vertices.empty()) {
        opt.distance = [&inst](const Vector& v) { return inst.distance_to_solution_set(v); };
    }

    RunResult primal;
    std::vector<ObjectiveRecord> objective;
    std::string status = "ok";
    try {
        switch (cfg.solver) {
            case SolverKind::fbf:
                primal = run(lower_to_inclusion(mp, false), s, x0, x1, cfg.stop, opt);
                break;
            case SolverKind::primal_dual:
                primal = pd_run(prep.pd, s, PdSeeds{x0, x1, {}, {}}, cfg.stop, opt).primal;
                break;
            case SolverKind::minimization: {
                auto mr = solve_min(mp, s, PdSeeds{x0, x1, {}, {}}, cfg.stop, opt);
                primal = std::move(mr.run.primal);
                objective = std::move(mr.objective_trace);
                break;
            }
        }
    } catch (const Divergence& e) {
        res.exit_code = kExitDiverged;
        res.message = e.what();
        res.trace = e.trace();
        status = "diverged";
    } catch (const InfeasibleSchedule& e) {
        res.exit_code = kExitInfeasible;
        res.message = e.what();
        status = "infeasible_schedule";
    }
    if (res.exit_code == kExitOk) res.trace = primal.trace;

    json summary = {{"status", status},
                    {"exit_code", res.exit_code},
                    {"instance_id", inst.id},
                    {"solver", solver_name(cfg.solver)},
                    {"dim", mp.dim},
                    {"blocks", mp.blocks.size()},
                    {"oracle_method", inst.oracle_method.empty() ? json(nullptr) : json(inst.oracle_method)},
                    {"schedule", schedule_json(s, cfg.schedule, prep.feasibility)}};
    if (!res.message.empty()) summary["message"] = res.message;

    const TraceRecord* last = res.trace.empty() ? nullptr : &res.trace.back();
    summary["iterations"] = last ? last->iteration : 0;
    summary["stop_reason"] = res.exit_code == kExitOk ? json(primal.stop_reason) : json(nullptr);
    summary["final_gap_norm"] = last ? finite_or_null(last->gap_norm) : json(nullptr);
    summary["final_step_norm"] = last ? finite_or_null(last->step_norm) : json(nullptr);
    summary["iterate_dist"] = last ? optional_json(last->iterate_dist) : json(nullptr);
    summary["ergodic_dist"] = last ? optional_json(last->ergodic_dist) : json(nullptr);
    summary["summability"] = json(nullptr);
    summary["psi_final"] = json(nullptr);
    summary["objective_final"] = json(nullptr);
    summary["fejer"] = json(nullptr);
    summary["vi_residual"] = json(nullptr);
    summary["certificate"] = json(nullptr);

    if (res.exit_code == kExitOk) {
        const long iters = primal.iterations;
        const auto inc = partial_sum_increments(primal.trace, iters / 10);
        summary["summability"] = {{"step_sq_sum", last ? last->step_sq_sum : 0.0},
                                  {"gap_sq_sum", last ? last->gap_sq_sum : 0.0},
                                  {"last_decade_step_sq_increment", inc.first},
                                  {"last_decade_gap_sq_increment", inc.second}};
        summary["psi_final"] = finite_or_null(mp.psi.value(primal.x_final));
        if (!objective.empty()) {
            summary["objective_final"] = {{"F_x", finite_or_null(objective.back().F_x)},
                                          {"F_z", finite_or_null(objective.back().F_z)},
                                          {"complete", mp.objective_complete()}};
        }
        if (cfg.fejer && opt.reference) {
            const auto f = fejer_diagnostic(primal.trace);
            summary["fejer"] = {{"excess_partial_sum", f.excess_partial_sum},
                                {"phi_limit_estimate", f.phi_limit_estimate},
                                {"tail_growth", f.tail_growth},
                                {"flagged", f.flagged}};
        }
        if (cfg.vi_residual_samples > 0) {
            try {
                const auto gs = graph_samples(inst, cfg.vi_residual_samples, 1);
                summary["vi_residual"] = {{"samples", gs.size()},
                                          {"x_final", finite_or_null(vi_residual(primal.x_final, gs))},
                                          {"z_final", finite_or_null(vi_residual(primal.z_final, gs))}};
                if (inst.oracle_solution) {
                    summary["vi_residual"]["oracle"] = finite_or_null(vi_residual(*inst.oracle_solution, gs));
                }
            } catch (const Error& e) {
                summary["vi_residual"] = {{"error", e.what()}};
            }
        }
    }
    if (cfg.certificate_horizon > 0) {
        if (mp.psi.kind == "half_sq_linmap" && mp.psi.L) {
            const LinearMap& L = *mp.psi.L;
            std::vector<Vector> samples = cfg.certificate_samples;
            if (samples.empty()) {
                for (Index i = 0; i < L.rows(); ++i) samples.push_back(L.matrix().row(i).transpose());
            }
            try {
                const auto c = penalty_certificate_quadratic(L, s, samples, cfg.certificate_horizon);
                summary["certificate"] = {{"horizon", cfg.certificate_horizon},
                                          {"samples", c.p_samples.size()},
                                          {"partial_sum", c.partial_sums.back()},
                                          {"lambda_over_beta_sum", c.lambda_over_beta_sum},
                                          {"decade_ratio", c.decade_ratio ? json(*c.decade_ratio) : json(nullptr)},
                                          {"verdict", std::string(to_string(c.verdict))},
                                          {"basis", c.basis}};
            } catch (const InvalidSample& e) {
                summary["certificate"] = {{"horizon", cfg.certificate_horizon}, {"error", e.what()}};
            }
        } else {
            summary["certificate"] = {{"horizon", cfg.certificate_horizon},
                                      {"verdict", "inconclusive"},
                                      {"basis", "penalty is not of the form 1/2 ||Lx||^2"}};
        }
    }
    const auto q = qualification_check(mp);
    summary["qualification"] = {{"satisfied", q.satisfied}, {"circumstance", std::string(to_string(q.circumstance))}};
    summary["wall_time_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    try {
        if (!cfg.trace_path.empty() && (res.exit_code == kExitOk || res.exit_code == kExitDiverged)) {
            write_trace_csv(cfg.trace_path, res.trace, res.dual_blocks);
        }
        if (!cfg.summary_path.empty()) write_summary(cfg.summary_path, summary);
    } catch (const IoError& e) {
        res.exit_code = kExitIo;
        res.message = e.what();
        summary["exit_code"] = kExitIo;
        summary["status"] = "io_error";
    }
    res.summary = std::move(summary);
    return res;
}

}  // namespace fbfp
