#include "fbfp/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fbfp/errors.hpp"

namespace fbfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive_constant(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(what) + " must be finite and positive");
}

// mu/eta may be +inf (vanishing operator) but nothing else non-positive.
void require_modulus(double v, const char* what) {
    if (!(v > 0.0)) throw InvalidInput(std::string(what) + " must be positive (or +inf)");
}

}  // namespace

PowerLawFamily default_family() { return PowerLawFamily{}; }

PowerLawFamily default_family(double mu) {
    PowerLawFamily f;
    if (std::isfinite(mu)) f.c_beta *= mu;
    return f;
}

double coupling_threshold(double a) {
    if (!(a >= 0.0 && 5.0 * a < 1.0)) throw InvalidInput("coupling_threshold: need 0 <= alpha < 1/5");
    const double s = (1.0 - 5.0 * a) / 4.0;
    return std::sqrt((1.0 - 5.0 * a - 2.0 * s) / (1.0 + 4.0 * a + 2.0 * s));
}

Schedule::Schedule(Parts parts) : p_(std::move(parts)) {
    if (!p_.lambda || !p_.beta || !p_.alpha) throw InvalidInput("Schedule: missing sequence");
    require_modulus(p_.mu, "Schedule: mu");
    require_modulus(p_.eta, "Schedule: eta");
    if (p_.n0 < 1) throw InvalidInput("Schedule: n0 must be >= 1");
}

double Schedule::coupling(double lambda, double beta) const {
    double t = 0.0;
    if (p_.mu != kInf) t += lambda * beta / p_.mu;
    if (p_.eta != kInf) t += lambda / p_.eta;
    return t;
}

double Schedule::feasibility_lhs(double lambda, double beta) const {
    const double a = p_.alpha_bar, s = p_.sigma, t = coupling(lambda, beta);
    return 5.0 * a + 2.0 * s + (1.0 + 4.0 * a + 2.0 * s) * t * t;
}

double Schedule::feasibility_lhs(long n) const { return feasibility_lhs(lambda(n), beta(n)); }

Schedule Schedule::without_inertia() const {
    Parts q = p_;
    q.alpha = [](long) { return 0.0; };
    q.alpha_bar = 0.0;
    if (q.family) q.family->alpha_target = 0.0;
    return Schedule(std::move(q));
}

Schedule build_power_law_schedule(const PowerLawFamily& f, double mu, double eta, bool require_penalty_summability) {
    require_positive_constant(f.c_lambda, "c_lambda");
    require_positive_constant(f.c_beta, "c_beta");
    require_modulus(mu, "mu");
    require_modulus(eta, "eta");
    if (!(f.exp_lambda > 0.5 && f.exp_lambda <= 1.0)) throw InvalidInput("exp_lambda must lie in (1/2, 1]");
    if (!(f.exp_beta >= 0.0) || !std::isfinite(f.exp_beta)) throw InvalidInput("exp_beta must be >= 0");
    if (!(f.alpha_target >= 0.0)) throw InvalidInput("alpha_target must be >= 0");
    if (!(5.0 * f.alpha_target < 1.0)) {
        throw InfeasibleSchedule("alpha_target >= 1/5 leaves no room for sigma > 0 in the feasibility inequality");
    }
    if (require_penalty_summability && !(f.exp_lambda + f.exp_beta > 1.0)) {
        throw SummabilityError("sum lambda_n / beta_n diverges: need exp_lambda + exp_beta > 1");
    }

    Schedule::Parts p;
    p.lambda = [c = f.c_lambda, e = f.exp_lambda](long n) { return c * std::pow(static_cast<double>(n), -e); };
    p.beta = [c = f.c_beta, e = f.exp_beta](long n) { return c * std::pow(static_cast<double>(n), e); };
    if (f.constant_alpha) {
        p.alpha = [a = f.alpha_target](long) { return a; };
    } else {
        p.alpha = [a = f.alpha_target](long n) { return a * (1.0 - 1.0 / static_cast<double>(n)); };
    }
    p.alpha_bar = f.alpha_target;
    p.sigma = (1.0 - 5.0 * f.alpha_target) / 4.0;
    p.mu = mu;
    p.eta = eta;
    p.family = f;

    // Both terms of t_n are nonincreasing once exp_beta <= exp_lambda. A penalty
    // that outgrows the step makes t_n unbounded whenever B is present.
    const bool penalty_present = mu != kInf;
    if (penalty_present && f.exp_beta > f.exp_lambda) {
        throw InfeasibleSchedule("exp_beta > exp_lambda: lambda_n beta_n grows without bound, so the feasibility "
                                 "inequality fails for all large n");
    }
    p.analytic_tail = true;

    Schedule probe(p);
    long n0 = 0;
    for (long n = 1; n <= kScheduleIndexCap; ++n) {
        if (probe.feasibility_lhs(n) <= 1.0) {
            n0 = n;
            break;
        }
    }
    if (n0 == 0) {
        throw InfeasibleSchedule("no index n0 <= " + std::to_string(kScheduleIndexCap) +
                                 " satisfies the feasibility inequality");
    }
    p.n0 = n0;
    return Schedule(std::move(p));
}

Schedule build_constant_schedule(double lambda, double beta, double alpha, double sigma, double mu, double eta) {
    require_positive_constant(lambda, "lambda");
    require_positive_constant(beta, "beta");
    if (!(alpha >= 0.0)) throw InvalidInput("alpha must be >= 0");
    if (!(sigma > 0.0)) throw InvalidInput("sigma must be > 0");
    Schedule::Parts p;
    p.lambda = [lambda](long) { return lambda; };
    p.beta = [beta](long) { return beta; };
    p.alpha = [alpha](long) { return alpha; };
    p.alpha_bar = alpha;
    p.sigma = sigma;
    p.mu = mu;
    p.eta = eta;
    return Schedule(std::move(p));
}

FeasibilityReport check_feasibility(const Schedule& s, long horizon) {
    if (horizon < s.n0()) throw InvalidInput("check_feasibility: horizon must be >= n0");
    FeasibilityReport r;
    r.min_strict_margin = kInf;
    double prev_alpha = -kInf;
    for (long n = 1; n <= horizon; ++n) {
        const double a = s.alpha(n);
        const bool monotone_ok = a >= prev_alpha;
        prev_alpha = a;
        if (n < s.n0()) {
            if (!monotone_ok && !r.first_violation) r.first_violation = n;
            continue;
        }
        const double lam = s.lambda(n), bet = s.beta(n);
        const double t = s.coupling(lam, bet);
        const bool ok = monotone_ok && a >= 0.0 && a <= s.alpha_bar() && s.feasibility_lhs(lam, bet) <= 1.0;
        if (!ok && !r.first_violation) r.first_violation = n;
        r.min_strict_margin = std::min(r.min_strict_margin, 1.0 - t * t - a);
    }
    r.feasible = !r.first_violation.has_value();
    r.margin_at_horizon = 1.0 - s.feasibility_lhs(horizon);
    r.verified_up_to = horizon;
    r.analytic_tail = r.feasible && s.analytic_tail();
    return r;
}

SummabilityReport summability_report(const Schedule& s, long horizon) {
    if (horizon < 1) throw InvalidInput("summability_report: horizon must be >= 1");
    SummabilityReport r;
    for (long n = 1; n <= horizon; ++n) {
        const double lam = s.lambda(n);
        r.partial_sum_lambda += lam;
        r.partial_sum_lambda_sq += lam * lam;
        r.partial_sum_lambda_over_beta += lam / s.beta(n);
    }
    return r;
}

}  // namespace fbfp
