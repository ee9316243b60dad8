#pragma once

#include <functional>
#include <optional>

namespace fbfp {

// lambda_n = c_lambda n^{-exp_lambda}, beta_n = c_beta n^{exp_beta},
// alpha_n = alpha_target (1 - 1/n) (or constant alpha_target).
struct PowerLawFamily {
    double c_lambda = 0.5;
    double exp_lambda = 0.9;
    double c_beta = 0.95;
    double exp_beta = 0.85;
    double alpha_target = 0.05;
    bool constant_alpha = false;
};

// Family used when a configuration does not name one. Tuned so that
// moderately conditioned problems with mu = 1 are feasible from n = 1.
PowerLawFamily default_family();
// The default constants with c_beta scaled by mu, so that the penalty part of
// the coupling is the same as for mu = 1. Without this a small mu pushes n0
// deep into the schedule where the steps are tiny. Shrinking c_lambda for a
// small eta was tried as well; starting later (n0 > 1) worked better there.
PowerLawFamily default_family(double mu);

// Largest t with 5a + 2s + (1 + 4a + 2s) t^2 <= 1 for s = (1 - 5a)/4.
double coupling_threshold(double alpha_target);

inline constexpr long kScheduleIndexCap = 1'000'000;

// Predetermined sequences (lambda_n, beta_n, alpha_n) for n >= 1, together
// with the constants entering the feasibility inequality
//   5a + 2s + (1 + 4a + 2s) t_n^2 <= 1,   t_n = lambda_n beta_n / mu + lambda_n / eta.
// mu or eta may be +inf, which removes the corresponding term.
class Schedule {
public:
    using Seq = std::function<double(long)>;

    struct Parts {
        Seq lambda;
        Seq beta;
        Seq alpha;
        double alpha_bar = 0.0;
        double sigma = 0.0;
        long n0 = 1;
        double mu = 1.0;
        double eta = 1.0;
        // Feasibility for all n >= n0 follows from the family's shape, not
        // just from a scan.
        bool analytic_tail = false;
        std::optional<PowerLawFamily> family;
    };

    Schedule() = default;
    explicit Schedule(Parts parts);

    double lambda(long n) const { return p_.lambda(n); }
    double beta(long n) const { return p_.beta(n); }
    double alpha(long n) const { return p_.alpha(n); }
    double alpha_bar() const { return p_.alpha_bar; }
    double sigma() const { return p_.sigma; }
    long n0() const { return p_.n0; }
    double mu() const { return p_.mu; }
    double eta() const { return p_.eta; }
    bool analytic_tail() const { return p_.analytic_tail; }
    const std::optional<PowerLawFamily>& family() const { return p_.family; }

    // lambda beta / mu + lambda / eta for the given values.
    double coupling(double lambda, double beta) const;
    double coupling(long n) const { return coupling(lambda(n), beta(n)); }
    double feasibility_lhs(long n) const;
    double feasibility_lhs(double lambda, double beta) const;

    // The same sequences with alpha_n forced to zero (alpha_bar = 0, sigma unchanged).
    Schedule without_inertia() const;

private:
    Parts p_;
};

// Builds the power-law schedule with sigma = (1 - 5 alpha)/4 and n0 the
// smallest index from which the feasibility inequality holds. Throws
// InvalidInput on bad constants, InfeasibleSchedule when no n0 <= 10^6
// exists, and SummabilityError when `require_penalty_summability` is set and
// sum lambda_n / beta_n diverges.
Schedule build_power_law_schedule(const PowerLawFamily& family, double mu, double eta,
                                  bool require_penalty_summability = false);

// Constant sequences; feasibility is scan-verified only.
Schedule build_constant_schedule(double lambda, double beta, double alpha, double sigma, double mu,
                                 double eta);

struct FeasibilityReport {
    bool feasible = false;
    std::optional<long> first_violation;
    double margin_at_horizon = 0.0;   // 1 - lhs at the horizon
    double min_strict_margin = 0.0;   // min over scanned n of 1 - t_n^2 - alpha_n
    long verified_up_to = 0;
    bool analytic_tail = false;       // feasibility beyond the horizon is certified
};

// Scans n in [n0, horizon] for violations of either 0 <= alpha_n <= alpha_bar
// or the feasibility inequality; also checks alpha_n is nondecreasing on
// [1, horizon]. Throws InvalidInput if horizon < n0.
FeasibilityReport check_feasibility(const Schedule& s, long horizon);

struct SummabilityReport {
    double partial_sum_lambda = 0.0;
    double partial_sum_lambda_sq = 0.0;
    double partial_sum_lambda_over_beta = 0.0;
};

// Sums over n = 1..horizon.
SummabilityReport summability_report(const Schedule& s, long horizon);

}  // namespace fbfp
