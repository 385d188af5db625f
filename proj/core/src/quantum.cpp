#include "qdtl/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdtl {

namespace {

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

double failed_estimate(double truth, Rng& rng, const EmulationConfig& cfg) {
    if (cfg.failure_mode == FailureMode::Adversarial) {
        return truth < 0.5 ? 1.0 : 0.0;
    }
    return rng.uniform();
}

}  // namespace

std::uint64_t relative_estimate_cost(double eps, int k, double p) {
    double log_inv_p = std::log(1.0 / p);
    double guard = log_inv_p > 1.0 ? 1.0 + std::log(log_inv_p) : 1.0;
    return static_cast<std::uint64_t>(std::ceil(k / (eps * std::sqrt(p)) * guard));
}

std::uint64_t mae_cost(double eps) {
    return static_cast<std::uint64_t>(std::ceil(1.0 / eps));
}

std::uint64_t amplification_cost(double p_good, double floor) {
    double base = p_good > 0.0 ? p_good : floor;
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(1.0 / base)));
}

EstimateReport emulate_relative_estimate(double a, double eps, int k, double p, Rng& rng,
                                         QueryLedger& ledger, const EmulationConfig& cfg) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("emulate_relative_estimate: eps must lie in (0,1)");
    }
    if (k < 1) {
        throw std::invalid_argument("emulate_relative_estimate: k must be >= 1");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw std::invalid_argument("emulate_relative_estimate: floor p must lie in (0,1]");
    }
    if (!(a >= 0.0 && a <= 1.0)) {
        throw std::invalid_argument("emulate_relative_estimate: amplitude must lie in [0,1]");
    }

    EstimateReport report;
    report.error_kind = ErrorKind::Relative;
    report.error_bound = eps;
    report.confidence = 1.0 - std::ldexp(1.0, -k);
    report.queries_charged = relative_estimate_cost(eps, k, p);
    ledger.charge(tags::kRelativeEstimate, report.queries_charged);

    if (a == 0.0) {
        report.value = 0.0;  // zero amplitude never produces a phantom
        return report;
    }
    if (rng.bernoulli(report.confidence)) {
        report.value = clamp01(a * (1.0 + rng.uniform(-eps, eps)));
    } else {
        report.value = failed_estimate(a, rng, cfg);
    }
    return report;
}

std::vector<double> emulate_mae(const std::vector<double>& values, double eps, Rng& rng,
                                QueryLedger& ledger, const EmulationConfig& cfg) {
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("emulate_mae: eps must lie in (0,1]");
    }
    ledger.charge(tags::kMae, mae_cost(eps));
    std::vector<double> estimates(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (rng.bernoulli(kMaeSuccess)) {
            estimates[i] = clamp01(values[i] + rng.uniform(-eps, eps));
        } else {
            estimates[i] = failed_estimate(values[i], rng, cfg);
        }
    }
    return estimates;
}

double emulate_mae_single(double value, double eps, Rng& rng, QueryLedger& ledger,
                          const EmulationConfig& cfg) {
    if (!(eps > 0.0 && eps <= 1.0)) {
        throw std::invalid_argument("emulate_mae_single: eps must lie in (0,1]");
    }
    ledger.charge(tags::kMae, mae_cost(eps));
    if (rng.bernoulli(kMaeSuccess)) {
        return clamp01(value + rng.uniform(-eps, eps));
    }
    return failed_estimate(value, rng, cfg);
}

double majority_success_probability(double p_success, int copies) {
    // Exact binomial tail over the strict majority; copies stay small enough
    // that the multiplicative pmf recurrence is stable in long double.
    long double q = 1.0L - static_cast<long double>(p_success);
    long double pmf = std::pow(q, copies);  // Pr[0 successes]
    long double tail = 0.0L;
    int need = copies / 2 + 1;
    long double ratio = static_cast<long double>(p_success) / q;
    if (q == 0.0L) return 1.0;
    for (int j = 0; j <= copies; ++j) {
        if (j >= need) tail += pmf;
        pmf *= ratio * static_cast<long double>(copies - j) / static_cast<long double>(j + 1);
    }
    return static_cast<double>(std::min(1.0L, tail));
}

bool majority_boost(double per_trial_success, int copies, Rng& rng) {
    if (copies < 1 || copies % 2 == 0) {
        throw std::invalid_argument("majority_boost: copies must be odd and positive");
    }
    if (!(per_trial_success > 0.5 && per_trial_success <= 1.0)) {
        throw std::invalid_argument("majority_boost: per-trial success must exceed 1/2");
    }
    if (per_trial_success == 1.0) return true;
    return rng.bernoulli(majority_success_probability(per_trial_success, copies));
}

bool emulate_amplification(double p_good, double floor, Rng& rng, QueryLedger& ledger,
                           const EmulationConfig& cfg) {
    if (!(floor > 0.0 && floor <= 1.0)) {
        throw std::invalid_argument("emulate_amplification: floor must lie in (0,1]");
    }
    if (!(p_good >= 0.0 && p_good <= 1.0)) {
        throw std::invalid_argument("emulate_amplification: p_good must lie in [0,1]");
    }
    ledger.charge(tags::kAmplification, amplification_cost(p_good, floor));
    if (p_good == 0.0) return false;
    if (p_good == 1.0) return true;  // the state already is the good state
    return rng.bernoulli(1.0 - cfg.amplification_residual);
}

int odd_copies(double raw) {
    int copies = static_cast<int>(std::ceil(raw));
    if (copies < 1) copies = 1;
    if (copies % 2 == 0) ++copies;
    return copies;
}

}  // namespace qdtl
