#pragma once

#include <cstdint>
#include <vector>

#include "qdtl/ledger.hpp"
#include "qdtl/rng.hpp"

namespace qdtl {

// Per-trial success probability of multidistribution amplitude estimation.
inline constexpr double kMaeSuccess = 0.8105694691387022;  // 8 / pi^2

enum class ErrorKind { Relative, Additive };

enum class FailureMode {
    Uniform,      // failed estimates are uniform junk on the value range
    Adversarial,  // failed estimates land as far from the truth as possible
};

struct EmulationConfig {
    FailureMode failure_mode = FailureMode::Uniform;
    double amplification_residual = 1.0 / 128.0;  // failure mass above the floor
};

// What a contract-level subroutine hands back: the estimate plus the exact
// guarantee it was invoked under.
struct EstimateReport {
    double value = 0.0;
    ErrorKind error_kind = ErrorKind::Additive;
    double error_bound = 0.0;
    double confidence = 1.0;
    std::uint64_t queries_charged = 0;
};

// Relative-error amplitude estimation: with probability >= 1 - 2^-k the
// returned estimate satisfies |a - est| <= eps * a (uniform in that band);
// otherwise the failure mode decides. a = 0 is preserved exactly. Charges
// ceil(k/(eps sqrt(p)) * (1 + ln ln(1/p), guarded at >= 1)).
EstimateReport emulate_relative_estimate(double a, double eps, int k, double p, Rng& rng,
                                         QueryLedger& ledger,
                                         const EmulationConfig& cfg = {});

// Multidistribution amplitude estimation: independently per entry, with
// probability 8/pi^2 the estimate is within +-eps of the true amplitude;
// charges ceil(1/eps) once for the whole batch (the estimation runs in
// superposition over x).
std::vector<double> emulate_mae(const std::vector<double>& values, double eps, Rng& rng,
                                QueryLedger& ledger, const EmulationConfig& cfg = {});

// Single-value per-copy draw with MAE statistics; charges ceil(1/eps).
double emulate_mae_single(double value, double eps, Rng& rng, QueryLedger& ledger,
                          const EmulationConfig& cfg = {});

// Pr[Binomial(copies, p_success) wins a strict majority].
double majority_success_probability(double p_success, int copies);

// One ell-way majority vote outcome; failure probability is the exact
// binomial tail (<= exp(-2 ell (p - 1/2)^2) by Hoeffding).
bool majority_boost(double per_trial_success, int copies, Rng& rng);

// Amplitude amplification at contract level: succeeds with probability
// >= 1 - residual whenever p_good >= floor, charges ceil(sqrt(1/p_good))
// (ceil(sqrt(1/floor)) when there is nothing to amplify).
bool emulate_amplification(double p_good, double floor, Rng& rng, QueryLedger& ledger,
                           const EmulationConfig& cfg = {});

std::uint64_t relative_estimate_cost(double eps, int k, double p);
std::uint64_t mae_cost(double eps);
std::uint64_t amplification_cost(double p_good, double floor);

// ceil to the next odd integer >= 1; majority copies are always odd.
int odd_copies(double raw);

}  // namespace qdtl
