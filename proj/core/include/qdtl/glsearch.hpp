#pragma once

#include <cstdint>
#include <vector>

#include "qdtl/boolean.hpp"
#include "qdtl/ledger.hpp"
#include "qdtl/quantum.hpp"
#include "qdtl/rng.hpp"

namespace qdtl {

// Label oracle for an intended predictor h that returns the wrong label with
// an instance-dependent probability bias[x] (the wrong-label amplitude mass
// eta^2_{x,b}). gamma = max_x bias[x]; the prefix-search analysis assumes
// gamma <= eps/8.
struct StronglyBiasedOracle {
    BooleanFunction h;
    std::vector<double> bias;
    double gamma = 0.0;
    // Example-oracle invocations consumed per query of this oracle; wrapper
    // oracles built from estimation pipelines cost more than bare ones.
    std::uint64_t qaex_cost_per_query = 1;
};

StronglyBiasedOracle make_biased_oracle(BooleanFunction h, std::vector<double> bias);
StronglyBiasedOracle make_clean_oracle(BooleanFunction h);

// Exact ground truth of the swap-test observable for prefix p. Implemented via
// the attenuated predictor G(x) = h(x) (1 - 2 bias[x]): with a shared suffix
// register the pair-sample expectation collapses to the prefix weight of G, so
// W(p) = sum over masks extending p of G_hat(S)^2. Equals prefix_weight(wht(h), p)
// exactly when bias is identically zero, and |W - PW_h(p)| <= 4 gamma always.
double biased_overlap(const StronglyBiasedOracle& oracle, const Prefix& p);

// Precomputed spectrum of the attenuated predictor for repeated overlap
// queries (one transform per oracle instead of one per prefix).
class OverlapTable {
  public:
    explicit OverlapTable(const StronglyBiasedOracle& oracle);

    int n() const { return spectrum_.n; }
    double overlap(const Prefix& p) const { return prefix_weight(spectrum_, p); }

  private:
    FourierSpectrum spectrum_;
};

// Majority-cleaned estimate of sigma^2 = 1/2 + 1/2 W(p): ell = odd
// ceil(6 ln(1/delta_prime)) independent per-copy estimates, each within
// +-eps/4 of sigma^2 (i.e. +-eps/2 of W) with probability 8/pi^2, median
// taken. Total additive error against PW_h(p) is eps/2 + 4 gamma with
// probability >= 1 - delta_prime.
EstimateReport estimate_pw(const StronglyBiasedOracle& oracle, const Prefix& p, double eps,
                           double delta_prime, Rng& rng, QueryLedger& ledger,
                           const EmulationConfig& cfg = {});

struct GlOutcome {
    int l = 0;               // 1 iff a surviving leaf was measured
    std::uint32_t mask = 0;  // meaningful when l = 1
    std::uint64_t queries = 0;
};

struct GlLevelTrace {
    int level = 0;
    int live = 0;
    int marked = 0;
    std::uint64_t queries = 0;
};

// Level-ordered prefix search over the biased oracle. Starts with all
// prefixes live at the first level holding >= 1/tau^2 nodes, marks children
// whose majority-cleaned estimate reaches 1/2 + (tau - eps)/2, amplifies the
// marked set, and restarts a level (at most three times per call) when
// amplification fails. Outcome contract, each side with probability >= 1-delta:
//   l = 1  =>  PW_h(mask) >= tau - 2 eps      (marking threshold tau - eps
//              minus the eps/2 + 4 gamma estimation budget, gamma <= eps/8)
//   l = 0  =>  no S with PW_h(S) >= tau.
GlOutcome qgl(const StronglyBiasedOracle& oracle, int n, double tau, double eps, double delta,
              Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg = {},
              std::vector<GlLevelTrace>* trace = nullptr);

struct IglResult {
    std::uint32_t mask = 0;
    bool found = false;  // true iff some prefix-search call returned l = 1
};

// Bisection schedule: rounds k = ceil(log2(1/eps)) + 1 (the smallest k with
// 2^-k <= eps/2) and gap g = (eps - 2^-k)/8, so 8g + 2^-k = eps.
int igl_rounds(double eps);
double igl_gap(double eps);

// Threshold bisection: k = ceil(log2(1/eps)) + 1 rounds, gap
// g = (eps - 2^-k)/8, tau starts at 1/2 and moves up on success, down on
// failure; stops early once 2^-(i+1) < g/2 or tau <= t_floor. Returns the
// mask from the last successful prefix-search call.
IglResult igl(const StronglyBiasedOracle& oracle, int n, double eps, double delta,
              double t_floor, Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg = {},
              std::vector<GlLevelTrace>* trace = nullptr);

}  // namespace qdtl
