#pragma once

#include <cstdint>
#include <vector>

#include "qdtl/boolean.hpp"
#include "qdtl/channel.hpp"
#include "qdtl/glsearch.hpp"
#include "qdtl/ledger.hpp"
#include "qdtl/quantum.hpp"
#include "qdtl/rng.hpp"

namespace qdtl {

struct WeakLearnerResult {
    std::uint32_t mask = 0;
    int sign = 1;               // hypothesis is sign * chi_mask
    double achieved_cor = 0.0;  // exact correlation of the signed parity
    std::uint64_t queries = 0;

    Parity hypothesis() const { return Parity{mask, sign}; }
};

// Builds the biased label oracle O_h from the example oracle: per x, ell =
// odd ceil(6 ln(1/gamma_target)) independent amplitude estimations at
// accuracy mae_eps, each thresholded at amplitude 1/sqrt(2) (probability
// 1/2, i.e. the Bayes rule), followed by a majority vote. The intended h is
// the label the majority concentrates on, which coincides with the Bayes
// predictor whenever the conditional is at least mae_eps away from 1/2; the
// residual wrong-label mass per x is the exact binomial minority tail.
StronglyBiasedOracle build_oh(const LabelChannel& channel, double gamma_target, double mae_eps,
                              Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg = {});

// Agnostic weak parity learner: O_h construction + threshold bisection over
// the prefix search, then a sampled sign estimate. Guarantee (t-sparse
// concepts): achieved_cor >= (1/t) optcor - kappa with probability >= 1-delta.
WeakLearnerResult weak_agnostic_parity(const LabelChannel& channel, int t, double kappa,
                                       double delta, Rng& rng, QueryLedger& ledger,
                                       const EmulationConfig& cfg = {});

// Draws masks with probability f_hat(S)^2; one charged query per draw.
class FourierSampler {
  public:
    explicit FourierSampler(const BooleanFunction& f);

    std::uint32_t sample(Rng& rng, QueryLedger& ledger) const;

  private:
    std::vector<double> cdf_;
};

std::uint32_t fourier_sample(const BooleanFunction& f, Rng& rng, QueryLedger& ledger);

// Realizable weak learner: mode of ceil(1/eps^2) spectral samples (ties to
// the smallest mask), sign fixed from the same number of labeled draws.
WeakLearnerResult realizable_weak_parity(const BooleanFunction& f, double eps, Rng& rng,
                                         QueryLedger& ledger);

// Majority-vote wrapper that turns a random-classification-noise oracle into
// an effectively clean one: k = ceil(ln(1/delta) / (2 (1/2 - p)^2)) votes per
// dereferenced label, each charged.
class RcnMajorityOracle {
  public:
    RcnMajorityOracle(const BooleanFunction& f, double noise_rate, double delta);

    int query(std::uint32_t x, Rng& rng, QueryLedger& ledger) const;

    int votes() const { return votes_; }
    double per_label_error_bound() const { return delta_; }

    // Dereferences every input once; 2^n * k charged queries.
    BooleanFunction materialize(Rng& rng, QueryLedger& ledger) const;

  private:
    const BooleanFunction& f_;
    double noise_rate_;
    double delta_;
    int votes_;
};

}  // namespace qdtl
