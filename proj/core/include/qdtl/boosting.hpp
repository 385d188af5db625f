#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "qdtl/channel.hpp"
#include "qdtl/ledger.hpp"
#include "qdtl/quantum.hpp"
#include "qdtl/rng.hpp"

namespace qdtl {

// Piecewise surrogate loss driving the boosting schedule:
// phi(z) = 1 - z for z <= 0, e^-z for z > 0.
double potential(double z);

// Weighted sum of signed parities with a global contraction factor; the
// negated-prior branch multiplies global_scale instead of touching terms.
struct CombinedHypothesis {
    struct Term {
        double coeff = 0.0;      // carries the hypothesis sign
        std::uint32_t mask = 0;
    };

    std::vector<Term> terms;
    double global_scale = 1.0;

    double score(std::uint32_t x) const;
    int predict(std::uint32_t x) const;  // sign(score), sign(0) = +1

    void add(double coeff, const Parity& h);   // H += coeff * h
    void contract(double factor);              // H *= factor
};

// min{1, exp(-score(x) * y)}; conservative for sign(H) by construction.
double conservative_weight(const CombinedHypothesis& hypothesis, std::uint32_t x, int y);

// Dense weight table w(x, y) = min{1, exp(-score[x] * y)}.
WeightFunction weights_from_scores(const std::vector<double>& score);

// Closed-form margins over the channel: alpha = E_D[w y h] = cor(h, D'_w),
// beta = E_D[w y (-sign H)] = cor(-sign H, D'_w).
template <class Pred>
std::pair<double, double> exact_margins(const LabelChannel& channel,
                                        const std::vector<double>& score, Pred&& h) {
    double alpha = 0.0;
    double beta = 0.0;
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        double w_pos = std::min(1.0, std::exp(-score[x]));
        double w_neg = std::min(1.0, std::exp(score[x]));
        double hx = static_cast<double>(h(x));
        double anti = score[x] >= 0.0 ? -1.0 : 1.0;  // -sign(H), sign(0) = +1
        double pos_mass = channel.p1[x];
        alpha += hx * (pos_mass * w_pos - (1.0 - pos_mass) * w_neg);
        beta += anti * (pos_mass * w_pos - (1.0 - pos_mass) * w_neg);
    }
    double scale = 1.0 / static_cast<double>(channel.size());
    return {alpha * scale, beta * scale};
}

// Exact both sides of the per-iteration drop inequality:
// lhs = E[phi(y H)] - E[phi(y (H + gamma h))], rhs = gamma cor(h, D'_w) - gamma^2/2.
std::pair<double, double> potential_drop_check(const LabelChannel& channel,
                                               const CombinedHypothesis& hypothesis,
                                               const Parity& h, double gamma);

enum class BoostBranch { Add, Scale, Skip };

struct BoostIteration {
    int t = 0;
    double alpha = 0.0;          // margin used for branching (estimate or exact)
    double beta = 0.0;
    double alpha_exact = 0.0;    // enumerated expectations, for the trace
    double beta_exact = 0.0;
    BoostBranch branch = BoostBranch::Skip;
    double potential = 0.0;      // exact E_D[phi(y score)] after the update
    double exact_cor = 0.0;      // exact cor(sign H^t, D) after the update
    std::uint64_t queries = 0;   // cumulative charged queries
    bool estimates_in_band = true;
};

struct BoostTrace {
    std::vector<BoostIteration> iterations;

    void write_csv(std::ostream& out) const;
};

struct BoostResult {
    CombinedHypothesis hypothesis;   // best-on-training H^t_hat
    int best_iteration = 0;
    double best_selection_error = 1.0;
    BoostTrace trace;
};

// A weak learner invoked on the relabeled distribution; nullopt means the
// learner failed this round (the iteration is skipped and noted).
using WeakLearner =
    std::function<std::optional<Parity>(const LabelChannel&, Rng&, QueryLedger&)>;

struct BoostConfig {
    int max_iterations = 0;       // 0: ceil(9 / (eta eps)^2)
    double eta = 0.25;
    double eps = 0.2;
    double delta = 0.1;
    std::uint64_t margin_samples = 0;  // 0: exact margins (classical) /
                                       // ceil(200 ln(1/delta)/(eta eps)^2) (quantum)
    double estimate_eps = 0.0;         // 0: eta eps / 20
    bool early_stop = true;            // stop once the selection error hits zero
};

int default_iterations(double eta, double eps);
std::uint64_t default_margin_samples(double eta, double eps, double delta);

// Relabel -> weak-learn -> margin -> update, margins exact (margin_samples ==
// 0) or empirical over a fixed training draw; returns the iterate with the
// least training error.
BoostResult kk_boost_classical(const WeakLearner& weak, const LabelChannel& channel,
                               const BoostConfig& config, Rng& rng, QueryLedger& ledger);

// Same loop against the exact relabeled channel, with margins measured on a
// fresh margin_samples draw and passed through relative-error estimation
// (estimate_eps, confidence 1 - delta); estimation costs are charged.
BoostResult quantum_agnostic_boost(const WeakLearner& weak, const LabelChannel& channel,
                                   const BoostConfig& config, Rng& rng, QueryLedger& ledger,
                                   const EmulationConfig& emulation = {});

// "scale,<v>" header then "coefficient,mask" rows, mask as an n-bit string.
void write_hypothesis(std::ostream& out, const CombinedHypothesis& hypothesis, int n);
CombinedHypothesis read_hypothesis(std::istream& in);

}  // namespace qdtl
