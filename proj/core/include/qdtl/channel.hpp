#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "qdtl/boolean.hpp"
#include "qdtl/ledger.hpp"
#include "qdtl/rng.hpp"

namespace qdtl {

// Joint distribution over (x, y): uniform marginal on x (the standing
// assumption everywhere in this artifact), per-x conditional label probability
// p1[x] = Pr[y = +1 | x]. Realizable, RCN and agnostic settings are all just
// different conditionals.
struct LabelChannel {
    int n = 0;
    std::vector<double> p1;

    std::uint32_t size() const { return 1u << n; }
    void validate() const;

    // E[y | x] = 2 p1[x] - 1; handy for exact correlation arithmetic.
    double mean_label(std::uint32_t x) const { return 2.0 * p1[x] - 1.0; }
};

// w : (x, y) -> [0,1], stored densely per label.
struct WeightFunction {
    std::vector<double> w_pos;  // w(x, +1)
    std::vector<double> w_neg;  // w(x, -1)

    double operator()(std::uint32_t x, int y) const { return y > 0 ? w_pos[x] : w_neg[x]; }
    void validate() const;

    // Conservative for h iff w(x, -h(x)) = 1 for all x (Def A.1).
    bool conservative_for(const std::function<int(std::uint32_t)>& h, std::uint32_t size) const;
};

LabelChannel make_realizable(const BooleanFunction& f);

// Labels of f flipped with uniform probability p < 1/2.
LabelChannel make_rcn(const BooleanFunction& f, double p);

// Per-instance flip probability eta[x].
LabelChannel make_agnostic(const BooleanFunction& f, const std::vector<double>& eta);

enum class AdversaryProfile {
    Random,       // flip a seeded uniform subset of inputs
    LargestLeaf,  // concentrate flips on inputs in the widest leaves first
};

// Deterministically corrupts a fraction of the inputs of a tree-labeled
// channel (eta = 1 on the chosen inputs). Both profiles are seeded.
LabelChannel make_adversarial(const DecisionTree& tree, int n, double flip_fraction,
                              AdversaryProfile profile, Rng& rng);

// One classical AEX draw; charges 1 to the ledger when given.
std::pair<std::uint32_t, int> sample_aex(const LabelChannel& channel, Rng& rng,
                                         QueryLedger* ledger = nullptr);

// Exact correlation E[h(x) y] = 2^-n sum_x h(x) (2 p1[x] - 1).
template <class Pred>
double correlation(const LabelChannel& channel, Pred&& h) {
    double sum = 0.0;
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        sum += static_cast<double>(h(x)) * channel.mean_label(x);
    }
    return sum / static_cast<double>(channel.size());
}

inline double correlation(const LabelChannel& channel, const BooleanFunction& f) {
    return correlation(channel, [&](std::uint32_t x) { return f(x); });
}

template <class Pred>
double error(const LabelChannel& channel, Pred&& h) {
    return (1.0 - correlation(channel, std::forward<Pred>(h))) / 2.0;
}

// Signed parity predictor sign * chi_mask.
struct Parity {
    std::uint32_t mask = 0;
    int sign = 1;

    int operator()(std::uint32_t x) const { return sign * parity_eval(mask, x); }
};

struct ParityCorrelation {
    std::uint32_t mask = 0;
    double value = 0.0;  // signed correlation of chi_mask
};

// Exhaustive max over all 2^n parities of cor(chi_S, D); tie-break smallest S.
// This is the brute-force oracle weak-learner acceptance is checked against.
ParityCorrelation optcor_parity(const LabelChannel& channel);

// f_B(x) = +1 iff p1[x] >= 1/2 (ties resolve to +1).
BooleanFunction bayes_predictor(const LabelChannel& channel);

// Exact relabeled channel D'_w: keep the label with probability (1+w)/2.
LabelChannel relabel(const LabelChannel& channel, const WeightFunction& w);

// Headered CSV "x,p1".
void write_channel_csv(std::ostream& out, const LabelChannel& channel);
LabelChannel read_channel_csv(std::istream& in);

}  // namespace qdtl
