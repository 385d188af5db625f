#include "qdtl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace qdtl {

void LabelChannel::validate() const {
    if (n < 1 || n > kMaxBits) {
        throw std::invalid_argument("LabelChannel: n must be in [1, 20]");
    }
    if (p1.size() != (std::size_t(1) << n)) {
        throw std::invalid_argument("LabelChannel: conditional table must have 2^n entries");
    }
    for (double p : p1) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("LabelChannel: conditionals must lie in [0,1]");
        }
    }
}

void WeightFunction::validate() const {
    if (w_pos.size() != w_neg.size()) {
        throw std::invalid_argument("WeightFunction: tables must have equal length");
    }
    for (std::size_t i = 0; i < w_pos.size(); ++i) {
        if (!(w_pos[i] >= 0.0 && w_pos[i] <= 1.0) || !(w_neg[i] >= 0.0 && w_neg[i] <= 1.0)) {
            throw std::invalid_argument("WeightFunction: weights must lie in [0,1]");
        }
    }
}

bool WeightFunction::conservative_for(const std::function<int(std::uint32_t)>& h,
                                      std::uint32_t size) const {
    for (std::uint32_t x = 0; x < size; ++x) {
        double w = (h(x) > 0) ? w_neg[x] : w_pos[x];
        if (w != 1.0) return false;
    }
    return true;
}

LabelChannel make_realizable(const BooleanFunction& f) {
    LabelChannel channel;
    channel.n = f.n;
    channel.p1.resize(f.size());
    for (std::uint32_t x = 0; x < f.size(); ++x) {
        channel.p1[x] = f(x) > 0 ? 1.0 : 0.0;
    }
    return channel;
}

LabelChannel make_rcn(const BooleanFunction& f, double p) {
    if (!(p >= 0.0 && p < 0.5)) {
        throw std::invalid_argument("make_rcn: flip rate must lie in [0, 1/2)");
    }
    LabelChannel channel;
    channel.n = f.n;
    channel.p1.resize(f.size());
    for (std::uint32_t x = 0; x < f.size(); ++x) {
        channel.p1[x] = f(x) > 0 ? 1.0 - p : p;
    }
    return channel;
}

LabelChannel make_agnostic(const BooleanFunction& f, const std::vector<double>& eta) {
    if (eta.size() != f.values.size()) {
        throw std::invalid_argument("make_agnostic: eta must have 2^n entries");
    }
    LabelChannel channel;
    channel.n = f.n;
    channel.p1.resize(f.size());
    for (std::uint32_t x = 0; x < f.size(); ++x) {
        if (!(eta[x] >= 0.0 && eta[x] <= 1.0)) {
            throw std::invalid_argument("make_agnostic: flip probabilities must lie in [0,1]");
        }
        double clean = f(x) > 0 ? 1.0 : 0.0;
        channel.p1[x] = clean * (1.0 - eta[x]) + (1.0 - clean) * eta[x];
    }
    return channel;
}

LabelChannel make_adversarial(const DecisionTree& tree, int n, double flip_fraction,
                              AdversaryProfile profile, Rng& rng) {
    if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) {
        throw std::invalid_argument("make_adversarial: fraction must lie in [0,1]");
    }
    BooleanFunction f = tree_to_function(tree, n);
    std::uint32_t size = f.size();
    auto flips = static_cast<std::uint32_t>(std::ceil(flip_fraction * size));
    flips = std::min(flips, size);

    std::vector<std::uint32_t> order(size);
    std::iota(order.begin(), order.end(), 0u);
    if (profile == AdversaryProfile::Random) {
        for (std::uint32_t i = size; i > 1; --i) {
            std::uint32_t j = static_cast<std::uint32_t>(rng.uniform_below(i));
            std::swap(order[i - 1], order[j]);
        }
    } else {
        // Inputs landing in wide leaves carry the most correlation mass per
        // flip; sort by leaf width (descending), index as the tie-break.
        std::vector<std::uint32_t> leaf_of(size);
        std::vector<std::uint32_t> leaf_width(tree.nodes.size(), 0);
        for (std::uint32_t x = 0; x < size; ++x) {
            int idx = tree.root;
            while (tree.nodes[idx].var >= 0) {
                const DecisionTree::Node& node = tree.nodes[idx];
                std::uint32_t bit = 1u << (n - 1 - node.var);
                idx = (x & bit) ? node.right : node.left;
            }
            leaf_of[x] = static_cast<std::uint32_t>(idx);
            ++leaf_width[idx];
        }
        std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            return leaf_width[leaf_of[a]] > leaf_width[leaf_of[b]];
        });
    }

    std::vector<double> eta(size, 0.0);
    for (std::uint32_t i = 0; i < flips; ++i) eta[order[i]] = 1.0;
    return make_agnostic(f, eta);
}

std::pair<std::uint32_t, int> sample_aex(const LabelChannel& channel, Rng& rng,
                                         QueryLedger* ledger) {
    if (ledger != nullptr) ledger->charge(tags::kAex, 1);
    auto x = static_cast<std::uint32_t>(rng.uniform_below(channel.size()));
    int y = rng.bernoulli(channel.p1[x]) ? 1 : -1;
    return {x, y};
}

ParityCorrelation optcor_parity(const LabelChannel& channel) {
    // cor(chi_S, D) is the S-th WHT coefficient of the conditional mean table.
    std::vector<double> mean(channel.size());
    for (std::uint32_t x = 0; x < channel.size(); ++x) mean[x] = channel.mean_label(x);
    std::vector<double> coeffs = wht_real(mean);

    ParityCorrelation best{0, coeffs[0]};
    for (std::uint32_t s = 1; s < coeffs.size(); ++s) {
        if (coeffs[s] > best.value) {
            best.value = coeffs[s];
            best.mask = s;
        }
    }
    return best;
}

BooleanFunction bayes_predictor(const LabelChannel& channel) {
    BooleanFunction f;
    f.n = channel.n;
    f.values.resize(channel.size());
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        f.values[x] = channel.p1[x] >= 0.5 ? 1 : -1;
    }
    return f;
}

LabelChannel relabel(const LabelChannel& channel, const WeightFunction& w) {
    w.validate();
    if (w.w_pos.size() != channel.p1.size()) {
        throw std::invalid_argument("relabel: weight table must have 2^n entries");
    }
    LabelChannel out;
    out.n = channel.n;
    out.p1.resize(channel.size());
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        double keep_pos = (1.0 + w.w_pos[x]) / 2.0;  // y=+1 stays +1
        double flip_neg = (1.0 - w.w_neg[x]) / 2.0;  // y=-1 becomes +1
        out.p1[x] = channel.p1[x] * keep_pos + (1.0 - channel.p1[x]) * flip_neg;
    }
    return out;
}

void write_channel_csv(std::ostream& out, const LabelChannel& channel) {
    out << "x,p1\n";
    char buf[40];
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        std::snprintf(buf, sizeof(buf), "%.17g", channel.p1[x]);
        out << x << "," << buf << "\n";
    }
}

LabelChannel read_channel_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "x,p1") {
        throw std::invalid_argument("read_channel_csv: missing header");
    }
    std::vector<double> p1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos || std::stoul(line.substr(0, comma)) != p1.size()) {
            throw std::invalid_argument("read_channel_csv: malformed row");
        }
        p1.push_back(std::stod(line.substr(comma + 1)));
    }
    LabelChannel channel;
    channel.n = 0;
    while ((std::size_t(1) << channel.n) < p1.size()) ++channel.n;
    channel.p1 = std::move(p1);
    channel.validate();
    return channel;
}

}  // namespace qdtl
