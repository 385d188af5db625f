#include "qdtl/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace qdtl {

double potential(double z) { return z <= 0.0 ? 1.0 - z : std::exp(-z); }

double CombinedHypothesis::score(std::uint32_t x) const {
    double sum = 0.0;
    for (const Term& term : terms) {
        sum += term.coeff * parity_eval(term.mask, x);
    }
    return global_scale * sum;
}

int CombinedHypothesis::predict(std::uint32_t x) const { return score(x) >= 0.0 ? 1 : -1; }

void CombinedHypothesis::add(double coeff, const Parity& h) {
    // Terms are stored unscaled; fold the pending contraction into the new
    // coefficient so score() stays global_scale * sum.
    terms.push_back({coeff * h.sign / global_scale, h.mask});
}

void CombinedHypothesis::contract(double factor) {
    global_scale *= factor;
    if (global_scale != 0.0 && std::abs(global_scale) < 1e-12) {
        for (Term& term : terms) term.coeff *= global_scale;
        global_scale = 1.0;
    }
}

double conservative_weight(const CombinedHypothesis& hypothesis, std::uint32_t x, int y) {
    return std::min(1.0, std::exp(-hypothesis.score(x) * y));
}

WeightFunction weights_from_scores(const std::vector<double>& score) {
    WeightFunction w;
    w.w_pos.resize(score.size());
    w.w_neg.resize(score.size());
    for (std::size_t x = 0; x < score.size(); ++x) {
        w.w_pos[x] = std::min(1.0, std::exp(-score[x]));
        w.w_neg[x] = std::min(1.0, std::exp(score[x]));
    }
    return w;
}

std::pair<double, double> potential_drop_check(const LabelChannel& channel,
                                               const CombinedHypothesis& hypothesis,
                                               const Parity& h, double gamma) {
    double before = 0.0;
    double after = 0.0;
    std::vector<double> score(channel.size());
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        score[x] = hypothesis.score(x);
        double moved = score[x] + gamma * h(x);
        double pos = channel.p1[x];
        before += pos * potential(score[x]) + (1.0 - pos) * potential(-score[x]);
        after += pos * potential(moved) + (1.0 - pos) * potential(-moved);
    }
    double scale = 1.0 / static_cast<double>(channel.size());
    double lhs = (before - after) * scale;

    auto [alpha, beta] = exact_margins(channel, score, h);
    (void)beta;
    double rhs = gamma * alpha - gamma * gamma / 2.0;
    return {lhs, rhs};
}

int default_iterations(double eta, double eps) {
    return static_cast<int>(std::ceil(9.0 / (eta * eta * eps * eps)));
}

std::uint64_t default_margin_samples(double eta, double eps, double delta) {
    return static_cast<std::uint64_t>(
        std::ceil(200.0 * std::log(1.0 / delta) / (eta * eta * eps * eps)));
}

namespace {

// (x, y) sample multiset stored as per-input label counts.
struct SampleCounts {
    std::vector<std::uint64_t> pos;
    std::vector<std::uint64_t> neg;
    std::uint64_t total = 0;
};

SampleCounts draw_sample_counts(const LabelChannel& channel, std::uint64_t m, Rng& rng) {
    SampleCounts counts;
    counts.pos.assign(channel.size(), 0);
    counts.neg.assign(channel.size(), 0);
    counts.total = m;
    std::uint64_t remaining = m;
    for (std::uint32_t x = 0; x < channel.size() && remaining > 0; ++x) {
        std::uint64_t n_x;
        if (x + 1 == channel.size()) {
            n_x = remaining;
        } else {
            double p = 1.0 / static_cast<double>(channel.size() - x);
            std::binomial_distribution<std::uint64_t> dist(remaining, p);
            n_x = dist(rng.engine());
        }
        std::binomial_distribution<std::uint64_t> labels(n_x, channel.p1[x]);
        counts.pos[x] = labels(rng.engine());
        counts.neg[x] = n_x - counts.pos[x];
        remaining -= n_x;
    }
    return counts;
}

template <class Pred>
std::pair<double, double> sample_margins(const SampleCounts& counts, const WeightFunction& w,
                                         const std::vector<double>& score, Pred&& h) {
    double alpha = 0.0;
    double beta = 0.0;
    for (std::uint32_t x = 0; x < counts.pos.size(); ++x) {
        double contrib = static_cast<double>(counts.pos[x]) * w.w_pos[x] -
                         static_cast<double>(counts.neg[x]) * w.w_neg[x];
        double anti = score[x] >= 0.0 ? -1.0 : 1.0;
        alpha += static_cast<double>(h(x)) * contrib;
        beta += anti * contrib;
    }
    double scale = 1.0 / static_cast<double>(counts.total);
    return {alpha * scale, beta * scale};
}

double selection_error(const SampleCounts& counts, const std::vector<double>& score) {
    std::uint64_t wrong = 0;
    for (std::uint32_t x = 0; x < counts.pos.size(); ++x) {
        wrong += score[x] >= 0.0 ? counts.neg[x] : counts.pos[x];
    }
    return static_cast<double>(wrong) / static_cast<double>(counts.total);
}

double exact_error(const LabelChannel& channel, const std::vector<double>& score) {
    double cor = 0.0;
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        double pred = score[x] >= 0.0 ? 1.0 : -1.0;
        cor += pred * channel.mean_label(x);
    }
    cor /= static_cast<double>(channel.size());
    return (1.0 - cor) / 2.0;
}

double exact_potential(const LabelChannel& channel, const std::vector<double>& score) {
    double pot = 0.0;
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        pot += channel.p1[x] * potential(score[x]) +
               (1.0 - channel.p1[x]) * potential(-score[x]);
    }
    return pot / static_cast<double>(channel.size());
}

// Empirical channel induced by a relabeled sample multiset; unseen inputs
// fall back to an uninformative 1/2.
LabelChannel empirical_channel(int n, const std::vector<std::uint64_t>& pos,
                               const std::vector<std::uint64_t>& neg) {
    LabelChannel channel;
    channel.n = n;
    channel.p1.resize(pos.size());
    for (std::size_t x = 0; x < pos.size(); ++x) {
        std::uint64_t seen = pos[x] + neg[x];
        channel.p1[x] =
            seen == 0 ? 0.5 : static_cast<double>(pos[x]) / static_cast<double>(seen);
    }
    return channel;
}

struct LoopState {
    CombinedHypothesis hypothesis;
    std::vector<double> score;

    explicit LoopState(std::uint32_t size) : score(size, 0.0) {}

    void apply_add(double coeff, const Parity& h) {
        hypothesis.add(coeff, h);
        for (std::uint32_t x = 0; x < score.size(); ++x) {
            score[x] += coeff * h(x);
        }
    }

    void apply_contract(double factor) {
        hypothesis.contract(factor);
        for (double& s : score) s *= factor;
    }
};

// Shared branch rule: add on a strictly positive winning alpha, otherwise
// contract with beta clamped into [0,1] so (1 - beta) stays a contraction.
BoostBranch apply_update(LoopState& state, double alpha, double beta, const Parity& h) {
    if (alpha > beta && alpha > 0.0) {
        state.apply_add(alpha, h);
        return BoostBranch::Add;
    }
    state.apply_contract(1.0 - std::clamp(beta, 0.0, 1.0));
    return BoostBranch::Scale;
}

}  // namespace

BoostResult kk_boost_classical(const WeakLearner& weak, const LabelChannel& channel,
                               const BoostConfig& config, Rng& rng, QueryLedger& ledger) {
    int iterations = config.max_iterations > 0 ? config.max_iterations
                                               : default_iterations(config.eta, config.eps);
    LoopState state(channel.size());
    Rng learner_rng = rng.substream("weak-learner");
    Rng relabel_rng = rng.substream("relabel");

    bool sample_mode = config.margin_samples > 0;
    SampleCounts training;
    if (sample_mode) {
        Rng draw_rng = rng.substream("training-draw");
        training = draw_sample_counts(channel, config.margin_samples, draw_rng);
        ledger.charge(tags::kAex, config.margin_samples);
    }

    BoostResult result;
    result.best_selection_error = 2.0;
    // Replay log so the best iterate can be rebuilt exactly.
    std::vector<std::pair<BoostBranch, std::pair<double, Parity>>> ops;

    for (int t = 1; t <= iterations; ++t) {
        WeightFunction w = weights_from_scores(state.score);

        LabelChannel relabeled;
        if (sample_mode) {
            // Fresh relabeling of the fixed training set from its original labels.
            std::vector<std::uint64_t> pos(channel.size()), neg(channel.size());
            for (std::uint32_t x = 0; x < channel.size(); ++x) {
                double keep_pos = (1.0 + w.w_pos[x]) / 2.0;
                double flip_neg = (1.0 - w.w_neg[x]) / 2.0;
                std::binomial_distribution<std::uint64_t> keep(training.pos[x], keep_pos);
                std::binomial_distribution<std::uint64_t> flip(training.neg[x], flip_neg);
                std::uint64_t stay = keep(relabel_rng.engine());
                std::uint64_t flipped = flip(relabel_rng.engine());
                pos[x] = stay + flipped;
                neg[x] = (training.pos[x] - stay) + (training.neg[x] - flipped);
            }
            relabeled = empirical_channel(channel.n, pos, neg);
        } else {
            relabeled = relabel(channel, w);
        }

        BoostIteration row;
        row.t = t;

        std::optional<Parity> h = weak(relabeled, learner_rng, ledger);
        if (!h.has_value()) {
            row.branch = BoostBranch::Skip;
            row.potential = exact_potential(channel, state.score);
            row.exact_cor = 1.0 - 2.0 * exact_error(channel, state.score);
            row.queries = ledger.total();
            result.trace.iterations.push_back(row);
            ops.push_back({BoostBranch::Skip, {0.0, Parity{}}});
            continue;
        }

        auto [alpha_exact, beta_exact] = exact_margins(channel, state.score, *h);
        double alpha;
        double beta;
        if (sample_mode) {
            std::tie(alpha, beta) = sample_margins(training, w, state.score, *h);
        } else {
            alpha = alpha_exact;
            beta = beta_exact;
        }

        row.alpha = alpha;
        row.beta = beta;
        row.alpha_exact = alpha_exact;
        row.beta_exact = beta_exact;
        row.branch = apply_update(state, alpha, beta, *h);
        if (row.branch == BoostBranch::Add) {
            ops.push_back({BoostBranch::Add, {alpha, *h}});
        } else {
            ops.push_back({BoostBranch::Scale, {1.0 - std::clamp(beta, 0.0, 1.0), Parity{}}});
        }

        row.potential = exact_potential(channel, state.score);
        row.exact_cor = 1.0 - 2.0 * exact_error(channel, state.score);
        row.queries = ledger.total();
        result.trace.iterations.push_back(row);

        double err = sample_mode ? selection_error(training, state.score)
                                 : exact_error(channel, state.score);
        if (err < result.best_selection_error) {
            result.best_selection_error = err;
            result.best_iteration = t;
        }
        if (config.early_stop && err == 0.0) break;
    }

    // Rebuild H^t_hat from the op log.
    LoopState best(channel.size());
    for (int t = 0; t < result.best_iteration; ++t) {
        const auto& [branch, payload] = ops[t];
        if (branch == BoostBranch::Add) {
            best.apply_add(payload.first, payload.second);
        } else if (branch == BoostBranch::Scale) {
            best.apply_contract(payload.first);
        }
    }
    result.hypothesis = best.hypothesis;
    return result;
}

BoostResult quantum_agnostic_boost(const WeakLearner& weak, const LabelChannel& channel,
                                   const BoostConfig& config, Rng& rng, QueryLedger& ledger,
                                   const EmulationConfig& emulation) {
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
        throw std::invalid_argument("quantum_agnostic_boost: delta must lie in (0,1)");
    }
    int iterations = config.max_iterations > 0 ? config.max_iterations
                                               : default_iterations(config.eta, config.eps);
    std::uint64_t m = config.margin_samples > 0
                          ? config.margin_samples
                          : default_margin_samples(config.eta, config.eps, config.delta);
    double est_eps =
        config.estimate_eps > 0.0 ? config.estimate_eps : config.eta * config.eps / 20.0;
    int k = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / config.delta))));

    LoopState state(channel.size());
    Rng learner_rng = rng.substream("weak-learner");
    Rng margin_rng = rng.substream("margins");
    Rng estimate_rng = rng.substream("estimation-noise");

    // The training set measured from the example oracle at initialization;
    // it selects the returned iterate.
    Rng draw_rng = rng.substream("training-draw");
    SampleCounts training = draw_sample_counts(channel, m, draw_rng);
    ledger.charge(tags::kAex, m);

    BoostResult result;
    result.best_selection_error = 2.0;
    std::vector<std::pair<BoostBranch, std::pair<double, Parity>>> ops;

    for (int t = 1; t <= iterations; ++t) {
        WeightFunction w = weights_from_scores(state.score);
        LabelChannel relabeled = relabel(channel, w);  // the per-iteration example unitary

        BoostIteration row;
        row.t = t;

        std::optional<Parity> h = weak(relabeled, learner_rng, ledger);
        if (!h.has_value()) {
            row.branch = BoostBranch::Skip;
            row.potential = exact_potential(channel, state.score);
            row.exact_cor = 1.0 - 2.0 * exact_error(channel, state.score);
            row.queries = ledger.total();
            result.trace.iterations.push_back(row);
            ops.push_back({BoostBranch::Skip, {0.0, Parity{}}});
            continue;
        }

        std::tie(row.alpha_exact, row.beta_exact) = exact_margins(channel, state.score, *h);

        // Fresh sample draw for the margins, then relative-error estimation on
        // the magnitudes.
        SampleCounts margin_draw = draw_sample_counts(channel, m, margin_rng);
        auto [alpha_bar, beta_bar] = sample_margins(margin_draw, w, state.score, *h);
        EstimateReport alpha_report = emulate_relative_estimate(
            std::min(1.0, std::abs(alpha_bar)), est_eps, k, 1.0 / static_cast<double>(m),
            estimate_rng, ledger, emulation);
        EstimateReport beta_report = emulate_relative_estimate(
            std::min(1.0, std::abs(beta_bar)), est_eps, k, 1.0 / static_cast<double>(m),
            estimate_rng, ledger, emulation);
        double alpha = std::copysign(alpha_report.value, alpha_bar);
        double beta = std::copysign(beta_report.value, beta_bar);
        row.estimates_in_band =
            std::abs(alpha - alpha_bar) <= est_eps * std::abs(alpha_bar) + 1e-15 &&
            std::abs(beta - beta_bar) <= est_eps * std::abs(beta_bar) + 1e-15;

        row.alpha = alpha;
        row.beta = beta;
        row.branch = apply_update(state, alpha, beta, *h);
        if (row.branch == BoostBranch::Add) {
            ops.push_back({BoostBranch::Add, {alpha, *h}});
        } else {
            ops.push_back({BoostBranch::Scale, {1.0 - std::clamp(beta, 0.0, 1.0), Parity{}}});
        }

        row.potential = exact_potential(channel, state.score);
        row.exact_cor = 1.0 - 2.0 * exact_error(channel, state.score);
        row.queries = ledger.total();
        result.trace.iterations.push_back(row);

        double err = selection_error(training, state.score);
        if (err < result.best_selection_error) {
            result.best_selection_error = err;
            result.best_iteration = t;
        }
        if (config.early_stop && err == 0.0) break;
    }

    LoopState best(channel.size());
    for (int t = 0; t < result.best_iteration; ++t) {
        const auto& [branch, payload] = ops[t];
        if (branch == BoostBranch::Add) {
            best.apply_add(payload.first, payload.second);
        } else if (branch == BoostBranch::Scale) {
            best.apply_contract(payload.first);
        }
    }
    result.hypothesis = best.hypothesis;
    return result;
}

void BoostTrace::write_csv(std::ostream& out) const {
    out << "t,alpha,beta,alpha_exact,beta_exact,branch,potential,exact_cor,queries,est_in_band\n";
    char buf[256];
    for (const BoostIteration& row : iterations) {
        const char* branch = row.branch == BoostBranch::Add     ? "add"
                             : row.branch == BoostBranch::Scale ? "scale"
                                                                : "skip";
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%llu,%d\n",
                      row.t, row.alpha, row.beta, row.alpha_exact, row.beta_exact, branch,
                      row.potential, row.exact_cor,
                      static_cast<unsigned long long>(row.queries),
                      row.estimates_in_band ? 1 : 0);
        out << buf;
    }
}

void write_hypothesis(std::ostream& out, const CombinedHypothesis& hypothesis, int n) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "scale,%.17g\n", hypothesis.global_scale);
    out << buf << "coefficient,mask\n";
    for (const CombinedHypothesis::Term& term : hypothesis.terms) {
        std::snprintf(buf, sizeof(buf), "%.17g,", term.coeff);
        out << buf << mask_to_string(term.mask, n) << "\n";
    }
}

CombinedHypothesis read_hypothesis(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("scale,", 0) != 0) {
        throw std::invalid_argument("read_hypothesis: missing scale header");
    }
    CombinedHypothesis hypothesis;
    hypothesis.global_scale = std::stod(line.substr(6));
    if (!std::getline(in, line) || line != "coefficient,mask") {
        throw std::invalid_argument("read_hypothesis: missing column header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("read_hypothesis: malformed row");
        }
        CombinedHypothesis::Term term;
        term.coeff = std::stod(line.substr(0, comma));
        std::string mask = line.substr(comma + 1);
        term.mask = 0;
        for (char c : mask) {
            if (c != '0' && c != '1') {
                throw std::invalid_argument("read_hypothesis: mask must be a bit string");
            }
            term.mask = (term.mask << 1) | std::uint32_t(c - '0');
        }
        hypothesis.terms.push_back(term);
    }
    return hypothesis;
}

}  // namespace qdtl
