#include "qdtl/weak_learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qdtl {

namespace {

constexpr double kAmplitudeThreshold = 0.70710678118654752;  // 1/sqrt(2)

// Probability that one estimation copy emits label +1 at x: the estimate is
// uniform in the +-eps band around the true amplitude with MAE success
// probability, junk otherwise, and the copy thresholds at 1/sqrt(2).
double per_copy_positive_probability(double amplitude, double eps, const EmulationConfig& cfg) {
    double lo = std::max(0.0, amplitude - eps);
    double hi = std::min(1.0, amplitude + eps);
    double above;
    if (hi <= kAmplitudeThreshold) {
        above = 0.0;
    } else if (lo >= kAmplitudeThreshold) {
        above = 1.0;
    } else {
        above = (hi - kAmplitudeThreshold) / (hi - lo);
    }
    double junk_above = (cfg.failure_mode == FailureMode::Adversarial)
                            ? (amplitude > kAmplitudeThreshold ? 0.0 : 1.0)
                            : (1.0 - kAmplitudeThreshold);
    return kMaeSuccess * above + (1.0 - kMaeSuccess) * junk_above;
}

}  // namespace

StronglyBiasedOracle build_oh(const LabelChannel& channel, double gamma_target, double mae_eps,
                              Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg) {
    (void)rng;  // construction is exact; the oracle's randomness lives in its bias table
    if (!(gamma_target > 0.0 && gamma_target < 1.0)) {
        throw std::invalid_argument("build_oh: gamma_target must lie in (0,1)");
    }
    if (!(mae_eps > 0.0 && mae_eps < 1.0)) {
        throw std::invalid_argument("build_oh: mae accuracy must lie in (0,1)");
    }
    int copies = odd_copies(6.0 * std::log(1.0 / gamma_target));
    std::uint64_t cost_per_query = static_cast<std::uint64_t>(copies) * mae_cost(mae_eps);
    ledger.charge(tags::kMae, cost_per_query);  // the construction invocation

    BooleanFunction h;
    h.n = channel.n;
    h.values.resize(channel.size());
    std::vector<double> bias(channel.size());
    for (std::uint32_t x = 0; x < channel.size(); ++x) {
        double amplitude = std::sqrt(channel.p1[x]);
        double q = per_copy_positive_probability(amplitude, mae_eps, cfg);
        h.values[x] = q >= 0.5 ? 1 : -1;
        double p_correct = h.values[x] > 0 ? q : 1.0 - q;
        if (p_correct >= 1.0) {
            bias[x] = 0.0;
        } else if (p_correct <= 0.5) {
            bias[x] = 0.5;  // no concentration; the label is a coin toss
        } else {
            bias[x] = 1.0 - majority_success_probability(p_correct, copies);
        }
    }
    StronglyBiasedOracle oracle = make_biased_oracle(std::move(h), std::move(bias));
    // Every downstream query of O_h replays the full estimate-and-majority
    // pipeline against the example oracle.
    oracle.qaex_cost_per_query = cost_per_query;
    return oracle;
}

WeakLearnerResult weak_agnostic_parity(const LabelChannel& channel, int t, double kappa,
                                       double delta, Rng& rng, QueryLedger& ledger,
                                       const EmulationConfig& cfg) {
    if (t < 1) {
        throw std::invalid_argument("weak_agnostic_parity: t must be >= 1");
    }
    if (!(kappa > 0.0 && kappa < 0.5)) {
        throw std::invalid_argument("weak_agnostic_parity: kappa must lie in (0,1/2)");
    }
    if (!(delta > 0.0 && delta < 0.5)) {
        throw std::invalid_argument("weak_agnostic_parity: delta must lie in (0,1/2)");
    }
    std::uint64_t charged_before = ledger.total();
    int n = channel.n;

    double gamma_target =
        std::min(delta / (4.0 * n * static_cast<double>(t) * t), kappa * kappa / 8.0);
    Rng oracle_rng = rng.substream("oh");
    StronglyBiasedOracle oracle = build_oh(channel, gamma_target, kappa, oracle_rng, ledger, cfg);

    Rng search_rng = rng.substream("igl");
    IglResult found = igl(oracle, n, kappa, delta, 1.0 / t, search_rng, ledger, cfg);

    // The prefix search locates a heavy squared coefficient; the sign of the
    // parity's correlation is fixed from labeled samples.
    auto samples = static_cast<std::uint64_t>(std::ceil(8.0 * std::log(2.0 / delta) / (kappa * kappa)));
    Rng sign_rng = rng.substream("sign");
    double sum = 0.0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        auto [x, y] = sample_aex(channel, sign_rng, &ledger);
        sum += parity_eval(found.mask, x) * y;
    }

    WeakLearnerResult result;
    result.mask = found.mask;
    result.sign = sum >= 0.0 ? 1 : -1;
    result.achieved_cor = correlation(channel, result.hypothesis());
    result.queries = ledger.total() - charged_before;
    return result;
}

FourierSampler::FourierSampler(const BooleanFunction& f) {
    FourierSpectrum spec = wht(f);
    cdf_.resize(spec.coeffs.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < spec.coeffs.size(); ++s) {
        acc += spec.coeffs[s] * spec.coeffs[s];
        cdf_[s] = acc;
    }
    cdf_.back() = 1.0;  // Parseval, up to rounding
}

std::uint32_t FourierSampler::sample(Rng& rng, QueryLedger& ledger) const {
    ledger.charge(tags::kQex, 1);
    double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint32_t>(it - cdf_.begin());
}

std::uint32_t fourier_sample(const BooleanFunction& f, Rng& rng, QueryLedger& ledger) {
    return FourierSampler(f).sample(rng, ledger);
}

WeakLearnerResult realizable_weak_parity(const BooleanFunction& f, double eps, Rng& rng,
                                         QueryLedger& ledger) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("realizable_weak_parity: eps must lie in (0,1)");
    }
    std::uint64_t charged_before = ledger.total();
    auto draws = static_cast<std::uint64_t>(std::ceil(1.0 / (eps * eps)));

    FourierSampler sampler(f);
    std::map<std::uint32_t, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < draws; ++i) {
        ++counts[sampler.sample(rng, ledger)];
    }
    std::uint32_t mode = 0;
    std::uint64_t best = 0;
    for (const auto& [mask, count] : counts) {  // map order breaks ties low
        if (count > best) {
            best = count;
            mode = mask;
        }
    }

    // Sign from labeled draws of the (noiseless) example oracle.
    double sum = 0.0;
    for (std::uint64_t i = 0; i < draws; ++i) {
        auto x = static_cast<std::uint32_t>(rng.uniform_below(f.size()));
        ledger.charge(tags::kQex, 1);
        sum += parity_eval(mode, x) * f(x);
    }

    WeakLearnerResult result;
    result.mask = mode;
    result.sign = sum >= 0.0 ? 1 : -1;
    result.achieved_cor = correlation(make_realizable(f), result.hypothesis());
    result.queries = ledger.total() - charged_before;
    return result;
}

RcnMajorityOracle::RcnMajorityOracle(const BooleanFunction& f, double noise_rate, double delta)
    : f_(f), noise_rate_(noise_rate), delta_(delta) {
    if (!(noise_rate >= 0.0 && noise_rate < 0.5)) {
        throw std::invalid_argument("RcnMajorityOracle: noise rate must lie in [0,1/2)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("RcnMajorityOracle: delta must lie in (0,1)");
    }
    double advantage = 0.5 - noise_rate;
    votes_ = std::max(1, static_cast<int>(std::ceil(std::log(1.0 / delta) /
                                                    (2.0 * advantage * advantage))));
}

int RcnMajorityOracle::query(std::uint32_t x, Rng& rng, QueryLedger& ledger) const {
    ledger.charge(tags::kRcnMajority, static_cast<std::uint64_t>(votes_));
    int clean = f_(x);
    int agree = 0;
    for (int v = 0; v < votes_; ++v) {
        agree += rng.bernoulli(noise_rate_) ? -1 : 1;
    }
    return agree > 0 ? clean : -clean;  // even-vote ties count against us
}

BooleanFunction RcnMajorityOracle::materialize(Rng& rng, QueryLedger& ledger) const {
    BooleanFunction out;
    out.n = f_.n;
    out.values.resize(f_.size());
    for (std::uint32_t x = 0; x < f_.size(); ++x) {
        out.values[x] = query(x, rng, ledger);
    }
    return out;
}

}  // namespace qdtl
