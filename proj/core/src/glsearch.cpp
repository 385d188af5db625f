#include "qdtl/glsearch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdtl {

StronglyBiasedOracle make_biased_oracle(BooleanFunction h, std::vector<double> bias) {
    h.validate();
    if (bias.size() != h.values.size()) {
        throw std::invalid_argument("make_biased_oracle: bias table must have 2^n entries");
    }
    double gamma = 0.0;
    for (double b : bias) {
        if (!(b >= 0.0 && b <= 1.0)) {
            throw std::invalid_argument("make_biased_oracle: bias values must lie in [0,1]");
        }
        gamma = std::max(gamma, b);
    }
    return StronglyBiasedOracle{std::move(h), std::move(bias), gamma};
}

StronglyBiasedOracle make_clean_oracle(BooleanFunction h) {
    std::vector<double> bias(h.values.size(), 0.0);
    return make_biased_oracle(std::move(h), std::move(bias));
}

OverlapTable::OverlapTable(const StronglyBiasedOracle& oracle) {
    std::vector<double> attenuated(oracle.h.values.size());
    for (std::size_t x = 0; x < attenuated.size(); ++x) {
        attenuated[x] = oracle.h.values[x] * (1.0 - 2.0 * oracle.bias[x]);
    }
    spectrum_.n = oracle.h.n;
    spectrum_.coeffs = wht_real(attenuated);
}

double biased_overlap(const StronglyBiasedOracle& oracle, const Prefix& p) {
    return OverlapTable(oracle).overlap(p);
}

namespace {

// Per-copy swap-test estimate of sigma^2 = (1 + W)/2: additive band eps/4 on
// the sigma^2 scale (eps/2 on W) with MAE success probability, junk otherwise.
double per_copy_sigma_estimate(double sigma_sq, double eps, Rng& rng,
                               const EmulationConfig& cfg) {
    if (rng.bernoulli(kMaeSuccess)) {
        return std::clamp(sigma_sq + rng.uniform(-eps / 4.0, eps / 4.0), 0.0, 1.0);
    }
    if (cfg.failure_mode == FailureMode::Adversarial) {
        return sigma_sq < 0.5 ? 1.0 : 0.0;
    }
    return rng.uniform();
}

double median_in_place(std::vector<double>& values) {
    auto mid = values.begin() + values.size() / 2;
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

int majority_copies(double delta_prime) {
    return odd_copies(6.0 * std::log(1.0 / delta_prime));
}

}  // namespace

EstimateReport estimate_pw(const StronglyBiasedOracle& oracle, const Prefix& p, double eps,
                           double delta_prime, Rng& rng, QueryLedger& ledger,
                           const EmulationConfig& cfg) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("estimate_pw: eps must lie in (0,1)");
    }
    if (!(delta_prime > 0.0 && delta_prime < 0.5)) {
        throw std::invalid_argument("estimate_pw: delta' must lie in (0,1/2)");
    }
    double sigma_sq = 0.5 + 0.5 * biased_overlap(oracle, p);
    int copies = majority_copies(delta_prime);

    std::vector<double> estimates(copies);
    for (int c = 0; c < copies; ++c) {
        estimates[c] = per_copy_sigma_estimate(sigma_sq, eps, rng, cfg);
    }
    std::uint64_t charge =
        static_cast<std::uint64_t>(copies) * mae_cost(eps / 2.0) * oracle.qaex_cost_per_query;
    ledger.charge(tags::kMae, charge);

    EstimateReport report;
    report.value = median_in_place(estimates);
    report.error_kind = ErrorKind::Additive;
    report.error_bound = eps / 4.0;  // on the sigma^2 scale; eps/2 on W
    report.confidence = 1.0 - delta_prime;
    report.queries_charged = charge;
    return report;
}

GlOutcome qgl(const StronglyBiasedOracle& oracle, int n, double tau, double eps, double delta,
              Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg,
              std::vector<GlLevelTrace>* trace) {
    if (n != oracle.h.n) {
        throw std::invalid_argument("qgl: n must match the oracle's bit-width");
    }
    if (!(tau > 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("qgl: tau must lie in (0,1]");
    }
    if (!(eps > 0.0 && eps < tau)) {
        throw std::invalid_argument("qgl: eps must lie in (0,tau)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument("qgl: delta must lie in (0,1)");
    }

    std::uint64_t charged_before = ledger.total();
    double delta_prime = delta * tau * tau / (8.0 * n);
    int copies = majority_copies(delta_prime);
    double threshold = 0.5 + 0.5 * (tau - eps);
    std::uint64_t estimate_charge =
        static_cast<std::uint64_t>(copies) * mae_cost(eps / 2.0) * oracle.qaex_cost_per_query;

    OverlapTable table(oracle);

    // First level with at least 1/tau^2 nodes, kept below n so that at least
    // one filtering transition always runs.
    int first_level = 0;
    while (first_level < n - 1 && std::ldexp(1.0, first_level) * tau * tau < 1.0) {
        ++first_level;
    }

    std::vector<std::uint32_t> live(std::size_t(1) << first_level);
    for (std::uint32_t i = 0; i < live.size(); ++i) live[i] = i;

    int restarts_left = 3;
    int level = first_level;
    std::vector<std::uint32_t> marked;
    while (level < n) {
        // One superposed estimation pass covers every live child.
        marked.clear();
        for (std::uint32_t prefix_bits : live) {
            for (std::uint32_t b = 0; b < 2; ++b) {
                std::uint32_t child = (prefix_bits << 1) | b;
                double sigma_sq = 0.5 + 0.5 * table.overlap(Prefix{child, level + 1});
                std::vector<double> estimates(copies);
                for (int c = 0; c < copies; ++c) {
                    estimates[c] = per_copy_sigma_estimate(sigma_sq, eps, rng, cfg);
                }
                if (median_in_place(estimates) >= threshold) marked.push_back(child);
            }
        }
        ledger.charge(tags::kMae, estimate_charge);

        double floor = 1.0 / (2.0 * static_cast<double>(live.size()));
        double p_good = static_cast<double>(marked.size()) / (2.0 * static_cast<double>(live.size()));
        // Each amplification round replays the level's marking circuit.
        std::uint64_t rounds = amplification_cost(p_good, floor);
        if (rounds > 1) ledger.charge(tags::kMae, (rounds - 1) * estimate_charge);
        bool amplified = emulate_amplification(p_good, floor, rng, ledger, cfg);

        if (trace != nullptr) {
            trace->push_back({level + 1, static_cast<int>(live.size()),
                              static_cast<int>(marked.size()), ledger.total() - charged_before});
        }

        if (!amplified) {
            if (level + 1 == n || restarts_left == 0) {
                return {0, 0, ledger.total() - charged_before};
            }
            --restarts_left;
            continue;  // redo this level
        }
        live = marked;
        ++level;
    }

    std::uint32_t pick = live[rng.uniform_below(live.size())];
    return {1, pick, ledger.total() - charged_before};
}

int igl_rounds(double eps) { return static_cast<int>(std::ceil(std::log2(1.0 / eps))) + 1; }

double igl_gap(double eps) { return (eps - std::ldexp(1.0, -igl_rounds(eps))) / 8.0; }

IglResult igl(const StronglyBiasedOracle& oracle, int n, double eps, double delta,
              double t_floor, Rng& rng, QueryLedger& ledger, const EmulationConfig& cfg,
              std::vector<GlLevelTrace>* trace) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("igl: eps must lie in (0,1)");
    }
    if (!(delta > 0.0 && delta < 0.5)) {
        throw std::invalid_argument("igl: delta must lie in (0,1/2)");
    }
    if (!(t_floor > 0.0 && t_floor <= 1.0)) {
        throw std::invalid_argument("igl: threshold floor must lie in (0,1]");
    }

    int k = igl_rounds(eps);
    double gap = igl_gap(eps);
    double tau = 0.5;

    IglResult result;
    for (int i = 1; i <= k; ++i) {
        if (tau <= gap) break;  // prefix search needs eps < tau
        GlOutcome outcome = qgl(oracle, n, tau, gap, delta / k, rng, ledger, cfg, trace);
        double step = std::ldexp(1.0, -(i + 1));
        if (outcome.l == 1) {
            result.mask = outcome.mask;
            result.found = true;
            tau += step;
        } else {
            tau -= step;
        }
        if (step < gap / 2.0 || tau <= t_floor) break;
    }
    return result;
}

}  // namespace qdtl
