#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qdtl/quantum.hpp"

using namespace qdtl;

namespace {

double fit_loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= xs.size();
    my /= ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = std::log(xs[i]) - mx;
        sxy += dx * (std::log(ys[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("relative estimation: zero preserved, band respected, confidence met") {
    Rng rng(1);
    QueryLedger ledger;

    for (int i = 0; i < 100; ++i) {
        CHECK(emulate_relative_estimate(0.0, 0.1, 4, 0.01, rng, ledger).value == 0.0);
    }

    const double a = 0.5, eps = 0.1;
    const int k = 4;
    int outside = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        EstimateReport report = emulate_relative_estimate(a, eps, k, 0.01, rng, ledger);
        if (std::abs(report.value - a) > eps * a + 1e-15) ++outside;
        CHECK(report.confidence == doctest::Approx(1.0 - 1.0 / 16.0));
    }
    double failure = std::ldexp(1.0, -k);
    double sigma = std::sqrt(failure * (1.0 - failure) / trials);
    CHECK(static_cast<double>(outside) / trials <= failure + 3.0 * sigma);

    CHECK_THROWS_AS(emulate_relative_estimate(0.5, 0.0, 4, 0.01, rng, ledger),
                    std::invalid_argument);
    CHECK_THROWS_AS(emulate_relative_estimate(0.5, 0.1, 0, 0.01, rng, ledger),
                    std::invalid_argument);
    CHECK_THROWS_AS(emulate_relative_estimate(0.5, 0.1, 4, 0.0, rng, ledger),
                    std::invalid_argument);
}

TEST_CASE("relative estimation cost: 1/eps slope and the log log guard") {
    // Guard pins the (1 + ln ln(1/p)) factor at >= 1; p = 1 must stay finite.
    CHECK(relative_estimate_cost(0.5, 1, 1.0) == 2);
    CHECK(relative_estimate_cost(0.1, 4, 0.5) == 57);  // ln ln(2) < 0, guard active

    std::vector<double> inv_eps, costs;
    for (int e = 1; e <= 7; ++e) {
        double eps = std::ldexp(1.0, -e);
        inv_eps.push_back(1.0 / eps);
        costs.push_back(static_cast<double>(relative_estimate_cost(eps, 4, 1e-4)));
    }
    double slope = fit_loglog_slope(inv_eps, costs);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("mae: per-entry success rate and charge semantics") {
    Rng rng(2);
    QueryLedger ledger;

    std::vector<double> zeros(8, 0.0);
    const double eps = 0.05;
    const int trials = 10000;
    int successes = 0;
    int entries = 0;
    for (int i = 0; i < trials / 8; ++i) {
        std::vector<double> est = emulate_mae(zeros, eps, rng, ledger);
        for (double v : est) {
            ++entries;
            if (v <= eps + 1e-15) ++successes;  // zero amplitude: the band is [0, eps]
        }
    }
    // Junk estimates land in [0, eps] with probability eps, so the in-band
    // rate approximates 8/pi^2 plus that sliver.
    double in_band = static_cast<double>(successes) / entries;
    double expected = kMaeSuccess + (1.0 - kMaeSuccess) * eps;
    CHECK(std::abs(in_band - expected) < 0.012);

    std::uint64_t before = ledger.total();
    emulate_mae(std::vector<double>(1024, 0.5), 0.25, rng, ledger);
    CHECK(ledger.total() - before == 4);  // charged once, not per entry

    CHECK_NOTHROW(emulate_mae(zeros, 1.0, rng, ledger));  // vacuous contract allowed
    CHECK_THROWS_AS(emulate_mae(zeros, 0.0, rng, ledger), std::invalid_argument);
}

TEST_CASE("majority vote amplifies per-copy success") {
    Rng rng(3);
    CHECK(majority_boost(1.0, 5, rng));
    CHECK_THROWS_AS(majority_boost(0.9, 4, rng), std::invalid_argument);
    CHECK_THROWS_AS(majority_boost(0.4, 5, rng), std::invalid_argument);

    // copies = 1 reduces to a single Bernoulli draw.
    int hits = 0;
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) hits += majority_boost(0.75, 1, rng) ? 1 : 0;
    CHECK(std::abs(hits / static_cast<double>(trials) - 0.75) < 0.01);

    int copies = odd_copies(6.0 * std::log(100.0));
    CHECK(copies == 29);
    int failures = 0;
    for (int i = 0; i < trials; ++i) failures += majority_boost(kMaeSuccess, copies, rng) ? 0 : 1;
    CHECK(static_cast<double>(failures) / trials <= 0.01);
    CHECK(1.0 - majority_success_probability(kMaeSuccess, copies) <=
          std::exp(-2.0 * copies * (kMaeSuccess - 0.5) * (kMaeSuccess - 0.5)));
}

TEST_CASE("amplification: edge cases, residual, cost scaling") {
    Rng rng(4);
    QueryLedger ledger;

    CHECK(emulate_amplification(1.0, 0.5, rng, ledger));
    CHECK(ledger.count(tags::kAmplification) == 1);

    CHECK_FALSE(emulate_amplification(0.0, 1.0 / 64.0, rng, ledger));
    CHECK(ledger.count(tags::kAmplification) == 9);  // + ceil(sqrt(64))

    std::uint64_t before = ledger.total();
    emulate_amplification(1.0 / 64.0, 1.0 / 64.0, rng, ledger);
    CHECK(ledger.total() - before == 8);

    int successes = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        successes += emulate_amplification(0.25, 0.25, rng, ledger) ? 1 : 0;
    }
    double residual = 1.0 / 128.0;
    double sigma = std::sqrt(residual * (1.0 - residual) / trials);
    CHECK(successes >= trials * (1.0 - residual - 3.0 * sigma));

    std::vector<double> inv_sqrt_p, costs;
    for (int e = 2; e <= 12; e += 2) {
        double p = std::ldexp(1.0, -e);
        inv_sqrt_p.push_back(1.0 / std::sqrt(p));
        costs.push_back(static_cast<double>(amplification_cost(p, p)));
    }
    CHECK(fit_loglog_slope(inv_sqrt_p, costs) == doctest::Approx(1.0).epsilon(0.15));

    CHECK_THROWS_AS(emulate_amplification(0.5, 0.0, rng, ledger), std::invalid_argument);
}

TEST_CASE("ledger: per-tag charges, totals conserved") {
    Rng rng(5);
    QueryLedger ledger;
    emulate_relative_estimate(0.3, 0.2, 3, 0.1, rng, ledger);
    std::uint64_t after_relative = ledger.total();
    CHECK(after_relative == ledger.count(tags::kRelativeEstimate));

    emulate_mae(std::vector<double>(4, 0.2), 0.5, rng, ledger);
    CHECK(ledger.count(tags::kMae) == 2);
    CHECK(ledger.total() == after_relative + 2);

    std::uint64_t sum = 0;
    for (const auto& [tag, count] : ledger.counters()) sum += count;
    CHECK(sum == ledger.total());
}

TEST_CASE("adversarial failure mode lands far from the truth") {
    Rng rng(6);
    QueryLedger ledger;
    EmulationConfig adversarial{FailureMode::Adversarial, 1.0 / 128.0};

    int far = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        EstimateReport report =
            emulate_relative_estimate(0.1, 0.05, 1, 0.05, rng, ledger, adversarial);
        if (report.value == 1.0) ++far;  // the worst point for a = 0.1
    }
    // k = 1: failures occur with probability 1/2 and always at the far end.
    CHECK(std::abs(far / static_cast<double>(trials) - 0.5) < 0.02);
}
