#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qdtl/glsearch.hpp"

using namespace qdtl;

namespace {

BooleanFunction random_function(int n, Rng& rng) {
    BooleanFunction f;
    f.n = n;
    f.values.resize(std::size_t(1) << n);
    for (auto& v : f.values) v = rng.sign();
    return f;
}

BooleanFunction parity_function(int n, std::uint32_t mask) {
    BooleanFunction f;
    f.n = n;
    f.values.resize(std::size_t(1) << n);
    for (std::uint32_t x = 0; x < f.size(); ++x) f.values[x] = parity_eval(mask, x);
    return f;
}

BooleanFunction and_function() {
    return BooleanFunction(2, {-1, -1, -1, 1});  // all four squared coefficients are 1/4
}

// Literal pair-sample expansion of the swap-test observable with a shared
// suffix register: prefix halves x1, z1 drawn independently, suffix x2
// shared, cross terms weighted by the good/bad label masses.
double overlap_by_enumeration(const StronglyBiasedOracle& oracle, const Prefix& p) {
    int n = oracle.h.n;
    int s = p.len;
    std::uint32_t prefix_count = 1u << s;
    std::uint32_t suffix_count = 1u << (n - s);
    double total = 0.0;
    for (std::uint32_t x1 = 0; x1 < prefix_count; ++x1) {
        for (std::uint32_t z1 = 0; z1 < prefix_count; ++z1) {
            int phase = parity_eval(p.bits, x1) * parity_eval(p.bits, z1);
            for (std::uint32_t x2 = 0; x2 < suffix_count; ++x2) {
                std::uint32_t x = (x1 << (n - s)) | x2;
                std::uint32_t z = (z1 << (n - s)) | x2;
                double bx = oracle.bias[x], bz = oracle.bias[z];
                double gx = 1.0 - bx, gz = 1.0 - bz;
                double agree = oracle.h(x) * oracle.h(z);
                double bracket = gx * gz * agree - bx * gz * agree - gx * bz * agree +
                                 bx * bz * agree;
                total += phase * bracket;
            }
        }
    }
    return total / (static_cast<double>(prefix_count) * prefix_count * suffix_count);
}

}  // namespace

TEST_CASE("biased_overlap: clean oracle reproduces prefix weights exactly") {
    Rng rng(1);
    for (int rep = 0; rep < 10; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform_below(9));  // up to n = 10
        BooleanFunction h = random_function(n, rng);
        StronglyBiasedOracle oracle = make_clean_oracle(h);
        FourierSpectrum spec = wht(h);
        for (int len = 0; len <= n; ++len) {
            std::uint32_t bits = static_cast<std::uint32_t>(rng.uniform_below(1u << len));
            Prefix p{bits, len};
            CHECK(std::abs(biased_overlap(oracle, p) - prefix_weight(spec, p)) < 1e-9);
        }
    }

    StronglyBiasedOracle clean = make_clean_oracle(and_function());
    CHECK(biased_overlap(clean, Prefix{}) == doctest::Approx(1.0));
}

TEST_CASE("biased_overlap: matches the literal expansion, bias bound 4 gamma") {
    Rng rng(2);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + static_cast<int>(rng.uniform_below(5));  // n <= 6 keeps the cube cheap
        BooleanFunction h = random_function(n, rng);
        double gamma_cap = rng.uniform(0.0, 0.5);
        std::vector<double> bias(h.values.size());
        for (auto& b : bias) b = rng.uniform(0.0, gamma_cap);
        StronglyBiasedOracle oracle = make_biased_oracle(h, bias);

        int len = static_cast<int>(rng.uniform_below(n + 1));
        Prefix p{static_cast<std::uint32_t>(rng.uniform_below(1u << len)), len};

        double fast = biased_overlap(oracle, p);
        CHECK(fast == doctest::Approx(overlap_by_enumeration(oracle, p)).epsilon(1e-10));
        CHECK(std::abs(fast - prefix_weight(wht(h), p)) <= 4.0 * oracle.gamma + 1e-12);
    }
}

TEST_CASE("estimate_pw examples and coverage") {
    Rng rng(3);
    QueryLedger ledger;
    BooleanFunction chi = parity_function(4, 0b1010);
    StronglyBiasedOracle clean = make_clean_oracle(chi);

    // Full weight under the true mask: sigma^2 near 1.
    EstimateReport at_mask = estimate_pw(clean, Prefix{0b1010, 4}, 0.1, 0.05, rng, ledger);
    CHECK(at_mask.value > 0.9);
    // Zero weight elsewhere: sigma^2 near 1/2.
    EstimateReport off_mask = estimate_pw(clean, Prefix{0b1011, 4}, 0.1, 0.05, rng, ledger);
    CHECK(std::abs(off_mask.value - 0.5) < 0.1);
    CHECK(at_mask.queries_charged == ledger.count(tags::kMae) - off_mask.queries_charged);

    // Band coverage of |2 sigma^2_est - 1 - PW| <= eps/2 + 4 gamma.
    BooleanFunction h = random_function(5, rng);
    std::vector<double> bias(h.values.size());
    for (auto& b : bias) b = rng.uniform(0.0, 0.02);
    StronglyBiasedOracle oracle = make_biased_oracle(h, bias);
    Prefix p{0b01, 2};
    double pw = prefix_weight(wht(h), p);
    const double eps = 0.2, delta_prime = 0.05;
    int misses = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        EstimateReport report = estimate_pw(oracle, p, eps, delta_prime, rng, ledger);
        double w_estimate = 2.0 * report.value - 1.0;
        if (std::abs(w_estimate - pw) > eps / 2.0 + 4.0 * oracle.gamma + 1e-12) ++misses;
        CHECK(report.confidence == doctest::Approx(1.0 - delta_prime));
    }
    double sigma = std::sqrt(delta_prime * (1.0 - delta_prime) / trials);
    CHECK(static_cast<double>(misses) / trials <= delta_prime + 3.0 * sigma);

    CHECK_THROWS_AS(estimate_pw(clean, Prefix{}, 0.0, 0.05, rng, ledger),
                    std::invalid_argument);
}

TEST_CASE("qgl finds a lone heavy parity and rejects flat spectra") {
    Rng rng(4);
    QueryLedger ledger;
    const std::uint32_t mask = 0b101101;
    StronglyBiasedOracle oracle = make_clean_oracle(parity_function(6, mask));

    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        GlOutcome outcome = qgl(oracle, 6, 0.9, 0.1, 0.1, rng, ledger);
        CHECK(outcome.queries > 0);
        if (outcome.l == 1) {
            CHECK(outcome.mask == mask);  // the only coefficient above tau - 2 eps
        } else {
            ++failures;  // allowed at rate delta
        }
    }
    CHECK(failures <= 5);

    // Flat spectrum (all squared coefficients 1/4) never reaches tau = 0.5.
    StronglyBiasedOracle flat = make_clean_oracle(and_function());
    int false_accepts = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        if (qgl(flat, 2, 0.5, 0.1, 0.1, rng, ledger).l == 1) ++false_accepts;
    }
    double sigma = std::sqrt(0.1 * 0.9 / trials);
    CHECK(false_accepts / static_cast<double>(trials) <= 0.1 + 3.0 * sigma);

    // At tau = 0.2 every mask qualifies: ih^2 = 1/4 >= tau - 2 eps.
    GlOutcome low = qgl(flat, 2, 0.2, 0.05, 0.1, rng, ledger);
    CHECK(low.l == 1);
    FourierSpectrum spec = wht(and_function());
    CHECK(spec.coeffs[low.mask] * spec.coeffs[low.mask] >= 0.2 - 0.05 - 1e-12);

    CHECK_THROWS_AS(qgl(flat, 2, 0.0, 0.05, 0.1, rng, ledger), std::invalid_argument);
    CHECK_THROWS_AS(qgl(flat, 2, 0.5, 0.6, 0.1, rng, ledger), std::invalid_argument);
}

TEST_CASE("qgl soundness on random trees with bias") {
    Rng rng(5);
    QueryLedger ledger;
    const double tau = 0.4, eps = 0.1, delta = 0.2;
    int violations = 0;
    const int trials = 60;
    for (int i = 0; i < trials; ++i) {
        Rng problem = rng.substream("problem", i);
        int t = (i % 2 == 0) ? 2 : 8;
        BooleanFunction h = tree_to_function(random_tree(6, t, problem), 6);
        std::vector<double> bias(h.values.size());
        for (auto& b : bias) b = problem.uniform(0.0, eps / 8.0);
        StronglyBiasedOracle oracle = make_biased_oracle(h, bias);
        FourierSpectrum spec = wht(h);

        Rng search = rng.substream("search", i);
        GlOutcome outcome = qgl(oracle, 6, tau, eps, delta, search, ledger);
        if (outcome.l == 1) {
            if (prefix_weight(spec, Prefix{outcome.mask, 6}) < tau - 2.0 * eps - 1e-12) {
                ++violations;
            }
        } else {
            double heaviest = 0.0;
            for (double c : spec.coeffs) heaviest = std::max(heaviest, c * c);
            if (heaviest >= tau) ++violations;
        }
    }
    double sigma = std::sqrt(delta * (1.0 - delta) / trials);
    CHECK(static_cast<double>(violations) / trials <= delta + 3.0 * sigma);
}

TEST_CASE("qgl trace: live set stays within the candidate bound") {
    Rng rng(6);
    QueryLedger ledger;
    for (int i = 0; i < 10; ++i) {
        Rng problem = rng.substream("tree", i);
        BooleanFunction h = tree_to_function(random_tree(8, 4, problem), 8);
        StronglyBiasedOracle oracle = make_clean_oracle(h);
        std::vector<GlLevelTrace> trace;
        double tau = 0.3;
        qgl(oracle, 8, tau, tau / 4.0, 0.1, rng, ledger, {}, &trace);
        CHECK(!trace.empty());
        for (const GlLevelTrace& row : trace) {
            CHECK(row.live <= static_cast<int>(2.0 / (tau * tau)) + 4);
            CHECK(row.marked <= 2 * row.live);
        }
    }
}

TEST_CASE("igl schedule arithmetic and threshold search") {
    CHECK(igl_rounds(0.25) == 3);
    CHECK(igl_gap(0.25) == doctest::Approx(1.0 / 64.0));
    CHECK(igl_gap(0.25) >= 0.25 / 16.0 - 1e-15);
    CHECK(igl_gap(0.25) <= 3.0 * 0.25 / 32.0 + 1e-15);
    // 8g + 2^-k = eps by construction.
    for (double eps : {0.3, 0.25, 0.17, 0.1, 0.05}) {
        CHECK(8.0 * igl_gap(eps) + std::ldexp(1.0, -igl_rounds(eps)) ==
              doctest::Approx(eps));
    }

    Rng rng(7);
    QueryLedger ledger;
    const std::uint32_t mask = 0b0110;
    StronglyBiasedOracle oracle = make_clean_oracle(parity_function(4, mask));
    for (int i = 0; i < 10; ++i) {
        IglResult result = igl(oracle, 4, 0.25, 0.1, 0.05, rng, ledger);
        CHECK(result.found);
        CHECK(result.mask == mask);
    }
}

TEST_CASE("igl lands within eps of the heaviest squared coefficient") {
    Rng rng(8);
    QueryLedger ledger;
    const double eps = 0.25, delta = 0.1;
    int violations = 0;
    const int trials = 100;
    for (int i = 0; i < trials; ++i) {
        Rng problem = rng.substream("problem", i);
        BooleanFunction h = tree_to_function(random_tree(6, 4, problem), 6);
        StronglyBiasedOracle oracle = make_clean_oracle(h);
        FourierSpectrum spec = wht(h);
        BestParity best = best_parity(spec);

        Rng search = rng.substream("search", i);
        IglResult result = igl(oracle, 6, eps, delta, 0.01, search, ledger);
        double found_weight =
            result.found ? spec.coeffs[result.mask] * spec.coeffs[result.mask] : 0.0;
        if (std::abs(found_weight - best.value * best.value) > eps + 1e-12) ++violations;
    }
    double sigma = std::sqrt(delta * (1.0 - delta) / trials);
    CHECK(static_cast<double>(violations) / trials <= delta + 3.0 * sigma);
}
