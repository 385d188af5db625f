#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "qdtl/weak_learner.hpp"

using namespace qdtl;

namespace {

BooleanFunction parity_function(int n, std::uint32_t mask) {
    BooleanFunction f;
    f.n = n;
    f.values.resize(std::size_t(1) << n);
    for (std::uint32_t x = 0; x < f.size(); ++x) f.values[x] = parity_eval(mask, x);
    return f;
}

}  // namespace

TEST_CASE("build_oh recovers the labeling function on clean and noisy channels") {
    Rng rng(1);
    QueryLedger ledger;
    BooleanFunction f = tree_to_function(random_tree(6, 8, rng), 6);

    StronglyBiasedOracle oracle = build_oh(make_realizable(f), 1e-3, 0.1, rng, ledger);
    CHECK(oracle.h.values == f.values);
    CHECK(oracle.gamma <= 1e-3);
    CHECK(ledger.count(tags::kMae) > 0);

    LabelChannel single;
    single.n = 1;
    single.p1 = {0.9, 0.2};
    oracle = build_oh(single, 1e-2, 0.05, rng, ledger);
    CHECK(oracle.h.values == std::vector<int>{1, -1});

    // Residual wrong-label mass stays below gamma_target across seeded
    // margin-clear channels (rcn and deterministic flips).
    for (int rep = 0; rep < 300; ++rep) {
        Rng problem = rng.substream("problem", rep);
        BooleanFunction target = tree_to_function(random_tree(8, 4, problem), 8);
        LabelChannel channel;
        if (rep % 2 == 0) {
            channel = make_rcn(target, 0.05 + 0.25 * problem.uniform());
        } else {
            std::vector<double> eta(target.size(), 0.0);
            for (auto& e : eta) e = problem.bernoulli(0.1) ? 1.0 : 0.0;
            channel = make_agnostic(target, eta);
        }
        double gamma_target = 1e-3;
        StronglyBiasedOracle built = build_oh(channel, gamma_target, 0.1, problem, ledger);
        CHECK(built.h.values == bayes_predictor(channel).values);
        CHECK(built.gamma <= gamma_target);
    }

    CHECK_THROWS_AS(build_oh(single, 0.0, 0.1, rng, ledger), std::invalid_argument);
}

TEST_CASE("oracle predictor transfers to the Bayes predictor within 4 eps") {
    Rng rng(2);
    QueryLedger ledger;
    for (int rep = 0; rep < 50; ++rep) {
        LabelChannel channel;
        channel.n = 6;
        channel.p1.resize(64);
        for (auto& p : channel.p1) p = rng.uniform();
        double eps = rng.uniform(0.02, 0.2);
        StronglyBiasedOracle oracle = build_oh(channel, 1e-2, eps, rng, ledger);
        double cor_h = correlation(channel, oracle.h);
        double cor_bayes = correlation(channel, bayes_predictor(channel));
        CHECK(std::abs(cor_h - cor_bayes) <= 4.0 * eps + 1e-12);
    }
}

TEST_CASE("weak_agnostic_parity: exact parity, realizable trees, adversarial trees") {
    Rng rng(3);
    QueryLedger ledger;

    BooleanFunction chi = parity_function(6, 0b010011);
    WeakLearnerResult exact =
        weak_agnostic_parity(make_realizable(chi), 1, 0.1, 0.1, rng, ledger);
    CHECK(exact.mask == 0b010011);
    CHECK(exact.sign == 1);
    CHECK(exact.achieved_cor == doctest::Approx(1.0));
    CHECK(exact.queries > 0);

    const int trials = 60;
    const double kappa = 0.1, delta = 0.1;
    int realizable_misses = 0;
    int adversarial_misses = 0;
    for (int i = 0; i < trials; ++i) {
        Rng problem = rng.substream("problem", i);
        DecisionTree tree = random_tree(8, 4, problem);
        BooleanFunction target = tree_to_function(tree, 8);

        LabelChannel clean = make_realizable(target);
        Rng run_a = rng.substream("run-clean", i);
        WeakLearnerResult got = weak_agnostic_parity(clean, 4, kappa, delta, run_a, ledger);
        if (got.achieved_cor < 0.25 - kappa - 1e-12) ++realizable_misses;

        Rng noise = rng.substream("noise", i);
        LabelChannel noisy = make_adversarial(tree, 8, 0.1, AdversaryProfile::Random, noise);
        Rng run_b = rng.substream("run-noisy", i);
        WeakLearnerResult noisy_got =
            weak_agnostic_parity(noisy, 4, kappa, delta, run_b, ledger);
        double bound = 0.25 * correlation(noisy, target) - kappa;
        if (noisy_got.achieved_cor < bound - 1e-12) ++adversarial_misses;
    }
    double sigma = std::sqrt(delta * (1.0 - delta) / trials);
    CHECK(realizable_misses / static_cast<double>(trials) <= delta + 3.0 * sigma);
    CHECK(adversarial_misses / static_cast<double>(trials) <= delta + 3.0 * sigma);

    CHECK_THROWS_AS(weak_agnostic_parity(make_realizable(chi), 0, 0.1, 0.1, rng, ledger),
                    std::invalid_argument);
}

TEST_CASE("weak_agnostic_parity query accounting fits n/(eta kappa^3) log(1/kappa)") {
    Rng rng(4);
    std::vector<double> ratios;
    const int t = 4;  // the tau <= 1/t floor makes the cost nearly flat in t
    for (int n : {6, 8, 10}) {
        for (double kappa : {0.1, 0.2}) {
            double mean_queries = 0.0;
            const int reps = 5;
            for (int i = 0; i < reps; ++i) {
                Rng problem = rng.substream("problem", i + 100 * n);
                BooleanFunction target = tree_to_function(random_tree(n, t, problem), n);
                QueryLedger ledger;
                Rng run = rng.substream("run", i + 100 * n);
                weak_agnostic_parity(make_rcn(target, 0.1), t, kappa, 0.1, run, ledger);
                mean_queries += static_cast<double>(ledger.total());
            }
            mean_queries /= reps;
            double eta = 1.0 / t;
            double model = n / (eta * kappa * kappa * kappa) * std::log(1.0 / kappa);
            ratios.push_back(mean_queries / model);
        }
    }
    double lo = *std::min_element(ratios.begin(), ratios.end());
    double hi = *std::max_element(ratios.begin(), ratios.end());
    CHECK(hi / lo <= 4.0);
}

TEST_CASE("fourier_sample draws masks proportionally to squared coefficients") {
    Rng rng(5);
    QueryLedger ledger;

    BooleanFunction chi = parity_function(5, 0b10010);
    for (int i = 0; i < 50; ++i) {
        CHECK(fourier_sample(chi, rng, ledger) == 0b10010);
    }
    BooleanFunction constant(3, std::vector<int>(8, 1));
    for (int i = 0; i < 50; ++i) {
        CHECK(fourier_sample(constant, rng, ledger) == 0);
    }
    CHECK(ledger.count(tags::kQex) == 100);

    // Four-way uniform spectrum: chi-squared test at the 0.01 level (3 dof).
    BooleanFunction and_fn(2, {-1, -1, -1, 1});
    FourierSampler sampler(and_fn);
    std::map<std::uint32_t, int> counts;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) ++counts[sampler.sample(rng, ledger)];
    double chi_sq = 0.0;
    for (std::uint32_t s = 0; s < 4; ++s) {
        double expected = draws / 4.0;
        double diff = counts[s] - expected;
        chi_sq += diff * diff / expected;
    }
    CHECK(chi_sq < 11.345);
}

TEST_CASE("realizable_weak_parity finds a near-maximal coefficient") {
    Rng rng(6);
    QueryLedger ledger;

    BooleanFunction chi = parity_function(6, 0b001110);
    WeakLearnerResult exact = realizable_weak_parity(chi, 0.3, rng, ledger);
    CHECK(exact.mask == 0b001110);
    CHECK(exact.sign == 1);
    CHECK(exact.achieved_cor == doctest::Approx(1.0));

    BooleanFunction constant(4, std::vector<int>(16, 1));
    CHECK(realizable_weak_parity(constant, 0.5, rng, ledger).mask == 0);

    QueryLedger count_ledger;
    realizable_weak_parity(chi, 0.1, rng, count_ledger);
    CHECK(count_ledger.total() == 200);  // ceil(1/eps^2) spectral + as many labeled draws

    int misses = 0;
    const int trials = 50;
    for (int i = 0; i < trials; ++i) {
        Rng problem = rng.substream("problem", i);
        BooleanFunction f = tree_to_function(random_tree(10, 8, problem), 10);
        FourierSpectrum spec = wht(f);
        BestParity best = best_parity(spec);
        Rng run = rng.substream("run", i);
        WeakLearnerResult got = realizable_weak_parity(f, 0.1, run, ledger);
        if (std::abs(spec.coeffs[got.mask]) < best.value - 0.2) ++misses;
    }
    CHECK(misses <= trials / 10);
}

TEST_CASE("rcn majority wrapper meets its vote budget and error rate") {
    Rng rng(7);
    QueryLedger ledger;
    BooleanFunction f = tree_to_function(random_tree(6, 8, rng), 6);

    RcnMajorityOracle noiseless(f, 0.0, 0.01);
    for (std::uint32_t x = 0; x < 64; ++x) {
        CHECK(noiseless.query(x, rng, ledger) == f(x));
    }

    RcnMajorityOracle quarter(f, 0.25, 0.01);
    CHECK(quarter.votes() == 37);
    int wrong = 0;
    const int calls = 20000;
    for (int i = 0; i < calls; ++i) {
        auto x = static_cast<std::uint32_t>(rng.uniform_below(64));
        if (quarter.query(x, rng, ledger) != f(x)) ++wrong;
    }
    CHECK(static_cast<double>(wrong) / calls <= 0.01);

    RcnMajorityOracle heavy(f, 0.4, 0.1);
    wrong = 0;
    for (int i = 0; i < calls; ++i) {
        auto x = static_cast<std::uint32_t>(rng.uniform_below(64));
        if (heavy.query(x, rng, ledger) != f(x)) ++wrong;
    }
    CHECK(static_cast<double>(wrong) / calls <= 0.1);

    std::uint64_t before = ledger.count(tags::kRcnMajority);
    quarter.query(0, rng, ledger);
    CHECK(ledger.count(tags::kRcnMajority) - before == 37);

    BooleanFunction dereferenced = quarter.materialize(rng, ledger);
    int disagreements = 0;
    for (std::uint32_t x = 0; x < 64; ++x) {
        if (dereferenced(x) != f(x)) ++disagreements;
    }
    CHECK(disagreements <= 2);

    CHECK_THROWS_AS(RcnMajorityOracle(f, 0.5, 0.01), std::invalid_argument);
}
