#include "qdtl/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qdtl/glsearch.hpp"
#include "qdtl/weak_learner.hpp"

namespace qdtl {

namespace {

const char* setting_name(Setting s) {
    switch (s) {
        case Setting::Realizable: return "realizable";
        case Setting::Rcn: return "rcn";
        case Setting::Agnostic: return "agnostic";
    }
    return "?";
}

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::BoostQuantum: return "boost_quantum";
        case Algorithm::BoostClassical: return "boost_classical";
        case Algorithm::WeakAgnostic: return "weak_agnostic";
        case Algorithm::WeakRealizable: return "weak_realizable";
    }
    return "?";
}

const char* backend_name(WeakBackend b) {
    return b == WeakBackend::Quantum ? "quantum" : "exact";
}

const char* profile_name(AdversaryProfile p) {
    return p == AdversaryProfile::Random ? "random" : "largest_leaf";
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n < 1 || n > kMaxBits) throw std::invalid_argument("config: n must lie in [1,20]");
    if (t < 1 || (std::uint64_t(1) << n) < static_cast<std::uint64_t>(t)) {
        throw std::invalid_argument("config: t must lie in [1, 2^n]");
    }
    if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("config: eps must lie in (0,1)");
    if (!(delta > 0.0 && delta < 0.5)) {
        throw std::invalid_argument("config: delta must lie in (0,1/2)");
    }
    if (!(kappa > 0.0 && kappa < 0.5)) {
        throw std::invalid_argument("config: kappa must lie in (0,1/2)");
    }
    if (eta < 0.0 || eta > 0.5) throw std::invalid_argument("config: eta must lie in [0,1/2]");
    if (!(noise_p >= 0.0 && noise_p < 0.5)) {
        throw std::invalid_argument("config: noise_p must lie in [0,1/2)");
    }
    if (!(noise_frac >= 0.0 && noise_frac <= 1.0)) {
        throw std::invalid_argument("config: noise_frac must lie in [0,1]");
    }
    if (iterations < 0) throw std::invalid_argument("config: iterations must be >= 0");
    if (algorithm == Algorithm::WeakRealizable && setting == Setting::Agnostic) {
        throw std::invalid_argument("config: the realizable learner handles realizable/rcn only");
    }
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream out;
    out << "setting = " << setting_name(setting) << "\n"
        << "algorithm = " << algorithm_name(algorithm) << "\n"
        << "weak_backend = " << backend_name(weak_backend) << "\n"
        << "n = " << n << "\n"
        << "t = " << t << "\n"
        << "trials = " << trials << "\n"
        << "seed = " << seed << "\n"
        << "eps = " << fmt_double(eps) << "\n"
        << "delta = " << fmt_double(delta) << "\n"
        << "kappa = " << fmt_double(kappa) << "\n"
        << "eta = " << fmt_double(eta) << "\n"
        << "noise_p = " << fmt_double(noise_p) << "\n"
        << "noise_frac = " << fmt_double(noise_frac) << "\n"
        << "noise_profile = " << profile_name(noise_profile) << "\n"
        << "iterations = " << iterations << "\n"
        << "margin_samples = " << margin_samples << "\n"
        << "complexity_regime = " << (complexity_regime ? 1 : 0) << "\n"
        << "adversarial_estimation = " << (adversarial_estimation ? 1 : 0) << "\n";
    return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical()); }

void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value) {
    auto parse_bool = [&](const std::string& v) {
        if (v == "1" || v == "true" || v == "on") return true;
        if (v == "0" || v == "false" || v == "off") return false;
        throw std::invalid_argument("config: boolean expected for " + key);
    };
    if (key == "setting") {
        if (value == "realizable") config.setting = Setting::Realizable;
        else if (value == "rcn") config.setting = Setting::Rcn;
        else if (value == "agnostic") config.setting = Setting::Agnostic;
        else throw std::invalid_argument("config: unknown setting '" + value + "'");
    } else if (key == "algorithm") {
        if (value == "boost_quantum") config.algorithm = Algorithm::BoostQuantum;
        else if (value == "boost_classical") config.algorithm = Algorithm::BoostClassical;
        else if (value == "weak_agnostic") config.algorithm = Algorithm::WeakAgnostic;
        else if (value == "weak_realizable") config.algorithm = Algorithm::WeakRealizable;
        else throw std::invalid_argument("config: unknown algorithm '" + value + "'");
    } else if (key == "weak_backend") {
        if (value == "quantum") config.weak_backend = WeakBackend::Quantum;
        else if (value == "exact") config.weak_backend = WeakBackend::ExactParity;
        else throw std::invalid_argument("config: unknown weak_backend '" + value + "'");
    } else if (key == "noise_profile") {
        if (value == "random") config.noise_profile = AdversaryProfile::Random;
        else if (value == "largest_leaf") config.noise_profile = AdversaryProfile::LargestLeaf;
        else throw std::invalid_argument("config: unknown noise_profile '" + value + "'");
    } else if (key == "n") config.n = std::stoi(value);
    else if (key == "t") config.t = std::stoi(value);
    else if (key == "trials") config.trials = std::stoi(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "eps") config.eps = std::stod(value);
    else if (key == "delta") config.delta = std::stod(value);
    else if (key == "kappa") config.kappa = std::stod(value);
    else if (key == "eta") config.eta = std::stod(value);
    else if (key == "noise_p") config.noise_p = std::stod(value);
    else if (key == "noise_frac") config.noise_frac = std::stod(value);
    else if (key == "iterations") config.iterations = std::stoi(value);
    else if (key == "margin_samples") config.margin_samples = std::stoull(value);
    else if (key == "complexity_regime") config.complexity_regime = parse_bool(value);
    else if (key == "adversarial_estimation") config.adversarial_estimation = parse_bool(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line.erase(hash_pos);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
        }
        auto trim = [](std::string s) {
            std::size_t a = s.find_first_not_of(" \t\r");
            std::size_t b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        apply_config_entry(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    config.validate();
    return config;
}

namespace {

WeakLearner make_weak_learner(const ExperimentConfig& config, const EmulationConfig& emulation) {
    if (config.weak_backend == WeakBackend::ExactParity) {
        return [](const LabelChannel& relabeled, Rng&, QueryLedger&) -> std::optional<Parity> {
            // Idealized (1/t)-weak learner: argmax |cor(chi_S)| with its sign.
            std::vector<double> mean(relabeled.size());
            for (std::uint32_t x = 0; x < relabeled.size(); ++x) {
                mean[x] = relabeled.mean_label(x);
            }
            std::vector<double> coeffs = wht_real(mean);
            std::uint32_t best = 0;
            for (std::uint32_t s = 1; s < coeffs.size(); ++s) {
                if (std::abs(coeffs[s]) > std::abs(coeffs[best])) best = s;
            }
            return Parity{best, coeffs[best] >= 0.0 ? 1 : -1};
        };
    }
    int t = config.t;
    double kappa = config.kappa;
    double delta = config.delta;
    return [t, kappa, delta, emulation](const LabelChannel& relabeled, Rng& rng,
                                        QueryLedger& ledger) -> std::optional<Parity> {
        WeakLearnerResult result =
            weak_agnostic_parity(relabeled, t, kappa, delta, rng, ledger, emulation);
        return result.hypothesis();
    };
}

}  // namespace

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
    config.validate();
    std::vector<RunRecord> records;
    records.reserve(config.trials);
    Rng master(config.seed);
    EmulationConfig emulation;
    emulation.failure_mode =
        config.adversarial_estimation ? FailureMode::Adversarial : FailureMode::Uniform;

    for (int trial = 0; trial < config.trials; ++trial) {
        auto start = std::chrono::steady_clock::now();
        Rng trial_rng = master.substream("trial", static_cast<std::uint64_t>(trial));
        Rng problem_rng = trial_rng.substream("problem");
        Rng noise_rng = trial_rng.substream("oracle-noise");
        Rng algo_rng = trial_rng.substream("algorithm");

        DecisionTree tree = random_tree(config.n, config.t, problem_rng);
        BooleanFunction target = tree_to_function(tree, config.n);
        LabelChannel channel;
        switch (config.setting) {
            case Setting::Realizable: channel = make_realizable(target); break;
            case Setting::Rcn: channel = make_rcn(target, config.noise_p); break;
            case Setting::Agnostic:
                channel = make_adversarial(tree, config.n, config.noise_frac,
                                           config.noise_profile, noise_rng);
                break;
        }

        QueryLedger ledger;
        RunRecord record;
        record.config_hash = config.hash();
        record.trial = trial;
        record.trial_seed = trial_rng.seed();
        record.optcor_proxy = correlation(channel, target);

        double cor = 0.0;
        int iterations_used = 0;
        switch (config.algorithm) {
            case Algorithm::WeakAgnostic: {
                WeakLearnerResult result = weak_agnostic_parity(
                    channel, config.t, config.kappa, config.delta, algo_rng, ledger, emulation);
                cor = result.achieved_cor;
                iterations_used = 1;
                break;
            }
            case Algorithm::WeakRealizable: {
                BooleanFunction labels = target;
                if (config.setting == Setting::Rcn) {
                    RcnMajorityOracle wrapper(target, config.noise_p, config.delta);
                    Rng wrapper_rng = trial_rng.substream("oracle-noise", 1);
                    labels = wrapper.materialize(wrapper_rng, ledger);
                }
                WeakLearnerResult result =
                    realizable_weak_parity(labels, config.eps, algo_rng, ledger);
                cor = correlation(channel, result.hypothesis());
                iterations_used = 1;
                break;
            }
            case Algorithm::BoostClassical:
            case Algorithm::BoostQuantum: {
                BoostConfig boost;
                boost.max_iterations = config.iterations;
                boost.eta = config.effective_eta();
                boost.eps = config.eps;
                boost.delta = config.delta;
                boost.margin_samples = config.margin_samples;
                if (config.algorithm == Algorithm::BoostQuantum && config.complexity_regime &&
                    config.margin_samples == 0) {
                    boost.margin_samples = static_cast<std::uint64_t>(
                        std::ceil(200.0 * std::log(1.0 / config.delta) * config.n /
                                  (boost.eta * boost.eta)));
                }
                WeakLearner weak = make_weak_learner(config, emulation);
                BoostResult result =
                    config.algorithm == Algorithm::BoostClassical
                        ? kk_boost_classical(weak, channel, boost, algo_rng, ledger)
                        : quantum_agnostic_boost(weak, channel, boost, algo_rng, ledger,
                                                 emulation);
                cor = correlation(channel,
                                  [&](std::uint32_t x) { return result.hypothesis.predict(x); });
                iterations_used = static_cast<int>(result.trace.iterations.size());
                break;
            }
        }

        record.achieved_cor = cor;
        record.achieved_error = (1.0 - cor) / 2.0;
        record.iterations_used = iterations_used;
        record.queries = ledger.counters();
        record.total_queries = ledger.total();
        auto stop = std::chrono::steady_clock::now();
        record.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
        records.push_back(std::move(record));
    }
    return records;
}

namespace {

const char* const kQueryColumns[] = {tags::kAex,  tags::kQex,          tags::kMae,
                                     tags::kRelativeEstimate,          tags::kAmplification,
                                     tags::kRcnMajority};

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
    out << "config_hash,trial,trial_seed,achieved_error,achieved_cor,optcor_proxy,"
           "iterations,total_queries";
    for (const char* tag : kQueryColumns) out << ",q_" << tag;
    out << "\n";
    for (const RunRecord& r : records) {
        out << r.config_hash << "," << r.trial << "," << r.trial_seed << ","
            << fmt_double(r.achieved_error) << "," << fmt_double(r.achieved_cor) << ","
            << fmt_double(r.optcor_proxy) << "," << r.iterations_used << "," << r.total_queries;
        for (const char* tag : kQueryColumns) {
            auto it = r.queries.find(tag);
            out << "," << (it == r.queries.end() ? 0 : it->second);
        }
        out << "\n";
    }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("config_hash,", 0) != 0) {
        throw std::invalid_argument("read_records_csv: missing header");
    }
    std::vector<std::string> columns;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) columns.push_back(col);
    }
    std::vector<RunRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(row, cell, ',')) cells.push_back(cell);
        if (cells.size() != columns.size()) {
            throw std::invalid_argument("read_records_csv: malformed row");
        }
        RunRecord r;
        r.config_hash = std::stoull(cells[0]);
        r.trial = std::stoi(cells[1]);
        r.trial_seed = std::stoull(cells[2]);
        r.achieved_error = std::stod(cells[3]);
        r.achieved_cor = std::stod(cells[4]);
        r.optcor_proxy = std::stod(cells[5]);
        r.iterations_used = std::stoi(cells[6]);
        r.total_queries = std::stoull(cells[7]);
        for (std::size_t i = 8; i < cells.size(); ++i) {
            std::uint64_t q = std::stoull(cells[i]);
            if (q > 0) r.queries[columns[i].substr(2)] = q;
        }
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    double idx = q * (values.size() - 1);
    auto lo = static_cast<std::size_t>(idx);
    std::size_t hi = std::min(lo + 1, values.size() - 1);
    double frac = idx - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

std::vector<ReportRow> aggregate_records(const std::vector<RunRecord>& records) {
    std::map<std::uint64_t, std::vector<const RunRecord*>> groups;
    for (const RunRecord& r : records) groups[r.config_hash].push_back(&r);

    std::vector<ReportRow> rows;
    for (const auto& [hash, group] : groups) {
        ReportRow row;
        row.config_hash = hash;
        row.count = static_cast<int>(group.size());
        std::vector<double> errors, queries;
        for (const RunRecord* r : group) {
            errors.push_back(r->achieved_error);
            queries.push_back(static_cast<double>(r->total_queries));
            row.mean_error += r->achieved_error;
            row.mean_cor += r->achieved_cor;
            row.mean_queries += static_cast<double>(r->total_queries);
        }
        row.mean_error /= row.count;
        row.mean_cor /= row.count;
        row.mean_queries /= row.count;
        row.median_error = percentile(errors, 0.5);
        row.p95_error = percentile(errors, 0.95);
        row.median_queries = percentile(queries, 0.5);
        row.p95_queries = percentile(queries, 0.95);
        rows.push_back(row);
    }
    return rows;
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "config_hash,count,mean_error,median_error,p95_error,mean_cor,"
           "mean_queries,median_queries,p95_queries\n";
    for (const ReportRow& row : rows) {
        out << row.config_hash << "," << row.count << "," << fmt_double(row.mean_error) << ","
            << fmt_double(row.median_error) << "," << fmt_double(row.p95_error) << ","
            << fmt_double(row.mean_cor) << "," << fmt_double(row.mean_queries) << ","
            << fmt_double(row.median_queries) << "," << fmt_double(row.p95_queries) << "\n";
    }
}

std::string format_report_table(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-20s %6s %12s %12s %12s %12s %14s\n", "config", "runs",
                  "mean_err", "median_err", "p95_err", "mean_cor", "mean_queries");
    out << buf;
    for (const ReportRow& row : rows) {
        std::snprintf(buf, sizeof(buf), "%-20llu %6d %12.5f %12.5f %12.5f %12.5f %14.1f\n",
                      static_cast<unsigned long long>(row.config_hash), row.count,
                      row.mean_error, row.median_error, row.p95_error, row.mean_cor,
                      row.mean_queries);
        out << buf;
    }
    return out.str();
}

}  // namespace qdtl
