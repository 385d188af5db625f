#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qdtl/boosting.hpp"
#include "qdtl/channel.hpp"
#include "qdtl/ledger.hpp"

namespace qdtl {

enum class Setting { Realizable, Rcn, Agnostic };

enum class Algorithm {
    BoostQuantum,     // full pipeline through the emulated boosting loop
    BoostClassical,   // Kalai-Kanade baseline
    WeakAgnostic,     // single weak-learner run
    WeakRealizable,   // spectral-sampling learner (RCN goes through the
                      // majority wrapper first)
};

enum class WeakBackend {
    Quantum,      // the emulated agnostic parity learner
    ExactParity,  // idealized best-parity oracle on the relabeled channel
};

struct ExperimentConfig {
    Setting setting = Setting::Realizable;
    Algorithm algorithm = Algorithm::BoostClassical;
    WeakBackend weak_backend = WeakBackend::ExactParity;
    int n = 8;
    int t = 4;
    int trials = 10;
    std::uint64_t seed = 1;
    double eps = 0.2;
    double delta = 0.1;
    double kappa = 0.1;
    double eta = 0.0;  // 0 defaults to 1/t
    double noise_p = 0.1;
    double noise_frac = 0.1;
    AdversaryProfile noise_profile = AdversaryProfile::Random;
    int iterations = 0;                // 0 defaults per the boosting schedule
    std::uint64_t margin_samples = 0;  // 0 defaults per the margin formula
    bool complexity_regime = false;    // margin samples fixed at 200 ln(1/d) n / eta^2
    bool adversarial_estimation = false;

    double effective_eta() const { return eta > 0.0 ? eta : 1.0 / t; }
    void validate() const;

    // Deterministic "key = value" rendering; the config hash is FNV-1a of it.
    std::string canonical() const;
    std::uint64_t hash() const;
};

// "key = value" lines, '#' comments; unknown keys are rejected.
ExperimentConfig parse_config(std::istream& in);
void apply_config_entry(ExperimentConfig& config, const std::string& key,
                        const std::string& value);

struct RunRecord {
    std::uint64_t config_hash = 0;
    int trial = 0;
    std::uint64_t trial_seed = 0;
    double achieved_error = 0.0;
    double achieved_cor = 0.0;
    double optcor_proxy = 0.0;  // exact correlation of the generating tree
    int iterations_used = 0;
    std::map<std::string, std::uint64_t> queries;
    std::uint64_t total_queries = 0;
    double wall_ms = 0.0;  // not part of the canonical CSV
};

std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

// Canonical record CSV: everything except wall time, so identical seeds give
// byte-identical output.
void write_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(std::istream& in);

struct ReportRow {
    std::uint64_t config_hash = 0;
    int count = 0;
    double mean_error = 0.0, median_error = 0.0, p95_error = 0.0;
    double mean_cor = 0.0;
    double mean_queries = 0.0, median_queries = 0.0, p95_queries = 0.0;
};

std::vector<ReportRow> aggregate_records(const std::vector<RunRecord>& records);
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::string format_report_table(const std::vector<ReportRow>& rows);

}  // namespace qdtl
