#pragma once

// Experiment orchestration behind the CLI: capacity sweeps, digit recognition
// with leave-one-utterance-out cross-validation, the no-reservoir baseline,
// and raw trace simulation. Every command writes CSVs plus report.json into
// the output directory.

#include "ringrc/kernels.hpp"

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace ringrc {

struct Seeds {
    std::uint64_t mask = 11;
    std::uint64_t series = 1;
    std::uint64_t noise = 5;
    std::uint64_t corpus = 1;
};

enum class DatasetKind { synthetic, wav_directory, manifest };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::synthetic;
    std::filesystem::path path;  ///< directory or manifest CSV
    SynthOptions synth;          ///< synth.seed is overridden by Seeds::corpus
};

struct ExperimentConfig {
    RingParams ring;
    double preroll_round_trips = 1000.0;

    // binary tasks
    std::vector<double> theta_grid;  ///< [s]
    std::vector<double> gain_grid;   ///< [dB]
    std::size_t series_length = 2200;
    std::size_t binary_samples = 20;
    SplitSpec split;
    CapacityOptions capacity;

    // digit task
    double digit_interval = 8.25 * 236e-9;
    std::size_t neurons = 100;
    std::vector<std::size_t> samples_per_neuron{1, 2, 4};
    TrainOptions digit_readout;
    NormalizationScope normalization = NormalizationScope::unit;
    DatasetSpec dataset;
    std::size_t folds = 10;
    std::optional<std::filesystem::path> feature_cache;

    Seeds seeds;
    std::filesystem::path output_dir = "out";
    Execution execution = Execution::parallel;

    /// Full-resolution defaults (dt = T_r/64).
    [[nodiscard]] static ExperimentConfig defaults();
    /// Continuous-integration preset: dt = T_r/16 for the digit task.
    [[nodiscard]] static ExperimentConfig ci_preset();
    /// Desk-scale smoke preset: 2 speakers x 4 utterances, N_theta = 50.
    [[nodiscard]] static ExperimentConfig desk_preset();

    /// theta = (m + 1/4) T_r for m = first..last.
    [[nodiscard]] static std::vector<double> synchronized_grid(double round_trip, int first = 1, int last = 9);

    [[nodiscard]] double preroll_time() const { return preroll_round_trips * ring.round_trip_time; }

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& config);

struct RunReport {
    std::string command;
    nlohmann::json json;
    bool failed = false;  ///< a sweep point or similar partial failure
};

// --- library-level results (used by the commands and the acceptance suite) ---

[[nodiscard]] std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);
[[nodiscard]] std::vector<SweepResult> run_sweep(const ExperimentConfig& config);

/// Loads or synthesises the configured corpus.
[[nodiscard]] Corpus load_corpus(const ExperimentConfig& config);

/// Throws InputError listing every missing or duplicated (speaker, digit, utterance).
void validate_corpus(const Corpus& corpus, std::size_t folds);

struct AccuracyPoint {
    std::size_t samples_per_neuron = 0;  ///< 0 for the baseline
    std::size_t dimension = 0;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<FoldOutcome> folds;
};

struct DigitExperiment {
    std::vector<AccuracyPoint> points;
    std::vector<std::vector<std::size_t>> folds;
    std::uint64_t corpus_hash = 0;
    std::size_t sound_units = 0;
    WeightMatrix readout;  ///< trained on every digit at the largest dimension
};

/// Reservoir accuracy for every configured n (one simulation at the largest n).
[[nodiscard]] DigitExperiment run_digits(const ExperimentConfig& config, const Corpus& corpus);

/// Same folds and voting with the readout trained on the masked inputs.
[[nodiscard]] DigitExperiment run_baseline(const ExperimentConfig& config, const Corpus& corpus);

// --- commands: write CSV + report.json into config.output_dir ---------------

RunReport cmd_sweep(const ExperimentConfig& config);
RunReport cmd_digits(const ExperimentConfig& config);
RunReport cmd_baseline(const ExperimentConfig& config);

struct SimulateRequest {
    std::filesystem::path drive_file;  ///< one value per line, '#' comments
    double interval = 0.0;             ///< [s]
    bool normalized = false;           ///< values in [-1, 1] instead of volts
};
RunReport cmd_simulate(const ExperimentConfig& config, const SimulateRequest& request);

/// Writes <digit>_<speaker>_<utterance>.wav files and manifest.csv.
RunReport cmd_gen_synthetic(const ExperimentConfig& config);

void write_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace ringrc
