#pragma once

// Spoken-digit front end: WAV ingestion, 20 ms sound units, real-part FFT
// features, +-1 masking and normalisation. Also a synthetic digit corpus.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ringrc {

inline constexpr double kSampleRate = 12500.0;
inline constexpr std::size_t kUnitLength = 250;
inline constexpr std::size_t kFeatureCount = kUnitLength / 2 + 1;  // 126

struct DigitSample {
    std::vector<double> samples;  ///< 12.5 kHz
    int label = 0;
    std::string speaker;
    int utterance = 0;
    std::string source;  ///< file path or "synthetic"
};

using Corpus = std::vector<DigitSample>;

// ---------------------------------------------------------------------------
// WAV

struct WavAudio {
    int sample_rate = 0;
    int channels = 0;
    std::vector<double> mono;  ///< channels averaged, scaled to [-1, 1]
};

/// PCM 8- or 16-bit RIFF/WAVE.
[[nodiscard]] WavAudio read_wav(const std::filesystem::path& path);

/// 16-bit mono PCM.
void write_wav(const std::filesystem::path& path, std::span<const double> samples, int sample_rate);

/// Linear-interpolation resampling; output length round(n * to / from).
[[nodiscard]] std::vector<double> resample_linear(std::span<const double> in, double from_rate,
                                                  double to_rate);

struct DigitLabel {
    int label = 0;
    std::string speaker;
    int utterance = 0;
};

/// Parses "<digit>_<speaker>_<utterance>.wav".
[[nodiscard]] DigitLabel parse_digit_filename(const std::filesystem::path& path);

/// Reads, mixes to mono, resamples to `target_rate` and normalises to max |s| = 1.
/// Labels come from the filename unless `label` is given.
[[nodiscard]] DigitSample ingest_wav(const std::filesystem::path& path, double target_rate = kSampleRate,
                                     const std::optional<DigitLabel>& label = std::nullopt);

/// Every *.wav in `dir` (sorted by name), labels from filenames.
[[nodiscard]] Corpus load_wav_directory(const std::filesystem::path& dir);

/// CSV with header "path,label,speaker,utterance"; relative paths resolve against the manifest.
[[nodiscard]] Corpus load_manifest(const std::filesystem::path& manifest);

// ---------------------------------------------------------------------------
// Features

/// Consecutive 250-sample units (columns); the last one is zero-padded.
[[nodiscard]] Eigen::MatrixXd segment(std::span<const double> samples, std::size_t unit_length = kUnitLength);

/// Real parts of the unnormalised one-sided DFT of a 250-sample unit (bins 0..125).
/// Holds an FFTW plan; one instance per thread.
class SpectralAnalyzer {
public:
    SpectralAnalyzer();
    ~SpectralAnalyzer();
    SpectralAnalyzer(const SpectralAnalyzer&) = delete;
    SpectralAnalyzer& operator=(const SpectralAnalyzer&) = delete;

    [[nodiscard]] Eigen::VectorXd features(std::span<const double> unit);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

[[nodiscard]] Eigen::VectorXd spectral_features(std::span<const double> unit);

struct MaskMatrix {
    Eigen::MatrixXd entries;  ///< N_theta x N_f, entries exactly +-1
    std::uint64_t seed = 0;
};

[[nodiscard]] MaskMatrix make_mask(std::size_t neurons, std::size_t features, std::uint64_t seed);

/// x = M k / max |M k|; an all-zero product maps to zero.
[[nodiscard]] Eigen::VectorXd mask_and_normalize(const Eigen::VectorXd& k, const MaskMatrix& mask);

enum class NormalizationScope { unit, digit };

/// Spectral features of every sound unit of a digit: N_f x N_int.
[[nodiscard]] Eigen::MatrixXd digit_features(const DigitSample& sample,
                                             SpectralAnalyzer* analyzer = nullptr);

/// Applies the mask to each feature column and normalises per unit or per digit.
[[nodiscard]] Eigen::MatrixXd masked_inputs(const Eigen::MatrixXd& features, const MaskMatrix& mask,
                                            NormalizationScope scope = NormalizationScope::unit);

/// Masked reservoir inputs for one digit: N_theta x N_int, every entry in [-1, 1].
[[nodiscard]] Eigen::MatrixXd digit_inputs(const DigitSample& sample, const MaskMatrix& mask,
                                           NormalizationScope scope = NormalizationScope::unit,
                                           SpectralAnalyzer* analyzer = nullptr);

// ---------------------------------------------------------------------------
// Synthetic corpus

struct SynthOptions {
    int speakers = 5;
    int utterances = 10;
    std::uint64_t seed = 1;
    double noise = 0.05;          ///< additive white noise relative to the harmonic peak
    double cue_level = 0.02;      ///< class-locked low-frequency component
    double cue_phase_jitter = 1.0;
};

/// speakers x 10 digits x utterances samples, ordered speaker-major.
[[nodiscard]] Corpus synth_corpus(const SynthOptions& options = {});

/// FNV-1a over labels, ids and raw sample bytes.
[[nodiscard]] std::uint64_t corpus_hash(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Feature cache: per-digit spectral feature matrices (N_f x N_int).

void save_feature_cache(const std::filesystem::path& path, std::uint64_t hash,
                        const std::vector<Eigen::MatrixXd>& features);
[[nodiscard]] std::optional<std::vector<Eigen::MatrixXd>> load_feature_cache(
    const std::filesystem::path& path, std::uint64_t hash);

}  // namespace ringrc
