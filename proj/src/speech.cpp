#include "ringrc/speech.hpp"

#include "ringrc/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fftw3.h>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <numbers>
#include <random>

namespace ringrc {

namespace {

// FFTW planning is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace

Eigen::MatrixXd segment(std::span<const double> samples, std::size_t unit_length) {
    if (samples.empty()) throw InputError("cannot segment an empty waveform");
    if (unit_length == 0) throw ConfigError("unit length must be > 0");
    const std::size_t units = (samples.size() + unit_length - 1) / unit_length;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(unit_length),
                                                static_cast<Eigen::Index>(units));
    std::copy(samples.begin(), samples.end(), out.data());
    return out;
}

struct SpectralAnalyzer::Impl {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
};

SpectralAnalyzer::SpectralAnalyzer() : impl_(std::make_unique<Impl>()) {
    std::lock_guard lock(planner_mutex());
    impl_->in = fftw_alloc_real(kUnitLength);
    impl_->out = fftw_alloc_complex(kFeatureCount);
    impl_->plan = fftw_plan_dft_r2c_1d(static_cast<int>(kUnitLength), impl_->in, impl_->out, FFTW_ESTIMATE);
}

SpectralAnalyzer::~SpectralAnalyzer() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(impl_->plan);
    fftw_free(impl_->in);
    fftw_free(impl_->out);
}

Eigen::VectorXd SpectralAnalyzer::features(std::span<const double> unit) {
    if (unit.size() != kUnitLength) {
        throw InputError(fmt::format("sound unit has {} samples, expected {}", unit.size(), kUnitLength));
    }
    std::copy(unit.begin(), unit.end(), impl_->in);
    fftw_execute(impl_->plan);
    Eigen::VectorXd k(static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < kFeatureCount; ++i) k(static_cast<Eigen::Index>(i)) = impl_->out[i][0];
    return k;
}

Eigen::VectorXd spectral_features(std::span<const double> unit) {
    thread_local SpectralAnalyzer analyzer;
    return analyzer.features(unit);
}

MaskMatrix make_mask(std::size_t neurons, std::size_t features, std::uint64_t seed) {
    if (neurons == 0 || features == 0) throw ConfigError("mask dimensions must be > 0");
    std::mt19937_64 rng(seed);
    MaskMatrix m;
    m.seed = seed;
    m.entries.resize(static_cast<Eigen::Index>(neurons), static_cast<Eigen::Index>(features));
    for (Eigen::Index r = 0; r < m.entries.rows(); ++r)
        for (Eigen::Index c = 0; c < m.entries.cols(); ++c) m.entries(r, c) = (rng() >> 63) ? 1.0 : -1.0;
    return m;
}

Eigen::VectorXd mask_and_normalize(const Eigen::VectorXd& k, const MaskMatrix& mask) {
    if (k.size() != mask.entries.cols()) {
        throw InputError(fmt::format("feature length {} does not match mask width {}", k.size(),
                                     mask.entries.cols()));
    }
    Eigen::VectorXd x = mask.entries * k;
    const double peak = x.cwiseAbs().maxCoeff();
    if (peak > 0.0) x /= peak;
    return x;
}

Eigen::MatrixXd digit_features(const DigitSample& sample, SpectralAnalyzer* analyzer) {
    const Eigen::MatrixXd units = segment(sample.samples);
    Eigen::MatrixXd K(static_cast<Eigen::Index>(kFeatureCount), units.cols());
    for (Eigen::Index u = 0; u < units.cols(); ++u) {
        const std::span<const double> unit(units.col(u).data(), kUnitLength);
        K.col(u) = analyzer ? analyzer->features(unit) : spectral_features(unit);
    }
    return K;
}

Eigen::MatrixXd masked_inputs(const Eigen::MatrixXd& features, const MaskMatrix& mask,
                              NormalizationScope scope) {
    if (features.rows() != mask.entries.cols()) {
        throw InputError(fmt::format("feature length {} does not match mask width {}", features.rows(),
                                     mask.entries.cols()));
    }
    if (scope == NormalizationScope::unit) {
        Eigen::MatrixXd X(mask.entries.rows(), features.cols());
        for (Eigen::Index u = 0; u < features.cols(); ++u) X.col(u) = mask_and_normalize(features.col(u), mask);
        return X;
    }
    Eigen::MatrixXd X = mask.entries * features;
    const double peak = X.size() ? X.cwiseAbs().maxCoeff() : 0.0;
    if (peak > 0.0) X /= peak;
    return X;
}

Eigen::MatrixXd digit_inputs(const DigitSample& sample, const MaskMatrix& mask, NormalizationScope scope,
                             SpectralAnalyzer* analyzer) {
    return masked_inputs(digit_features(sample, analyzer), mask, scope);
}

Corpus synth_corpus(const SynthOptions& options) {
    if (options.speakers < 1 || options.utterances < 1) throw ConfigError("speakers and utterances must be >= 1");
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr int kMaxHarmonics = 60;

    // class templates: formant glide from (F1s, F2s) to (F1e, F2e)
    std::mt19937_64 class_rng(options.seed + 7777);
    std::vector<double> f1s = linspace(300.0, 850.0, 10);
    std::vector<double> f2s = linspace(900.0, 2400.0, 10);
    std::shuffle(f1s.begin(), f1s.end(), class_rng);
    std::shuffle(f2s.begin(), f2s.end(), class_rng);
    std::uniform_real_distribution<double> glide(0.8, 1.25);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    std::vector<double> f1e(10), f2e(10);
    for (int c = 0; c < 10; ++c) f1e[c] = f1s[c] * glide(class_rng);
    for (int c = 0; c < 10; ++c) f2e[c] = f2s[c] * glide(class_rng);
    std::array<std::array<double, 3>, 10> cue_phase{};
    for (auto& row : cue_phase)
        for (double& p : row) p = angle(class_rng);

    const std::vector<double> speaker_f0 = linspace(170.0, 240.0, options.speakers);
    const std::vector<double> speaker_scale = linspace(0.95, 1.08, options.speakers);

    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> duration_dist(0.3, 0.7);
    std::uniform_real_distribution<double> pitch_jitter(0.95, 1.05);
    std::uniform_real_distribution<double> formant_jitter(0.97, 1.03);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Corpus corpus;
    corpus.reserve(static_cast<std::size_t>(options.speakers * 10 * options.utterances));
    for (int s = 0; s < options.speakers; ++s) {
        for (int c = 0; c < 10; ++c) {
            for (int u = 0; u < options.utterances; ++u) {
                const double duration = duration_dist(rng);
                const auto n = static_cast<std::size_t>(duration * kSampleRate);
                const double f0 = speaker_f0[static_cast<std::size_t>(s)] * pitch_jitter(rng);
                const double scale = speaker_scale[static_cast<std::size_t>(s)] * formant_jitter(rng);
                std::array<double, kMaxHarmonics> phase0{};
                for (double& p : phase0) p = angle(rng);
                const int harmonics = std::min(kMaxHarmonics, static_cast<int>(6000.0 / f0));

                std::vector<double> x(n, 0.0);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = static_cast<double>(i) / kSampleRate;
                    const double frac = t / duration;
                    const double F1 = (f1s[c] + (f1e[c] - f1s[c]) * frac) * scale;
                    const double F2 = (f2s[c] + (f2e[c] - f2s[c]) * frac) * scale;
                    const double base = two_pi * f0 * static_cast<double>(i + 1) / kSampleRate;
                    double v = 0.0;
                    for (int h = 1; h < harmonics; ++h) {
                        const double fh = h * f0;
                        const double a = std::exp(-(fh - F1) * (fh - F1) / (2.0 * 90.0 * 90.0)) +
                                         0.7 * std::exp(-(fh - F2) * (fh - F2) / (2.0 * 120.0 * 120.0));
                        v += a * std::cos(h * base + phase0[static_cast<std::size_t>(h)]);
                    }
                    const double envelope = std::min(1.0, t / 0.03) * std::min(1.0, (duration - t) / 0.05);
                    x[i] = v * envelope;
                }
                for (double& v : x) v += options.noise * gauss(rng);
                double peak = 0.0;
                for (double v : x) peak = std::max(peak, std::abs(v));
                if (peak > 0.0)
                    for (double& v : x) v /= peak;

                std::array<double, 3> jitter{};
                for (double& j : jitter) j = options.cue_phase_jitter * gauss(rng);
                for (std::size_t i = 0; i < n; ++i) {
                    const double t = static_cast<double>(i) / kSampleRate;
                    double cue = 0.0;
                    for (int b = 0; b < 3; ++b) {
                        cue += std::cos(two_pi * 50.0 * (b + 1) * t + cue_phase[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)] +
                                        jitter[static_cast<std::size_t>(b)]);
                    }
                    x[i] += options.cue_level * cue;
                }
                peak = 0.0;
                for (double v : x) peak = std::max(peak, std::abs(v));
                if (peak > 0.0)
                    for (double& v : x) v /= peak;

                DigitSample sample;
                sample.samples = std::move(x);
                sample.label = c;
                sample.speaker = fmt::format("s{}", s);
                sample.utterance = u;
                sample.source = "synthetic";
                corpus.push_back(std::move(sample));
            }
        }
    }
    return corpus;
}

std::uint64_t corpus_hash(const Corpus& corpus) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const void* data, std::size_t size) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    for (const auto& s : corpus) {
        mix(&s.label, sizeof s.label);
        mix(&s.utterance, sizeof s.utterance);
        mix(s.speaker.data(), s.speaker.size());
        const std::uint64_t n = s.samples.size();
        mix(&n, sizeof n);
        mix(s.samples.data(), s.samples.size() * sizeof(double));
    }
    return h;
}

namespace {
constexpr char kCacheMagic[8] = {'R', 'R', 'C', 'F', 'E', 'A', 'T', '1'};
}

void save_feature_cache(const std::filesystem::path& path, std::uint64_t hash,
                        const std::vector<Eigen::MatrixXd>& features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(kCacheMagic, sizeof kCacheMagic);
    const std::uint64_t count = features.size();
    out.write(reinterpret_cast<const char*>(&hash), sizeof hash);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    for (const auto& K : features) {
        const std::uint64_t dims[2] = {static_cast<std::uint64_t>(K.rows()), static_cast<std::uint64_t>(K.cols())};
        out.write(reinterpret_cast<const char*>(dims), sizeof dims);
        out.write(reinterpret_cast<const char*>(K.data()), static_cast<std::streamsize>(K.size() * sizeof(double)));
    }
}

std::optional<std::vector<Eigen::MatrixXd>> load_feature_cache(const std::filesystem::path& path,
                                                               std::uint64_t hash) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    char magic[8];
    std::uint64_t stored = 0, count = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&stored), sizeof stored);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || std::memcmp(magic, kCacheMagic, sizeof magic) != 0 || stored != hash) return std::nullopt;
    std::vector<Eigen::MatrixXd> features(count);
    for (auto& K : features) {
        std::uint64_t dims[2] = {0, 0};
        in.read(reinterpret_cast<char*>(dims), sizeof dims);
        if (!in || dims[0] != kFeatureCount) return std::nullopt;
        K.resize(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
        in.read(reinterpret_cast<char*>(K.data()), static_cast<std::streamsize>(K.size() * sizeof(double)));
        if (!in) return std::nullopt;
    }
    return features;
}

}  // namespace ringrc
