#include "ringrc/errors.hpp"
#include "ringrc/speech.hpp"

#include "helpers.hpp"

#include <cmath>
#include <doctest.h>
#include <fstream>
#include <numbers>
#include <random>
#include <array>
#include <set>

using namespace ringrc;

namespace {

std::vector<double> random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    std::vector<double> u(kUnitLength);
    for (auto& v : u) v = n01(rng);
    return u;
}

// O(N^2) real part of the unnormalised forward DFT.
std::vector<double> direct_dft_real(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<double> out(n / 2 + 1);
    for (std::size_t k = 0; k < out.size(); ++k) {
        long double acc = 0;
        for (std::size_t t = 0; t < n; ++t)
            acc += x[t] * std::cos(2.0L * std::numbers::pi_v<long double> * ((k * t) % n) / n);
        out[k] = static_cast<double>(acc);
    }
    return out;
}

void put16(std::ofstream& o, std::uint16_t v) { o.put(char(v & 0xff)).put(char(v >> 8)); }
void put32(std::ofstream& o, std::uint32_t v) {
    put16(o, std::uint16_t(v & 0xffff));
    put16(o, std::uint16_t(v >> 16));
}

void write_stereo(const std::filesystem::path& p, std::int16_t left, std::int16_t right, int frames) {
    std::ofstream o(p, std::ios::binary);
    o.write("RIFF", 4);
    put32(o, 36 + frames * 4);
    o.write("WAVEfmt ", 8);
    put32(o, 16);
    put16(o, 1);
    put16(o, 2);
    put32(o, 8000);
    put32(o, 8000 * 4);
    put16(o, 4);
    put16(o, 16);
    o.write("data", 4);
    put32(o, frames * 4);
    for (int i = 0; i < frames; ++i) {
        put16(o, static_cast<std::uint16_t>(left));
        put16(o, static_cast<std::uint16_t>(right));
    }
}

}  // namespace

TEST_SUITE("speech") {

TEST_CASE("segment into 250-sample units") {
    CHECK(segment(std::vector<double>(6250, 1.0)).cols() == 25);

    const Eigen::MatrixXd short_unit = segment(std::vector<double>(100, 1.0));
    REQUIRE(short_unit.cols() == 1);
    CHECK(short_unit.col(0).head(100).sum() == 100.0);
    CHECK(short_unit.col(0).tail(150).isZero(0.0));

    const Eigen::MatrixXd exact = segment(std::vector<double>(250, 2.0));
    CHECK(exact.cols() == 1);
    CHECK((exact.array() == 2.0).all());
    CHECK_THROWS_AS((void)segment(std::vector<double>{}), InputError);
}

TEST_CASE("segments concatenate back to the waveform") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (std::size_t len : {1u, 249u, 250u, 251u, 4321u}) {
        std::vector<double> x(len);
        for (auto& v : x) v = n01(rng);
        const Eigen::MatrixXd units = segment(x);
        const std::vector<double> back(units.data(), units.data() + len);
        CHECK(back == x);
    }
}

TEST_CASE("spectral features of simple signals") {
    const Eigen::VectorXd dc = spectral_features(std::vector<double>(kUnitLength, 0.3));
    CHECK(dc.size() == 126);
    CHECK(dc(0) == doctest::Approx(250 * 0.3));
    CHECK(dc.tail(125).cwiseAbs().maxCoeff() < 1e-12);

    std::vector<double> cosine(kUnitLength);
    for (std::size_t t = 0; t < kUnitLength; ++t) cosine[t] = std::cos(2.0 * std::numbers::pi * t / kUnitLength);
    Eigen::VectorXd k = spectral_features(cosine);
    CHECK(k(1) == doctest::Approx(125.0));
    k(1) = 0.0;
    CHECK(k.cwiseAbs().maxCoeff() < 1e-10);

    CHECK_THROWS_AS((void)spectral_features(std::vector<double>(249)), InputError);
}

TEST_CASE("spectral features match a direct DFT") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const auto u = random_unit(rng);
        const auto oracle = direct_dft_real(u);
        const Eigen::VectorXd k = spectral_features(u);
        for (std::size_t i = 0; i < oracle.size(); ++i) REQUIRE(k(static_cast<Eigen::Index>(i)) == doctest::Approx(oracle[i]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("spectral features are linear") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    SpectralAnalyzer analyzer;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto u = random_unit(rng), w = random_unit(rng);
        const double a = coef(rng), b = coef(rng);
        std::vector<double> mix(kUnitLength);
        for (std::size_t i = 0; i < kUnitLength; ++i) mix[i] = a * u[i] + b * w[i];
        const Eigen::VectorXd lhs = analyzer.features(mix);
        const Eigen::VectorXd rhs = a * analyzer.features(u) + b * analyzer.features(w);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("mask entries and shape") {
    const MaskMatrix m = make_mask(100, 126, 11);
    CHECK(m.entries.rows() == 100);
    CHECK(m.entries.cols() == 126);
    CHECK((m.entries.array().abs() == 1.0).all());
    CHECK(make_mask(100, 126, 11).entries == m.entries);
    CHECK(make_mask(100, 126, 12).entries != m.entries);
    CHECK_THROWS_AS((void)make_mask(0, 126, 1), ConfigError);
}

TEST_CASE("mask and normalise") {
    const MaskMatrix m = make_mask(100, 126, 11);
    CHECK(mask_and_normalize(Eigen::VectorXd::Zero(126), m).isZero(0.0));

    MaskMatrix one;
    one.entries = Eigen::MatrixXd::Ones(1, 126);
    const Eigen::VectorXd x1 = mask_and_normalize(Eigen::VectorXd::Ones(126), one);
    CHECK(x1.size() == 1);
    CHECK(x1(0) == 1.0);

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd k(126);
        for (auto& v : k) v = std::normal_distribution<double>()(rng);
        const Eigen::VectorXd x = mask_and_normalize(k, m);
        CHECK(x.size() == 100);
        CHECK(x.cwiseAbs().maxCoeff() == 1.0);
    }
    CHECK_THROWS_AS((void)mask_and_normalize(Eigen::VectorXd::Ones(5), m), InputError);
}

TEST_CASE("digit inputs") {
    DigitSample d;
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    d.samples.resize(6250 + 17);
    for (auto& v : d.samples) v = n01(rng);
    const MaskMatrix m = make_mask(40, 126, 1);
    const Eigen::MatrixXd x = digit_inputs(d, m);
    CHECK(x.rows() == 40);
    CHECK(x.cols() == 26);
    for (Eigen::Index u = 0; u < x.cols(); ++u) CHECK(x.col(u).cwiseAbs().maxCoeff() == 1.0);
    const Eigen::MatrixXd y = digit_inputs(d, m, NormalizationScope::digit);
    CHECK(y.cwiseAbs().maxCoeff() == 1.0);
    CHECK(y.cwiseAbs().colwise().maxCoeff().minCoeff() < 1.0);
}

TEST_CASE("wav ingestion resamples and labels") {
    testing::TempDir dir("wav");
    std::vector<double> tone(4000);
    for (std::size_t i = 0; i < tone.size(); ++i) tone[i] = 0.4 * std::sin(2 * std::numbers::pi * 440.0 * i / 8000.0);
    write_wav(dir / "3_s1_0.wav", tone, 8000);
    const DigitSample d = ingest_wav(dir / "3_s1_0.wav");
    CHECK(d.samples.size() == 6250);
    CHECK(d.label == 3);
    CHECK(d.speaker == "s1");
    CHECK(d.utterance == 0);
    double peak = 0.0;
    for (double v : d.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0));
}

TEST_CASE("wav round trip at the native rate") {
    testing::TempDir dir("wav16");
    std::vector<double> x{0.0, 0.5, -0.5, 0.25, -1.0};
    write_wav(dir / "x.wav", x, 12500);
    const WavAudio a = read_wav(dir / "x.wav");
    CHECK(a.sample_rate == 12500);
    CHECK(a.channels == 1);
    REQUIRE(a.mono.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(a.mono[i] == doctest::Approx(x[i]).epsilon(1e-4));
}

TEST_CASE("stereo is averaged to mono") {
    testing::TempDir dir("stereo");
    write_stereo(dir / "1_a_0.wav", 16384, -3277, 100);
    const WavAudio a = read_wav(dir / "1_a_0.wav");
    CHECK(a.channels == 2);
    REQUIRE(a.mono.size() == 100);
    CHECK(a.mono[0] == doctest::Approx((16384 - 3277) / 2.0 / 32768.0));
}

TEST_CASE("bad wav files") {
    testing::TempDir dir("bad");
    { std::ofstream(dir / "0_a_0.wav"); }
    CHECK_THROWS_AS((void)ingest_wav(dir / "0_a_0.wav"), InputError);
    write_stereo(dir / "0_a_1.wav", 0, 0, 0);
    CHECK_THROWS_AS((void)ingest_wav(dir / "0_a_1.wav"), InputError);
    CHECK_THROWS_AS((void)ingest_wav(dir / "missing.wav"), InputError);
    CHECK_THROWS_AS((void)parse_digit_filename("eleven.wav"), InputError);
    CHECK_THROWS_AS((void)parse_digit_filename("12_a_0.wav"), InputError);
}

TEST_CASE("filename convention") {
    const DigitLabel l = parse_digit_filename("/data/7_jackson_12.wav");
    CHECK(l.label == 7);
    CHECK(l.speaker == "jackson");
    CHECK(l.utterance == 12);
    CHECK(parse_digit_filename("2_first_last_3.wav").speaker == "first_last");
}

TEST_CASE("resampling length and endpoints") {
    const std::vector<double> ramp{0, 1, 2, 3, 4, 5, 6, 7};
    const auto up = resample_linear(ramp, 8.0, 16.0);
    CHECK(up.size() == 16);
    CHECK(up[1] == doctest::Approx(0.5));
    CHECK(resample_linear(ramp, 8.0, 4.0).size() == 4);
    CHECK(resample_linear(std::vector<double>(8000, 0.0), 8000, 12500).size() == 12500);
}

TEST_CASE("manifest and directory loading") {
    testing::TempDir dir("manifest");
    std::filesystem::create_directories(dir / "wavs");
    const std::vector<double> x(500, 0.1);
    write_wav(dir / "wavs/5_b_1.wav", x, 12500);
    write_wav(dir / "wavs/4_a_0.wav", x, 12500);
    {
        std::ofstream m(dir / "manifest.csv");
        m << "path,label,speaker,utterance\nwavs/5_b_1.wav,8,zed,3\n";
    }
    const Corpus c = load_manifest(dir / "manifest.csv");
    REQUIRE(c.size() == 1);
    CHECK(c[0].label == 8);
    CHECK(c[0].speaker == "zed");
    CHECK(c[0].utterance == 3);

    const Corpus d = load_wav_directory(dir / "wavs");
    REQUIRE(d.size() == 2);
    CHECK(d[0].label == 4);
    CHECK(d[1].label == 5);

    {
        std::ofstream m(dir / "bad.csv");
        m << "file,label\n";
    }
    CHECK_THROWS_AS((void)load_manifest(dir / "bad.csv"), InputError);
}

TEST_CASE("synthetic corpus") {
    const Corpus c = synth_corpus();
    CHECK(c.size() == 500);
    std::array<int, 10> per_class{};
    std::set<std::string> speakers;
    for (const auto& s : c) {
        per_class[static_cast<std::size_t>(s.label)]++;
        speakers.insert(s.speaker);
        REQUIRE(s.samples.size() >= static_cast<std::size_t>(0.3 * kSampleRate) - 1);
        REQUIRE(s.samples.size() <= static_cast<std::size_t>(0.7 * kSampleRate) + 1);
    }
    for (int n : per_class) CHECK(n == 50);
    CHECK(speakers.size() == 5);

    SynthOptions tiny;
    tiny.speakers = 1;
    tiny.utterances = 1;
    CHECK(synth_corpus(tiny).size() == 10);

    const Corpus again = synth_corpus();
    CHECK(corpus_hash(again) == corpus_hash(c));
    SynthOptions other;
    other.seed = 2;
    CHECK(corpus_hash(synth_corpus(other)) != corpus_hash(c));
}

TEST_CASE("feature cache round trip") {
    testing::TempDir dir("cache");
    std::vector<Eigen::MatrixXd> f{Eigen::MatrixXd::Random(126, 3), Eigen::MatrixXd::Random(126, 5)};
    save_feature_cache(dir / "f.bin", 42, f);
    const auto back = load_feature_cache(dir / "f.bin", 42);
    REQUIRE(back);
    REQUIRE(back->size() == 2);
    CHECK((*back)[1] == f[1]);
    CHECK_FALSE(load_feature_cache(dir / "f.bin", 43));
    CHECK_FALSE(load_feature_cache(dir / "none.bin", 42));
}

}
