#include "ringrc/errors.hpp"
#include "ringrc/kernels.hpp"

#include <doctest.h>
#include <random>
#include <set>

using namespace ringrc;

namespace {

SweepSettings small_settings() {
    SweepSettings s;
    s.ring.dt = s.ring.round_trip_time / 16;
    s.samples = 8;
    s.split = SplitSpec{50, 300, 200};
    s.capacity.max_delay = 5;
    s.preroll_time = 300 * s.ring.round_trip_time;
    return s;
}

Corpus tiny_corpus() {
    SynthOptions o;
    o.speakers = 2;
    o.utterances = 3;
    return synth_corpus(o);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("sweep: serial and parallel agree bit for bit") {
    const SweepSettings s = small_settings();
    const BinarySeries series = gen_binary(550, 1);
    const double T = s.ring.round_trip_time;
    const std::vector<SweepPoint> points{{1.25 * T, 0.49}, {2.25 * T, 0.49}, {1.25 * T, 2.0}, {3.25 * T, 1.0}};
    const auto a = sweep_capacities(s, series, points, Execution::serial);
    const auto b = sweep_capacities(s, series, points, Execution::parallel);
    REQUIRE(a.size() == points.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ok());
        CHECK(a[i].stm.per_delay == b[i].stm.per_delay);
        CHECK(a[i].pc.per_delay == b[i].pc.per_delay);
        CHECK(a[i].point.interval == points[i].interval);
    }
    CHECK(worker_threads() >= 1);
}

TEST_CASE("sweep records failing points without aborting") {
    const SweepSettings s = small_settings();
    const BinarySeries series = gen_binary(550, 1);
    const double T = s.ring.round_trip_time;
    const std::vector<SweepPoint> points{{0.25 * T, 0.49}, {1.25 * T, 0.49}, {1.1 * T * 1.0001, 0.49}};
    const auto r = sweep_capacities(s, series, points, Execution::parallel);
    CHECK_FALSE(r[0].ok());  // 8 samples in 4 steps
    CHECK(r[1].ok());
    CHECK_FALSE(r[2].ok());  // not a multiple of dt
    CHECK(r[0].error.find("samples") != std::string::npos);
}

TEST_CASE("corpus preprocessing: serial and parallel agree") {
    const Corpus c = tiny_corpus();
    const auto fs = corpus_features(c, Execution::serial);
    const auto fp = corpus_features(c, Execution::parallel);
    REQUIRE(fs.size() == c.size());
    for (std::size_t i = 0; i < fs.size(); ++i) CHECK(fs[i] == fp[i]);
    const MaskMatrix m = make_mask(30, kFeatureCount, 3);
    const auto xs = corpus_inputs(fs, m, NormalizationScope::unit, Execution::serial);
    const auto xp = corpus_inputs(fs, m, NormalizationScope::unit, Execution::parallel);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(xs[i] == xp[i]);
        CHECK(xs[i].rows() == 30);
        CHECK(xs[i].cols() == fs[i].cols());
    }
}

TEST_CASE("folds cover the corpus exactly once") {
    SynthOptions o;
    o.speakers = 3;
    o.utterances = 10;
    const Corpus c = synth_corpus(o);
    const auto folds = make_folds(c, 10);
    REQUIRE(folds.size() == 10);
    std::multiset<std::size_t> seen;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        CHECK(folds[f].size() == 30);
        for (auto i : folds[f]) {
            seen.insert(i);
            CHECK(c[i].utterance == static_cast<int>(f));
        }
    }
    CHECK(seen.size() == c.size());
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(seen.count(i) == 1);
    CHECK_THROWS_AS((void)make_folds(c, 5), InputError);
    CHECK_THROWS_AS((void)make_folds(c, 1), ConfigError);
}

TEST_CASE("cross-validation on separable states") {
    // each digit's units point along its own axis plus noise
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Corpus c;
    std::vector<Eigen::MatrixXd> states;
    std::vector<int> labels;
    for (int u = 0; u < 4; ++u) {
        for (int d = 0; d < 10; ++d) {
            DigitSample s;
            s.label = d;
            s.utterance = u;
            s.speaker = "x";
            c.push_back(s);
            Eigen::MatrixXd m(12, 3);
            for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = 0.1 * n01(rng);
            m.row(d).array() += 1.0;
            states.push_back(m);
            labels.push_back(d);
        }
    }
    const auto folds = make_folds(c, 4);
    const auto serial = cross_validate(states, labels, folds, TrainOptions{}, Execution::serial);
    const auto parallel = cross_validate(states, labels, folds, TrainOptions{}, Execution::parallel);
    REQUIRE(serial.size() == 4);
    for (std::size_t f = 0; f < 4; ++f) {
        CHECK(serial[f].accuracy == 1.0);
        CHECK(serial[f].confusion.trace() == 10);
        CHECK(serial[f].confusion.sum() == 10);
        CHECK(serial[f].predictions == parallel[f].predictions);
        CHECK(serial[f].confusion == parallel[f].confusion);
    }
}

}
