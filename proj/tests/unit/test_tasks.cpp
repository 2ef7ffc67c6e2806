#include "ringrc/errors.hpp"
#include "ringrc/tasks.hpp"

#include <doctest.h>
#include <numeric>
#include <random>

using namespace ringrc;

namespace {

BinarySeries series(std::vector<std::uint8_t> bits) {
    BinarySeries s;
    s.bits = std::move(bits);
    return s;
}

}  // namespace

TEST_SUITE("tasks") {

TEST_CASE("binary series") {
    const BinarySeries s = gen_binary(2200, 1);
    CHECK(s.bits.size() == 2200);
    const double mean = std::accumulate(s.bits.begin(), s.bits.end(), 0.0) / 2200.0;
    CHECK(mean >= 0.45);
    CHECK(mean <= 0.55);
    for (auto b : s.bits) REQUIRE(b <= 1);
    CHECK(gen_binary(2200, 1).bits == s.bits);
    CHECK(gen_binary(2200, 2).bits != s.bits);
    CHECK_THROWS_AS((void)gen_binary(0, 1), ConfigError);
}

TEST_CASE("short-term memory target") {
    const auto s = series({1, 0, 1, 1});
    const Target t = stm_target(s, 1);
    CHECK(t.first_valid == 1);
    CHECK(std::vector<double>(t.values.begin() + 1, t.values.end()) == std::vector<double>{1, 0, 1});
    CHECK(stm_target(s, 0).values == std::vector<double>{1, 0, 1, 1});
    CHECK_THROWS_AS((void)stm_target(s, 4), ConfigError);
}

TEST_CASE("parity target") {
    const Target t = pc_target(series({1, 0, 1, 1}), 1);
    CHECK(std::vector<double>(t.values.begin() + 1, t.values.end()) == std::vector<double>{1, 1, 0});
    const Target three = pc_target(series({1, 1, 1, 1, 1}), 2);
    CHECK(three.first_valid == 2);
    CHECK(std::vector<double>(three.values.begin() + 2, three.values.end()) == std::vector<double>{1, 1, 1});
    const Target zeros = pc_target(series(std::vector<std::uint8_t>(10, 0)), 3);
    for (double v : zeros.values) CHECK(v == 0.0);
}

TEST_CASE("perfect linear embedding gives unit r2") {
    const BinarySeries s = gen_binary(2200, 4);
    const std::size_t dmax = 5;
    OutputMatrix out;
    out.values = Eigen::MatrixXd::Zero(dmax, 2200);
    std::vector<Target> targets;
    for (std::size_t d = 1; d <= dmax; ++d) {
        targets.push_back(stm_target(s, d));
        for (std::size_t k = 0; k < 2200; ++k)
            out.values(static_cast<Eigen::Index>(d - 1), static_cast<Eigen::Index>(k)) = targets.back().values[k];
    }
    // mix the rows so the readout has to undo a linear map
    Eigen::MatrixXd mix = Eigen::MatrixXd::Identity(dmax, dmax);
    mix(0, 1) = 0.5;
    mix(3, 2) = -2.0;
    out.values = mix * out.values;
    const CapacityResult r = capacity(out, targets, SplitSpec{}, 1);
    REQUIRE(r.per_delay.size() == dmax);
    for (double r2 : r.per_delay) CHECK(r2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.capacity == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("noise reservoir stays under the null bound") {
    // spurious capacity from 20 random features over 20 delays at 1000 test points
    std::mt19937_64 rng(123);
    std::normal_distribution<double> n01;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const BinarySeries s = gen_binary(2200, 1000 + trial);
        OutputMatrix out;
        out.values.resize(20, 2200);
        for (Eigen::Index i = 0; i < out.values.size(); ++i) out.values.data()[i] = n01(rng);
        CapacityOptions opts;
        const double stm = task_capacity(BinaryTask::stm, out, s, SplitSpec{}, opts).capacity;
        const double pc = task_capacity(BinaryTask::pc, out, s, SplitSpec{}, opts).capacity;
        worst = std::max({worst, stm, pc});
    }
    CHECK(worst < 0.5);
}

TEST_CASE("capacity stays within bounds") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    const BinarySeries s = gen_binary(2200, 9);
    OutputMatrix out;
    out.values.resize(20, 2200);
    for (Eigen::Index c = 0; c < 2200; ++c)
        for (Eigen::Index r = 0; r < 20; ++r)
            out.values(r, c) = (c >= r ? s.bits[static_cast<std::size_t>(c - r)] : 0.0) + 0.3 * n01(rng);
    for (BinaryTask task : {BinaryTask::stm, BinaryTask::pc}) {
        const CapacityResult r = task_capacity(task, out, s, SplitSpec{});
        CHECK(r.per_delay.size() == 20);
        CHECK(r.first_delay == 1);
        double sum = 0.0;
        for (double r2 : r.per_delay) {
            CHECK(r2 >= 0.0);
            CHECK(r2 <= 1.0);
            sum += r2;
        }
        CHECK(r.capacity == doctest::Approx(sum));
        CHECK(r.capacity <= 20.0);
    }
    CapacityOptions with_zero;
    with_zero.include_zero_delay = true;
    const CapacityResult z = task_capacity(BinaryTask::stm, out, s, SplitSpec{}, with_zero);
    CHECK(z.per_delay.size() == 21);
    CHECK(z.first_delay == 0);
}

TEST_CASE("capacity rejects short outputs") {
    OutputMatrix out;
    out.values = Eigen::MatrixXd::Zero(3, 100);
    const BinarySeries s = gen_binary(100, 1);
    CHECK_THROWS_AS((void)task_capacity(BinaryTask::stm, out, s, SplitSpec{}), InputError);
}

}
