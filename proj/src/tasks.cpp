#include "ringrc/tasks.hpp"

#include "ringrc/errors.hpp"

#include <fmt/format.h>
#include <random>

namespace ringrc {

BinarySeries gen_binary(std::size_t length, std::uint64_t seed) {
    if (length == 0) throw ConfigError("binary series length must be > 0");
    std::mt19937_64 rng(seed);
    BinarySeries s;
    s.seed = seed;
    s.bits.resize(length);
    for (auto& b : s.bits) b = static_cast<std::uint8_t>(rng() >> 63);
    return s;
}

Target stm_target(const BinarySeries& s, std::size_t delay) {
    if (delay >= s.bits.size()) throw ConfigError("delay must be shorter than the series");
    Target t;
    t.first_valid = delay;
    t.values.assign(s.bits.size(), 0.0);
    for (std::size_t k = delay; k < s.bits.size(); ++k) t.values[k] = s.bits[k - delay];
    return t;
}

Target pc_target(const BinarySeries& s, std::size_t delay) {
    if (delay >= s.bits.size()) throw ConfigError("delay must be shorter than the series");
    Target t;
    t.first_valid = delay;
    t.values.assign(s.bits.size(), 0.0);
    for (std::size_t k = delay; k < s.bits.size(); ++k) {
        std::uint8_t parity = 0;
        for (std::size_t j = 0; j <= delay; ++j) parity ^= s.bits[k - j];
        t.values[k] = parity;
    }
    return t;
}

CapacityResult capacity(const OutputMatrix& outputs, const std::vector<Target>& targets,
                        const SplitSpec& split, std::size_t first_delay, const TrainOptions& readout) {
    const auto cols = static_cast<std::size_t>(outputs.cols());
    if (cols < split.total()) {
        throw InputError(fmt::format("{} output columns, split needs {}", cols, split.total()));
    }
    if (split.train == 0 || split.test < 2) throw ConfigError("split needs train > 0 and test >= 2");

    CapacityResult result;
    result.first_delay = first_delay;
    const std::size_t test_begin = split.washout + split.train;
    const Eigen::MatrixXd test = outputs.values.middleCols(static_cast<Eigen::Index>(test_begin),
                                                           static_cast<Eigen::Index>(split.test));
    for (const Target& target : targets) {
        if (target.values.size() < split.total()) throw InputError("target shorter than split");
        if (target.first_valid >= test_begin) throw InputError("target has no valid training columns");
        const std::size_t begin = std::max(split.washout, target.first_valid);
        const std::size_t count = test_begin - begin;

        const Eigen::MatrixXd V = outputs.values.middleCols(static_cast<Eigen::Index>(begin),
                                                            static_cast<Eigen::Index>(count));
        const Eigen::Map<const Eigen::RowVectorXd> y(target.values.data() + begin,
                                                     static_cast<Eigen::Index>(count));
        const WeightMatrix W = train(V, y, readout);
        const Eigen::RowVectorXd predicted = predict(W, test).row(0);
        const double r2 = squared_correlation(
            std::span<const double>(predicted.data(), split.test),
            std::span<const double>(target.values.data() + test_begin, split.test));
        result.per_delay.push_back(r2);
        result.capacity += r2;
    }
    return result;
}

CapacityResult task_capacity(BinaryTask task, const OutputMatrix& outputs, const BinarySeries& series,
                             const SplitSpec& split, const CapacityOptions& options) {
    const std::size_t first = options.include_zero_delay ? 0 : 1;
    std::vector<Target> targets;
    for (std::size_t d = first; d <= options.max_delay; ++d) {
        targets.push_back(task == BinaryTask::stm ? stm_target(series, d) : pc_target(series, d));
    }
    return capacity(outputs, targets, split, first, options.readout);
}

}  // namespace ringrc
