#pragma once

// Short-term memory and parity-check benchmarks.

#include "ringrc/multiplex.hpp"
#include "ringrc/readout.hpp"

#include <cstdint>
#include <vector>

namespace ringrc {

struct BinarySeries {
    std::vector<std::uint8_t> bits;
    std::uint64_t seed = 0;
};

struct SplitSpec {
    std::size_t washout = 200;
    std::size_t train = 1000;
    std::size_t test = 1000;

    [[nodiscard]] std::size_t total() const { return washout + train + test; }
};

/// Target sequence for one delay. Entries before `first_valid` are undefined
/// and never used for fitting or scoring.
struct Target {
    std::vector<double> values;
    std::size_t first_valid = 0;
};

struct CapacityResult {
    std::vector<double> per_delay;  ///< r^2 for delays first_delay .. first_delay + size - 1
    std::size_t first_delay = 1;
    double capacity = 0.0;
};

enum class BinaryTask { stm, pc };

struct CapacityOptions {
    std::size_t max_delay = 20;
    bool include_zero_delay = false;
    TrainOptions readout{1e-8, false, 1e-12};
};

/// I.i.d. uniform bits, deterministic per seed.
[[nodiscard]] BinarySeries gen_binary(std::size_t length, std::uint64_t seed);

/// y_k = s_{k-d}.
[[nodiscard]] Target stm_target(const BinarySeries& s, std::size_t delay);

/// y_k = s_k xor s_{k-1} xor ... xor s_{k-d}.
[[nodiscard]] Target pc_target(const BinarySeries& s, std::size_t delay);

/// Fits one readout per target on the train split and scores r^2 on the test split.
/// targets[i] corresponds to delay first_delay + i.
[[nodiscard]] CapacityResult capacity(const OutputMatrix& outputs, const std::vector<Target>& targets,
                                      const SplitSpec& split, std::size_t first_delay = 1,
                                      const TrainOptions& readout = {1e-8, false, 1e-12});

/// Builds the targets for `task` and evaluates the capacity.
[[nodiscard]] CapacityResult task_capacity(BinaryTask task, const OutputMatrix& outputs,
                                           const BinarySeries& series, const SplitSpec& split,
                                           const CapacityOptions& options = {});

}  // namespace ringrc
