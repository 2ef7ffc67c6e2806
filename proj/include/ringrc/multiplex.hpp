#pragma once

// Time-multiplexing: input vectors become piecewise-constant drives, one
// interval theta_int per virtual neuron, and the diode trace is sampled back
// into reservoir state vectors.

#include "ringrc/ring.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace ringrc {

/// Reservoir readings. One column per input vector (sound unit or input step),
/// n * N_theta rows; row j*n + k holds sample k of virtual neuron j.
struct OutputMatrix {
    Eigen::MatrixXd values;
    std::size_t samples_per_neuron = 1;  ///< n
    std::size_t neurons = 1;             ///< N_theta
    double interval = 0.0;
    double gain_db = 0.0;
    std::uint64_t seed = 0;

    [[nodiscard]] Eigen::Index rows() const { return values.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return values.cols(); }

    /// Keeps the samples a run with fewer samples per neuron would have taken.
    /// Requires samples_per_neuron % n == 0.
    [[nodiscard]] OutputMatrix subsample(std::size_t n) const;
};

/// Affine map [-1, 1] -> [v_low, v_high]; throws InputError outside [-1, 1].
[[nodiscard]] Drive encode(std::span<const double> x, double interval, const RingParams& params);

/// Bit 0 -> v_low, bit 1 -> v_high.
[[nodiscard]] Drive encode_bits(std::span<const std::uint8_t> bits, double interval,
                                const RingParams& params);

/// Step offsets (within an interval of `steps` dt) of the n samples: the k-th
/// sample is taken after floor((k+1)*steps/n) steps, so the last one sits on
/// the interval boundary.
[[nodiscard]] std::vector<std::size_t> sample_offsets(std::size_t steps, std::size_t n);

/// Samples a full trace. Consecutive groups of `neurons` intervals form one column.
[[nodiscard]] OutputMatrix sample_outputs(const Trace& trace, double interval, std::size_t n,
                                          std::size_t neurons = 1);

struct ReservoirOptions {
    double preroll_time = 0.0;  ///< settle time at v_high before the first input
};

/// encode -> simulate -> sample without storing the trace. `inputs` holds one
/// input vector per column (N_theta rows); the ring state runs continuously
/// across all columns.
[[nodiscard]] OutputMatrix run_reservoir(const Eigen::MatrixXd& inputs, double interval,
                                         std::size_t n, const RingParams& params,
                                         std::uint64_t seed, const ReservoirOptions& options = {});

/// Binary-task form: one interval per bit, n samples per interval.
[[nodiscard]] OutputMatrix run_reservoir_bits(std::span<const std::uint8_t> bits, double interval,
                                              std::size_t n, const RingParams& params,
                                              std::uint64_t seed,
                                              const ReservoirOptions& options = {});

}  // namespace ringrc
