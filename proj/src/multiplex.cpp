#include "ringrc/multiplex.hpp"

#include "ringrc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace ringrc {

namespace {

double to_voltage(double x, const RingParams& params) {
    return params.v_low + 0.5 * (x + 1.0) * (params.v_high - params.v_low);
}

std::size_t checked_steps(double interval, std::size_t n, const RingParams& params) {
    if (n == 0) throw ConfigError("samples per interval must be >= 1");
    const std::size_t steps = params.steps_in(interval);
    if (n > steps) {
        throw ConfigError(fmt::format("{} samples do not fit in an interval of {} steps", n, steps));
    }
    return steps;
}

OutputMatrix run_drive(const Drive& drive, std::size_t neurons, std::size_t n,
                       const RingParams& params, std::uint64_t seed,
                       const ReservoirOptions& options) {
    params.validate();
    if (drive.values.empty()) throw InputError("input sequence is empty");
    const std::size_t steps = checked_steps(drive.interval, n, params);
    const auto offsets = sample_offsets(steps, n);

    OutputMatrix out;
    out.samples_per_neuron = n;
    out.neurons = neurons;
    out.interval = drive.interval;
    out.gain_db = params.gain_db;
    out.seed = seed;
    out.values.resize(static_cast<Eigen::Index>(n * neurons),
                      static_cast<Eigen::Index>(drive.values.size() / neurons));

    RingState state(params, seed);
    if (options.preroll_time > 0.0) {
        const std::size_t pre = params.steps_in(options.preroll_time);
        for (std::size_t i = 0; i < pre; ++i) state.step(params.v_high);
    }

    for (std::size_t i = 0; i < drive.values.size(); ++i) {
        const double v = drive.values[i];
        const auto col = static_cast<Eigen::Index>(i / neurons);
        const std::size_t row0 = (i % neurons) * n;
        std::size_t k = 0;
        for (std::size_t s = 1; s <= steps; ++s) {
            const double r = state.step(v);
            if (k < n && offsets[k] == s) {
                out.values(static_cast<Eigen::Index>(row0 + k), col) = r;
                ++k;
            }
        }
    }
    return out;
}

}  // namespace

OutputMatrix OutputMatrix::subsample(std::size_t n) const {
    if (n == 0 || samples_per_neuron % n != 0) {
        throw ConfigError(fmt::format("cannot derive {} samples per neuron from {}", n,
                                      samples_per_neuron));
    }
    const std::size_t stride = samples_per_neuron / n;
    OutputMatrix out = *this;
    out.samples_per_neuron = n;
    out.values.resize(static_cast<Eigen::Index>(n * neurons), values.cols());
    for (std::size_t j = 0; j < neurons; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto src = static_cast<Eigen::Index>(j * samples_per_neuron + (k + 1) * stride - 1);
            out.values.row(static_cast<Eigen::Index>(j * n + k)) = values.row(src);
        }
    }
    return out;
}

Drive encode(std::span<const double> x, double interval, const RingParams& params) {
    if (!(interval > 0.0)) throw ConfigError("interval must be > 0");
    Drive d;
    d.interval = interval;
    d.values.reserve(x.size());
    for (double xi : x) {
        if (!(std::abs(xi) <= 1.0 + 1e-12)) {
            throw InputError(fmt::format("input value {} outside [-1, 1]", xi));
        }
        d.values.push_back(to_voltage(std::clamp(xi, -1.0, 1.0), params));
    }
    return d;
}

Drive encode_bits(std::span<const std::uint8_t> bits, double interval, const RingParams& params) {
    if (!(interval > 0.0)) throw ConfigError("interval must be > 0");
    Drive d;
    d.interval = interval;
    d.values.reserve(bits.size());
    for (auto b : bits) {
        if (b > 1) throw InputError("binary input must be 0 or 1");
        d.values.push_back(b ? params.v_high : params.v_low);
    }
    return d;
}

std::vector<std::size_t> sample_offsets(std::size_t steps, std::size_t n) {
    std::vector<std::size_t> offsets(n);
    for (std::size_t k = 0; k < n; ++k) offsets[k] = (k + 1) * steps / n;
    return offsets;
}

OutputMatrix sample_outputs(const Trace& trace, double interval, std::size_t n, std::size_t neurons) {
    if (neurons == 0) throw ConfigError("neurons must be >= 1");
    if (n == 0) throw ConfigError("samples per interval must be >= 1");
    const double ratio = interval / trace.dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) > 1e-6 * ratio) {
        throw ConfigError("interval is not an integer multiple of the trace step");
    }
    if (n > steps) {
        throw ConfigError(fmt::format("{} samples do not fit in an interval of {} steps", n, steps));
    }
    if (trace.readings.size() % steps != 0) throw InputError("trace does not hold whole intervals");
    const std::size_t intervals = trace.readings.size() / steps;
    if (intervals % neurons != 0) throw InputError("interval count is not a multiple of neurons");

    const auto offsets = sample_offsets(steps, n);
    OutputMatrix out;
    out.samples_per_neuron = n;
    out.neurons = neurons;
    out.interval = interval;
    out.values.resize(static_cast<Eigen::Index>(n * neurons),
                      static_cast<Eigen::Index>(intervals / neurons));
    for (std::size_t i = 0; i < intervals; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            out.values(static_cast<Eigen::Index>((i % neurons) * n + k),
                       static_cast<Eigen::Index>(i / neurons)) =
                trace.readings[i * steps + offsets[k] - 1];
        }
    }
    return out;
}

OutputMatrix run_reservoir(const Eigen::MatrixXd& inputs, double interval, std::size_t n,
                           const RingParams& params, std::uint64_t seed,
                           const ReservoirOptions& options) {
    if (inputs.size() == 0) throw InputError("input sequence is empty");
    // column-major storage is already the concatenated neuron order
    const Drive drive = encode(std::span<const double>(inputs.data(), static_cast<std::size_t>(inputs.size())),
                               interval, params);
    return run_drive(drive, static_cast<std::size_t>(inputs.rows()), n, params, seed, options);
}

OutputMatrix run_reservoir_bits(std::span<const std::uint8_t> bits, double interval, std::size_t n,
                                const RingParams& params, std::uint64_t seed,
                                const ReservoirOptions& options) {
    if (bits.empty()) throw InputError("input sequence is empty");
    return run_drive(encode_bits(bits, interval, params), 1, n, params, seed, options);
}

}  // namespace ringrc
