#pragma once

// Amplitude-envelope model of the spin-wave delay-line active ring.
//
// The ring is a single nonlinear node with delayed feedback:
//
//     a(t+dt) = a(t) + dt/tau * ( g(v) * f(a(t - T_r)) - a(t) ) + noise
//     f(a)    = a / (1 + (a/x_sat)^2)
//
// where g(v) is the loop gain set by the control voltage on the microwave
// switch. Above threshold (g > 1) the ring auto-oscillates at
// a* = x_sat * sqrt(g - 1).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace ringrc {

enum class DiodeLaw { amplitude, power };

enum class RingModel {
    full,        ///< saturable nonlinear damping
    linearized,  ///< tangent model around the mid-range fixed point
};

struct RingParams {
    double round_trip_time = 236e-9;     ///< T_r [s]
    double gain_db = 0.49;               ///< loop gain at v_high relative to threshold [dB]
    double v_low = -0.025;               ///< [V]
    double v_high = 0.125;               ///< [V]
    double attenuation_span_db = 0.5;    ///< switch attenuation across [v_low, v_high]
    double sat_amplitude = 1.0;          ///< x_sat
    double relax_time = 0.1 * 236e-9;    ///< tau [s]
    double noise_rms = 1e-6;             ///< stationary rms of the additive noise
    double initial_amplitude = 1e-6;     ///< noise floor used to fill the history
    double dt = 236e-9 / 64;             ///< integration step [s]
    DiodeLaw diode = DiodeLaw::amplitude;
    RingModel model = RingModel::full;

    /// Defaults for a given round-trip time: tau = T_r/10, dt = T_r/dt_divisor.
    static RingParams with_round_trip(double round_trip_time, int dt_divisor = 64);

    /// Number of integration steps per round trip (T_r/dt, exact).
    [[nodiscard]] std::size_t delay_steps() const;

    /// Number of integration steps in `duration`; throws ConfigError if not an integer.
    [[nodiscard]] std::size_t steps_in(double duration) const;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

/// Linear loop gain for control voltage v (clamped to [v_low, v_high]).
[[nodiscard]] double loop_gain(double v, const RingParams& params);

/// Saturable transfer a / (1 + (a/x_sat)^2).
[[nodiscard]] double nl_transfer(double a, const RingParams& params);

/// Settled amplitude for a constant loop gain g (zero below threshold).
[[nodiscard]] double fixed_point_amplitude(double g, const RingParams& params);

/// Stateful integrator. Single-threaded; independent runs use independent states.
class RingState {
public:
    RingState(const RingParams& params, std::uint64_t seed);

    /// Advance by one dt under control voltage v; returns the diode reading.
    double step(double v);

    [[nodiscard]] double amplitude() const { return amplitude_; }
    [[nodiscard]] double delayed_amplitude() const { return history_[head_]; }
    [[nodiscard]] std::size_t history_length() const { return history_.size(); }
    [[nodiscard]] const RingParams& params() const { return params_; }

    [[nodiscard]] double reading() const;

private:
    RingParams params_;
    std::vector<double> history_;  // a(t - T_r) ... a(t - dt), oldest at head_
    std::size_t head_ = 0;
    double amplitude_ = 0.0;
    std::mt19937_64 rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    double noise_scale_ = 0.0;
    double rate_ = 0.0;
    // linearized model operating point
    double g0_ = 1.0;
    double a0_ = 0.0;
    double f0_ = 0.0;
    double slope0_ = 0.0;
};

/// Piecewise-constant control-voltage waveform.
struct Drive {
    std::vector<double> values;  ///< volts, one per interval
    double interval = 0.0;       ///< theta_int [s]
};

struct SimOptions {
    double preroll_time = 0.0;      ///< settle time before the drive, not recorded [s]
    std::optional<double> preroll_voltage;  ///< defaults to v_high
};

/// Diode readings sampled every dt across the whole drive.
struct Trace {
    std::vector<double> readings;
    std::vector<double> voltages;  ///< control voltage applied at each step
    double dt = 0.0;
};

/// Runs the ring over `drive`. Deterministic for a fixed seed.
[[nodiscard]] Trace simulate(const Drive& drive, const RingParams& params, std::uint64_t seed,
                             const SimOptions& options = {});

}  // namespace ringrc
