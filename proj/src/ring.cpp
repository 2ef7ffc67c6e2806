#include "ringrc/ring.hpp"

#include "ringrc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace ringrc {

namespace {

bool is_integer_ratio(double ratio) {
    return std::abs(ratio - std::round(ratio)) <= 1e-6 * std::max(1.0, std::abs(ratio));
}

}  // namespace

RingParams RingParams::with_round_trip(double round_trip_time, int dt_divisor) {
    RingParams p;
    p.round_trip_time = round_trip_time;
    p.relax_time = 0.1 * round_trip_time;
    p.dt = round_trip_time / dt_divisor;
    return p;
}

std::size_t RingParams::delay_steps() const {
    return static_cast<std::size_t>(std::llround(round_trip_time / dt));
}

std::size_t RingParams::steps_in(double duration) const {
    const double ratio = duration / dt;
    if (!(duration > 0.0) || !is_integer_ratio(ratio)) {
        throw ConfigError(fmt::format("duration {} s is not a positive integer multiple of dt = {} s",
                                      duration, dt));
    }
    return static_cast<std::size_t>(std::llround(ratio));
}

void RingParams::validate() const {
    if (!(round_trip_time > 0.0)) throw ConfigError("round_trip_time must be > 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (dt > round_trip_time / 8.0 * (1.0 + 1e-12)) throw ConfigError("dt must be <= T_r/8");
    if (!is_integer_ratio(round_trip_time / dt)) {
        throw ConfigError(fmt::format("T_r/dt = {} is not an integer", round_trip_time / dt));
    }
    if (!(relax_time > 0.0)) throw ConfigError("relax_time must be > 0");
    if (!(sat_amplitude > 0.0)) throw ConfigError("sat_amplitude must be > 0");
    if (!(v_low < v_high)) throw ConfigError("v_low must be < v_high");
    if (!(attenuation_span_db >= 0.0)) throw ConfigError("attenuation_span_db must be >= 0");
    if (!(noise_rms >= 0.0)) throw ConfigError("noise_rms must be >= 0");
    if (!(initial_amplitude >= 0.0)) throw ConfigError("initial_amplitude must be >= 0");
    if (!std::isfinite(gain_db)) throw ConfigError("gain_db must be finite");
}

double loop_gain(double v, const RingParams& params) {
    const double clamped = std::clamp(v, params.v_low, params.v_high);
    const double frac = (params.v_high - clamped) / (params.v_high - params.v_low);
    const double attenuation_db = -params.attenuation_span_db * frac;
    return std::pow(10.0, (params.gain_db + attenuation_db) / 20.0);
}

double nl_transfer(double a, const RingParams& params) {
    const double r = a / params.sat_amplitude;
    return a / (1.0 + r * r);
}

double fixed_point_amplitude(double g, const RingParams& params) {
    return g > 1.0 ? params.sat_amplitude * std::sqrt(g - 1.0) : 0.0;
}

RingState::RingState(const RingParams& params, std::uint64_t seed)
    : params_(params), rng_(seed) {
    params_.validate();
    rate_ = params_.dt / params_.relax_time;
    noise_scale_ = params_.noise_rms * std::sqrt(2.0 * rate_);

    double start = params_.initial_amplitude;
    if (params_.model == RingModel::linearized) {
        g0_ = loop_gain(0.5 * (params_.v_low + params_.v_high), params_);
        a0_ = fixed_point_amplitude(g0_, params_);
        f0_ = nl_transfer(a0_, params_);
        const double r2 = (a0_ / params_.sat_amplitude) * (a0_ / params_.sat_amplitude);
        slope0_ = (1.0 - r2) / ((1.0 + r2) * (1.0 + r2));
        start = a0_;
    }
    history_.assign(params_.delay_steps(), start);
    amplitude_ = start;
}

double RingState::step(double v) {
    const double delayed = history_[head_];
    const double g = loop_gain(v, params_);

    double target = 0.0;
    if (params_.model == RingModel::full) {
        target = g * nl_transfer(delayed, params_);
    } else {
        target = g0_ * f0_ + g0_ * slope0_ * (delayed - a0_) + f0_ * (g - g0_);
    }

    double next = amplitude_ + rate_ * (target - amplitude_);
    if (noise_scale_ > 0.0) next += noise_scale_ * normal_(rng_);
    if (params_.model == RingModel::full) next = std::max(next, 0.0);
    if (!std::isfinite(next)) throw std::logic_error("ring amplitude became non-finite");

    history_[head_] = amplitude_;
    head_ = head_ + 1 == history_.size() ? 0 : head_ + 1;
    amplitude_ = next;
    return reading();
}

double RingState::reading() const {
    return params_.diode == DiodeLaw::power ? amplitude_ * amplitude_ : amplitude_;
}

Trace simulate(const Drive& drive, const RingParams& params, std::uint64_t seed,
               const SimOptions& options) {
    params.validate();
    if (drive.values.empty()) throw ConfigError("drive is empty");
    const std::size_t per_interval = params.steps_in(drive.interval);

    RingState state(params, seed);
    if (options.preroll_time > 0.0) {
        const double v = options.preroll_voltage.value_or(params.v_high);
        const std::size_t steps = params.steps_in(options.preroll_time);
        for (std::size_t i = 0; i < steps; ++i) state.step(v);
    }

    Trace trace;
    trace.dt = params.dt;
    trace.readings.reserve(drive.values.size() * per_interval);
    trace.voltages.reserve(drive.values.size() * per_interval);
    for (double v : drive.values) {
        for (std::size_t i = 0; i < per_interval; ++i) {
            trace.readings.push_back(state.step(v));
            trace.voltages.push_back(v);
        }
    }
    return trace;
}

}  // namespace ringrc
