#pragma once

#include "fdlpv/frf.hpp"

#include <cstdint>
#include <optional>

namespace fdlpv {

// Square-wave reference and scheduling, each smoothed by a Butterworth low-pass.
struct ScenarioOptions {
    double sample_rate = 200.0;
    double duration_s = 120.0;
    double reference_hz = 0.1;
    double reference_amplitude = 15.0;
    double scheduling_hz = 0.13;
    double scheduling_center = 40.0;
    double scheduling_amplitude = 10.0;
    double p_min = 30.0;
    double p_max = 50.0;
    int filter_order = 3;
    double filter_cutoff_hz = 0.7;
    double disturbance_std = 0.0;
    std::uint64_t seed = 1;
};

struct Scenario {
    TimeRecord reference;
    TimeRecord scheduling;
    TimeRecord disturbance;
};

// +amplitude on the first half period, -amplitude on the second.
[[nodiscard]] std::vector<double> square_wave(size_t n, double sample_rate, double frequency_hz, double amplitude);

[[nodiscard]] std::vector<double> lowpass(const std::vector<double>& x, int order, double cutoff_hz,
                                          double sample_rate);

[[nodiscard]] std::vector<double> clip(std::vector<double> x, double lo, double hi);

// Time-varying scenario; `frozen_p` pins the scheduling to a constant instead.
[[nodiscard]] Scenario make_scenario(const ScenarioOptions& options, std::optional<double> frozen_p = std::nullopt);

} // namespace fdlpv
