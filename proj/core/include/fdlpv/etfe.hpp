#pragma once

#include "fdlpv/frf.hpp"

namespace fdlpv {

enum class Window { Rectangular, Hann };

[[nodiscard]] Window parse_window(const std::string& name);

// H1 estimate sum(Y X*) / sum(|X|^2) over Welch segments of length n/segments
// (50% overlap when segments > 1), linearly interpolated onto `grid`.
[[nodiscard]] FrfResponse etfe_estimate(const TimeRecord& input, const TimeRecord& output, const FrequencyGrid& grid,
                                        Window window, int segments);

// Pointwise proc_sens / sens. Throws Excitation listing every frequency where |sens| <= threshold.
[[nodiscard]] FrfResponse closed_loop_to_plant(const FrfResponse& sens, const FrfResponse& proc_sens,
                                               double threshold = 1e-8);

} // namespace fdlpv
