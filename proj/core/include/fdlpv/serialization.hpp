#pragma once

#include "fdlpv/analysis.hpp"
#include "fdlpv/realization.hpp"
#include "fdlpv/synthesis.hpp"

#include <string>

namespace fdlpv {

// Controller file: bases, scheduling basis and coefficient tensors.
[[nodiscard]] std::string controller_to_json(const ControllerParameters& theta);
[[nodiscard]] ControllerParameters controller_from_json(const std::string& text);
void save_controller(const ControllerParameters& theta, const std::string& path);
[[nodiscard]] ControllerParameters load_controller(const std::string& path);

// theta, gamma, per-(p, omega, channel) margins and bisection telemetry.
[[nodiscard]] std::string synthesis_result_to_json(const SynthesisResult& result, const SynthesisProblem& problem);

struct StoredResult {
    ControllerParameters theta;
    double gamma = 0.0;
    double epsilon = 0.0;
};
[[nodiscard]] StoredResult synthesis_result_from_json(const std::string& text);

[[nodiscard]] std::string certificate_to_json(const Certificate& cert);

// {l2_error, linf_error, overshoot_pct, settling_s}
[[nodiscard]] std::string metrics_to_json(const StepMetrics& m);

// {"num": [...], "den": [...]} in descending powers of z.
[[nodiscard]] std::string rational_to_json(const RationalTf& tf);
[[nodiscard]] RationalTf rational_from_json(const std::string& text, double sample_rate);

} // namespace fdlpv
