#pragma once

#include "fdlpv/etfe.hpp"
#include "fdlpv/plant.hpp"
#include "fdlpv/synthesis.hpp"

namespace fdlpv {

// Lead-lag 0.7 (z - 0.9) / (z - 0.95): stable and stabilizing for surrogate_v1 over [30, 50].
[[nodiscard]] RationalTf default_controller0(double sample_rate);

// n log-spaced frequencies from 0.05 Hz to 0.999 pi rad/sample.
[[nodiscard]] FrequencyGrid default_grid(size_t n, double sample_rate);

// Exact coprime factor data of the frozen surrogate at every operating point.
[[nodiscard]] std::vector<CoprimeFrfPair> analytic_coprime_data(const LpvSurrogateModel& model,
                                                                const RationalTf& controller0,
                                                                const std::vector<double>& points,
                                                                const GridPtr& grid);

struct EstimationOptions {
    ExperimentOptions experiment;
    Window window = Window::Hann;
    int segments = 4;
    double sensitivity_threshold = 1e-8;
};

struct EstimatedPoint {
    FrfResponse sens;
    FrfResponse proc_sens;
    FrfResponse plant;
};

// Closed-loop experiment at p followed by ETFE of S and SG from the disturbance d.
[[nodiscard]] EstimatedPoint estimate_point(const LpvSurrogateModel& model, const RationalTf& controller0, double p,
                                            const GridPtr& grid, const EstimationOptions& options);

// Full surrogate problem: Laguerre bases, default weights, analytic data.
struct SurrogateProblemOptions {
    std::vector<double> points{30.0, 40.0, 50.0};
    size_t frequencies = 512;
    double pole = 0.7;
    int order_n = 5;
    int order_d = 5;
    SchedulingKind scheduling = SchedulingKind::Affine;
    int scheduling_degree = 1;
    SynthesisOptions synthesis;
};

[[nodiscard]] SynthesisProblem surrogate_problem(const LpvSurrogateModel& model,
                                                 const SurrogateProblemOptions& options = {});

} // namespace fdlpv
