#include "fdlpv/workflow.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/weights.hpp"

#include <cmath>
#include <numbers>

namespace fdlpv {

RationalTf default_controller0(double sample_rate) {
    const std::array<double, 2> num{0.7, -0.63};
    const std::array<double, 2> den{1.0, -0.95};
    return RationalTf::from_descending(num, den, sample_rate);
}

FrequencyGrid default_grid(size_t n, double sample_rate) {
    const double lo = 2.0 * std::numbers::pi * 0.05 / sample_rate;
    return FrequencyGrid::logarithmic(lo, 0.999 * std::numbers::pi, n, sample_rate);
}

std::vector<CoprimeFrfPair> analytic_coprime_data(const LpvSurrogateModel& model, const RationalTf& controller0,
                                                  const std::vector<double>& points, const GridPtr& grid) {
    std::vector<CoprimeFrfPair> out;
    out.reserve(points.size());
    for (double p : points) {
        const CoprimeFactorization f = frozen_coprime_from_model(frozen_tf(model, p), controller0, *grid);
        out.push_back({FrfResponse(f.pair.n_g.values(), grid), FrfResponse(f.pair.d_g.values(), grid)});
    }
    return out;
}

EstimatedPoint estimate_point(const LpvSurrogateModel& model, const RationalTf& controller0, double p,
                              const GridPtr& grid, const EstimationOptions& options) {
    const Experiment exp = generate_experiment(model, controller0, p, options.experiment);
    FrfResponse sens = etfe_estimate(exp.d, exp.u_g, *grid, options.window, options.segments);
    FrfResponse proc = etfe_estimate(exp.d, exp.y, *grid, options.window, options.segments);
    sens = FrfResponse(sens.values(), grid);
    proc = FrfResponse(proc.values(), grid);
    FrfResponse plant = closed_loop_to_plant(sens, proc, options.sensitivity_threshold);
    return {std::move(sens), std::move(proc), std::move(plant)};
}

SynthesisProblem surrogate_problem(const LpvSurrogateModel& model, const SurrogateProblemOptions& o) {
    SynthesisProblem pr;
    pr.grid = make_grid(default_grid(o.frequencies, model.sample_rate));
    pr.scheduling = SchedulingGrid(o.points, model.p_min, model.p_max);
    pr.data = analytic_coprime_data(model, default_controller0(model.sample_rate), o.points, pr.grid);
    DefaultWeightOptions wo;
    wo.sample_rate = model.sample_rate;
    pr.weights = default_weights(wo);
    pr.basis_n = ObfBasis::laguerre(o.pole, o.order_n);
    pr.basis_d = ObfBasis::laguerre(o.pole, o.order_d);
    pr.scheduling_basis = SchedulingBasis(o.scheduling, o.scheduling_degree, model.p_min, model.p_max);
    pr.options = o.synthesis;
    return pr;
}

} // namespace fdlpv
