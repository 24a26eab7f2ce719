#pragma once

#include "fdlpv/plant.hpp"
#include "fdlpv/synthesis.hpp"

#include <Eigen/Dense>

namespace fdlpv {

// K_p = F_u(K, Delta(p)) with
//   x+ = A x + B1 w + B2 e,  z = C1 x + D11 w + D12 e,  u = C2 x + D21 w + D22 e,  w = Delta(p) z,
// Delta(p) = diag(psi(p), psi(p)) acting on [z_N; z_D].
struct LfrController {
    Eigen::MatrixXd a;
    Eigen::MatrixXd b1;
    Eigen::VectorXd b2;
    Eigen::MatrixXd c1;
    Eigen::MatrixXd d11;
    Eigen::VectorXd d12;
    Eigen::RowVectorXd c2;
    Eigen::RowVectorXd d21;
    double d22 = 0.0;
    SchedulingBasis scheduling;
    int n_states_n = 0;
    int n_states_d = 0;
    double sample_rate = 1.0;

    [[nodiscard]] int states() const noexcept { return static_cast<int>(a.rows()); }
    [[nodiscard]] Eigen::VectorXd delta(double p) const;

    struct Frozen {
        Eigen::MatrixXd a;
        Eigen::VectorXd b;
        Eigen::RowVectorXd c;
        double d = 0.0;
    };
    // Closed upper LFT at constant p.
    [[nodiscard]] Frozen frozen(double p) const;

    // One sample: returns u_k for input e_k and advances `state` with p_k.
    double step(Eigen::VectorXd& state, double e, double p) const;
};

// Series connection e -> N -> D^{-1}; requires v_0(p) = 1.
[[nodiscard]] LfrController build_lfr(const ControllerParameters& theta);

[[nodiscard]] FrfResponse frozen_controller_frf(const LfrController& ctrl, double p, const FrequencyGrid& grid);

// e = r - y, u = K_p e, plant input u + d; plant strictly proper.
[[nodiscard]] Trace simulate_closed_loop(const LpvSurrogateModel& model, const LfrController& ctrl,
                                         const TimeRecord& reference, const TimeRecord& scheduling,
                                         const TimeRecord& disturbance);

struct StepMetrics {
    double l2_error = 0.0;
    double linf_error = 0.0;
    double overshoot_pct = 0.0;
    double settling_s = 0.0;
    size_t edges = 0;
};

// Edges are midpoint crossings of r; the target after an edge is the median of r up to the next edge,
// and the segment ends where r leaves the 2% band of that target. Overshoot and settling (y within 2%
// of the target) are worst cases over edges; both stay 0 for a constant reference.
[[nodiscard]] StepMetrics step_metrics(const Trace& trace);

} // namespace fdlpv
