#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace fdlpv {

// maximize c'x subject to
//   s_i'x + s0_i >= |(ur_i'x + ur0_i) + j (ui_i'x + ui0_i)|   (disc constraints)
//   g_j'x <= h_j                                              (linear constraints)
struct ConeProgram {
    Eigen::VectorXd objective;
    Eigen::MatrixXd s;
    Eigen::VectorXd s0;
    Eigen::MatrixXd ur;
    Eigen::VectorXd ur0;
    Eigen::MatrixXd ui;
    Eigen::VectorXd ui0;
    Eigen::MatrixXd g;
    Eigen::VectorXd h;

    [[nodiscard]] Eigen::Index variables() const noexcept { return objective.size(); }
    [[nodiscard]] Eigen::Index cones() const noexcept { return s.rows(); }
    [[nodiscard]] Eigen::Index linear() const noexcept { return g.rows(); }
    // Smallest slack over all constraints (positive iff strictly feasible).
    [[nodiscard]] double min_slack(const Eigen::VectorXd& x) const;
    void validate() const;
};

struct ConeSolverOptions {
    // Stop as soon as c'x >= target at a strictly feasible point; report Infeasible once the
    // dual bound shows c'x < target for every feasible x.
    std::optional<double> target;
    double gap_tolerance = 1e-9;
    double feasibility_tolerance = 1e-7;
    int max_iterations = 100;
};

enum class SolveStatus { Optimal, TargetReached, Infeasible, IterationLimit, NumericalFailure };

[[nodiscard]] const char* to_string(SolveStatus s) noexcept;

struct SolveResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd x;
    double objective = 0.0;
    double upper_bound = 0.0;  // dual bound on c'x
    int iterations = 0;
    std::string message;
};

// Primal-dual interior-point method (Nesterov-Todd scaling, Mehrotra correction) started from
// a strictly feasible x0.
[[nodiscard]] SolveResult solve_cone(const ConeProgram& program, const Eigen::VectorXd& x0,
                                     const ConeSolverOptions& options = {});

} // namespace fdlpv
