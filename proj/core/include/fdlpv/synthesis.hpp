#pragma once

#include "fdlpv/factorization.hpp"
#include "fdlpv/obf.hpp"
#include "fdlpv/socp.hpp"
#include "fdlpv/weights.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace fdlpv {

// N_K(z,p) = sum_i w_i(p) phi_i(z), D_K(z,p) = sum_i v_i(p) varphi_i(z),
// w_i(p) = sum_l w(i,l) psi_l(p), v_i(p) = sum_l v(i,l) psi_l(p).
struct ControllerParameters {
    ObfBasis basis_n;
    ObfBasis basis_d;
    SchedulingBasis scheduling;
    Eigen::MatrixXd w;  // (n_N + 1) x m
    Eigen::MatrixXd v;  // (n_D + 1) x m
    double sample_rate = 1.0;

    // All coefficients zero except v(0,0) = 1, i.e. K = 0.
    static ControllerParameters normalized(ObfBasis basis_n, ObfBasis basis_d, SchedulingBasis scheduling,
                                           double sample_rate);

    [[nodiscard]] int m() const noexcept { return scheduling.size(); }
    [[nodiscard]] Eigen::Index size() const noexcept { return w.size() + v.size(); }
    // theta layout: w(i,l) at i*m + l, then v(i,l) at (n_N+1)*m + i*m + l.
    [[nodiscard]] Eigen::VectorXd pack() const;
    void unpack(const Eigen::VectorXd& theta);

    [[nodiscard]] Eigen::VectorXd w_at(double p) const;
    [[nodiscard]] Eigen::VectorXd v_at(double p) const;

    // Frozen factors as rational functions (coefficient convolution over a common denominator).
    [[nodiscard]] RationalTf nk_tf(double p) const;
    [[nodiscard]] RationalTf dk_tf(double p) const;
    [[nodiscard]] RationalTf controller_tf(double p) const;

    // Throws unless v(0,:) = [1, 0, ..., 0], bases satisfy n_D >= n_N, and entries are finite.
    void validate() const;
};

// (nk, dk) on the grid at scheduling value p.
[[nodiscard]] std::pair<std::vector<Complex>, std::vector<Complex>> evaluate_factors(const ControllerParameters& theta,
                                                                                     double p,
                                                                                     const FrequencyGrid& grid);

struct SynthesisOptions {
    double epsilon = -1.0;  // negative: 1e-6 * median |D_G|
    double gamma_lo = 1e-3;
    double gamma_hi = 1e3;
    double rel_tolerance = 1e-3;
    double abs_tolerance = 0.0;
    bool integral_action = true;
    int rolloff_order = 0;  // 1 adds N_K(-1, p_tau) = 0
    double theta_bound = 1e4;
    int max_bisection = 200;
};

struct SynthesisProblem {
    GridPtr grid;
    SchedulingGrid scheduling{{0.0}, 0.0, 1.0};
    std::vector<CoprimeFrfPair> data;  // aligned with scheduling.points()
    WeightSet weights;
    ObfBasis basis_n;
    ObfBasis basis_d;
    SchedulingBasis scheduling_basis;
    SynthesisOptions options;

    void validate() const;
    [[nodiscard]] double epsilon() const;
    [[nodiscard]] Eigen::Index parameter_count() const;
    // Same problem with m = 1 (LTI controller).
    [[nodiscard]] SynthesisProblem as_lti() const;
};

// Affine data of all gridded constraints: for row r = tau * N + k,
//   Re{dp.row(r) theta} >= |wn[c].row(r) theta| / gamma + epsilon.
struct ConstraintSet {
    Eigen::MatrixXcd dp;
    std::array<Eigen::MatrixXcd, 4> wn;
    double gamma = 1.0;
    double epsilon = 0.0;
    size_t frequencies = 0;
    size_t points = 0;

    [[nodiscard]] size_t count() const noexcept { return 4 * static_cast<size_t>(dp.rows()); }
    // Slack Re{D_p} - |W N|/gamma - epsilon per (row, channel), row-major.
    [[nodiscard]] Eigen::MatrixXd margins(const Eigen::VectorXd& theta) const;
};

[[nodiscard]] ConstraintSet assemble_constraints(const SynthesisProblem& problem, double gamma);

struct EqualityConstraints {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    std::vector<std::string> labels;

    void append(const Eigen::RowVectorXd& row, double rhs, std::string label);
    [[nodiscard]] Eigen::Index rows() const noexcept { return a.rows(); }
};

// v(0,:) = [1, 0, ..., 0].
[[nodiscard]] EqualityConstraints normalization_constraints(const SynthesisProblem& problem);
// Adds sum_i v_i(p_tau) varphi_i(1) = 0 for every operating point.
[[nodiscard]] EqualityConstraints add_integral_action(const SynthesisProblem& problem, EqualityConstraints eq);
// Adds sum_i w_i(p_tau) phi_i(-1) = 0 for every operating point.
[[nodiscard]] EqualityConstraints add_rolloff(const SynthesisProblem& problem, EqualityConstraints eq);
// Normalization plus the optional equalities selected in the options.
[[nodiscard]] EqualityConstraints build_equalities(const SynthesisProblem& problem);

struct FeasibilityResult {
    bool feasible = false;
    SolveStatus status = SolveStatus::NumericalFailure;
    Eigen::VectorXd theta;
    double margin = 0.0;  // largest common slack t found (>= 0 iff feasible)
    int newton_iterations = 0;
};

// Searches theta with all constraints satisfied; `optimize` maximizes the common slack instead of
// stopping at the first feasible point. Throws Infeasible for inconsistent equalities.
[[nodiscard]] FeasibilityResult feasibility_solve(const ConstraintSet& constraints, const EqualityConstraints& eq,
                                                  double theta_bound = 1e4, bool optimize = false);

struct BisectionStep {
    double gamma;
    bool feasible;
    int newton_iterations;
};

struct SynthesisResult {
    ControllerParameters theta;
    double gamma = 0.0;
    double epsilon = 0.0;
    double min_re_dp = 0.0;
    double achieved_gamma = 0.0;  // max |W_c N_c / D_p| over the grid
    double min_margin = 0.0;      // min slack at gamma
    Eigen::MatrixXd margins;      // (points * N) x 4
    std::vector<BisectionStep> steps;
    int iterations = 0;
    std::string status;
};

[[nodiscard]] SynthesisResult bisect_gamma(const SynthesisProblem& problem);

// Closed-loop data for every operating point of the problem under theta.
[[nodiscard]] std::vector<ClosedLoopFactorData> closed_loop_data(const SynthesisProblem& problem,
                                                                 const ControllerParameters& theta);

} // namespace fdlpv
