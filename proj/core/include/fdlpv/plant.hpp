#pragma once

#include "fdlpv/frf.hpp"
#include "fdlpv/rational.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace fdlpv {

// Discrete-time LPV state-space model x+ = (A0 + p A1) x + B u, y = C x.
struct LpvSurrogateModel {
    Eigen::MatrixXd a0;
    Eigen::MatrixXd a1;
    Eigen::VectorXd b;
    Eigen::RowVectorXd c;
    double sample_rate = 200.0;
    double p_min = 30.0;
    double p_max = 50.0;
    std::string version;

    // Built-in gyroscope-like surrogate; identical to config/surrogate_v1.json.
    static LpvSurrogateModel surrogate_v1();
    // Physical-parameter JSON file (see docs/config.md).
    static LpvSurrogateModel load(const std::string& path);

    [[nodiscard]] int states() const noexcept { return static_cast<int>(a0.rows()); }
    [[nodiscard]] bool in_range(double p) const noexcept { return p >= p_min && p <= p_max; }
    [[nodiscard]] Eigen::MatrixXd a(double p) const;
    void validate() const;
};

// Physical constants behind surrogate_v1: continuous-time generator, forward-Euler discretized.
struct SurrogateConstants {
    double sample_rate = 200.0;
    double lambda0 = 0.2;
    double damping = 2.5;
    double coupling = 0.54;
    double coupling_back = 0.54;
    double input_gain = 13.5;
    double p_offset = 15.0;
    double p_min = 30.0;
    double p_max = 50.0;
};

[[nodiscard]] LpvSurrogateModel build_surrogate(const SurrogateConstants& k, std::string version = "surrogate_v1");

[[nodiscard]] RationalTf frozen_tf(const LpvSurrogateModel& model, double p);
[[nodiscard]] FrfResponse frozen_frf(const LpvSurrogateModel& model, double p, const FrequencyGrid& grid);
// C (e^{i w} I - A(p))^{-1} B by direct complex solves.
[[nodiscard]] FrfResponse resolvent_frf(const LpvSurrogateModel& model, double p, const FrequencyGrid& grid);

[[nodiscard]] TimeRecord simulate_lpv(const LpvSurrogateModel& model, const TimeRecord& input,
                                      const TimeRecord& scheduling);

struct ExperimentOptions {
    size_t n_samples = size_t{1} << 16;
    double excitation_std = 1.0;  // white disturbance d at the plant input
    double noise_std = 0.0;       // white measurement noise on y
    std::uint64_t seed = 1;
    size_t warmup = 4096;         // samples simulated and discarded before recording
};

struct Experiment {
    TimeRecord d;
    TimeRecord u_g;
    TimeRecord y;
};

// Closed loop e = -y_meas, u_G = K0 e + d at constant p.
[[nodiscard]] Experiment generate_experiment(const LpvSurrogateModel& model, const RationalTf& controller0, double p,
                                             const ExperimentOptions& options);

struct Trace {
    std::vector<double> r;
    std::vector<double> e;
    std::vector<double> u;
    std::vector<double> d;
    std::vector<double> y;
    std::vector<double> p;
    double sample_rate = 1.0;

    [[nodiscard]] size_t size() const noexcept { return r.size(); }
    void resize(size_t n);
    // CSV with header t,r,e,u,d,y,p.
    [[nodiscard]] std::string to_csv() const;
};

} // namespace fdlpv
