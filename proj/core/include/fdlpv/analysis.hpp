#pragma once

#include "fdlpv/factorization.hpp"
#include "fdlpv/frf.hpp"
#include "fdlpv/rational.hpp"
#include "fdlpv/weights.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace fdlpv {

enum class CertificateStatus { Certified, Refuted, Inconclusive };

[[nodiscard]] const char* to_string(CertificateStatus s) noexcept;

// alpha = alpha_fit * (1 + sum_j c_j L_j) with L_j Laguerre functions.
struct MultiplierOptions {
    double pole = 0.5;
    int order = 8;
    double coefficient_bound = 1e3;
    // Retry with a data-fitted inverse of D_p as base multiplier when the plain basis fails.
    bool allow_fit = true;
    int max_fit_order = 12;
    // Skip the search and use alpha = 1.
    bool unity = false;
};

struct PointCertificate {
    double p = 0.0;
    CertificateStatus status = CertificateStatus::Inconclusive;
    double min_margin = 0.0;
    std::vector<double> margins;        // Re{D alpha} - r |alpha| per frequency
    Eigen::VectorXd coefficients;       // c_j
    std::optional<RationalTf> base;     // alpha_fit when used
    std::vector<Complex> alpha;         // multiplier on the grid
    std::string multiplier = "unity";   // unity | laguerre | fitted
    std::string reason;
};

struct Certificate {
    CertificateStatus status = CertificateStatus::Inconclusive;
    double epsilon = 0.0;
    std::optional<double> gamma;
    size_t grid_size = 0;
    double omega_min = 0.0;
    double omega_max = 0.0;
    MultiplierOptions multiplier;
    std::vector<PointCertificate> points;
    std::string reason;

    [[nodiscard]] double min_margin() const;
};

// Frozen stability test per operating point: Re{D_p alpha} >= eps over the grid.
[[nodiscard]] Certificate check_stability(const std::vector<std::vector<Complex>>& dp, const FrequencyGrid& grid,
                                          const std::vector<double>& points, double epsilon,
                                          const MultiplierOptions& options = {});

// Re{D_p alpha} >= |alpha| max_c |W_c N_c| / gamma + eps, one multiplier shared by the channels.
[[nodiscard]] Certificate check_performance(const std::vector<ClosedLoopFactorData>& data, const WeightSet& weights,
                                            const FrequencyGrid& grid, const std::vector<double>& points,
                                            double gamma, double epsilon, const MultiplierOptions& options = {});

// max over frequency, point and channel of |W_c N_c / D_p|.
[[nodiscard]] double compute_achieved_gamma(const std::vector<ClosedLoopFactorData>& data, const WeightSet& weights,
                                            const FrequencyGrid& grid);

// Internal stability of the feedback loop (G, K): every root of a d + b c strictly inside the unit circle.
[[nodiscard]] bool oracle_stability(const RationalTf& g, const RationalTf& k);
// Largest closed-loop pole modulus.
[[nodiscard]] double oracle_spectral_radius(const RationalTf& g, const RationalTf& k);

// Least-squares rational fit num(z)/den(z) of the given order (Levy with reweighting).
[[nodiscard]] RationalTf fit_rational(const std::vector<Complex>& values, const FrequencyGrid& grid, int order);

} // namespace fdlpv
