#pragma once

#include "fdlpv/factorization.hpp"
#include "fdlpv/frf.hpp"
#include "fdlpv/rational.hpp"

#include <array>
#include <optional>

namespace fdlpv {

// A performance weight: a stable rational filter or a table on a fixed grid.
class Weight {
public:
    Weight() : tf_(RationalTf::gain(0.0)) {}
    Weight(RationalTf tf);  // NOLINT(google-explicit-constructor)
    Weight(FrfResponse table);  // NOLINT(google-explicit-constructor)

    static Weight constant(double k, double sample_rate = 1.0) { return Weight(RationalTf::gain(k, sample_rate)); }

    [[nodiscard]] bool is_rational() const noexcept { return tf_.has_value(); }
    [[nodiscard]] const RationalTf& tf() const;
    [[nodiscard]] const FrfResponse& table() const;
    [[nodiscard]] bool is_zero() const;

    [[nodiscard]] std::vector<Complex> evaluate(const FrequencyGrid& grid) const;
    [[nodiscard]] Weight scaled(double k) const;

private:
    std::optional<RationalTf> tf_;
    std::optional<FrfResponse> table_;
};

// Indexed by Channel.
struct WeightSet {
    std::array<Weight, 4> w;

    [[nodiscard]] const Weight& operator[](Channel c) const { return w[static_cast<size_t>(c)]; }
    [[nodiscard]] Weight& operator[](Channel c) { return w[static_cast<size_t>(c)]; }
    [[nodiscard]] WeightSet scaled(double k) const;
    void validate() const;
};

struct DefaultWeightOptions {
    double sample_rate = 200.0;
    double bandwidth_hz = 1.0;       // W_S crossover
    double peak_sensitivity = 2.0;   // high-frequency bound on |S|
    double integrator_leak = 1e-4;   // W_S low-frequency pole, relative to bandwidth
    double process_gain = 0.5;       // W_GS
    double control_gain = 0.05;      // W_KS
    double rolloff_hz = 2.0;         // W_T corner
    double rolloff_lf_gain = 0.1;    // |W_T| at low frequency
    double rolloff_hf_gain = 10.0;   // |W_T| at high frequency
};

// W_S = (s/M + wB)/(s + leak wB), W_GS, W_KS constant, W_T = (s + wT)/(s/hf + wT/lf); Tustin-discretized.
[[nodiscard]] WeightSet default_weights(const DefaultWeightOptions& options = {});

} // namespace fdlpv
