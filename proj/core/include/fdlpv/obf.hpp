#pragma once

#include "fdlpv/frf.hpp"
#include "fdlpv/rational.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace fdlpv {

// Takenaka-Malmquist basis {phi_0 = 1, phi_1, ..., phi_n} generated by a pole sequence.
// Complex poles must appear as consecutive conjugate pairs (Kautz sections).
class ObfBasis {
public:
    ObfBasis() = default;
    explicit ObfBasis(std::vector<Complex> poles);

    static ObfBasis laguerre(double a, int n);

    [[nodiscard]] const std::vector<Complex>& poles() const noexcept { return poles_; }
    [[nodiscard]] int order() const noexcept { return static_cast<int>(poles_.size()); }
    [[nodiscard]] int size() const noexcept { return order() + 1; }
    // Repeated real pole, as produced by laguerre().
    [[nodiscard]] bool is_laguerre() const noexcept;

    // [phi_0(z), ..., phi_n(z)]
    [[nodiscard]] std::vector<Complex> evaluate(Complex z) const;
    // phi_i as a rational function of z.
    [[nodiscard]] RationalTf function(int i, double sample_rate = 1.0) const;

    // First `n` poles; throws when the cut would split a conjugate pair.
    [[nodiscard]] ObfBasis truncated(int n) const;

    friend bool operator==(const ObfBasis&, const ObfBasis&) = default;

private:
    std::vector<Complex> poles_;
};

// Row i holds phi_i(e^{i w_k}).
[[nodiscard]] Eigen::MatrixXcd eval_basis(const ObfBasis& basis, const FrequencyGrid& grid);

// Cascade realization x+ = A x + B u, [phi_0 ... phi_n] u = C x + D u.
struct BasisBankRealization {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd c;  // (n+1) x n
    Eigen::VectorXd d;  // (n+1), d(0) = 1

    [[nodiscard]] int states() const noexcept { return static_cast<int>(a.rows()); }
    // C (zI - A)^{-1} B + D for every channel.
    [[nodiscard]] Eigen::VectorXcd response(Complex z) const;
};

[[nodiscard]] BasisBankRealization realize_bank(const ObfBasis& basis);

enum class SchedulingKind { Constant, Affine, Polynomial };

// psi_1 = 1, psi_l = ptilde^(l-1) with ptilde = (2p - lo - hi) / (hi - lo).
class SchedulingBasis {
public:
    SchedulingBasis() = default;
    SchedulingBasis(SchedulingKind kind, int degree, double lo, double hi);

    static SchedulingBasis constant(double lo, double hi) { return {SchedulingKind::Constant, 0, lo, hi}; }
    static SchedulingBasis affine(double lo, double hi) { return {SchedulingKind::Affine, 1, lo, hi}; }
    static SchedulingBasis polynomial(int degree, double lo, double hi) {
        return {SchedulingKind::Polynomial, degree, lo, hi};
    }

    [[nodiscard]] SchedulingKind kind() const noexcept { return kind_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int size() const noexcept { return degree_ + 1; }
    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }

    [[nodiscard]] std::vector<double> evaluate(double p) const;

    friend bool operator==(const SchedulingBasis&, const SchedulingBasis&) = default;

private:
    SchedulingKind kind_ = SchedulingKind::Constant;
    int degree_ = 0;
    double lo_ = 0.0;
    double hi_ = 1.0;
};

[[nodiscard]] std::vector<double> scheduling_eval(const SchedulingBasis& basis, double p);
[[nodiscard]] SchedulingKind parse_scheduling_kind(const std::string& name);
[[nodiscard]] const char* scheduling_kind_name(SchedulingKind kind) noexcept;

struct ClusterResult {
    std::vector<Complex> centers;
    int iterations = 0;
    bool converged = false;
};

// Fuzzy c-means on points of the complex plane, farthest-point initialization.
// Centers closer than 1e-9 are merged.
[[nodiscard]] ClusterResult cluster_poles(std::span<const Complex> samples, int clusters, double fuzziness = 2.0,
                                          int max_iterations = 500, double tolerance = 1e-9);

} // namespace fdlpv
