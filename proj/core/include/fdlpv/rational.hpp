#pragma once

#include "fdlpv/polynomial.hpp"

#include <span>
#include <vector>

namespace fdlpv {

class FrequencyGrid;
class FrfResponse;

// Discrete-time SISO transfer function num(z)/den(z).
class RationalTf {
public:
    RationalTf() : num_(Polynomial::constant(0.0)), den_(Polynomial::constant(1.0)) {}
    RationalTf(Polynomial num, Polynomial den, double sample_rate = 1.0);

    static RationalTf gain(double k, double sample_rate = 1.0) {
        return {Polynomial::constant(k), Polynomial::constant(1.0), sample_rate};
    }
    // Coefficients in descending powers of z, as in tf(num, den, Ts).
    static RationalTf from_descending(std::span<const double> num, std::span<const double> den,
                                      double sample_rate = 1.0);

    [[nodiscard]] const Polynomial& num() const noexcept { return num_; }
    [[nodiscard]] const Polynomial& den() const noexcept { return den_; }
    [[nodiscard]] double sample_rate() const noexcept { return fs_; }

    [[nodiscard]] Complex operator()(Complex z) const { return num_(z) / den_(z); }
    [[nodiscard]] Complex at_frequency(double omega) const;
    [[nodiscard]] double dc_gain() const;

    [[nodiscard]] std::vector<Complex> poles() const { return den_.roots(); }
    [[nodiscard]] std::vector<Complex> zeros() const { return num_.roots(); }
    [[nodiscard]] bool is_proper() const noexcept { return num_.degree() <= den_.degree(); }
    // All poles strictly inside the circle of radius 1 - margin.
    [[nodiscard]] bool is_stable(double margin = 0.0) const;
    [[nodiscard]] double max_pole_modulus() const;

    // Cancels pole/zero pairs closer than tol and normalizes den to be monic.
    [[nodiscard]] RationalTf minimal(double tol = 1e-8) const;

    // Difference-equation filtering with zero initial conditions (requires properness).
    [[nodiscard]] std::vector<double> filter(std::span<const double> input) const;

    [[nodiscard]] FrfResponse frf(const FrequencyGrid& grid) const;

    friend RationalTf operator*(const RationalTf& a, const RationalTf& b);
    friend RationalTf operator+(const RationalTf& a, const RationalTf& b);
    friend RationalTf operator-(const RationalTf& a, const RationalTf& b);
    friend RationalTf operator*(double s, const RationalTf& a) {
        return {a.num_ * s, a.den_, a.fs_};
    }

private:
    Polynomial num_;
    Polynomial den_;
    double fs_ = 1.0;
};

// Sample-by-sample direct-form II transposed realization of a RationalTf.
class TfFilter {
public:
    explicit TfFilter(const RationalTf& tf);

    // Output for the current input; updates the internal state.
    double step(double u);
    // Output that step(u) would return, without touching the state.
    [[nodiscard]] double peek(double u) const;
    void reset();

private:
    std::vector<double> b_;
    std::vector<double> a_;
    std::vector<double> z_;
};

// Removes the roots of `p` that are within tol of a root in `q` (counting multiplicity)
// and returns the reduced polynomials (leading coefficients preserved).
void cancel_common_roots(Polynomial& p, Polynomial& q, double tol);

// Bilinear (Tustin) map of a continuous-time rational function given in descending powers of s.
RationalTf bilinear(std::span<const double> num_s, std::span<const double> den_s, double sample_rate);

// Digital Butterworth low-pass via prewarped bilinear transform.
RationalTf butterworth_lowpass(int order, double cutoff_hz, double sample_rate);

} // namespace fdlpv
