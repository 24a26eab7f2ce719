#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <vector>

namespace fdlpv {

using Complex = std::complex<double>;

// Real polynomial in z stored with ascending powers: coeffs()[k] multiplies z^k.
// Descending-order helpers exist for I/O, where the MATLAB/scipy convention is used.
class Polynomial {
public:
    Polynomial() = default;
    Polynomial(std::initializer_list<double> ascending) : c_(ascending) { trim(); }
    explicit Polynomial(std::vector<double> ascending) : c_(std::move(ascending)) { trim(); }

    static Polynomial constant(double value) { return Polynomial(std::vector<double>{value}); }
    static Polynomial monomial(int power, double coefficient = 1.0);
    static Polynomial from_descending(std::span<const double> descending);
    // Monic polynomial with the given roots; complex roots must appear in conjugate pairs.
    static Polynomial from_roots(std::span<const Complex> roots, double leading = 1.0);

    [[nodiscard]] const std::vector<double>& coeffs() const noexcept { return c_; }
    [[nodiscard]] std::vector<double> descending() const;

    // Degree of the zero polynomial is -1.
    [[nodiscard]] int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    [[nodiscard]] bool is_zero() const noexcept { return c_.empty(); }
    [[nodiscard]] double leading() const noexcept { return c_.empty() ? 0.0 : c_.back(); }
    [[nodiscard]] double operator[](int k) const noexcept {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<size_t>(k)] : 0.0;
    }

    [[nodiscard]] Complex operator()(Complex z) const noexcept;
    [[nodiscard]] double operator()(double x) const noexcept;

    // Roots via companion-matrix eigenvalues.
    [[nodiscard]] std::vector<Complex> roots() const;

    Polynomial& operator+=(const Polynomial& rhs);
    Polynomial& operator-=(const Polynomial& rhs);
    Polynomial& operator*=(double s);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
    friend bool operator==(const Polynomial&, const Polynomial&) = default;

    // Drops leading coefficients with |c| <= tol * max|c|.
    void trim(double tol = 0.0);

private:
    std::vector<double> c_;
};

// Polynomial division: returns quotient and fills remainder.
Polynomial divide(const Polynomial& num, const Polynomial& den, Polynomial& remainder);

} // namespace fdlpv
