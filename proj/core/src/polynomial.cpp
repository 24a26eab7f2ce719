#include "fdlpv/polynomial.hpp"

#include "fdlpv/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace fdlpv {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::GridMismatch: return "grid mismatch";
    case ErrorKind::OutOfRange: return "out of range";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::Excitation: return "insufficient excitation";
    case ErrorKind::Unstable: return "unstable";
    case ErrorKind::Bezout: return "bezout residual";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::SolverFailure: return "solver failure";
    case ErrorKind::Numerical: return "numerical failure";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Degenerate: return "degenerate data";
    }
    return "unknown";
}

Polynomial Polynomial::monomial(int power, double coefficient) {
    require(power >= 0, ErrorKind::InvalidArgument, "monomial power must be non-negative");
    std::vector<double> c(static_cast<size_t>(power) + 1, 0.0);
    c.back() = coefficient;
    return Polynomial(std::move(c));
}

Polynomial Polynomial::from_descending(std::span<const double> descending) {
    std::vector<double> c(descending.rbegin(), descending.rend());
    return Polynomial(std::move(c));
}

Polynomial Polynomial::from_roots(std::span<const Complex> roots, double leading) {
    std::vector<Complex> c{Complex(leading)};
    for (const Complex& r : roots) {
        std::vector<Complex> next(c.size() + 1, Complex{});
        for (size_t k = 0; k < c.size(); ++k) {
            next[k + 1] += c[k];
            next[k] -= r * c[k];
        }
        c = std::move(next);
    }
    std::vector<double> real(c.size());
    for (size_t k = 0; k < c.size(); ++k) {
        real[k] = c[k].real();
    }
    return Polynomial(std::move(real));
}

std::vector<double> Polynomial::descending() const {
    if (c_.empty())
        return {0.0};
    return {c_.rbegin(), c_.rend()};
}

// Horner in extended precision: roots of the plant polynomials cluster near z = 1.
Complex Polynomial::operator()(Complex z) const noexcept {
    const long double zr = z.real();
    const long double zi = z.imag();
    long double re = 0.0L;
    long double im = 0.0L;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
        const long double t = re * zr - im * zi + *it;
        im = re * zi + im * zr;
        re = t;
    }
    return {static_cast<double>(re), static_cast<double>(im)};
}

double Polynomial::operator()(double x) const noexcept {
    long double acc = 0.0L;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it)
        acc = acc * x + *it;
    return static_cast<double>(acc);
}

std::vector<Complex> Polynomial::roots() const {
    const int n = degree();
    if (n <= 0)
        return {};
    // Strip zero roots explicitly; the companion matrix handles the rest.
    int shift = 0;
    while (shift < n && c_[static_cast<size_t>(shift)] == 0.0)
        ++shift;
    std::vector<Complex> out(static_cast<size_t>(shift), Complex{});
    const int m = n - shift;
    if (m == 0)
        return out;
    if (m == 1) {
        out.emplace_back(-c_[static_cast<size_t>(shift)] / c_.back());
        return out;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    const double lead = c_.back();
    for (int i = 1; i < m; ++i)
        companion(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i)
        companion(i, m - 1) = -c_[static_cast<size_t>(shift + i)] / lead;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    require(solver.info() == Eigen::Success, ErrorKind::Numerical, "polynomial root finding did not converge");
    for (int i = 0; i < m; ++i)
        out.push_back(solver.eigenvalues()(i));
    return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size())
        c_.resize(rhs.c_.size(), 0.0);
    for (size_t k = 0; k < rhs.c_.size(); ++k)
        c_[k] += rhs.c_[k];
    trim();
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& rhs) {
    if (rhs.c_.size() > c_.size())
        c_.resize(rhs.c_.size(), 0.0);
    for (size_t k = 0; k < rhs.c_.size(); ++k)
        c_[k] -= rhs.c_[k];
    trim();
    return *this;
}

Polynomial& Polynomial::operator*=(double s) {
    for (double& v : c_)
        v *= s;
    trim();
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero())
        return {};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (size_t i = 0; i < a.c_.size(); ++i)
        for (size_t j = 0; j < b.c_.size(); ++j)
            c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
}

void Polynomial::trim(double tol) {
    double scale = 0.0;
    for (double v : c_)
        scale = std::max(scale, std::abs(v));
    const double cut = tol * scale;
    while (!c_.empty() && std::abs(c_.back()) <= cut)
        c_.pop_back();
}

Polynomial divide(const Polynomial& num, const Polynomial& den, Polynomial& remainder) {
    require(!den.is_zero(), ErrorKind::InvalidArgument, "polynomial division by zero");
    std::vector<double> r = num.coeffs();
    const int dn = den.degree();
    const int nn = num.degree();
    if (nn < dn) {
        remainder = num;
        return {};
    }
    std::vector<double> q(static_cast<size_t>(nn - dn) + 1, 0.0);
    for (int k = nn - dn; k >= 0; --k) {
        const double coef = r[static_cast<size_t>(k + dn)] / den.leading();
        q[static_cast<size_t>(k)] = coef;
        for (int j = 0; j <= dn; ++j)
            r[static_cast<size_t>(k + j)] -= coef * den[j];
    }
    r.resize(static_cast<size_t>(dn));
    remainder = Polynomial(std::move(r));
    return Polynomial(std::move(q));
}

} // namespace fdlpv
