#include "fdlpv/rational.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/frf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fdlpv {

RationalTf::RationalTf(Polynomial num, Polynomial den, double sample_rate)
    : num_(std::move(num)), den_(std::move(den)), fs_(sample_rate) {
    require(!den_.is_zero(), ErrorKind::InvalidArgument, "transfer function denominator is zero");
    require(fs_ > 0.0, ErrorKind::InvalidArgument, "sample rate must be positive");
    if (num_.is_zero())
        num_ = Polynomial::constant(0.0);
    require(num_.degree() <= den_.degree(), ErrorKind::InvalidArgument,
            "transfer function must be proper (deg num <= deg den)");
}

RationalTf RationalTf::from_descending(std::span<const double> num, std::span<const double> den,
                                       double sample_rate) {
    return {Polynomial::from_descending(num), Polynomial::from_descending(den), sample_rate};
}

Complex RationalTf::at_frequency(double omega) const { return (*this)(std::polar(1.0, omega)); }

double RationalTf::dc_gain() const { return num_(1.0) / den_(1.0); }

bool RationalTf::is_stable(double margin) const {
    for (const Complex& p : poles())
        if (std::abs(p) >= 1.0 - margin)
            return false;
    return true;
}

double RationalTf::max_pole_modulus() const {
    double m = 0.0;
    for (const Complex& p : poles())
        m = std::max(m, std::abs(p));
    return m;
}

RationalTf RationalTf::minimal(double tol) const {
    Polynomial n = num_;
    Polynomial d = den_;
    if (!n.is_zero() && !(n.degree() == 0 && n[0] == 0.0))
        cancel_common_roots(n, d, tol);
    const double lead = d.leading();
    return {n * (1.0 / lead), d * (1.0 / lead), fs_};
}

std::vector<double> RationalTf::filter(std::span<const double> input) const {
    const int n = den_.degree();
    std::vector<double> a(static_cast<size_t>(n) + 1);
    std::vector<double> b(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        a[static_cast<size_t>(j)] = den_[n - j];
        b[static_cast<size_t>(j)] = num_[n - j];
    }
    const double a0 = a[0];
    std::vector<double> y(input.size(), 0.0);
    for (size_t t = 0; t < input.size(); ++t) {
        double acc = 0.0;
        for (int j = 0; j <= n; ++j) {
            if (static_cast<size_t>(j) > t)
                break;
            acc += b[static_cast<size_t>(j)] * input[t - static_cast<size_t>(j)];
            if (j > 0)
                acc -= a[static_cast<size_t>(j)] * y[t - static_cast<size_t>(j)];
        }
        y[t] = acc / a0;
    }
    return y;
}

FrfResponse RationalTf::frf(const FrequencyGrid& grid) const {
    std::vector<Complex> v;
    v.reserve(grid.size());
    for (double w : grid.omegas())
        v.push_back(at_frequency(w));
    return {std::move(v), make_grid(grid)};
}

RationalTf operator*(const RationalTf& a, const RationalTf& b) {
    return {a.num_ * b.num_, a.den_ * b.den_, a.fs_};
}

RationalTf operator+(const RationalTf& a, const RationalTf& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_, a.fs_};
}

RationalTf operator-(const RationalTf& a, const RationalTf& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_, a.fs_};
}

TfFilter::TfFilter(const RationalTf& tf) {
    const int n = tf.den().degree();
    const double a0 = tf.den().leading();
    b_.resize(static_cast<size_t>(n) + 1);
    a_.resize(static_cast<size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        b_[static_cast<size_t>(j)] = tf.num()[n - j] / a0;
        a_[static_cast<size_t>(j)] = tf.den()[n - j] / a0;
    }
    z_.assign(static_cast<size_t>(n), 0.0);
}

double TfFilter::peek(double u) const { return b_[0] * u + (z_.empty() ? 0.0 : z_[0]); }

double TfFilter::step(double u) {
    const double y = peek(u);
    const size_t n = z_.size();
    for (size_t j = 0; j < n; ++j)
        z_[j] = (j + 1 < n ? z_[j + 1] : 0.0) + b_[j + 1] * u - a_[j + 1] * y;
    return y;
}

void TfFilter::reset() { std::fill(z_.begin(), z_.end(), 0.0); }

void cancel_common_roots(Polynomial& p, Polynomial& q, double tol) {
    std::vector<Complex> rp = p.roots();
    std::vector<Complex> rq = q.roots();
    std::vector<bool> used(rq.size(), false);
    std::vector<Complex> keep_p;
    bool cancelled = false;
    for (const Complex& r : rp) {
        size_t best = rq.size();
        double best_d = tol;
        for (size_t j = 0; j < rq.size(); ++j) {
            if (used[j])
                continue;
            const double d = std::abs(r - rq[j]);
            if (d <= best_d) {
                best_d = d;
                best = j;
            }
        }
        if (best < rq.size()) {
            used[best] = true;
            cancelled = true;
        } else {
            keep_p.push_back(r);
        }
    }
    if (!cancelled)
        return;
    std::vector<Complex> keep_q;
    for (size_t j = 0; j < rq.size(); ++j)
        if (!used[j])
            keep_q.push_back(rq[j]);
    p = Polynomial::from_roots(keep_p, p.leading());
    q = Polynomial::from_roots(keep_q, q.leading());
}

namespace {

// (z - 1)^k (z + 1)^(n - k)
Polynomial tustin_term(int k, int n) {
    Polynomial out = Polynomial::constant(1.0);
    for (int i = 0; i < k; ++i)
        out = out * Polynomial{-1.0, 1.0};
    for (int i = 0; i < n - k; ++i)
        out = out * Polynomial{1.0, 1.0};
    return out;
}

Polynomial map_bilinear(const Polynomial& ps, int n, double c) {
    Polynomial out;
    double ck = 1.0;
    for (int k = 0; k <= ps.degree(); ++k) {
        out += tustin_term(k, n) * (ps[k] * ck);
        ck *= c;
    }
    return out;
}

} // namespace

RationalTf bilinear(std::span<const double> num_s, std::span<const double> den_s, double sample_rate) {
    const Polynomial ns = Polynomial::from_descending(num_s);
    const Polynomial ds = Polynomial::from_descending(den_s);
    require(ns.degree() <= ds.degree(), ErrorKind::InvalidArgument, "continuous weight must be proper");
    const int n = ds.degree();
    const double c = 2.0 * sample_rate;
    Polynomial nz = map_bilinear(ns, n, c);
    Polynomial dz = map_bilinear(ds, n, c);
    const double lead = dz.leading();
    return {nz * (1.0 / lead), dz * (1.0 / lead), sample_rate};
}

RationalTf butterworth_lowpass(int order, double cutoff_hz, double sample_rate) {
    require(order >= 1, ErrorKind::InvalidArgument, "butterworth order must be positive");
    require(cutoff_hz > 0.0 && cutoff_hz < 0.5 * sample_rate, ErrorKind::InvalidArgument,
            "butterworth cutoff must lie in (0, fs/2)");
    const double c = 2.0 * sample_rate;
    const double wa = c * std::tan(std::numbers::pi * cutoff_hz / sample_rate);
    std::vector<Complex> zpoles;
    Complex gain_num{1.0};
    for (int k = 0; k < order; ++k) {
        const double angle = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
        const Complex s = wa * std::polar(1.0, angle);
        const Complex z = (c + s) / (c - s);
        zpoles.push_back(z);
        gain_num *= (1.0 - z);
    }
    Polynomial den = Polynomial::from_roots(zpoles);
    std::vector<Complex> zeros(static_cast<size_t>(order), Complex(-1.0));
    Polynomial num = Polynomial::from_roots(zeros, gain_num.real() / std::pow(2.0, order));
    return {num, den, sample_rate};
}

} // namespace fdlpv
