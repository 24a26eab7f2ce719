#include "fdlpv/obf.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdlpv {

namespace {

constexpr double kPairTol = 1e-12;

bool is_real(Complex p) { return std::abs(p.imag()) <= kPairTol; }

// One cascade section: a real pole (1 state) or a conjugate pair (2 states).
struct Section {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    Eigen::MatrixXd cv;  // basis outputs
    Eigen::RowVectorXd cg;
    double dg = 0.0;
};

Section real_section(double xi) {
    Section s;
    s.a = Eigen::MatrixXd::Constant(1, 1, xi);
    s.b = Eigen::VectorXd::Ones(1);
    s.cv = Eigen::MatrixXd::Constant(1, 1, std::sqrt(1.0 - xi * xi));
    s.cg = Eigen::RowVectorXd::Constant(1, 1.0 - xi * xi);
    s.dg = -xi;
    return s;
}

struct PairCoeffs {
    double a0, a1, b, c;
};

PairCoeffs pair_coeffs(Complex xi) {
    const double m2 = std::norm(xi);
    return {m2, -2.0 * xi.real(), 2.0 * xi.real() / (1.0 + m2), -m2};
}

Section pair_section(Complex xi) {
    const PairCoeffs k = pair_coeffs(xi);
    Section s;
    s.a.resize(2, 2);
    s.a << 0.0, 1.0, -k.a0, -k.a1;
    s.b = Eigen::Vector2d(0.0, 1.0);
    s.cv.resize(2, 2);
    const double g1 = std::sqrt(1.0 - k.c * k.c);
    const double g2 = std::sqrt((1.0 - k.c * k.c) * (1.0 - k.b * k.b));
    s.cv << -g1 * k.b, g1, g2, 0.0;
    s.cg.resize(2);
    s.cg << 1.0 - k.a0 * k.a0, k.a1 * (1.0 - k.a0);
    s.dg = k.a0;
    return s;
}

template <typename F>
void for_each_section(const std::vector<Complex>& poles, F&& f) {
    for (size_t i = 0; i < poles.size();) {
        if (is_real(poles[i])) {
            f(poles[i], false);
            ++i;
        } else {
            f(poles[i], true);
            i += 2;
        }
    }
}

} // namespace

ObfBasis::ObfBasis(std::vector<Complex> poles) : poles_(std::move(poles)) {
    for (size_t i = 0; i < poles_.size(); ++i) {
        const Complex p = poles_[i];
        if (!(std::abs(p) < 1.0 - 1e-9)) {
            std::ostringstream os;
            os << "basis pole " << p << " must have modulus below 1";
            fail(ErrorKind::InvalidArgument, os.str());
        }
        if (is_real(p)) {
            poles_[i] = Complex(p.real(), 0.0);
            continue;
        }
        require(i + 1 < poles_.size() && std::abs(poles_[i + 1] - std::conj(p)) <= 1e-9, ErrorKind::InvalidArgument,
                "complex basis poles must come in consecutive conjugate pairs");
        poles_[i + 1] = std::conj(p);
        ++i;
    }
}

ObfBasis ObfBasis::laguerre(double a, int n) {
    require(std::abs(a) < 1.0, ErrorKind::InvalidArgument, "Laguerre pole must satisfy |a| < 1");
    require(n >= 0, ErrorKind::InvalidArgument, "basis order must be non-negative");
    return ObfBasis(std::vector<Complex>(static_cast<size_t>(n), Complex(a, 0.0)));
}

bool ObfBasis::is_laguerre() const noexcept {
    return std::all_of(poles_.begin(), poles_.end(), [&](Complex p) { return p == poles_.front() && p.imag() == 0.0; });
}

ObfBasis ObfBasis::truncated(int n) const {
    require(n >= 0 && n <= order(), ErrorKind::InvalidArgument, "truncation order out of range");
    for (int i = 0; i < n;) {
        if (is_real(poles_[static_cast<size_t>(i)])) {
            ++i;
            continue;
        }
        require(i + 1 < n, ErrorKind::InvalidArgument, "truncation would split a conjugate pole pair");
        i += 2;
    }
    return ObfBasis(std::vector<Complex>(poles_.begin(), poles_.begin() + n));
}

std::vector<Complex> ObfBasis::evaluate(Complex z) const {
    std::vector<Complex> out;
    out.reserve(static_cast<size_t>(size()));
    out.emplace_back(1.0);
    Complex prefix(1.0);
    for_each_section(poles_, [&](Complex xi, bool pair) {
        if (!pair) {
            const double x = xi.real();
            out.push_back(prefix * std::sqrt(1.0 - x * x) / (z - x));
            prefix *= (1.0 - x * z) / (z - x);
        } else {
            const PairCoeffs k = pair_coeffs(xi);
            const Complex q = z * z + k.a1 * z + k.a0;
            const double g1 = std::sqrt(1.0 - k.c * k.c);
            const double g2 = std::sqrt((1.0 - k.c * k.c) * (1.0 - k.b * k.b));
            out.push_back(prefix * g1 * (z - k.b) / q);
            out.push_back(prefix * g2 / q);
            prefix *= (k.a0 * z * z + k.a1 * z + 1.0) / q;
        }
    });
    return out;
}

RationalTf ObfBasis::function(int i, double sample_rate) const {
    require(i >= 0 && i < size(), ErrorKind::InvalidArgument, "basis index out of range");
    if (i == 0)
        return RationalTf::gain(1.0, sample_rate);
    Polynomial num = Polynomial::constant(1.0);
    Polynomial den = Polynomial::constant(1.0);
    int index = 1;
    bool done = false;
    for_each_section(poles_, [&](Complex xi, bool pair) {
        if (done)
            return;
        if (!pair) {
            const double x = xi.real();
            if (index == i) {
                num *= std::sqrt(1.0 - x * x);
                den = den * Polynomial{-x, 1.0};
                done = true;
                return;
            }
            num = num * Polynomial{1.0, -x};
            den = den * Polynomial{-x, 1.0};
            ++index;
        } else {
            const PairCoeffs k = pair_coeffs(xi);
            const Polynomial q{k.a0, k.a1, 1.0};
            const double g1 = std::sqrt(1.0 - k.c * k.c);
            const double g2 = std::sqrt((1.0 - k.c * k.c) * (1.0 - k.b * k.b));
            if (index == i || index + 1 == i) {
                num = index == i ? num * Polynomial{-g1 * k.b, g1} : num * g2;
                den = den * q;
                done = true;
                return;
            }
            num = num * Polynomial{1.0, k.a1, k.a0};
            den = den * q;
            index += 2;
        }
    });
    return {num, den, sample_rate};
}

Eigen::MatrixXcd eval_basis(const ObfBasis& basis, const FrequencyGrid& grid) {
    Eigen::MatrixXcd out(basis.size(), static_cast<Eigen::Index>(grid.size()));
    for (size_t k = 0; k < grid.size(); ++k) {
        const std::vector<Complex> v = basis.evaluate(std::polar(1.0, grid[k]));
        for (int i = 0; i < basis.size(); ++i)
            out(i, static_cast<Eigen::Index>(k)) = v[static_cast<size_t>(i)];
    }
    return out;
}

Eigen::VectorXcd BasisBankRealization::response(Complex z) const {
    const auto n = a.rows();
    if (n == 0)
        return d.cast<Complex>();
    const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - a.cast<Complex>();
    const Eigen::VectorXcd x = m.partialPivLu().solve(b.cast<Complex>());
    return c.cast<Complex>() * x + d.cast<Complex>();
}

BasisBankRealization realize_bank(const ObfBasis& basis) {
    const int n = basis.order();
    BasisBankRealization r;
    r.a = Eigen::MatrixXd::Zero(n, n);
    r.b = Eigen::VectorXd::Zero(n);
    r.c = Eigen::MatrixXd::Zero(n + 1, n);
    r.d = Eigen::VectorXd::Zero(n + 1);
    r.d(0) = 1.0;
    Eigen::RowVectorXd chain_c = Eigen::RowVectorXd::Zero(n);
    double chain_d = 1.0;
    int offset = 0;
    int out_row = 1;
    for_each_section(basis.poles(), [&](Complex xi, bool pair) {
        const Section s = pair ? pair_section(xi) : real_section(xi.real());
        const auto ns = static_cast<int>(s.a.rows());
        r.a.block(offset, 0, ns, n) += s.b * chain_c;
        r.a.block(offset, offset, ns, ns) = s.a;
        r.b.segment(offset, ns) = s.b * chain_d;
        r.c.block(out_row, offset, ns, ns) = s.cv;
        Eigen::RowVectorXd next = s.dg * chain_c;
        next.segment(offset, ns) += s.cg;
        chain_c = next;
        chain_d *= s.dg;
        offset += ns;
        out_row += ns;
    });
    return r;
}

SchedulingBasis::SchedulingBasis(SchedulingKind kind, int degree, double lo, double hi)
    : kind_(kind), degree_(degree), lo_(lo), hi_(hi) {
    require(lo < hi, ErrorKind::InvalidArgument, "scheduling normalization interval is empty");
    switch (kind) {
    case SchedulingKind::Constant: degree_ = 0; break;
    case SchedulingKind::Affine: degree_ = 1; break;
    case SchedulingKind::Polynomial:
        require(degree >= 0 && degree <= 6, ErrorKind::InvalidArgument, "scheduling degree must lie in [0, 6]");
        break;
    }
}

std::vector<double> SchedulingBasis::evaluate(double p) const {
    const double span = hi_ - lo_;
    if (!(p >= lo_ - 1e-12 * span && p <= hi_ + 1e-12 * span)) {
        std::ostringstream os;
        os << "scheduling value " << p << " outside [" << lo_ << ", " << hi_ << "]";
        fail(ErrorKind::OutOfRange, os.str());
    }
    const double pt = (2.0 * p - lo_ - hi_) / span;
    std::vector<double> out(static_cast<size_t>(size()));
    double acc = 1.0;
    for (double& v : out) {
        v = acc;
        acc *= pt;
    }
    return out;
}

std::vector<double> scheduling_eval(const SchedulingBasis& basis, double p) { return basis.evaluate(p); }

SchedulingKind parse_scheduling_kind(const std::string& name) {
    if (name == "constant" || name == "lti")
        return SchedulingKind::Constant;
    if (name == "affine")
        return SchedulingKind::Affine;
    if (name == "polynomial")
        return SchedulingKind::Polynomial;
    fail(ErrorKind::Config, "unknown scheduling kind '" + name + "' (expected constant, affine or polynomial)");
}

const char* scheduling_kind_name(SchedulingKind kind) noexcept {
    switch (kind) {
    case SchedulingKind::Constant: return "constant";
    case SchedulingKind::Affine: return "affine";
    case SchedulingKind::Polynomial: return "polynomial";
    }
    return "?";
}

} // namespace fdlpv
