#include "fdlpv/analysis.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/obf.hpp"
#include "fdlpv/socp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fdlpv {

const char* to_string(CertificateStatus s) noexcept {
    switch (s) {
    case CertificateStatus::Certified: return "certified";
    case CertificateStatus::Refuted: return "refuted";
    case CertificateStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

double Certificate::min_margin() const {
    double m = INFINITY;
    for (const PointCertificate& p : points)
        m = std::min(m, p.min_margin);
    return m;
}

RationalTf fit_rational(const std::vector<Complex>& values, const FrequencyGrid& grid, int order) {
    require(order >= 0, ErrorKind::InvalidArgument, "fit order must be non-negative");
    require(values.size() == grid.size(), ErrorKind::GridMismatch, "fit data length differs from the grid");
    const auto nf = static_cast<Eigen::Index>(grid.size());
    const int q = order;
    // Unknowns: b_0..b_q, a_1..a_q; model sum b_j z^-j / (1 + sum a_j z^-j).
    const Eigen::Index nu = 2 * q + 1;
    Eigen::VectorXd weight = Eigen::VectorXd::Ones(nf);
    Eigen::VectorXd sol = Eigen::VectorXd::Zero(nu);
    for (int sweep = 0; sweep < 4; ++sweep) {
        Eigen::MatrixXd m(2 * nf, nu);
        Eigen::VectorXd rhs(2 * nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const Complex zi = std::polar(1.0, -grid[static_cast<size_t>(k)]);
            const Complex d = values[static_cast<size_t>(k)];
            Complex zp(1.0);
            for (int j = 0; j <= q; ++j) {
                m(2 * k, j) = zp.real() * weight(k);
                m(2 * k + 1, j) = zp.imag() * weight(k);
                if (j >= 1) {
                    const Complex term = -d * zp;
                    m(2 * k, q + j) = term.real() * weight(k);
                    m(2 * k + 1, q + j) = term.imag() * weight(k);
                }
                zp *= zi;
            }
            rhs(2 * k) = d.real() * weight(k);
            rhs(2 * k + 1) = d.imag() * weight(k);
        }
        sol = m.colPivHouseholderQr().solve(rhs);
        for (Eigen::Index k = 0; k < nf; ++k) {
            const Complex zi = std::polar(1.0, -grid[static_cast<size_t>(k)]);
            Complex a(1.0);
            Complex zp = zi;
            for (int j = 1; j <= q; ++j) {
                a += sol(q + j) * zp;
                zp *= zi;
            }
            weight(k) = 1.0 / std::max(std::abs(a), 1e-8);
        }
    }
    std::vector<double> num(static_cast<size_t>(q) + 1);
    std::vector<double> den(static_cast<size_t>(q) + 1);
    for (int j = 0; j <= q; ++j) {
        num[static_cast<size_t>(q - j)] = sol(j);
        den[static_cast<size_t>(q - j)] = j == 0 ? 1.0 : sol(q + j);
    }
    return {Polynomial(std::move(num)), Polynomial(std::move(den)), grid.sample_rate()};
}

namespace {

double winding_change(const std::vector<Complex>& d) {
    double acc = 0.0;
    for (size_t k = 0; k + 1 < d.size(); ++k)
        acc += std::arg(d[k + 1] / d[k]);
    return acc;
}

// Refutation per the disc reading: the disc of radius r around D contains the origin,
// or D winds around the origin.
bool refute(const std::vector<Complex>& d, const std::vector<double>& r, const FrequencyGrid& grid,
            PointCertificate& pc) {
    double scale = 0.0;
    for (const Complex& v : d)
        scale = std::max(scale, std::abs(v));
    for (size_t k = 0; k < d.size(); ++k) {
        const double radius = std::max(r[k], 1e-12 * scale);
        if (std::abs(d[k]) <= radius) {
            std::ostringstream os;
            if (r[k] > 1e-12 * scale)
                os << "disc of radius " << r[k] << " around D_p contains the origin at omega = " << grid[k];
            else
                os << "D_p vanishes at omega = " << grid[k];
            pc.reason = os.str();
            return true;
        }
    }
    const double change = winding_change(d);
    if (std::abs(change) >= 0.5 * std::numbers::pi) {
        std::ostringstream os;
        os << "D_p phase changes by " << change / std::numbers::pi
           << " pi over the grid: closed-loop zeros outside the unit disc";
        pc.reason = os.str();
        return true;
    }
    return false;
}

void fill_margins(const std::vector<Complex>& d, const std::vector<double>& r, PointCertificate& pc) {
    pc.margins.resize(d.size());
    for (size_t k = 0; k < d.size(); ++k)
        pc.margins[k] = (d[k] * pc.alpha[k]).real() - r[k] * std::abs(pc.alpha[k]);
    pc.min_margin = *std::min_element(pc.margins.begin(), pc.margins.end());
}

// Searches alpha = base * (1 + sum c_j L_j) maximizing the common slack; true if min slack >= eps.
bool search(const std::vector<Complex>& d, const std::vector<double>& r, const std::vector<Complex>& base,
            const Eigen::MatrixXcd& lag, double eps, const MultiplierOptions& o, PointCertificate& pc) {
    const auto nf = static_cast<Eigen::Index>(d.size());
    const Eigen::Index q = lag.rows() - 1;  // row 0 is the constant fixed at 1
    ConeProgram prog;
    prog.objective = Eigen::VectorXd::Zero(q + 1);
    prog.objective(q) = 1.0;
    prog.s.resize(nf, q + 1);
    prog.s0.resize(nf);
    prog.ur.resize(nf, q + 1);
    prog.ui.resize(nf, q + 1);
    prog.ur0.resize(nf);
    prog.ui0.resize(nf);
    double m0 = INFINITY;
    for (Eigen::Index k = 0; k < nf; ++k) {
        const auto kk = static_cast<size_t>(k);
        const Complex db = d[kk] * base[kk];
        const Complex rb = r[kk] * base[kk];
        for (Eigen::Index j = 0; j < q; ++j) {
            prog.s(k, j) = (db * lag(j + 1, k)).real();
            const Complex u = rb * lag(j + 1, k);
            prog.ur(k, j) = u.real();
            prog.ui(k, j) = u.imag();
        }
        prog.s(k, q) = -1.0;
        prog.ur(k, q) = 0.0;
        prog.ui(k, q) = 0.0;
        prog.s0(k) = db.real();
        prog.ur0(k) = rb.real();
        prog.ui0(k) = rb.imag();
        m0 = std::min(m0, db.real() - std::abs(rb));
    }
    prog.g = Eigen::MatrixXd::Zero(2 * q + 1, q + 1);
    prog.h.resize(2 * q + 1);
    for (Eigen::Index j = 0; j < q; ++j) {
        prog.g(j, j) = 1.0;
        prog.g(q + j, j) = -1.0;
        prog.h(j) = o.coefficient_bound;
        prog.h(q + j) = o.coefficient_bound;
    }
    prog.g(2 * q, q) = 1.0;
    prog.h(2 * q) = 1e6;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(q + 1);
    x0(q) = m0 - 1.0 - 0.1 * std::abs(m0);
    ConeSolverOptions bo;
    bo.target = eps;
    const SolveResult res = solve_cone(prog, x0, bo);
    pc.coefficients = res.x.head(q);
    pc.alpha.resize(d.size());
    for (Eigen::Index k = 0; k < nf; ++k) {
        Complex a(1.0);
        for (Eigen::Index j = 0; j < q; ++j)
            a += pc.coefficients(j) * lag(j + 1, k);
        pc.alpha[static_cast<size_t>(k)] = base[static_cast<size_t>(k)] * a;
    }
    fill_margins(d, r, pc);
    return pc.min_margin >= eps;
}

PointCertificate certify_point(double p, const std::vector<Complex>& d, const std::vector<double>& r,
                               const FrequencyGrid& grid, double eps, const MultiplierOptions& o) {
    PointCertificate pc;
    pc.p = p;
    if (o.unity) {
        pc.alpha.assign(d.size(), Complex(1.0));
        pc.coefficients = Eigen::VectorXd();
        fill_margins(d, r, pc);
        if (pc.min_margin >= eps) {
            pc.status = CertificateStatus::Certified;
            return pc;
        }
    } else {
        const Eigen::MatrixXcd lag = eval_basis(ObfBasis::laguerre(o.pole, o.order), grid);
        const std::vector<Complex> ones(d.size(), Complex(1.0));
        pc.multiplier = "laguerre";
        if (search(d, r, ones, lag, eps, o, pc)) {
            pc.status = CertificateStatus::Certified;
            return pc;
        }
        if (o.allow_fit) {
            for (int order = 1; order <= o.max_fit_order; ++order) {
                const RationalTf fit = fit_rational(d, grid, order);
                if (std::abs(fit.num().leading()) < 1e-12 * std::abs(fit.den().leading()) || fit.num().degree() < order)
                    continue;
                const RationalTf inv(fit.den(), fit.num(), fit.sample_rate());
                if (!inv.is_stable(1e-9))
                    continue;
                const std::vector<Complex> base = inv.frf(grid).values();
                PointCertificate trial;
                trial.p = p;
                trial.multiplier = "fitted";
                if (search(d, r, base, lag, eps, o, trial)) {
                    trial.base = inv;
                    trial.status = CertificateStatus::Certified;
                    return trial;
                }
            }
        }
    }
    if (refute(d, r, grid, pc))
        pc.status = CertificateStatus::Refuted;
    else {
        pc.status = CertificateStatus::Inconclusive;
        std::ostringstream os;
        os << "no multiplier found (best slack " << pc.min_margin << " < " << eps << ")";
        pc.reason = os.str();
    }
    return pc;
}

Certificate combine(std::vector<PointCertificate> pts, const FrequencyGrid& grid, double eps,
                    const MultiplierOptions& o) {
    Certificate c;
    c.epsilon = eps;
    c.grid_size = grid.size();
    c.omega_min = grid.omegas().front();
    c.omega_max = grid.omegas().back();
    c.multiplier = o;
    c.points = std::move(pts);
    c.status = CertificateStatus::Certified;
    for (const PointCertificate& p : c.points) {
        if (p.status == CertificateStatus::Refuted) {
            c.status = CertificateStatus::Refuted;
            std::ostringstream os;
            os << "p = " << p.p << ": " << p.reason;
            c.reason = os.str();
            break;
        }
        if (p.status == CertificateStatus::Inconclusive && c.status == CertificateStatus::Certified) {
            c.status = CertificateStatus::Inconclusive;
            std::ostringstream os;
            os << "p = " << p.p << ": " << p.reason;
            c.reason = os.str();
        }
    }
    return c;
}

} // namespace

Certificate check_stability(const std::vector<std::vector<Complex>>& dp, const FrequencyGrid& grid,
                            const std::vector<double>& points, double epsilon, const MultiplierOptions& options) {
    require(dp.size() == points.size(), ErrorKind::InvalidArgument, "one D_p data vector per operating point needed");
    require(epsilon >= 0.0, ErrorKind::InvalidArgument, "epsilon must be non-negative");
    std::vector<PointCertificate> pts;
    for (size_t i = 0; i < dp.size(); ++i) {
        require(dp[i].size() == grid.size(), ErrorKind::GridMismatch, "D_p data length differs from the grid");
        pts.push_back(certify_point(points[i], dp[i], std::vector<double>(grid.size(), 0.0), grid, epsilon, options));
    }
    return combine(std::move(pts), grid, epsilon, options);
}

Certificate check_performance(const std::vector<ClosedLoopFactorData>& data, const WeightSet& weights,
                              const FrequencyGrid& grid, const std::vector<double>& points, double gamma,
                              double epsilon, const MultiplierOptions& options) {
    require(gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
    require(data.size() == points.size(), ErrorKind::InvalidArgument, "one data set per operating point needed");
    std::array<std::vector<Complex>, 4> wv;
    for (Channel c : kChannels)
        wv[static_cast<size_t>(c)] = weights[c].evaluate(grid);
    std::vector<PointCertificate> pts;
    for (size_t i = 0; i < data.size(); ++i) {
        const ClosedLoopFactorData& cl = data[i];
        require(cl.d_p.size() == grid.size(), ErrorKind::GridMismatch, "closed-loop data length differs from the grid");
        std::vector<double> r(grid.size(), 0.0);
        for (size_t k = 0; k < grid.size(); ++k)
            for (size_t c = 0; c < 4; ++c)
                r[k] = std::max(r[k], std::abs(wv[c][k] * cl.n_p[c][k]) / gamma);
        pts.push_back(certify_point(points[i], cl.d_p, r, grid, epsilon, options));
    }
    Certificate cert = combine(std::move(pts), grid, epsilon, options);
    cert.gamma = gamma;
    return cert;
}

double compute_achieved_gamma(const std::vector<ClosedLoopFactorData>& data, const WeightSet& weights,
                              const FrequencyGrid& grid) {
    std::array<std::vector<Complex>, 4> wv;
    for (Channel c : kChannels)
        wv[static_cast<size_t>(c)] = weights[c].evaluate(grid);
    double g = 0.0;
    for (const ClosedLoopFactorData& cl : data) {
        require(cl.d_p.size() == grid.size(), ErrorKind::GridMismatch, "closed-loop data length differs from the grid");
        for (size_t k = 0; k < grid.size(); ++k) {
            const double dm = std::abs(cl.d_p[k]);
            if (!(dm > 0.0)) {
                std::ostringstream os;
                os << "D_p vanishes at omega = " << grid[k];
                fail(ErrorKind::Degenerate, os.str());
            }
            for (size_t c = 0; c < 4; ++c)
                g = std::max(g, std::abs(wv[c][k] * cl.n_p[c][k]) / dm);
        }
    }
    return g;
}

double oracle_spectral_radius(const RationalTf& g, const RationalTf& k) {
    const RationalTf gm = g.minimal();
    const RationalTf km = k.minimal();
    const Polynomial chi = gm.den() * km.den() + gm.num() * km.num();
    require(!chi.is_zero(), ErrorKind::Degenerate, "1 + G K vanishes identically");
    // A degree drop means 1 + G K vanishes at infinity: the loop is ill-posed.
    if (chi.degree() < gm.den().degree() + km.den().degree())
        return INFINITY;
    double rho = 0.0;
    for (const Complex& r : chi.roots())
        rho = std::max(rho, std::abs(r));
    return rho;
}

bool oracle_stability(const RationalTf& g, const RationalTf& k) { return oracle_spectral_radius(g, k) < 1.0; }

} // namespace fdlpv
