#include "fdlpv/socp.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fdlpv {

const char* to_string(SolveStatus s) noexcept {
    switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::TargetReached: return "target_reached";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
    case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

void ConeProgram::validate() const {
    const Eigen::Index n = variables();
    const Eigen::Index k = cones();
    require(n > 0, ErrorKind::InvalidArgument, "cone program has no variables");
    require(s.cols() == n && ur.rows() == k && ur.cols() == n && ui.rows() == k && ui.cols() == n && s0.size() == k &&
                ur0.size() == k && ui0.size() == k,
            ErrorKind::InvalidArgument, "cone constraint blocks have inconsistent shapes");
    require(g.cols() == n || g.rows() == 0, ErrorKind::InvalidArgument, "linear constraint width mismatch");
    require(h.size() == g.rows(), ErrorKind::InvalidArgument, "linear constraint rhs length mismatch");
}

double ConeProgram::min_slack(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    if (cones() > 0) {
        const Eigen::ArrayXd sv = (s * x + s0).array();
        const Eigen::ArrayXd rv = (ur * x + ur0).array();
        const Eigen::ArrayXd iv = (ui * x + ui0).array();
        m = std::min(m, (sv - (rv.square() + iv.square()).sqrt()).minCoeff());
    }
    if (linear() > 0)
        m = std::min(m, (h - g * x).minCoeff());
    return m;
}

namespace {

// Vectors over K = R+^l x Q^3 x ... x Q^3, stored as a linear part and three cone components.
struct ConeVec {
    Eigen::ArrayXd l, c0, c1, c2;

    [[nodiscard]] double dot(const ConeVec& o) const {
        return (l * o.l).sum() + (c0 * o.c0).sum() + (c1 * o.c1).sum() + (c2 * o.c2).sum();
    }
    [[nodiscard]] double norm() const { return std::sqrt(dot(*this)); }
    ConeVec& operator+=(const ConeVec& o) {
        l += o.l;
        c0 += o.c0;
        c1 += o.c1;
        c2 += o.c2;
        return *this;
    }
    [[nodiscard]] ConeVec scaled(double a) const { return {l * a, c0 * a, c1 * a, c2 * a}; }
    [[nodiscard]] ConeVec plus(const ConeVec& o, double a) const {
        return {l + a * o.l, c0 + a * o.c0, c1 + a * o.c1, c2 + a * o.c2};
    }
};

// Jordan product and its inverse.
ConeVec jprod(const ConeVec& x, const ConeVec& y) {
    return {x.l * y.l, x.c0 * y.c0 + x.c1 * y.c1 + x.c2 * y.c2, x.c0 * y.c1 + y.c0 * x.c1, x.c0 * y.c2 + y.c0 * x.c2};
}

// u with lambda o u = r.
ConeVec jdiv(const ConeVec& lam, const ConeVec& r) {
    ConeVec u;
    u.l = r.l / lam.l;
    const Eigen::ArrayXd det = (lam.c0 - (lam.c1.square() + lam.c2.square()).sqrt()) *
                               (lam.c0 + (lam.c1.square() + lam.c2.square()).sqrt());
    u.c0 = (lam.c0 * r.c0 - lam.c1 * r.c1 - lam.c2 * r.c2) / det;
    u.c1 = (r.c1 - u.c0 * lam.c1) / lam.c0;
    u.c2 = (r.c2 - u.c0 * lam.c2) / lam.c0;
    return u;
}

// Largest a with x + a d in the cone (infinity if unbounded).
double max_step(const ConeVec& x, const ConeVec& d) {
    double amax = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < x.l.size(); ++i)
        if (d.l(i) < 0.0)
            amax = std::min(amax, -x.l(i) / d.l(i));
    for (Eigen::Index i = 0; i < x.c0.size(); ++i) {
        const double x0 = x.c0(i);
        const double xn = std::hypot(x.c1(i), x.c2(i));
        const double c = (x0 - xn) * (x0 + xn);
        const double a = d.c0(i) * d.c0(i) - d.c1(i) * d.c1(i) - d.c2(i) * d.c2(i);
        const double b = x0 * d.c0(i) - x.c1(i) * d.c1(i) - x.c2(i) * d.c2(i);
        // f(t) = a t^2 + 2 b t + c, f(0) = c > 0
        double root = std::numeric_limits<double>::infinity();
        if (a == 0.0) {
            if (b < 0.0)
                root = -c / (2.0 * b);
        } else {
            const double disc = b * b - a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                const double qq = -(b + std::copysign(sq, b));
                const double r1 = qq / a;
                const double r2 = qq != 0.0 ? c / qq : std::numeric_limits<double>::infinity();
                for (double r : {r1, r2})
                    if (r > 0.0)
                        root = std::min(root, r);
            }
        }
        amax = std::min(amax, root);
    }
    return amax;
}

// Nesterov-Todd scaling W: W z = W^{-1} s = lambda. Second-order cone blocks are
// W = beta (2 v v' - J) with v'Jv = 1.
struct Scaling {
    Eigen::ArrayXd wl;
    Eigen::ArrayXd beta, v0, v1, v2;

    [[nodiscard]] ConeVec apply(const ConeVec& y) const {
        ConeVec o;
        o.l = wl * y.l;
        const Eigen::ArrayXd t = v0 * y.c0 + v1 * y.c1 + v2 * y.c2;
        o.c0 = beta * (2.0 * v0 * t - y.c0);
        o.c1 = beta * (2.0 * v1 * t + y.c1);
        o.c2 = beta * (2.0 * v2 * t + y.c2);
        return o;
    }
    // W^{-1} = (2 Jv v'J - J) / beta
    [[nodiscard]] ConeVec apply_inverse(const ConeVec& y) const {
        ConeVec o;
        o.l = y.l / wl;
        const Eigen::ArrayXd t = v0 * y.c0 - v1 * y.c1 - v2 * y.c2;
        o.c0 = (2.0 * v0 * t - y.c0) / beta;
        o.c1 = (-2.0 * v1 * t + y.c1) / beta;
        o.c2 = (-2.0 * v2 * t + y.c2) / beta;
        return o;
    }
};

Scaling nt_scaling(const ConeVec& s, const ConeVec& z) {
    Scaling w;
    w.wl = (s.l / z.l).sqrt();
    const Eigen::ArrayXd sn = (s.c1.square() + s.c2.square()).sqrt();
    const Eigen::ArrayXd zn = (z.c1.square() + z.c2.square()).sqrt();
    const Eigen::ArrayXd a = ((s.c0 - sn) * (s.c0 + sn)).sqrt();
    const Eigen::ArrayXd b = ((z.c0 - zn) * (z.c0 + zn)).sqrt();
    const Eigen::ArrayXd sb0 = s.c0 / a, sb1 = s.c1 / a, sb2 = s.c2 / a;
    const Eigen::ArrayXd zb0 = z.c0 / b, zb1 = z.c1 / b, zb2 = z.c2 / b;
    const Eigen::ArrayXd gam = ((1.0 + sb0 * zb0 + sb1 * zb1 + sb2 * zb2) / 2.0).sqrt();
    const Eigen::ArrayXd wb0 = (sb0 + zb0) / (2.0 * gam);
    const Eigen::ArrayXd wb1 = (sb1 - zb1) / (2.0 * gam);
    const Eigen::ArrayXd wb2 = (sb2 - zb2) / (2.0 * gam);
    const Eigen::ArrayXd den = (2.0 * (wb0 + 1.0)).sqrt();
    w.v0 = (wb0 + 1.0) / den;
    w.v1 = wb1 / den;
    w.v2 = wb2 / den;
    w.beta = (a / b).sqrt();
    return w;
}

struct Operator {
    Eigen::MatrixXd gl, g0, g1, g2;  // G blocks, s = h - G x
    ConeVec h;

    [[nodiscard]] ConeVec times(const Eigen::VectorXd& x) const {
        ConeVec o;
        o.l = (gl * x).array();
        o.c0 = (g0 * x).array();
        o.c1 = (g1 * x).array();
        o.c2 = (g2 * x).array();
        return o;
    }
    [[nodiscard]] Eigen::VectorXd transpose_times(const ConeVec& y) const {
        Eigen::VectorXd o = g0.transpose() * y.c0.matrix() + g1.transpose() * y.c1.matrix() +
                            g2.transpose() * y.c2.matrix();
        if (gl.rows() > 0)
            o += gl.transpose() * y.l.matrix();
        return o;
    }
};

ConeVec identity_like(Eigen::Index nl, Eigen::Index nc) {
    return {Eigen::ArrayXd::Ones(nl), Eigen::ArrayXd::Ones(nc), Eigen::ArrayXd::Zero(nc), Eigen::ArrayXd::Zero(nc)};
}

} // namespace

SolveResult solve_cone(const ConeProgram& p, const Eigen::VectorXd& x0, const ConeSolverOptions& opt) {
    p.validate();
    require(x0.size() == p.variables(), ErrorKind::InvalidArgument, "starting point has the wrong length");
    SolveResult res;
    res.x = x0;
    res.objective = p.objective.dot(x0);
    res.upper_bound = std::numeric_limits<double>::infinity();
    if (!(p.min_slack(x0) > 0.0)) {
        res.status = SolveStatus::NumericalFailure;
        res.message = "starting point is not strictly feasible";
        return res;
    }
    if (opt.target && res.objective >= *opt.target) {
        res.status = SolveStatus::TargetReached;
        return res;
    }

    const Eigen::Index nl = p.linear();
    const Eigen::Index nc = p.cones();
    Operator op;
    op.gl = p.g;
    op.g0 = -p.s;
    op.g1 = -p.ur;
    op.g2 = -p.ui;
    op.h = {nl > 0 ? Eigen::ArrayXd(p.h.array()) : Eigen::ArrayXd(), p.s0.array(), p.ur0.array(), p.ui0.array()};
    const Eigen::VectorXd c = -p.objective;  // minimize c'x
    double last_gap = std::numeric_limits<double>::infinity();
    double last_dres = std::numeric_limits<double>::infinity();
    // Rounding stalls the iteration once the gap is tiny; report such runs as optimal.
    auto stalled = [&](SolveResult& r, const char* why) {
        const bool near = last_dres <= 1e3 * opt.feasibility_tolerance &&
                          last_gap <= 1e3 * opt.gap_tolerance * std::max(1.0, std::abs(r.objective));
        r.status = near ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
        r.message = why;
        return r;
    };
    const double degree = static_cast<double>(nl + nc);
    const double hnorm = std::max(1.0, op.h.norm());
    const double cnorm = std::max(1.0, c.norm());

    Eigen::VectorXd x = x0;
    ConeVec s = op.h.plus(op.times(x), -1.0);
    ConeVec z = identity_like(nl, nc);
    // Balance the initial duality measure against the primal slacks.
    z = z.scaled(std::max(1e-8, s.dot(identity_like(nl, nc)) / degree));

    const ConeVec e = identity_like(nl, nc);
    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd rx = op.transpose_times(z) + c;
        const ConeVec rz = op.times(x).plus(s, 1.0).plus(op.h, -1.0);
        const double gap = s.dot(z);
        const double mu = gap / degree;
        const double pcost = c.dot(x);
        const double dcost = -op.h.dot(z);
        const double pres = rz.norm() / hnorm;
        const double dres = rx.norm() / cnorm;
        last_gap = gap;
        last_dres = dres;

        res.x = x;
        res.objective = -pcost;
        if (dres <= opt.feasibility_tolerance)
            res.upper_bound = std::min(res.upper_bound, -dcost);
        const bool primal_ok = p.min_slack(x) > 0.0;
        if (opt.target && primal_ok && res.objective >= *opt.target) {
            res.status = SolveStatus::TargetReached;
            return res;
        }
        if (opt.target && dres <= opt.feasibility_tolerance &&
            res.upper_bound < *opt.target - opt.gap_tolerance * std::max(1.0, std::abs(*opt.target))) {
            res.status = SolveStatus::Infeasible;
            return res;
        }
        if (pres <= opt.feasibility_tolerance && dres <= opt.feasibility_tolerance &&
            gap <= opt.gap_tolerance * std::max(1.0, std::abs(pcost))) {
            res.status = SolveStatus::Optimal;
            return res;
        }

        const Scaling w = nt_scaling(s, z);
        const ConeVec lam = w.apply(z);
        // M = W^{-1} G, rows grouped per cone component.
        Eigen::MatrixXd m0, m1, m2, ml;
        {
            const Eigen::MatrixXd t = op.g0.array().colwise() * w.v0 - op.g1.array().colwise() * w.v1 -
                                      op.g2.array().colwise() * w.v2;
            const Eigen::ArrayXd ib = 1.0 / w.beta;
            m0 = ((t.array().colwise() * (2.0 * w.v0)) - op.g0.array()).colwise() * ib;
            m1 = ((t.array().colwise() * (-2.0 * w.v1)) + op.g1.array()).colwise() * ib;
            m2 = ((t.array().colwise() * (-2.0 * w.v2)) + op.g2.array()).colwise() * ib;
            if (nl > 0)
                ml = op.gl.array().colwise() / w.wl;
        }
        Eigen::MatrixXd normal = m0.transpose() * m0 + m1.transpose() * m1 + m2.transpose() * m2;
        if (nl > 0)
            normal.noalias() += ml.transpose() * ml;
        const Eigen::VectorXd dsc = normal.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd ns = dsc.asDiagonal() * normal * dsc.asDiagonal();
        ns.diagonal().array() += 1e-14;
        const Eigen::LLT<Eigen::MatrixXd> llt(ns);
        if (llt.info() != Eigen::Success) {
            return stalled(res, "normal equations are not positive definite");
        }
        auto mtimes = [&](const Eigen::VectorXd& v) {
            ConeVec o;
            o.l = nl > 0 ? Eigen::ArrayXd((ml * v).array()) : Eigen::ArrayXd();
            o.c0 = (m0 * v).array();
            o.c1 = (m1 * v).array();
            o.c2 = (m2 * v).array();
            return o;
        };
        auto mtranspose = [&](const ConeVec& y) {
            Eigen::VectorXd o = m0.transpose() * y.c0.matrix() + m1.transpose() * y.c1.matrix() +
                                m2.transpose() * y.c2.matrix();
            if (nl > 0)
                o += ml.transpose() * y.l.matrix();
            return o;
        };
        // Solves G'dz = -frx, G dx + ds = -frz, W^{-1} ds + W dz = q; returns scaled ds~, dz~.
        struct Dir {
            Eigen::VectorXd dx;
            ConeVec ds, dz, dst, dzt;
        };
        auto solve = [&](double f, const ConeVec& q) {
            Dir d;
            const ConeVec wrz = w.apply_inverse(rz.scaled(f));
            const Eigen::VectorXd rhs = -f * rx - mtranspose(wrz.plus(q, 1.0));
            d.dx = dsc.asDiagonal() * llt.solve(dsc.asDiagonal() * rhs);
            const ConeVec mdx = mtimes(d.dx);
            d.dzt = mdx.plus(wrz, 1.0).plus(q, 1.0);
            d.dst = mdx.plus(wrz, 1.0).scaled(-1.0);
            d.dz = w.apply_inverse(d.dzt);
            d.ds = w.apply(d.dst);
            return d;
        };

        const ConeVec lsq = jprod(lam, lam);
        const Dir aff = solve(1.0, lam.scaled(-1.0));
        const double a_aff = std::min({1.0, max_step(s, aff.ds), max_step(z, aff.dz)});
        const double mu_aff = s.plus(aff.ds, a_aff).dot(z.plus(aff.dz, a_aff)) / degree;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);
        ConeVec rc = lsq.scaled(-1.0);
        rc += e.scaled(sigma * mu);
        rc += jprod(aff.dst, aff.dzt).scaled(-1.0);
        const Dir dir = solve(1.0 - sigma, jdiv(lam, rc));
        if (!dir.dx.allFinite()) {
            return stalled(res, "non-finite search direction");
        }
        const double amax = std::min(max_step(s, dir.ds), max_step(z, dir.dz));
        const double step = std::min(1.0, 0.99 * amax);
        if (!(step > 0.0)) {
            return stalled(res, "zero step length");
        }
        x += step * dir.dx;
        s = s.plus(dir.ds, step);
        z = z.plus(dir.dz, step);
    }
    stalled(res, "interior-point method did not converge");
    if (res.status != SolveStatus::Optimal)
        res.status = SolveStatus::IterationLimit;
    return res;
}

} // namespace fdlpv
