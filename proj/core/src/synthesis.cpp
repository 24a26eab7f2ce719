#include "fdlpv/synthesis.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdlpv {

namespace {

// Numerator of sum_i c_i phi_i over the common denominator of the basis.
std::pair<Polynomial, Polynomial> combine(const ObfBasis& basis, const Eigen::VectorXd& coeffs) {
    const int n = basis.order();
    const Polynomial den = basis.function(n).den();
    Polynomial num;
    for (int i = 0; i <= n; ++i) {
        const RationalTf phi = basis.function(i);
        Polynomial rem;
        const Polynomial scale = divide(den, phi.den(), rem);
        num += phi.num() * scale * coeffs(i);
    }
    return {num, den};
}

Eigen::VectorXd at(const Eigen::MatrixXd& coeffs, const SchedulingBasis& sched, double p) {
    const std::vector<double> psi = sched.evaluate(p);
    return coeffs * Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size()));
}

} // namespace

ControllerParameters ControllerParameters::normalized(ObfBasis basis_n, ObfBasis basis_d, SchedulingBasis scheduling,
                                                      double sample_rate) {
    ControllerParameters t;
    t.w = Eigen::MatrixXd::Zero(basis_n.size(), scheduling.size());
    t.v = Eigen::MatrixXd::Zero(basis_d.size(), scheduling.size());
    t.v(0, 0) = 1.0;
    t.basis_n = std::move(basis_n);
    t.basis_d = std::move(basis_d);
    t.scheduling = scheduling;
    t.sample_rate = sample_rate;
    return t;
}

Eigen::VectorXd ControllerParameters::pack() const {
    Eigen::VectorXd theta(size());
    const int mm = m();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (int l = 0; l < mm; ++l)
            theta(i * mm + l) = w(i, l);
    const Eigen::Index off = w.size();
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (int l = 0; l < mm; ++l)
            theta(off + i * mm + l) = v(i, l);
    return theta;
}

void ControllerParameters::unpack(const Eigen::VectorXd& theta) {
    require(theta.size() == size(), ErrorKind::InvalidArgument, "parameter vector has the wrong length");
    const int mm = m();
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (int l = 0; l < mm; ++l)
            w(i, l) = theta(i * mm + l);
    const Eigen::Index off = w.size();
    for (Eigen::Index i = 0; i < v.rows(); ++i)
        for (int l = 0; l < mm; ++l)
            v(i, l) = theta(off + i * mm + l);
}

Eigen::VectorXd ControllerParameters::w_at(double p) const { return at(w, scheduling, p); }
Eigen::VectorXd ControllerParameters::v_at(double p) const { return at(v, scheduling, p); }

RationalTf ControllerParameters::nk_tf(double p) const {
    auto [num, den] = combine(basis_n, w_at(p));
    return {num, den, sample_rate};
}

RationalTf ControllerParameters::dk_tf(double p) const {
    auto [num, den] = combine(basis_d, v_at(p));
    return {num, den, sample_rate};
}

RationalTf ControllerParameters::controller_tf(double p) const {
    const auto [nn, dn] = combine(basis_n, w_at(p));
    const auto [nd, dd] = combine(basis_d, v_at(p));
    require(!nd.is_zero(), ErrorKind::Degenerate, "frozen D_K vanishes identically");
    Polynomial rem;
    const Polynomial extra = divide(dd, dn, rem);
    double scale = 0.0;
    for (double c : dd.coeffs())
        scale = std::max(scale, std::abs(c));
    double rmax = 0.0;
    for (double c : rem.coeffs())
        rmax = std::max(rmax, std::abs(c));
    if (rmax <= 1e-12 * scale)
        return {nn * extra, nd, sample_rate};
    return {nn * dd, dn * nd, sample_rate};
}

void ControllerParameters::validate() const {
    require(w.rows() == basis_n.size() && v.rows() == basis_d.size() && w.cols() == m() && v.cols() == m(),
            ErrorKind::InvalidArgument, "parameter tensor shape does not match the bases");
    require(basis_d.order() >= basis_n.order(), ErrorKind::InvalidArgument, "denominator order must be >= numerator order");
    require(w.allFinite() && v.allFinite(), ErrorKind::Numerical, "controller parameters are not finite");
    for (int l = 0; l < m(); ++l)
        require(v(0, l) == (l == 0 ? 1.0 : 0.0), ErrorKind::InvalidArgument,
                "controller parameters violate the normalization v_0 = [1, 0, ..., 0]");
}

std::pair<std::vector<Complex>, std::vector<Complex>> evaluate_factors(const ControllerParameters& theta, double p,
                                                                       const FrequencyGrid& grid) {
    const Eigen::VectorXd wp = theta.w_at(p);
    const Eigen::VectorXd vp = theta.v_at(p);
    const Eigen::MatrixXcd phin = eval_basis(theta.basis_n, grid);
    const Eigen::MatrixXcd phid = eval_basis(theta.basis_d, grid);
    const Eigen::VectorXcd nk = phin.transpose() * wp.cast<Complex>();
    const Eigen::VectorXcd dk = phid.transpose() * vp.cast<Complex>();
    return {std::vector<Complex>(nk.data(), nk.data() + nk.size()), std::vector<Complex>(dk.data(), dk.data() + dk.size())};
}

void SynthesisProblem::validate() const {
    require(grid != nullptr, ErrorKind::InvalidArgument, "synthesis problem has no frequency grid");
    require(data.size() == scheduling.size(), ErrorKind::InvalidArgument,
            "coprime data count differs from the number of operating points");
    for (const CoprimeFrfPair& d : data)
        require(d.n_g.grid() == *grid && d.d_g.grid() == *grid, ErrorKind::GridMismatch,
                "coprime data grid differs from the synthesis grid");
    require(basis_d.order() >= basis_n.order(), ErrorKind::Config, "obf.order_d must be >= obf.order_n");
    for (double p : scheduling.points())
        (void)scheduling_basis.evaluate(p);
    weights.validate();
    const SynthesisOptions& o = options;
    require(o.gamma_lo > 0.0 && o.gamma_lo < o.gamma_hi, ErrorKind::Config, "need 0 < gamma_lo < gamma_hi");
    require(o.rel_tolerance >= 0.0 && o.abs_tolerance >= 0.0 && (o.rel_tolerance > 0.0 || o.abs_tolerance > 0.0),
            ErrorKind::Config, "bisection tolerance must be positive");
    require(o.rolloff_order == 0 || o.rolloff_order == 1, ErrorKind::Config, "rolloff order must be 0 or 1");
    require(o.theta_bound > 0.0, ErrorKind::Config, "theta bound must be positive");
    if (o.integral_action)
        require(grid->omegas().front() > 0.0, ErrorKind::Config,
                "integral action needs omega = 0 excluded from the constraint grid");
}

double SynthesisProblem::epsilon() const {
    if (options.epsilon >= 0.0)
        return options.epsilon;
    std::vector<double> mags;
    for (const CoprimeFrfPair& d : data)
        for (const Complex& v : d.d_g.values())
            mags.push_back(std::abs(v));
    require(!mags.empty(), ErrorKind::InvalidArgument, "no data to derive epsilon from");
    auto mid = mags.begin() + static_cast<std::ptrdiff_t>(mags.size() / 2);
    std::nth_element(mags.begin(), mid, mags.end());
    return 1e-6 * *mid;
}

Eigen::Index SynthesisProblem::parameter_count() const {
    return static_cast<Eigen::Index>(basis_n.size() + basis_d.size()) * scheduling_basis.size();
}

SynthesisProblem SynthesisProblem::as_lti() const {
    SynthesisProblem out = *this;
    out.scheduling_basis = SchedulingBasis::constant(scheduling_basis.lo(), scheduling_basis.hi());
    return out;
}

Eigen::MatrixXd ConstraintSet::margins(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXcd t = theta.cast<Complex>();
    const Eigen::VectorXd re = (dp * t).real();
    Eigen::MatrixXd out(dp.rows(), 4);
    for (size_t c = 0; c < 4; ++c)
        out.col(static_cast<Eigen::Index>(c)) = re - (wn[c] * t).cwiseAbs() / gamma - Eigen::VectorXd::Constant(dp.rows(), epsilon);
    return out;
}

ConstraintSet assemble_constraints(const SynthesisProblem& problem, double gamma) {
    require(gamma > 0.0, ErrorKind::InvalidArgument, "gamma must be positive");
    problem.validate();
    const FrequencyGrid& grid = *problem.grid;
    const auto nf = static_cast<Eigen::Index>(grid.size());
    const auto np = static_cast<Eigen::Index>(problem.scheduling.size());
    const int m = problem.scheduling_basis.size();
    const Eigen::Index nw = static_cast<Eigen::Index>(problem.basis_n.size()) * m;
    const Eigen::Index nth = problem.parameter_count();
    const Eigen::MatrixXcd phin = eval_basis(problem.basis_n, grid);
    const Eigen::MatrixXcd phid = eval_basis(problem.basis_d, grid);
    std::array<std::vector<Complex>, 4> wv;
    for (Channel c : kChannels)
        wv[static_cast<size_t>(c)] = problem.weights[c].evaluate(grid);

    ConstraintSet cs;
    cs.gamma = gamma;
    cs.epsilon = problem.epsilon();
    cs.frequencies = grid.size();
    cs.points = problem.scheduling.size();
    cs.dp = Eigen::MatrixXcd::Zero(nf * np, nth);
    for (auto& m_ : cs.wn)
        m_ = Eigen::MatrixXcd::Zero(nf * np, nth);
    for (Eigen::Index tau = 0; tau < np; ++tau) {
        const double p = problem.scheduling[static_cast<size_t>(tau)];
        const std::vector<double> psi = problem.scheduling_basis.evaluate(p);
        const CoprimeFrfPair& pair = problem.data[static_cast<size_t>(tau)];
        for (Eigen::Index k = 0; k < nf; ++k) {
            const Eigen::Index r = tau * nf + k;
            const Complex ng = pair.n_g[static_cast<size_t>(k)];
            const Complex dg = pair.d_g[static_cast<size_t>(k)];
            for (Eigen::Index i = 0; i < phin.rows(); ++i)
                for (int l = 0; l < m; ++l) {
                    const Complex base = phin(i, k) * psi[static_cast<size_t>(l)];
                    const Eigen::Index col = i * m + l;
                    cs.dp(r, col) = ng * base;
                    cs.wn[2](r, col) = wv[2][static_cast<size_t>(k)] * dg * base;
                    cs.wn[3](r, col) = wv[3][static_cast<size_t>(k)] * ng * base;
                }
            for (Eigen::Index i = 0; i < phid.rows(); ++i)
                for (int l = 0; l < m; ++l) {
                    const Complex base = phid(i, k) * psi[static_cast<size_t>(l)];
                    const Eigen::Index col = nw + i * m + l;
                    cs.dp(r, col) = dg * base;
                    cs.wn[0](r, col) = wv[0][static_cast<size_t>(k)] * dg * base;
                    cs.wn[1](r, col) = wv[1][static_cast<size_t>(k)] * ng * base;
                }
        }
    }
    return cs;
}

void EqualityConstraints::append(const Eigen::RowVectorXd& row, double rhs, std::string label) {
    if (a.rows() == 0)
        a.resize(0, row.size());
    require(row.size() == a.cols(), ErrorKind::InvalidArgument, "equality row has the wrong width");
    a.conservativeResize(a.rows() + 1, Eigen::NoChange);
    a.row(a.rows() - 1) = row;
    b.conservativeResize(b.size() + 1);
    b(b.size() - 1) = rhs;
    labels.push_back(std::move(label));
}

EqualityConstraints normalization_constraints(const SynthesisProblem& problem) {
    EqualityConstraints eq;
    const int m = problem.scheduling_basis.size();
    const Eigen::Index n = problem.parameter_count();
    const Eigen::Index off = static_cast<Eigen::Index>(problem.basis_n.size()) * m;
    eq.a.resize(0, n);
    for (int l = 0; l < m; ++l) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row(off + l) = 1.0;
        eq.append(row, l == 0 ? 1.0 : 0.0, "normalization v_0," + std::to_string(l));
    }
    return eq;
}

EqualityConstraints add_integral_action(const SynthesisProblem& problem, EqualityConstraints eq) {
    const int m = problem.scheduling_basis.size();
    const Eigen::Index n = problem.parameter_count();
    const Eigen::Index off = static_cast<Eigen::Index>(problem.basis_n.size()) * m;
    const std::vector<Complex> phi1 = problem.basis_d.evaluate(Complex(1.0));
    for (double p : problem.scheduling.points()) {
        const std::vector<double> psi = problem.scheduling_basis.evaluate(p);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        for (int i = 0; i < problem.basis_d.size(); ++i)
            for (int l = 0; l < m; ++l)
                row(off + i * m + l) = phi1[static_cast<size_t>(i)].real() * psi[static_cast<size_t>(l)];
        std::ostringstream os;
        os << "integral action D_K(1, " << p << ") = 0";
        eq.append(row, 0.0, os.str());
    }
    return eq;
}

EqualityConstraints add_rolloff(const SynthesisProblem& problem, EqualityConstraints eq) {
    const int m = problem.scheduling_basis.size();
    const Eigen::Index n = problem.parameter_count();
    const std::vector<Complex> phim = problem.basis_n.evaluate(Complex(-1.0));
    for (double p : problem.scheduling.points()) {
        const std::vector<double> psi = problem.scheduling_basis.evaluate(p);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        for (int i = 0; i < problem.basis_n.size(); ++i)
            for (int l = 0; l < m; ++l)
                row(i * m + l) = phim[static_cast<size_t>(i)].real() * psi[static_cast<size_t>(l)];
        std::ostringstream os;
        os << "rolloff N_K(-1, " << p << ") = 0";
        eq.append(row, 0.0, os.str());
    }
    return eq;
}

EqualityConstraints build_equalities(const SynthesisProblem& problem) {
    EqualityConstraints eq = normalization_constraints(problem);
    if (problem.options.integral_action)
        eq = add_integral_action(problem, std::move(eq));
    if (problem.options.rolloff_order == 1)
        eq = add_rolloff(problem, std::move(eq));
    return eq;
}

namespace {

struct Reduction {
    Eigen::VectorXd particular;
    Eigen::MatrixXd nullspace;
};

Reduction reduce(const EqualityConstraints& eq, Eigen::Index n) {
    Reduction r;
    if (eq.rows() == 0) {
        r.particular = Eigen::VectorXd::Zero(n);
        r.nullspace = Eigen::MatrixXd::Identity(n, n);
        return r;
    }
    require(eq.a.cols() == n, ErrorKind::InvalidArgument, "equality constraints have the wrong width");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(eq.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    svd.setThreshold(1e-10);
    const Eigen::Index rank = smax > 0.0 ? svd.rank() : 0;
    r.particular = svd.solve(eq.b);
    const double resid = (eq.a * r.particular - eq.b).norm();
    if (resid > 1e-9 * (1.0 + eq.b.norm())) {
        std::ostringstream os;
        os << "equality constraints are contradictory (residual " << resid << "):";
        for (const std::string& l : eq.labels)
            os << " [" << l << "]";
        fail(ErrorKind::Infeasible, os.str());
    }
    r.nullspace = svd.matrixV().rightCols(n - rank);
    return r;
}

} // namespace

FeasibilityResult feasibility_solve(const ConstraintSet& cs, const EqualityConstraints& eq, double theta_bound,
                                    bool optimize) {
    const Eigen::Index n = cs.dp.cols();
    const Reduction red = reduce(eq, n);
    const Eigen::MatrixXd& z = red.nullspace;
    const Eigen::VectorXd& th0 = red.particular;
    const Eigen::Index q = z.cols();
    FeasibilityResult out;
    const double m0 = cs.margins(th0).minCoeff();
    if (q == 0) {
        out.theta = th0;
        out.margin = m0;
        out.feasible = m0 >= 0.0;
        out.status = SolveStatus::Optimal;
        return out;
    }
    require((th0.array().abs() < theta_bound).all(), ErrorKind::Infeasible,
            "equality constraints force parameters beyond the coefficient bound");

    const Eigen::Index rows = cs.dp.rows();
    const Eigen::Index k = 4 * rows;
    ConeProgram prog;
    prog.objective = Eigen::VectorXd::Zero(q + 1);
    prog.objective(q) = 1.0;
    prog.s.resize(k, q + 1);
    prog.s0.resize(k);
    prog.ur.resize(k, q + 1);
    prog.ui.resize(k, q + 1);
    prog.ur0.resize(k);
    prog.ui0.resize(k);
    const Eigen::MatrixXcd zc = z.cast<Complex>();
    const Eigen::VectorXcd t0c = th0.cast<Complex>();
    const Eigen::MatrixXd dz = (cs.dp * zc).real();
    const Eigen::VectorXd d0 = (cs.dp * t0c).real();
    for (size_t c = 0; c < 4; ++c) {
        const Eigen::MatrixXcd wz = cs.wn[c] * zc / cs.gamma;
        const Eigen::VectorXcd w0 = cs.wn[c] * t0c / cs.gamma;
        const auto off = static_cast<Eigen::Index>(c) * rows;
        prog.s.block(off, 0, rows, q) = dz;
        prog.s.block(off, q, rows, 1).setConstant(-1.0);
        prog.s0.segment(off, rows) = d0.array() - cs.epsilon;
        prog.ur.block(off, 0, rows, q) = wz.real();
        prog.ur.block(off, q, rows, 1).setZero();
        prog.ui.block(off, 0, rows, q) = wz.imag();
        prog.ui.block(off, q, rows, 1).setZero();
        prog.ur0.segment(off, rows) = w0.real();
        prog.ui0.segment(off, rows) = w0.imag();
    }
    const double t_cap = 1e6;
    prog.g = Eigen::MatrixXd::Zero(2 * n + 1, q + 1);
    prog.h.resize(2 * n + 1);
    prog.g.block(0, 0, n, q) = z;
    prog.g.block(n, 0, n, q) = -z;
    prog.h.head(n) = Eigen::VectorXd::Constant(n, theta_bound) - th0;
    prog.h.segment(n, n) = Eigen::VectorXd::Constant(n, theta_bound) + th0;
    prog.g(2 * n, q) = 1.0;
    prog.h(2 * n) = t_cap;

    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(q + 1);
    x0(q) = m0 - 1.0 - 0.1 * std::abs(m0);
    ConeSolverOptions opt;
    if (!optimize)
        opt.target = 0.0;
    const SolveResult res = solve_cone(prog, x0, opt);
    out.status = res.status;
    out.newton_iterations = res.iterations;
    out.theta = th0 + z * res.x.head(q);
    // Report the true common slack of the returned point.
    out.margin = cs.margins(out.theta).minCoeff();
    switch (res.status) {
    case SolveStatus::TargetReached: out.feasible = true; break;
    case SolveStatus::Optimal: out.feasible = out.margin >= 0.0; break;
    case SolveStatus::Infeasible: out.feasible = false; break;
    case SolveStatus::IterationLimit:
    case SolveStatus::NumericalFailure: out.feasible = out.margin >= 0.0; break;
    }
    return out;
}

std::vector<ClosedLoopFactorData> closed_loop_data(const SynthesisProblem& problem, const ControllerParameters& theta) {
    std::vector<ClosedLoopFactorData> out;
    for (size_t tau = 0; tau < problem.scheduling.size(); ++tau) {
        auto [nk, dk] = evaluate_factors(theta, problem.scheduling[tau], *problem.grid);
        out.push_back(assemble_closed_loop(problem.data[tau], nk, dk));
    }
    return out;
}

SynthesisResult bisect_gamma(const SynthesisProblem& problem) {
    problem.validate();
    const SynthesisOptions& o = problem.options;
    const EqualityConstraints eq = build_equalities(problem);
    SynthesisResult res;
    auto attempt = [&](double gamma) {
        const ConstraintSet cs = assemble_constraints(problem, gamma);
        FeasibilityResult fr = feasibility_solve(cs, eq, o.theta_bound);
        res.steps.push_back({gamma, fr.feasible, fr.newton_iterations});
        if (!fr.feasible && fr.status != SolveStatus::Infeasible && fr.status != SolveStatus::Optimal) {
            std::ostringstream os;
            os << "cone solver failed at gamma = " << gamma << " (" << to_string(fr.status) << ")";
            fail(ErrorKind::SolverFailure, os.str());
        }
        return fr;
    };

    double lo = o.gamma_lo;
    double hi = o.gamma_hi;
    FeasibilityResult best = attempt(hi);
    if (!best.feasible) {
        std::ostringstream os;
        os << "synthesis infeasible at the upper bound gamma = " << hi << "; best common slack " << best.margin
           << " (epsilon " << problem.epsilon() << ")";
        fail(ErrorKind::Infeasible, os.str());
    }
    int iterations = 0;
    while (hi - lo > std::max(o.rel_tolerance * hi, o.abs_tolerance) && iterations < o.max_bisection) {
        ++iterations;
        const double mid = 0.5 * (lo + hi);
        FeasibilityResult fr = attempt(mid);
        if (fr.feasible) {
            hi = mid;
            best = std::move(fr);
        } else {
            lo = mid;
        }
    }

    const ConstraintSet cs = assemble_constraints(problem, hi);
    FeasibilityResult polished = feasibility_solve(cs, eq, o.theta_bound, true);
    if (polished.feasible && polished.margin >= best.margin)
        best = std::move(polished);

    res.theta = ControllerParameters::normalized(problem.basis_n, problem.basis_d, problem.scheduling_basis,
                                                 problem.grid->sample_rate());
    res.theta.unpack(best.theta);
    // Snap the normalization to exact values; the solver returns it to rounding accuracy.
    res.theta.v.row(0).setZero();
    res.theta.v(0, 0) = 1.0;
    res.gamma = hi;
    res.iterations = iterations;
    res.epsilon = cs.epsilon;
    const Eigen::VectorXd theta = res.theta.pack();
    res.margins = cs.margins(theta);
    res.min_margin = res.margins.minCoeff();
    const Eigen::VectorXcd tc = theta.cast<Complex>();
    const Eigen::VectorXcd dp = cs.dp * tc;
    res.min_re_dp = dp.real().minCoeff();
    double achieved = 0.0;
    for (size_t c = 0; c < 4; ++c)
        achieved = std::max(achieved, ((cs.wn[c] * tc).cwiseAbs().array() / dp.cwiseAbs().array()).maxCoeff());
    res.achieved_gamma = achieved;
    res.status = res.min_margin >= 0.0 ? "certified" : "margin_violation";
    return res;
}

} // namespace fdlpv
