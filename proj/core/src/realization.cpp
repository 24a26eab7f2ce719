#include "fdlpv/realization.hpp"

#include "fdlpv/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fdlpv {

Eigen::VectorXd LfrController::delta(double p) const {
    const std::vector<double> psi = scheduling.evaluate(p);
    const auto m = static_cast<Eigen::Index>(psi.size());
    Eigen::VectorXd out(2 * m);
    for (Eigen::Index l = 0; l < m; ++l) {
        out(l) = psi[static_cast<size_t>(l)];
        out(m + l) = psi[static_cast<size_t>(l)];
    }
    return out;
}

LfrController::Frozen LfrController::frozen(double p) const {
    const Eigen::VectorXd dl = delta(p);
    const auto nz = dl.size();
    // w = M (C1 x + D12 e), M = (I - Delta D11)^{-1} Delta
    const Eigen::MatrixXd idm = Eigen::MatrixXd::Identity(nz, nz) - dl.asDiagonal() * d11;
    const Eigen::MatrixXd m = idm.partialPivLu().solve(Eigen::MatrixXd(dl.asDiagonal()));
    Frozen f;
    f.a = a + b1 * m * c1;
    f.b = b2 + b1 * m * d12;
    f.c = c2 + d21 * m * c1;
    f.d = d22 + (d21 * m * d12)(0);
    return f;
}

double LfrController::step(Eigen::VectorXd& state, double e, double p) const {
    const Eigen::VectorXd dl = delta(p);
    const Eigen::VectorXd zfree = c1 * state + d12 * e;
    Eigen::VectorXd w;
    if (d11.isZero(0.0)) {
        w = dl.cwiseProduct(zfree);
    } else {
        const auto nz = dl.size();
        const Eigen::MatrixXd idm = Eigen::MatrixXd::Identity(nz, nz) - dl.asDiagonal() * d11;
        w = idm.partialPivLu().solve(dl.cwiseProduct(zfree));
    }
    const double u = c2.dot(state) + d21.dot(w) + d22 * e;
    state = a * state + b1 * w + b2 * e;
    return u;
}

LfrController build_lfr(const ControllerParameters& theta) {
    theta.validate();
    const Eigen::VectorXd v0 = theta.v.row(0).transpose();
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(v0.size());
    unit(0) = 1.0;
    require(v0 == unit, ErrorKind::InvalidArgument,
            "D_K feedthrough is not invertible: parameters violate v_0(p) = 1");
    const BasisBankRealization bn = realize_bank(theta.basis_n);
    const BasisBankRealization bd = realize_bank(theta.basis_d);
    const int nn = bn.states();
    const int nd = bd.states();
    const int n = nn + nd;
    const int m = theta.m();

    LfrController k;
    k.scheduling = theta.scheduling;
    k.sample_rate = theta.sample_rate;
    k.n_states_n = nn;
    k.n_states_d = nd;
    k.a = Eigen::MatrixXd::Zero(n, n);
    k.a.topLeftCorner(nn, nn) = bn.a;
    k.a.bottomRightCorner(nd, nd) = bd.a;
    k.b2 = Eigen::VectorXd::Zero(n);
    k.b2.head(nn) = bn.b;
    k.c1 = Eigen::MatrixXd::Zero(2 * m, n);
    k.d12 = Eigen::VectorXd::Zero(2 * m);
    Eigen::MatrixXd vt = theta.v;
    vt.row(0).setZero();
    for (int l = 0; l < m; ++l) {
        k.c1.block(l, 0, 1, nn) = theta.w.col(l).transpose() * bn.c;
        k.d12(l) = theta.w.col(l).dot(bn.d);
        k.c1.block(m + l, nn, 1, nd) = vt.col(l).transpose() * bd.c;
    }
    k.d11 = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    k.d21 = Eigen::RowVectorXd::Zero(2 * m);
    k.d21.head(m).setOnes();
    k.d21.tail(m).setConstant(-1.0);
    k.c2 = Eigen::RowVectorXd::Zero(n);
    k.d22 = 0.0;
    k.b1 = Eigen::MatrixXd::Zero(n, 2 * m);
    k.b1.bottomRows(nd) = bd.b * k.d21;
    return k;
}

FrfResponse frozen_controller_frf(const LfrController& ctrl, double p, const FrequencyGrid& grid) {
    const LfrController::Frozen f = ctrl.frozen(p);
    const auto n = f.a.rows();
    std::vector<Complex> out(grid.size());
    const Eigen::MatrixXcd ac = f.a.cast<Complex>();
    const Eigen::VectorXcd bc = f.b.cast<Complex>();
    const Eigen::RowVectorXcd cc = f.c.cast<Complex>();
    for (size_t k = 0; k < grid.size(); ++k) {
        if (n == 0) {
            out[k] = f.d;
            continue;
        }
        const Complex z = std::polar(1.0, grid[k]);
        const Eigen::MatrixXcd m = z * Eigen::MatrixXcd::Identity(n, n) - ac;
        out[k] = (cc * m.partialPivLu().solve(bc))(0) + f.d;
    }
    return {std::move(out), make_grid(grid)};
}

Trace simulate_closed_loop(const LpvSurrogateModel& model, const LfrController& ctrl, const TimeRecord& reference,
                           const TimeRecord& scheduling, const TimeRecord& disturbance) {
    const size_t n = reference.size();
    require(scheduling.size() == n && disturbance.size() == n, ErrorKind::InvalidArgument,
            "reference, scheduling and disturbance records differ in length");
    Trace tr;
    tr.sample_rate = model.sample_rate;
    tr.resize(n);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(model.states());
    Eigen::VectorXd xk = Eigen::VectorXd::Zero(ctrl.states());
    for (size_t k = 0; k < n; ++k) {
        const double p = scheduling.samples[k];
        if (!model.in_range(p)) {
            std::ostringstream os;
            os << "scheduling leaves the range at sample " << k << " (p = " << p << ")";
            fail(ErrorKind::OutOfRange, os.str());
        }
        const double y = model.c.dot(x);
        const double e = reference.samples[k] - y;
        const double u = ctrl.step(xk, e, p);
        const double ug = u + disturbance.samples[k];
        x = model.a0 * x + p * (model.a1 * x) + model.b * ug;
        tr.r[k] = reference.samples[k];
        tr.e[k] = e;
        tr.u[k] = u;
        tr.d[k] = disturbance.samples[k];
        tr.y[k] = y;
        tr.p[k] = p;
        if (!std::isfinite(x.squaredNorm() + xk.squaredNorm()) || x.norm() > 1e12 || xk.norm() > 1e12) {
            std::ostringstream os;
            os << "closed loop diverged at sample " << k << " (t = " << static_cast<double>(k) / model.sample_rate
               << " s): unstable interconnection";
            fail(ErrorKind::Numerical, os.str());
        }
    }
    return tr;
}

StepMetrics step_metrics(const Trace& trace) {
    const size_t n = trace.size();
    require(n > 0, ErrorKind::InvalidArgument, "empty trace");
    StepMetrics m;
    double sq = 0.0;
    for (double e : trace.e) {
        sq += e * e;
        m.linf_error = std::max(m.linf_error, std::abs(e));
    }
    m.l2_error = std::sqrt(sq);

    const auto [lo_it, hi_it] = std::minmax_element(trace.r.begin(), trace.r.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo))
        return m;
    const double mid = 0.5 * (lo + hi);
    std::vector<size_t> edges;
    bool above = trace.r[0] >= mid;
    for (size_t k = 1; k < n; ++k) {
        const bool now = trace.r[k] >= mid;
        if (now != above)
            edges.push_back(k);
        above = now;
    }
    m.edges = edges.size();
    double before = trace.r[0];
    for (size_t i = 0; i < edges.size(); ++i) {
        const size_t k0 = edges[i];
        const size_t k1 = i + 1 < edges.size() ? edges[i + 1] : n;
        // plateau level: r[k1 - 1] already sits inside the next transition
        std::vector<double> seg(trace.r.begin() + static_cast<std::ptrdiff_t>(k0),
                                trace.r.begin() + static_cast<std::ptrdiff_t>(k1));
        auto mid_it = seg.begin() + static_cast<std::ptrdiff_t>(seg.size() / 2);
        std::nth_element(seg.begin(), mid_it, seg.end());
        const double final_value = *mid_it;
        const double amp = final_value - before;
        before = final_value;
        if (amp == 0.0)
            continue;
        const double dir = amp > 0.0 ? 1.0 : -1.0;
        double over = 0.0;
        size_t last_out = k0;
        bool any_out = false;
        size_t end = k1;
        while (end > k0 + 1 && std::abs(trace.r[end - 1] - final_value) > 0.02 * std::abs(amp))
            --end;
        for (size_t k = k0; k < end; ++k) {
            over = std::max(over, dir * (trace.y[k] - final_value) / std::abs(amp));
            if (std::abs(trace.y[k] - final_value) > 0.02 * std::abs(amp)) {
                last_out = k;
                any_out = true;
            }
        }
        m.overshoot_pct = std::max(m.overshoot_pct, 100.0 * over);
        if (any_out)
            m.settling_s = std::max(m.settling_s, static_cast<double>(last_out + 1 - k0) / trace.sample_rate);
    }
    return m;
}

} // namespace fdlpv
