"""Independent reference values for the unit tests (scipy / numpy / cvxpy).

Run: python3 tests/oracles/derive.py
"""
import numpy as np
import cvxpy as cp
from scipy import signal

np.set_printoptions(precision=17)


def butterworth():
    b, a = signal.butter(3, 0.7, fs=200.0)
    print("butter(3, 0.7 Hz, 200) b =", repr(b))
    print("butter(3, 0.7 Hz, 200) a =", repr(a))


def surrogate(p, fs=200.0, lam0=0.2, damp=2.5, cpl=0.54, cplb=0.54, gain=13.5, poff=15.0):
    T = 1.0 / fs
    ac = np.array([[lam0, 0, 1], [0, -damp, cpl * (poff - p)], [0, cplb * p, -damp]])
    a = np.eye(3) + T * ac
    b = np.array([[0], [T * gain], [0]])
    c = np.array([[1.0, 0, 0]])
    return a, b, c


def surrogate_values():
    for p in (30.0, 40.0, 50.0):
        a, b, c = surrogate(p)
        num, den = signal.ss2tf(a, b, c, np.zeros((1, 1)))
        w = np.linspace(2 * np.pi * 0.2 / 200, 2 * np.pi * 5 / 200, 200001)
        z = np.exp(1j * w)
        h = np.polyval(num[0], z) / np.polyval(den, z)
        # resonance: the local maximum of |H| above the integrator roll-off region
        mag = np.abs(h)
        idx = [k for k in range(1, len(w) - 1) if mag[k] > mag[k - 1] and mag[k] > mag[k + 1]]
        peak = w[idx[0]] * 200 / (2 * np.pi) if idx else float("nan")
        print(f"p={p}: num={num[0]!r} den={den!r} peak_hz={peak:.6f} "
              f"H(e^i0.05)={np.polyval(num[0], np.exp(0.05j)) / np.polyval(den, np.exp(0.05j))!r}")


def default_weights():
    fs = 200.0
    wb = 2 * np.pi * 1.0
    ws = signal.bilinear([1 / 2.0, wb], [1, 1e-4 * wb], fs)
    wt_c = 2 * np.pi * 2.0
    wt = signal.bilinear([1, wt_c], [1 / 10.0, wt_c / 0.1], fs)
    for name, (b, a) in (("W_S", ws), ("W_T", wt)):
        for om in (1e-3, 0.1, 2.0):
            z = np.exp(1j * om)
            print(f"{name}(e^i{om}) = {np.polyval(b, z) / np.polyval(a, z)!r}")


def laguerre(a, n, z):
    out = [np.ones_like(z)]
    for k in range(1, n + 1):
        out.append(np.sqrt(1 - a * a) / (z - a) * ((1 - a * z) / (z - a)) ** (k - 1))
    return np.array(out)


def small_synthesis():
    # G = 0.5/(z - 0.9) (stable), K0 = 0 => N_G = G, D_G = 1; Laguerre(0.5, 2) bases, LTI,
    # constant weights (W_S, W_GS, W_KS, W_T) = (0.5, 0.2, 0.1, 0.3), eps = 1e-6, 32 linear frequencies.
    w = np.linspace(0.01, 3.1, 32)
    z = np.exp(1j * w)
    ng = 0.5 / (z - 0.9)
    dg = np.ones_like(z)
    phi = laguerre(0.5, 2, z)
    wts = [0.5, 0.2, 0.1, 0.3]
    eps = 1e-6

    def feasible(gamma):
        x = cp.Variable(3)
        y = cp.Variable(3)
        nk_re = phi.real.T @ x
        nk_im = phi.imag.T @ x
        dk_re = phi.real.T @ y
        dk_im = phi.imag.T @ y
        dp_re = cp.multiply(dg.real, dk_re) - cp.multiply(dg.imag, dk_im) + cp.multiply(ng.real, nk_re) - cp.multiply(ng.imag, nk_im)
        t = cp.Variable()
        cons = [y[0] == 1, cp.abs(x) <= 1e4, cp.abs(y) <= 1e4, t <= 1]

        def prod(fr, fi, gr, gi):
            return cp.multiply(fr, gr) - cp.multiply(fi, gi), cp.multiply(fr, gi) + cp.multiply(fi, gr)

        chans = [(dg, dk_re, dk_im), (ng, dk_re, dk_im), (dg, nk_re, nk_im), (ng, nk_re, nk_im)]
        for wc, (f, gr, gi) in zip(wts, chans):
            re, im = prod(f.real, f.imag, gr, gi)
            for k in range(len(w)):
                cons.append(cp.norm(cp.hstack([wc * re[k], wc * im[k]])) / gamma <= dp_re[k] - eps - t)
        prob = cp.Problem(cp.Maximize(t), cons)
        prob.solve(solver=cp.CLARABEL)
        return t.value >= 0

    lo, hi = 1e-3, 1e3
    while hi - lo > 1e-7 * hi:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    print(f"small synthesis gamma* = {hi:.10f}")


def small_socp():
    # maximize c'x s.t. s_i'x + s0_i >= |(ur_i'x + ur0_i) + j(ui_i'x + ui0_i)|, g'x <= h
    c = np.array([1.0, 0.5, -0.2])
    S = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    s0 = np.array([1.0, 1.0, 2.0, 1.0])
    Ur = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
    ur0 = np.array([0.0, 0.2, 0.0, -0.1])
    Ui = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.5], [0.0, 0.0, 0.0]])
    ui0 = np.array([0.1, 0.0, 0.0, 0.3])
    G = np.array([[1.0, 1.0, 1.0]])
    h = np.array([1.5])
    x = cp.Variable(3)
    cons = [cp.norm(cp.hstack([Ur[i] @ x + ur0[i], Ui[i] @ x + ui0[i]])) <= S[i] @ x + s0[i] for i in range(4)]
    cons.append(G @ x <= h)
    prob = cp.Problem(cp.Maximize(c @ x), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    print(f"small socp optimum = {prob.value:.12f} x = {x.value!r}")


if __name__ == "__main__":
    butterworth()
    surrogate_values()
    default_weights()
    print("phi_1(1) for a = 0.7:", repr(laguerre(0.7, 1, np.array([1.0 + 0j]))[1][0].real))
    small_socp()
    small_synthesis()
