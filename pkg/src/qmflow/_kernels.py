"""Compiled inner loops of the flow: right-hand side, RK4 stepping, W_ell.

These mirror the numpy code in ``surface`` and ``integrals`` point for point;
the test suite cross-checks the two paths.  All integrals here omit the
constant factor omega_{n-1} unless it is passed in explicitly.
"""

import math

import numpy as np
from numba import njit

OK = 0
NONCONVEX = 1
EQUATOR = 2
CORRUPT = 3
HEMISPHERE = 4
STIFF = 5

DT_FLOOR = 1e-12


@njit(cache=True)
def _sc(K, r):
    x = K * r * r
    if abs(x) < 1e-8:
        return r * (1.0 - x / 6.0 + x * x / 120.0), 1.0 - x / 2.0 + x * x / 24.0
    if K > 0:
        q = math.sqrt(K)
        return math.sin(q * r) / q, math.cos(q * r)
    if K < 0:
        q = math.sqrt(-K)
        return math.sinh(q * r) / q, math.cosh(q * r)
    return r, 1.0


@njit(cache=True)
def radial_integral(K, n, r, gl_x, gl_w):
    """int_0^r s_K^n dr by Gauss-Legendre."""
    inner = 0.0
    for i in range(gl_x.size):
        s, _ = _sc(K, 0.5 * r * (gl_x[i] + 1.0))
        inner += gl_w[i] * s ** n
    return 0.5 * r * inner


@njit(cache=True)
def enclosed_volume(rho, K, n, wq, gl_x, gl_w):
    """Sum_j wq_j int_0^{rho_j} s_K^n dr, without the omega_{n-1} factor."""
    vol = 0.0
    for j in range(rho.size):
        vol += wq[j] * radial_integral(K, n, rho[j], gl_x, gl_w)
    return vol


@njit(cache=True)
def volume_change(rho_old, rho_new, K, n, wq):
    """Volume swept between two nearby profiles, by 4-point Gauss-Legendre per point."""
    x = (-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526)
    w = (0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538)
    out = 0.0
    for j in range(rho_old.size):
        a, b = rho_old[j], rho_new[j]
        acc = 0.0
        for i in range(4):
            s, _ = _sc(K, 0.5 * (a + b) + 0.5 * (b - a) * x[i])
            acc += w[i] * s ** n
        out += wq[j] * 0.5 * (b - a) * acc
    return out


@njit(cache=True)
def _binom(a, b):
    if b < 0 or b > a:
        return 0.0
    out = 1.0
    for i in range(b):
        out = out * (a - i) / (i + 1)
    return out


@njit(cache=True)
def _at(rho, j):
    N = rho.size - 1
    if j < 0:
        return rho[-j]
    if j > N:
        return rho[2 * N - j]
    return rho[j]


@njit(cache=True)
def geometry(rho, K, n, h, cosphi, sinphi, H, c, v, sig, dVw, wq, ell):
    """Fill H, c_K, v, sigma_ell and the area weights; return the smallest principal curvature."""
    N = rho.size - 1
    kmin = np.inf
    b0 = _binom(n - 1, ell)
    b1 = _binom(n - 1, ell - 1)
    for j in range(N + 1):
        gm2 = _at(rho, j - 2)
        gm1 = _at(rho, j - 1)
        g0 = rho[j]
        gp1 = _at(rho, j + 1)
        gp2 = _at(rho, j + 2)
        # difference form: exact on constants, roundoff ~ eps |drho| / h^2
        d1 = (8.0 * (gp1 - gm1) - (gp2 - gm2)) / (12.0 * h)
        d2 = (16.0 * ((gm1 - g0) + (gp1 - g0)) - ((gm2 - g0) + (gp2 - g0))) / (12.0 * h * h)
        s, cj = _sc(K, g0)
        vj = math.sqrt(1.0 + (d1 / s) ** 2)
        if abs(sinphi[j]) < 1e-14:
            cot_term = d2
        else:
            cot_term = d1 * cosphi[j] / sinphi[j]
        k_rot = (cj / s - cot_term / (s * s)) / vj
        k_mer = (s * cj + 2.0 * cj * d1 * d1 / s - d2) / (s * s * vj ** 3)
        kmin = min(kmin, k_mer, k_rot)
        H[j] = k_mer + (n - 1) * k_rot
        c[j] = cj
        v[j] = vj
        sig[j] = b0 * k_rot ** ell
        if ell >= 1:
            sig[j] += b1 * k_mer * k_rot ** (ell - 1)
        dVw[j] = wq[j] * s ** n * vj
    return kmin


@njit(cache=True)
def rhs(rho, K, n, h, cosphi, sinphi, wq, ell, mu_extra, out, H, c, v, sig, dVw):
    """Graph speed (mu c_K - H) v into `out`; returns (mu, status)."""
    for j in range(rho.size):
        if not math.isfinite(rho[j]) or rho[j] <= 0.0:
            return np.nan, CORRUPT
    kmin = geometry(rho, K, n, h, cosphi, sinphi, H, c, v, sig, dVw, wq, ell)
    if not math.isfinite(kmin):
        return np.nan, CORRUPT
    if kmin <= 0.0:
        return np.nan, NONCONVEX
    num = 0.0
    den = 0.0
    for j in range(rho.size):
        num += H[j] * sig[j] * dVw[j]
        den += c[j] * sig[j] * dVw[j]
    if den <= 0.0:
        return np.nan, EQUATOR
    mu = num / den + mu_extra
    for j in range(rho.size):
        out[j] = (mu * c[j] - H[j]) * v[j]
    return mu, OK


@njit(cache=True)
def quermass_value(rho, K, n, h, cosphi, sinphi, wq, ell, omega_nm1, omega_n, vol):
    """W_ell by the same quadrature and recursion as the numpy path.

    `vol` is the enclosed volume without the omega_{n-1} factor (used for even
    ell only).  Also returns int c_K H_ell dV, the sensitivity of W_ell to mu.
    """
    N = rho.size - 1
    H = np.empty(N + 1)
    c = np.empty(N + 1)
    v = np.empty(N + 1)
    dVw = np.empty(N + 1)
    # V[m] = int H_m dV for m = 0..n
    Vint = np.zeros(n + 1)
    sens = 0.0
    sig = np.empty(N + 1)
    for m in range(n + 1):
        # only V_m on the recursion chain of W_ell, plus m = ell for the sensitivity
        if not (m == ell or (m < ell and (ell - 1 - m) % 2 == 0)):
            continue
        geometry(rho, K, n, h, cosphi, sinphi, H, c, v, sig, dVw, wq, m)
        bn = _binom(n, m)
        acc = 0.0
        for j in range(N + 1):
            acc += sig[j] / bn * dVw[j]
            if m == ell:
                sens += c[j] * sig[j] / bn * dVw[j]
        Vint[m] = omega_nm1 * acc
    sens *= omega_nm1
    W = np.zeros(n + 2)
    # W_0 enters W_ell only for even ell
    W[0] = omega_nm1 * vol
    W[1] = Vint[0] / (n + 1)
    for m in range(1, n):
        W[m + 1] = Vint[m] / (n + 1) + K * m / (n + 2 - m) * W[m - 1]
    W[n + 1] = omega_n / (n + 1)
    return W[ell], sens


@njit(cache=True)
def advance(rho, t, t_stop, max_steps, cfl, K, n, h, cosphi, sinphi, wq, ell,
            feedback_gain, W_target, omega_nm1, omega_n, gl_x, gl_w, rho_cap):
    """RK4 steps in place until t_stop or max_steps; returns (t, steps, status, mu).

    On a failed step the profile is left at the last accepted state.
    """
    N = rho.size - 1
    k1 = np.empty(N + 1)
    k2 = np.empty(N + 1)
    k3 = np.empty(N + 1)
    k4 = np.empty(N + 1)
    tmp = np.empty(N + 1)
    H = np.empty(N + 1)
    c = np.empty(N + 1)
    v = np.empty(N + 1)
    sig = np.empty(N + 1)
    dVw = np.empty(N + 1)
    mu = np.nan
    steps = 0
    track = feedback_gain > 0.0 and ell % 2 == 0
    vol = enclosed_volume(rho, K, n, wq, gl_x, gl_w) if track else 0.0
    while steps < max_steps and t < t_stop:
        smin2 = np.inf
        for j in range(N + 1):
            s, _ = _sc(K, rho[j])
            smin2 = min(smin2, s * s)
        dt = cfl * h * h * smin2 / n
        if not dt >= DT_FLOOR:
            return t, steps, STIFF, mu
        last = False
        if t + dt >= t_stop:
            dt = t_stop - t
            last = True
        extra = 0.0
        if feedback_gain > 0.0:
            W, sens = quermass_value(rho, K, n, h, cosphi, sinphi, wq, ell, omega_nm1,
                                     omega_n, vol)
            coef = (n + 1.0 - ell) / (n + 1.0) * sens
            extra = -feedback_gain * (W - W_target) / (dt * coef)
        mu, st = rhs(rho, K, n, h, cosphi, sinphi, wq, ell, extra, k1, H, c, v, sig, dVw)
        if st != OK:
            return t, steps, st, mu
        for j in range(N + 1):
            tmp[j] = rho[j] + 0.5 * dt * k1[j]
        _, st = rhs(tmp, K, n, h, cosphi, sinphi, wq, ell, extra, k2, H, c, v, sig, dVw)
        if st != OK:
            return t, steps, st, mu
        for j in range(N + 1):
            tmp[j] = rho[j] + 0.5 * dt * k2[j]
        _, st = rhs(tmp, K, n, h, cosphi, sinphi, wq, ell, extra, k3, H, c, v, sig, dVw)
        if st != OK:
            return t, steps, st, mu
        for j in range(N + 1):
            tmp[j] = rho[j] + dt * k3[j]
        _, st = rhs(tmp, K, n, h, cosphi, sinphi, wq, ell, extra, k4, H, c, v, sig, dVw)
        if st != OK:
            return t, steps, st, mu
        rmax = 0.0
        for j in range(N + 1):
            tmp[j] = rho[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
            if not math.isfinite(tmp[j]):
                return t, steps, CORRUPT, mu
            rmax = max(rmax, tmp[j])
        if rmax >= rho_cap:
            return t, steps, HEMISPHERE, mu
        if track:
            vol += volume_change(rho, tmp, K, n, wq)
        rho[:] = tmp
        t = t_stop if last else t + dt
        steps += 1
    return t, steps, OK, mu
