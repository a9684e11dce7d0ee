"""Dirichlet-to-Neumann realizations on the truncation circle.

Two routes: Galerkin boundary-integral operators (single layer S_k and
adjoint double layer D'_k) assembled on exact circular-arc panels, and the
Fourier symbol d_n = k H_n'(kR)/H_n(kR). Uniform-angle panels make every
Galerkin matrix circulant, so only one row of panel-pair integrals is
computed; the log singularity is split off analytically and integrated
with a dedicated log-weighted Gauss rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from . import specfun as sf

# rules for the weight -ln(t) on (0,1); frozen from scripts/gen_log_gauss.py
# (exact rational moments + 60-digit Jacobi eigensolve)
LOG_GAUSS_RULES = {
    8: (np.array([
        0.013320244160892465012, 0.07975042901389493841, 0.19787102932618805379,
        0.35415399435190941967, 0.52945857523491727771, 0.70181452993909996384,
        0.84937932044110667605, 0.95332645005635978877,
    ]), np.array([
        0.16441660472800288683, 0.2375256100233060205, 0.22684198443191912637,
        0.17575407900607024499, 0.11292403024675905186, 0.057872210717782072399,
        0.020979073742132978043, 0.0036864071040276190134,
    ])),
    16: (np.array([
        0.0038978344871159159241, 0.02302894561687323982, 0.058280398306240412348,
        0.10867836509105403649, 0.17260945490984393776, 0.24793705447057849515,
        0.33209454912991715598, 0.42218391058194860012, 0.51508247338146260348,
        0.60755612044772872409, 0.69637565322821406116, 0.7784325658732654052,
        0.85085026971539108323, 0.91108685722227190542, 0.95702557170354215759,
        0.98704780024798447676,
    ]), np.array([
        0.060791710043591232851, 0.10291567751758214439, 0.12235566204600919356,
        0.12756924693701598872, 0.12301357460007091542, 0.11184724485548572262,
        0.096596385152124341253, 0.079356664351473138782, 0.061850494581965207095,
        0.045435246507726668629, 0.031098974751581806409, 0.019459765927360842078,
        0.010776254963205525646, 0.0049725428900876417125, 0.001678201110051194515,
        0.00028235376466843632178,
    ])),
}
LOG_GAUSS_NODES, LOG_GAUSS_WEIGHTS = LOG_GAUSS_RULES[8]
GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)
GAUSS_NODES = 0.5 * (GAUSS_NODES + 1.0)
GAUSS_WEIGHTS = 0.5 * GAUSS_WEIGHTS


def quadrature_rules(gauss_order: int = 8, log_order: int = 8):
    """(gauss nodes/weights on (0,1), log-weighted nodes/weights).

    gauss_order is any positive order; log_order must be one of the frozen
    rules (8 or 16).
    """
    if log_order not in LOG_GAUSS_RULES:
        raise BemError(f"no frozen log rule of order {log_order} "
                       f"(available: {sorted(LOG_GAUSS_RULES)})")
    gn, gw = np.polynomial.legendre.leggauss(gauss_order)
    return (0.5 * (gn + 1.0), 0.5 * gw, *LOG_GAUSS_RULES[log_order])

RCOND_FLOOR = 1e-12


class BemError(RuntimeError):
    pass


class SingularOperatorError(BemError):
    """Single-layer operator numerically singular at the given wavenumber."""

    def __init__(self, k, rcond):
        super().__init__(
            f"single-layer operator numerically singular at k={k:.12g} "
            f"(rcond ~ {rcond:.2e}); interior-resonance wavenumber")
        self.k = k
        self.rcond = rcond


def _check_circle_nodes(bnodes: np.ndarray):
    bnodes = np.asarray(bnodes, dtype=float)
    n = len(bnodes)
    if n < 16:
        raise BemError("need at least 16 boundary nodes")
    r = np.hypot(bnodes[:, 0], bnodes[:, 1])
    R = float(np.mean(r))
    if np.max(np.abs(r - R)) > 1e-9 * R:
        raise BemError("boundary nodes must lie on a circle")
    theta = np.mod(np.arctan2(bnodes[:, 1], bnodes[:, 0]), 2 * np.pi)
    if np.any(np.diff(theta) <= 0):
        raise BemError("boundary nodes must be ordered by angle (coincident nodes?)")
    gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
    if np.max(np.abs(gaps - 2 * np.pi / n)) > 1e-8:
        raise BemError("boundary nodes must be uniform in angle")
    return R, n, theta[0]


def _chord(R, delta):
    return 2.0 * R * np.abs(np.sin(0.5 * delta))


def _phi_parts(k, R):
    """Split Phi_k(x,y) = smooth(delta) + logcoef(delta) * ln|delta|.

    delta is the angular separation; r = 2R sin(|delta|/2). The log
    coefficient is -J_0(kr)/(2 pi); the remainder is analytic in delta^2.
    """
    def logcoef(delta):
        r = _chord(R, delta)
        return -sf.bessel_jy(0, np.maximum(k * r, 1e-300))[0] / (2 * np.pi)

    def smooth(delta):
        delta = np.asarray(delta, dtype=float)
        r = _chord(R, delta)
        out = np.empty(delta.shape, dtype=complex)
        tiny = np.abs(delta) < 1e-12
        reg = ~tiny
        if np.any(reg):
            rr = r[reg]
            j0, y0, _, _ = sf.bessel_jy(0, k * rr)
            phi = 0.25j * (j0 + 1j * y0)
            out[reg] = phi - logcoef(delta[reg]) * np.log(np.abs(delta[reg]))
        if np.any(tiny):
            # limit: Phi + (1/2pi) ln(delta) -> i/4 - (1/2pi)(ln(kR/2)+gamma)
            out[tiny] = 0.25j - (np.log(0.5 * k * R) + sf.EULER_GAMMA) / (2 * np.pi)
        return out

    return smooth, logcoef


def _dprime_parts(k, R):
    """Same split for the adjoint-double-layer kernel.

    kernel(r) = -(ik/4) H_1(kr) (x-y).n(x) / r with (x-y).n(x) = r^2/(2R)
    on the circle; diagonal limit -1/(4 pi R) (curvature value).
    """
    def logcoef(delta):
        delta = np.asarray(delta, dtype=float)
        r = _chord(R, delta)
        out = np.zeros(delta.shape)
        reg = np.abs(delta) > 1e-12
        if np.any(reg):
            rr = r[reg]
            j1 = sf.bessel_jy(1, k * rr)[0]
            out[reg] = (k / (2 * np.pi)) * j1 * rr / (2.0 * R)
        return out

    def smooth(delta):
        delta = np.asarray(delta, dtype=float)
        r = _chord(R, delta)
        out = np.empty(delta.shape, dtype=complex)
        tiny = np.abs(delta) < 1e-12
        reg = ~tiny
        if np.any(reg):
            rr = r[reg]
            j1, y1, _, _ = sf.bessel_jy(1, k * rr)
            h1 = j1 + 1j * y1
            full = -(0.25j * k) * h1 * rr / (2.0 * R)
            out[reg] = full - logcoef(delta[reg]) * np.log(np.abs(delta[reg]))
        if np.any(tiny):
            out[tiny] = -1.0 / (4.0 * np.pi * R)
        return out

    return smooth, logcoef


def _hat(u, L, side):
    return u / L if side else 1.0 - u / L


def _pair_tensor_smooth(smooth, logcoef, R, L, offsets, rules):
    """Panel-pair integrals for well-separated pairs, all offsets at once.

    offsets d means target panel [dL, (d+1)L] against source [0, L].
    Returns array (len(offsets), 2, 2).
    """
    gn, gw, _, _ = rules
    u = gn * L
    wu = gw * L
    v = gn * L
    wv = gw * L
    d = np.asarray(offsets, dtype=float)[:, None, None]
    delta = (d * L + v[None, None, :]) - u[None, :, None]
    ker = smooth(delta) + logcoef(delta) * np.log(np.abs(delta))
    out = np.empty((len(offsets), 2, 2), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            w2 = (wu * _hat(u, L, a))[None, :, None] \
                * (wv * _hat(v, L, b))[None, None, :]
            out[:, a, b] = np.sum(ker * w2, axis=(1, 2)) * R * R
    return out


def _self_tensor(smooth, logcoef, R, L, rules):
    """Self-panel integral with the analytic log split.

    Smooth part by tensor Gauss; the ln|u-v| part is reduced to 1-D
    integrals of polynomial overlap functions against ln.
    """
    gn, gw, logn, logw = rules
    out = np.zeros((2, 2), dtype=complex)
    u = gn * L
    wu = gw * L
    delta = u[:, None] - u[None, :]
    ker = smooth(delta)
    for a in (0, 1):
        for b in (0, 1):
            w2 = (wu * _hat(u, L, a))[:, None] * (wu * _hat(u, L, b))[None, :]
            out[a, b] = np.sum(ker * w2) * R * R

    # log part: for w = u-v > 0, overlap P_ab(w) = int_w^L hat_a(u) hat_b(u-w) du
    def overlap(a, b, w):
        uu = gn[None, :] * (L - w)[:, None] + w[:, None]
        ww = gw[None, :] * (L - w)[:, None]
        return np.sum(ww * _hat(uu, L, a) * _hat(uu - w[:, None], L, b), axis=1)

    for a in (0, 1):
        for b in (0, 1):
            acc = 0.0 + 0.0j
            for (aa, bb) in ((a, b), (b, a)):   # w>0 and w<0 halves
                # int_0^L f(w) ln w dw with f(w) = logcoef(w) * P(w)
                wq = gn * L
                f_smooth = logcoef(wq) * overlap(aa, bb, wq)
                acc += np.log(L) * np.sum(gw * L * f_smooth)
                wl = logn * L
                f_log = logcoef(wl) * overlap(aa, bb, wl)
                acc -= L * np.sum(logw * f_log)
            out[a, b] += acc * R * R
    return out


def _adjacent_tensor(smooth, logcoef, R, L, left, rules):
    """Adjacent panel pair sharing one corner (Duffy + log rule).

    left=False: target panel [L, 2L] (shared corner at angle L).
    left=True: target panel [-L, 0] (shared corner at angle 0).
    """
    gn, gw, logn, logw = rules
    out = np.zeros((2, 2), dtype=complex)
    u = gn * L
    wu = gw * L
    vloc = gn * L                 # local coordinate on target panel
    v = vloc - L if left else vloc + L
    delta = u[:, None] - v[None, :]
    ker = smooth(delta)
    for a in (0, 1):
        for b in (0, 1):
            w2 = (wu * _hat(u, L, a))[:, None] * (wu * _hat(vloc, L, b))[None, :]
            out[a, b] = np.sum(ker * w2) * R * R

    # Log part in corner coordinates: s, t = distances to the shared corner,
    # |delta| = s + t. Triangles t <= s and s <= t via tau-scaling; per
    # triangle ln(s+t) = ln s + ln(1+tau) with the ln s factor handled by
    # the log-weighted rule.
    def hs(side, s):
        return _hat(s, L, side) if left else _hat(L - s, L, side)

    def ht(side, t):
        return _hat(L - t, L, side) if left else _hat(t, L, side)

    tau = gn
    sg = gn * L
    sl = logn * L
    w_gauss = (gw * L)[:, None] * gw[None, :]
    w_log = logw[:, None] * gw[None, :]
    for a in (0, 1):
        for b in (0, 1):
            def g(s, t):
                return hs(a, s) * ht(b, t) * logcoef(s + t)

            acc = 0.0
            for swapped in (False, True):
                def integrand(s, tau_):
                    t = s * tau_
                    return s * (g(t, s) if swapped else g(s, t))

                Sg, Tau = np.meshgrid(sg, tau, indexing="ij")
                vals = integrand(Sg, Tau)
                # smooth piece: ln(1+tau) plus the ln L offset of ln s
                acc += np.sum(w_gauss * vals * (np.log1p(Tau) + np.log(L)))
                # remaining int_0^1 f(L q) ln q dq = -(log rule)
                Slog, TauL = np.meshgrid(sl, tau, indexing="ij")
                acc -= L * np.sum(w_log * integrand(Slog, TauL))
            out[a, b] += acc * R * R
    return out


def _circulant_first_row(smooth, logcoef, R, n, rules):
    """First row c[m] = A_{0,m} of the circulant Galerkin matrix."""
    L = 2.0 * np.pi / n
    T = np.empty((n, 2, 2), dtype=complex)
    T[0] = _self_tensor(smooth, logcoef, R, L, rules)
    T[1] = _adjacent_tensor(smooth, logcoef, R, L, False, rules)
    T[n - 1] = _adjacent_tensor(smooth, logcoef, R, L, True, rules)
    if n > 3:
        offs = np.arange(2, n - 1)
        # shift by multiples of 2pi keeps the kernel exact (periodicity);
        # map offsets to the nearest representative to avoid huge angles
        signed = np.where(offs > n / 2, offs - n, offs)
        T[2:n - 1] = _pair_tensor_smooth(smooth, logcoef, R, L, signed, rules)
    c = np.zeros(n, dtype=complex)
    # hat_0 lives on panels (n-1, local 1) and (0, local 0); hat_m on
    # (m-1, local 1) and (m, local 0); offset = target panel - source panel
    for p, a in ((n - 1, 1), (0, 0)):
        for dq, b in ((-1, 1), (0, 0)):
            for m in range(n):
                q = (m + dq) % n
                c[m] += T[(q - p) % n][a, b]
    return c


def _circulant_matrix(c):
    n = len(c)
    i = np.arange(n)
    return c[(i[None, :] - i[:, None]) % n]


@dataclass
class BemOperators:
    """Dense Galerkin boundary operators on the circle at wavenumber k."""
    S: np.ndarray
    Dp: np.ndarray
    Mb: np.ndarray
    k: float
    R: float
    n: int
    _lu: tuple = None

    def single_layer_lu(self):
        if self._lu is None:
            lu = lu_factor(self.S)
            gecon = get_lapack_funcs("gecon", (self.S,))
            anorm = np.linalg.norm(self.S, 1)
            rcond = gecon(lu[0], anorm, norm="1")[0]
            if rcond < RCOND_FLOOR:
                raise SingularOperatorError(self.k, rcond)
            self._lu = lu
        return self._lu


def boundary_mass(n: int, R: float) -> np.ndarray:
    """P1 mass matrix on the uniform circle (circulant: 2L/3, L/6)."""
    L = 2.0 * np.pi * R / n
    c = np.zeros(n)
    c[0] = 2.0 * L / 3.0
    c[1] = L / 6.0
    c[n - 1] = L / 6.0
    return _circulant_matrix(c)


def assemble_single_layer(bnodes, k: float, gauss_order: int = 8,
                          log_order: int = 8) -> np.ndarray:
    """Galerkin single-layer matrix <S_k psi_j, psi_i> on circle nodes."""
    if k <= 0:
        raise BemError("wavenumber must be positive")
    rules = quadrature_rules(gauss_order, log_order)
    R, n, _ = _check_circle_nodes(np.asarray(bnodes))
    smooth, logcoef = _phi_parts(k, R)
    return _circulant_matrix(_circulant_first_row(smooth, logcoef, R, n, rules))


def assemble_adjoint_double_layer(bnodes, k: float, gauss_order: int = 8,
                                  log_order: int = 8) -> np.ndarray:
    """Galerkin adjoint-double-layer matrix (the -I/2 jump kept separate)."""
    if k <= 0:
        raise BemError("wavenumber must be positive")
    rules = quadrature_rules(gauss_order, log_order)
    R, n, _ = _check_circle_nodes(np.asarray(bnodes))
    smooth, logcoef = _dprime_parts(k, R)
    return _circulant_matrix(_circulant_first_row(smooth, logcoef, R, n, rules))


def assemble_bem(bnodes, k: float, gauss_order: int = 8,
                 log_order: int = 8) -> BemOperators:
    bnodes = np.asarray(bnodes)
    R, n, _ = _check_circle_nodes(bnodes)
    return BemOperators(
        S=assemble_single_layer(bnodes, k, gauss_order, log_order),
        Dp=assemble_adjoint_double_layer(bnodes, k, gauss_order, log_order),
        Mb=boundary_mass(n, R), k=k, R=R, n=n)


# ----------------------------------------------------------------------
# Fourier route
# ----------------------------------------------------------------------


@dataclass
class FourierDtn:
    R: float
    k: float
    order: int
    symbols: np.ndarray        # d_n for n = 0..order

    def symbol(self, n) -> np.ndarray:
        return self.symbols[np.abs(np.asarray(n))]


def fourier_dtn_symbol(n, k: float, R: float):
    """DtN symbol d_n = k H_n'(kR) / H_n(kR); vectorized over |n|."""
    if k <= 0 or R <= 0:
        raise BemError("k and R must be positive")
    n = np.abs(np.asarray(n, dtype=int))
    table = fourier_dtn(k, R, int(np.max(n))).symbols
    out = table[n]
    return out if out.ndim else complex(out)


def fourier_dtn(k: float, R: float, order: int) -> FourierDtn:
    """Symbols d_0..d_order via the overflow-free Hankel ratio recurrence."""
    if k <= 0 or R <= 0:
        raise BemError("k and R must be positive")
    x = k * R
    j0, y0, _, _ = sf.bessel_jy(0, x)
    j1, y1, _, _ = sf.bessel_jy(1, x)
    h0 = j0 + 1j * y0
    h1 = j1 + 1j * y1
    d = np.empty(order + 1, dtype=complex)
    # H_n'/H_n = H_{n-1}/H_n - n/x; track t_n = H_n / H_{n-1}
    d[0] = -k * (h1 / h0)          # H_0' = -H_1
    t = h1 / h0
    for m in range(1, order + 1):
        d[m] = k * (1.0 / t - m / x)
        t = (2.0 * m / x) - 1.0 / t  # t_{m+1} = H_{m+1}/H_m
    return FourierDtn(R=R, k=k, order=order, symbols=d)


# ----------------------------------------------------------------------
# DtN application (oracle surface)
# ----------------------------------------------------------------------


def dtn_apply(ops, trace, backend: str = "bem"):
    """Apply the DtN map to Dirichlet data.

    bem backend: trace holds nodal values on the circle nodes; solves
    S phi = Mb g, applies (-1/2 Mb + Dp) and converts back to nodal
    Neumann values via the boundary mass.
    fourier backend: trace holds Fourier coefficients indexed
    [0, 1, -1, ..., order, -order] style is NOT used; pass a dict-free
    array c_n for n = -order..order (see FourierDtn.symbol for modes).
    """
    if backend == "bem":
        if not isinstance(ops, BemOperators):
            raise BemError("bem backend needs BemOperators")
        g = np.asarray(trace, dtype=complex)
        if g.shape != (ops.n,):
            raise BemError("trace length does not match boundary basis")
        lu = ops.single_layer_lu()
        phi = lu_solve(lu, ops.Mb @ g)
        weak = (-0.5 * ops.Mb + ops.Dp) @ phi
        return np.linalg.solve(ops.Mb, weak)
    if backend == "fourier":
        if not isinstance(ops, FourierDtn):
            raise BemError("fourier backend needs FourierDtn")
        c = np.asarray(trace, dtype=complex)
        order = (len(c) - 1) // 2
        if 2 * order + 1 != len(c):
            raise BemError("fourier trace must have odd length 2*order+1")
        modes = np.arange(-order, order + 1)
        return ops.symbol(modes) * c
    raise BemError(f"unknown backend {backend!r}")
