"""Dirichlet eigenmodes of the ellipse via Mathieu functions.

The frequency of mode (m, n, parity) solves a two-parameter problem: find
q such that the first-kind radial Mathieu function of order n vanishes at
the boundary coordinate xi0 with exactly m interior zeros; then
k = 2 sqrt(q) / c with c the focal half-distance. Roots are bracketed by
the interior-zero count (monotone in q), which is immune to the sign
ambiguity of the coefficient vectors, then polished on the boundary value.

fem_ellipse_oracle is the independent brute-force route: a P1 Dirichlet
eigensolve on a mesh of the ellipse with mode identification purely by
parity and nodal-line counting of the discrete eigenvectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.linalg import eigsh

from . import geometry as geo
from . import mesh as hm
from . import specfun as sf
from .fem import assemble_fem
from .interpolate import P1Interpolator


class ModeError(RuntimeError):
    pass


@dataclass(frozen=True)
class EllipseMode:
    parity: str
    m: int
    n: int
    k: float
    q: float
    a_char: float
    xi0: float
    a1: float = 1.0
    a2: float = 0.5

    @property
    def focal_c(self) -> float:
        return math.sqrt(self.a1 ** 2 - self.a2 ** 2)

    def to_json(self) -> str:
        return json.dumps({"parity": self.parity, "m": self.m, "n": self.n,
                           "k": self.k, "q": self.q, "a": self.a_char,
                           "xi0": self.xi0}, indent=2)


_ZERO_GRID = 700


def _interior_zero_count(n, parity, q, xi0) -> int:
    xi = np.linspace(1e-4 * xi0, xi0 * (1.0 - 1e-9), _ZERO_GRID)
    v, _ = sf.radial_mathieu(n, parity, q, xi)
    s = np.sign(v)
    s[s == 0] = 1.0
    return int(np.sum(s[:-1] * s[1:] < 0))


def ellipse_mode_frequency(m: int, n: int, parity: str,
                           a1: float = 1.0, a2: float = 0.5,
                           q_max: float = 400.0) -> EllipseMode:
    """Frequency of the (m, n, parity) Dirichlet mode of the ellipse."""
    if not a1 > a2 > 0:
        raise ModeError("need a1 > a2 > 0")
    if m < 0:
        raise ModeError("radial index m must be >= 0")
    c = math.sqrt(a1 ** 2 - a2 ** 2)
    xi0 = math.atanh(a2 / a1)

    # xi0-inclusive count jumps by one each time a boundary root passes
    count = lambda q: _interior_zero_count(n, parity, q, xi0 * (1 + 1e-9))
    target = m + 1
    q_lo, q_hi = None, None
    q_prev, c_prev = 1e-3, count(1e-3)
    if c_prev >= target:
        raise ModeError(f"zero count already {c_prev} at q->0 (n={n}, {parity})")
    step = 0.8
    q = q_prev
    while q < q_max:
        q = min(q + step, q_max)
        cq = count(q)
        if cq < c_prev:
            raise ModeError(
                f"branch tracking failure: zero count dropped near q={q:.6g} "
                f"(n={n}, parity={parity})")
        if cq >= target:
            q_lo, q_hi = q_prev, q
            break
        q_prev, c_prev = q, cq
    if q_lo is None:
        raise ModeError(
            f"no root with m={m} interior zeros for n={n} parity={parity} "
            f"in q range (0, {q_max}]")

    # bisect the integer-valued count to isolate the m-th boundary root
    for _ in range(60):
        if q_hi - q_lo < 1e-9 * max(1.0, q_hi):
            break
        mid = 0.5 * (q_lo + q_hi)
        if count(mid) >= target:
            q_hi = mid
        else:
            q_lo = mid

    boundary = lambda q: float(sf.radial_mathieu(n, parity, q, xi0)[0])
    f_lo, f_hi = boundary(q_lo), boundary(q_hi)
    if f_lo * f_hi > 0:
        # widen slightly; the boundary zero sits within the count bracket
        q_lo2 = max(q_lo - 1e-6 * max(1.0, q_lo), 1e-8)
        q_hi2 = q_hi + 1e-6 * max(1.0, q_hi)
        f_lo, f_hi = boundary(q_lo2), boundary(q_hi2)
        if f_lo * f_hi > 0:
            raise ModeError(
                f"failed to bracket boundary root near q={q_lo:.8g} "
                f"(n={n}, parity={parity})")
        q_lo, q_hi = q_lo2, q_hi2
    q_root = brentq(boundary, q_lo, q_hi, xtol=1e-12, rtol=1e-15)

    got = _interior_zero_count(n, parity, q_root, xi0)
    if got != m:
        raise ModeError(
            f"branch tracking failure at q={q_root:.8g}: {got} interior "
            f"zeros, wanted {m} (n={n}, parity={parity})")
    a_char = sf.mathieu_char(n, parity, q_root)
    return EllipseMode(parity=parity, m=m, n=n, k=2.0 * math.sqrt(q_root) / c,
                       q=q_root, a_char=a_char, xi0=xi0, a1=a1, a2=a2)


# ----------------------------------------------------------------------
# Field evaluation
# ----------------------------------------------------------------------

_NORM_CACHE: dict = {}
_NORM_GRID = 400


def elliptic_coordinates(pts: np.ndarray, c: float):
    """(xi, eta) with x = c cosh(xi) cos(eta), y = c sinh(xi) sin(eta)."""
    w = (pts[..., 0] + 1j * pts[..., 1]) / c
    zeta = np.arccosh(w.astype(complex))
    return np.abs(zeta.real), np.where(zeta.real < 0, -zeta.imag, zeta.imag)


def _raw_field(mode: EllipseMode, pts: np.ndarray) -> np.ndarray:
    xi, eta = elliptic_coordinates(pts, mode.focal_c)
    ang, _ = sf.angular_mathieu(mode.n, mode.parity, mode.q, eta)
    rad, _ = sf.radial_mathieu(mode.n, mode.parity, mode.q, xi)
    return ang * rad


def _normalization(mode: EllipseMode) -> float:
    key = (mode.parity, mode.m, mode.n, mode.a1, mode.a2)
    if key not in _NORM_CACHE:
        g = _NORM_GRID
        x = (np.arange(g) + 0.5) / g * (2 * mode.a1) - mode.a1
        y = (np.arange(g) + 0.5) / g * (2 * mode.a2) - mode.a2
        X, Y = np.meshgrid(x, y, indexing="ij")
        inside = (X / mode.a1) ** 2 + (Y / mode.a2) ** 2 < 1.0
        pts = np.stack([X[inside], Y[inside]], axis=-1)
        vals = _raw_field(mode, pts)
        da = (2 * mode.a1 / g) * (2 * mode.a2 / g)
        _NORM_CACHE[key] = 1.0 / math.sqrt(float(np.sum(vals ** 2) * da))
    return _NORM_CACHE[key]


def ellipse_mode_field(mode: EllipseMode, pts) -> np.ndarray:
    """Mode eigenfunction, unit discrete L2 norm over the ellipse."""
    pts = np.asarray(pts, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    r = (pts[:, 0] / mode.a1) ** 2 + (pts[:, 1] / mode.a2) ** 2
    if np.any(r > 1.0 + 1e-12):
        raise ModeError("point outside the closed ellipse")
    out = _raw_field(mode, pts) * _normalization(mode)
    return out[0] if single else out


def ellipse_mode_gradient(mode: EllipseMode, pts) -> np.ndarray:
    """Cartesian gradient of the normalized eigenfunction."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    c = mode.focal_c
    xi, eta = elliptic_coordinates(pts, c)
    ang, dang = sf.angular_mathieu(mode.n, mode.parity, mode.q, eta)
    rad, drad = sf.radial_mathieu(mode.n, mode.parity, mode.q, xi)
    du_dxi = drad * ang
    du_deta = rad * dang
    # Jacobian of (x, y) wrt (xi, eta)
    sh, ch = np.sinh(xi), np.cosh(xi)
    sn, cs = np.sin(eta), np.cos(eta)
    dx_dxi, dx_deta = c * sh * cs, -c * ch * sn
    dy_dxi, dy_deta = c * ch * sn, c * sh * cs
    det = dx_dxi * dy_deta - dx_deta * dy_dxi
    if np.any(np.abs(det) < 1e-14):
        raise ModeError("gradient requested at a focal point")
    gx = (du_dxi * dy_deta - du_deta * dy_dxi) / det
    gy = (-du_dxi * dx_deta + du_deta * dx_dxi) / det
    return np.stack([gx, gy], axis=-1) * _normalization(mode)


# ----------------------------------------------------------------------
# Independent FEM oracle
# ----------------------------------------------------------------------


def _ellipse_curve(a1, a2):
    return geo.BoundaryCurveSet([geo.EllipseArc(a1, a2, 0.0, 2 * np.pi)])


def _identify(interp: P1Interpolator, vec_nodes: np.ndarray, a1, a2):
    """(parity, n, m) of a discrete eigenvector by nodal-line counting."""
    c = math.sqrt(a1 ** 2 - a2 ** 2)
    xi0 = math.atanh(a2 / a1)
    best = None
    for frac in (0.5, 0.35, 0.65):
        xs = frac * xi0
        eta = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
        pts = np.stack([c * np.cosh(xs) * np.cos(eta),
                        c * np.sinh(xs) * np.sin(eta)], axis=-1)
        vals = interp.interpolate(vec_nodes, pts, fill=0.0)
        amp = np.max(np.abs(vals))
        if best is None or amp > best[0]:
            best = (amp, eta, vals)
    amp, eta, vals = best
    if amp < 1e-12:
        raise ModeError("eigenvector vanishes on all sampling loops")
    # parity: compare with the eta -> -eta reflection
    flipped = np.concatenate([vals[:1], vals[:0:-1]])
    corr = float(np.sum(vals * flipped) / np.sum(vals ** 2))
    parity = "even" if corr > 0 else "odd"
    # angular zero count on [0, pi): interior crossings plus the structural
    # boundary zero at eta=0 carried by every odd (sine-type) mode
    half = vals[:256]
    sig = half / amp
    n_zeros = _robust_crossings(sig, floor=0.02)
    if parity == "odd":
        n_zeros += 1
    # radial zero count along the strongest ray
    eta_star = eta[int(np.argmax(np.abs(vals)))]
    t = np.linspace(0.02, 0.985, 300) * xi0
    ray = np.stack([c * np.cosh(t) * np.cos(eta_star),
                    c * np.sinh(t) * np.sin(eta_star)], axis=-1)
    rvals = interp.interpolate(vec_nodes, ray, fill=0.0)
    m_zeros = _robust_crossings(rvals / np.max(np.abs(rvals)), floor=0.02)
    return parity, n_zeros, m_zeros


def _robust_crossings(sig: np.ndarray, floor: float) -> int:
    """Sign changes between consecutive samples of significant amplitude."""
    idx = np.nonzero(np.abs(sig) > floor)[0]
    if idx.size < 2:
        return 0
    s = np.sign(sig[idx])
    return int(np.sum(s[:-1] * s[1:] < 0))


def fem_ellipse_oracle(m: int, n: int, parity: str, h: float,
                       a1: float = 1.0, a2: float = 0.5,
                       k_cap: float = 26.0, richardson: bool = True) -> float:
    """Mode frequency from a P1 Dirichlet eigensolve (independent route).

    Scans the spectrum upward, identifies eigenvectors by parity and nodal
    counts, and returns sqrt(lambda); one Richardson step on a 1.35x finer
    mesh removes the leading h^2 error when richardson is set.
    """
    lam1 = _fem_mode_eigenvalue(m, n, parity, h, a1, a2, k_cap)
    if not richardson:
        return math.sqrt(lam1)
    r = 1.35
    lam2 = _fem_mode_eigenvalue(m, n, parity, h / r, a1, a2, k_cap)
    lam = lam2 + (lam2 - lam1) / (r * r - 1.0)
    return math.sqrt(lam)


def _fem_mode_eigenvalue(m, n, parity, h, a1, a2, k_cap) -> float:
    if h <= 0:
        raise ModeError("h must be positive")
    mesh = hm.mesh_interior(_ellipse_curve(a1, a2), h)
    f = assemble_fem(mesh, k=1.0)
    K = f.K[f.node_of_dof][:, f.node_of_dof].tocsc()
    M = f.M_dof.tocsc()
    interp = P1Interpolator(mesh)

    lam_cap = k_cap ** 2
    sigma = 4.0
    seen: list[float] = []
    block = 18
    for _ in range(60):
        vals, vecs = eigsh(K, k=block, M=M, sigma=sigma)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        for lam, vec in zip(vals, vecs.T):
            if any(abs(lam - s) < 1e-6 * max(1.0, lam) for s in seen):
                continue
            seen.append(lam)
            full = np.zeros(mesh.n_nodes)
            full[f.node_of_dof] = vec
            try:
                got = _identify(interp, full, a1, a2)
            except ModeError:
                continue
            if got == (parity, n, m):
                return float(lam)
        new_sigma = max(vals) * 1.0 + 0.5 * (vals[-1] - vals[0]) / block
        if new_sigma <= sigma:
            new_sigma = sigma + (vals[-1] - vals[0])
        sigma = new_sigma
        if sigma > lam_cap:
            break
    raise ModeError(
        f"mode (m={m}, n={n}, {parity}) not found below k={k_cap} "
        f"on the h={h} mesh (identification ambiguity or out of range)")
