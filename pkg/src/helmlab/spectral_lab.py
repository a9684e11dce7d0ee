"""Experiment orchestration: coupled spectra, sweeps, box counts, quasimodes.

Ties the geometry/mesh/FEM/BEM layers into the coupled generalized
eigenproblem, tracks near-origin eigenvalues across frequency sweeps,
counts box-crossing trajectories, and measures quasimode quality for the
ellipse modes localized in a cavity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import bem_dtn as bd
from . import geometry as geo
from . import mesh as hm
from .eigsolve import CoupledSystem, EigenRecord, shift_invert_arnoldi
from .ellipse_modes import (EllipseMode, ellipse_mode_field,
                            ellipse_mode_gradient)
from .fem import AssembledFem, assemble_fem, assemble_trace


class LabError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# Domains and cached FEM scaffolding
# ----------------------------------------------------------------------


def lab_domain(cavity: str | None, truncation_radius: float) -> geo.DomainSpec:
    obstacle = geo.build_cavity(cavity) if cavity else None
    return geo.DomainSpec(obstacle=obstacle, truncation_radius=truncation_radius)


class FemCache:
    """Mesh + k-independent matrices reused across a frequency sweep."""

    def __init__(self, domain: geo.DomainSpec, h: float):
        self.domain = domain
        self.h = h
        self.mesh = hm.generate_mesh(domain, h)
        self.fem = assemble_fem(self.mesh, k=1.0)
        self.trace = assemble_trace(self.fem)
        f = self.fem
        self.K_dof = f.K[f.node_of_dof][:, f.node_of_dof].tocsr()
        self.M_dof = f.M_dof.tocsr()
        self._fourier_g = {}

    def a_at(self, k: float) -> sp.csr_matrix:
        return (self.K_dof - (k * k) * self.M_dof).astype(np.complex128)

    def circle_nodes(self) -> np.ndarray:
        return self.mesh.nodes[self.fem.gamma_tr_nodes]

    def fourier_trace(self, order: int) -> np.ndarray:
        """G[n, j] = integral of v_j e^{-i n theta} ds over the circle."""
        if order not in self._fourier_g:
            self._fourier_g[order] = _fourier_trace_matrix(
                self.circle_nodes(), self.fem.gamma_tr_dofs,
                self.M_dof.shape[0], order)
        return self._fourier_g[order]


def _fourier_trace_matrix(nodes, tr_dofs, n_dof, order):
    """Exact panel integrals of hat functions against e^{-i n theta}."""
    nb = len(nodes)
    R = float(np.hypot(nodes[0, 0], nodes[0, 1]))
    theta = np.mod(np.arctan2(nodes[:, 1], nodes[:, 0]), 2 * np.pi)
    L = 2 * np.pi / nb
    ns = np.arange(1, order + 1)
    # panel p spans [theta_p, theta_p + L]; the rising hat on panel p
    # belongs to node p+1, the falling hat to node p. Exact antiderivatives:
    #   I_rise = int_0^L (t/L) e^{-i n t} dt, I_fall = I_total - I_rise.
    n_ = ns[:, None].astype(float)
    e0 = np.exp(-1j * np.outer(ns, theta))           # (order, nb)
    enL = np.exp(-1j * n_ * L)
    i_total = (1.0 - enL) / (1j * n_)
    i_rise = 1j * enL / n_ - (1.0 - enL) / (L * n_ ** 2)
    i_fall = i_total - i_rise
    rise = e0 * i_rise
    fall = e0 * i_fall

    g = np.zeros((2 * order + 1, nb), dtype=complex)
    mid = order
    # node j's hat: falling part on panel j, rising part on panel j-1
    for row in range(order):
        g[mid + 1 + row] = fall[row] + np.roll(rise[row], 1)
    g[mid] = L  # n = 0: integral of the hat in angle is L
    g[:mid] = np.conj(g[:mid:-1])
    g *= R
    out = sp.lil_matrix((2 * order + 1, n_dof), dtype=complex)
    out[:, tr_dofs] = g
    return out.tocsr()


def fourier_order_for(k: float, R: float, n_boundary: int) -> int:
    order = int(math.ceil(k * R)) + 30
    cap = max(n_boundary // 2 - 1, 8)
    return min(order, cap)


def assemble_coupled(domain: geo.DomainSpec, k: float,
                     dtn_backend: str = "bem", h: float | None = None,
                     fem_cache: FemCache | None = None,
                     fourier_order: int | None = None) -> CoupledSystem:
    """Coupled pencil blocks at wavenumber k for the chosen DtN backend."""
    if k <= 0:
        raise LabError("wavenumber must be positive")
    if fem_cache is None:
        fem_cache = FemCache(domain, h if h is not None else hm.meshwidth_rule(k))
    A = fem_cache.a_at(k)
    Mtr = fem_cache.trace
    R = domain.truncation_radius

    if dtn_backend == "bem":
        ops = bd.assemble_bem(fem_cache.circle_nodes(), k)
        ops.single_layer_lu()          # raises SingularOperatorError with k
        nb = ops.n
        tr_dofs = fem_cache.fem.gamma_tr_dofs
        block = 0.5 * ops.Mb - ops.Dp
        C12 = sp.lil_matrix((A.shape[0], nb), dtype=complex)
        C12[tr_dofs, :] = block.T
        sys = CoupledSystem(A=A, C12=C12.tocsr(), C21=Mtr.astype(complex),
                            C22=-ops.S, M=fem_cache.M_dof, k=k, backend="bem",
                            meta={"h": fem_cache.h, "R": R})
    elif dtn_backend == "fourier":
        order = fourier_order if fourier_order is not None else \
            fourier_order_for(k, R, len(fem_cache.fem.gamma_tr_dofs))
        G = fem_cache.fourier_trace(order)
        table = bd.fourier_dtn(k, R, order)
        modes = np.arange(-order, order + 1)
        d = table.symbol(modes)
        C12 = (-G.conj().T.multiply(d[None, :])).tocsr()
        C22 = (-2 * np.pi * R) * sp.identity(2 * order + 1, dtype=complex,
                                             format="csr")
        sys = CoupledSystem(A=A, C12=C12, C21=G, C22=np.asarray(C22.todense()),
                            M=fem_cache.M_dof, k=k, backend="fourier",
                            meta={"h": fem_cache.h, "R": R, "order": order})
    elif dtn_backend == "dirichlet":
        # control: homogeneous Dirichlet on Gamma_tr; Hermitian pencil
        tr = fem_cache.fem.gamma_tr_dofs
        keep = np.setdiff1d(np.arange(A.shape[0]), tr)
        sys = CoupledSystem(A=A[keep][:, keep],
                            C12=np.zeros((len(keep), 0)),
                            C21=np.zeros((0, len(keep))), C22=np.zeros((0, 0)),
                            M=fem_cache.M_dof[keep][:, keep], k=k,
                            backend="dirichlet",
                            meta={"h": fem_cache.h, "R": R})
    else:
        raise LabError(f"unknown dtn backend {dtn_backend!r}")
    return sys


def spectrum_near_zero(domain: geo.DomainSpec, k: float, nev: int,
                       dtn_backend: str = "fourier", h: float | None = None,
                       fem_cache: FemCache | None = None,
                       tol: float = 1e-10, seed: int | None = None,
                       subspace: int | None = None) -> list[EigenRecord]:
    """nev eigenvalues of smallest |mu| at frequency k."""
    sys = assemble_coupled(domain, k, dtn_backend, h=h, fem_cache=fem_cache)
    kwargs = {}
    if seed is not None:
        kwargs["seed"] = seed
    recs = shift_invert_arnoldi(sys, nev=nev, tol=tol, subspace=subspace,
                                **kwargs)
    recs.sort(key=lambda r: abs(r.mu))
    return recs


# ----------------------------------------------------------------------
# Sweeps and trajectories
# ----------------------------------------------------------------------


@dataclass
class Track:
    track_id: int
    ks: list = field(default_factory=list)
    mus: list = field(default_factory=list)
    confidences: list = field(default_factory=list)

    def add(self, k, mu, conf):
        self.ks.append(float(k))
        self.mus.append(complex(mu))
        self.confidences.append(float(conf))


@dataclass
class TrajectorySet:
    k_grid: np.ndarray
    tracks: list
    step: float
    missing: list = field(default_factory=list)


@dataclass(frozen=True)
class BoxSpec:
    """Rectangle (-2 eps1, 2 eps1) - i (0, 2 eps0) over [k_minus, k_plus]."""
    eps1: float
    eps0: float
    k_minus: float
    k_plus: float

    def __post_init__(self):
        if self.eps0 <= 0 or self.eps1 <= 0:
            raise LabError("box scales must be positive")
        if self.k_minus > self.k_plus:
            raise LabError("empty frequency window")

    def contains(self, mu: complex) -> bool:
        return (-2 * self.eps1 < mu.real < 2 * self.eps1
                and -2 * self.eps0 < mu.imag < 0.0)


def sweep(domain: geo.DomainSpec, k_min: float, k_max: float, step: float,
          nev: int, dtn_backend: str = "fourier", h: float | None = None,
          jobs: int = 1, seed: int | None = None,
          tol: float = 1e-9) -> TrajectorySet:
    """Near-origin spectra on a k-grid with greedy trajectory matching."""
    if step <= 0 or k_min <= 0 or k_max < k_min:
        raise LabError("need 0 < k_min <= k_max and positive step")
    n_steps = max(int(round((k_max - k_min) / step)), 1)
    k_grid = k_min + step * np.arange(n_steps)
    h_used = h if h is not None else hm.meshwidth_rule(k_max)
    cache = FemCache(domain, h_used)

    spectra = _sweep_spectra(domain, k_grid, nev, dtn_backend, cache, jobs,
                             seed, tol)
    return _match_tracks(k_grid, spectra, step)


def _solve_one(domain, k, nev, backend, cache, seed, tol):
    try:
        recs = spectrum_near_zero(domain, k, nev, dtn_backend=backend,
                                  fem_cache=cache, tol=tol, seed=seed)
        return [r.mu for r in recs]
    except (LabError, bd.SingularOperatorError, RuntimeError):
        return None


_POOL_STATE = {}


def _pool_init(domain, nev, backend, cache, seed, tol):
    _POOL_STATE.update(domain=domain, nev=nev, backend=backend, cache=cache,
                       seed=seed, tol=tol)


def _pool_worker(k):
    s = _POOL_STATE
    return _solve_one(s["domain"], k, s["nev"], s["backend"], s["cache"],
                      s["seed"], s["tol"])


def _sweep_spectra(domain, k_grid, nev, backend, cache, jobs, seed, tol):
    if jobs <= 1:
        return [_solve_one(domain, k, nev, backend, cache, seed, tol)
                for k in k_grid]
    import multiprocessing as mp
    ctx = mp.get_context("fork")
    with ctx.Pool(jobs, initializer=_pool_init,
                  initargs=(domain, nev, backend, cache, seed, tol)) as pool:
        return pool.map(_pool_worker, k_grid)


def _match_tracks(k_grid, spectra, step) -> TrajectorySet:
    tracks: list[Track] = []
    active: list[Track] = []
    missing = []
    velocity_samples: list[float] = []
    next_id = 0
    bridging = False

    for k, mus in zip(k_grid, spectra):
        if mus is None:
            missing.append(float(k))
            bridging = True
            continue
        mus = list(mus)
        if velocity_samples:
            gate = max(10.0 * step * float(np.median(velocity_samples)), 1e-12)
        else:
            gate = np.inf
        if bridging:
            gate *= 2.0
        pairs = []
        for ti, tr in enumerate(active):
            last = tr.mus[-1]
            for mi, mu in enumerate(mus):
                pairs.append((abs(mu - last), ti, mi))
        pairs.sort(key=lambda t: t[0])
        used_t, used_m = set(), set()
        survivors = []
        for dist, ti, mi in pairs:
            if dist > gate or ti in used_t or mi in used_m:
                continue
            tr = active[ti]
            dk = k - tr.ks[-1]
            if dk > 0:
                velocity_samples.append(abs(mus[mi] - tr.mus[-1]) / dk)
                if len(velocity_samples) > 400:
                    velocity_samples.pop(0)
            if bridging:
                conf = 0.0
            elif not np.isfinite(gate):
                conf = 1.0
            else:
                conf = float(np.clip(1.0 - dist / gate, 0.0, 1.0))
            tr.add(k, mus[mi], conf)
            used_t.add(ti)
            used_m.add(mi)
            survivors.append(tr)
        for mi, mu in enumerate(mus):
            if mi in used_m:
                continue
            tr = Track(track_id=next_id)
            next_id += 1
            tr.add(k, mu, 1.0)
            tracks.append(tr)
            survivors.append(tr)
        for tr in active:
            if tr not in survivors and tr not in tracks:
                tracks.append(tr)
        active = survivors
        bridging = False
    for tr in active:
        if tr not in tracks:
            tracks.append(tr)
    tracks.sort(key=lambda t: t.track_id)
    return TrajectorySet(k_grid=k_grid, tracks=tracks, step=step,
                         missing=missing)


def box_count(traj: TrajectorySet, box: BoxSpec):
    """Distinct tracks entering the box for some grid k in the window."""
    if len(traj.k_grid):
        lo, hi = float(traj.k_grid[0]), float(traj.k_grid[-1])
        if box.k_minus < lo - 1e-12 or box.k_plus > hi + 1e-12:
            raise LabError("box window exceeds the swept range")
    members = []
    for tr in traj.tracks:
        for k, mu in zip(tr.ks, tr.mus):
            if box.k_minus <= k <= box.k_plus and box.contains(mu):
                members.append(tr.track_id)
                break
    return len(members), members


# ----------------------------------------------------------------------
# Quasimodes
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffSpec:
    """One-sided C^2 smoothstep in x: 0 for x <= x_lo, 1 for x >= x_hi."""
    x_lo: float
    x_hi: float

    def __post_init__(self):
        if self.x_hi <= self.x_lo:
            raise LabError("cutoff needs x_hi > x_lo")

    def chi(self, x):
        s = np.clip((np.asarray(x, dtype=float) - self.x_lo)
                    / (self.x_hi - self.x_lo), 0.0, 1.0)
        return s ** 3 * (10.0 - 15.0 * s + 6.0 * s ** 2)

    def dchi(self, x):
        w = self.x_hi - self.x_lo
        s = (np.asarray(x, dtype=float) - self.x_lo) / w
        inside = (s > 0.0) & (s < 1.0)
        out = np.zeros_like(s)
        ss = s[inside]
        out[inside] = (30.0 * ss ** 2 - 60.0 * ss ** 3 + 30.0 * ss ** 4) / w
        return out

    def d2chi(self, x):
        w = self.x_hi - self.x_lo
        s = (np.asarray(x, dtype=float) - self.x_lo) / w
        inside = (s > 0.0) & (s < 1.0)
        out = np.zeros_like(s)
        ss = s[inside]
        out[inside] = (60.0 * ss - 180.0 * ss ** 2 + 120.0 * ss ** 3) / w ** 2
        return out


@dataclass
class QuasimodeReport:
    mode: EllipseMode
    cavity_kind: str
    cutoff: CutoffSpec
    quality: float                 # raw ||(Lap + k^2)(chi u)||_L2
    quality_renormalized: float    # after dividing by ||chi u||
    norm_chi_u: float
    support_ok: bool

    def to_json(self) -> str:
        return json.dumps({
            "format": 1,
            "mode": {"parity": self.mode.parity, "m": self.mode.m,
                     "n": self.mode.n, "k": self.mode.k},
            "cavity": self.cavity_kind,
            "cutoff": {"x_lo": self.cutoff.x_lo, "x_hi": self.cutoff.x_hi},
            "quality_raw": self.quality,
            "quality": self.quality_renormalized,
            "norm_chi_u": self.norm_chi_u,
            "support_ok": self.support_ok,
        }, indent=2)


def default_cutoff(cavity: geo.CavitySpec, margin: float = 0.02,
                   width: float = 0.18) -> CutoffSpec:
    x_open = cavity.inner_axes[0] * math.cos(cavity.phi0)
    return CutoffSpec(x_lo=x_open + margin, x_hi=x_open + margin + width)


# degree-5 triangle rule (7 points)
_TRI7_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [0.797426985353087, 0.101286507323456, 0.101286507323456],
    [0.101286507323456, 0.797426985353087, 0.101286507323456],
    [0.101286507323456, 0.101286507323456, 0.797426985353087],
    [0.059715871789770, 0.470142064105115, 0.470142064105115],
    [0.470142064105115, 0.059715871789770, 0.470142064105115],
    [0.470142064105115, 0.470142064105115, 0.059715871789770],
])
_TRI7_W = np.array([0.225,
                    0.125939180544827, 0.125939180544827, 0.125939180544827,
                    0.132394152788506, 0.132394152788506, 0.132394152788506])


def _collar_curve(mode: EllipseMode, cut: CutoffSpec) -> geo.BoundaryCurveSet:
    a1, a2 = mode.a1, mode.a2
    t_hi = math.acos(min(cut.x_hi / a1, 1.0))
    t_lo = math.acos(max(min(cut.x_lo / a1, 1.0), -1.0))
    y_hi = a2 * math.sin(t_hi)
    y_lo = a2 * math.sin(t_lo)
    segments = [
        geo.Line((cut.x_hi, -y_hi), (cut.x_hi, y_hi)),
        geo.EllipseArc(a1, a2, t_hi, t_lo),
        geo.Line((cut.x_lo, y_lo), (cut.x_lo, -y_lo)),
        geo.EllipseArc(a1, a2, -t_lo, -t_hi),
    ]
    return geo.BoundaryCurveSet(segments=segments)


def quasimode_quality(mode: EllipseMode, cavity: geo.CavitySpec,
                      cutoff: CutoffSpec | None = None,
                      collar_h: float | None = None) -> QuasimodeReport:
    """|| (Lap + k^2)(chi u) ||_L2 with u the normalized ellipse mode.

    Since (Lap + k^2) u = 0 inside the ellipse, the defect reduces to
    (Lap chi) u + 2 chi' du/dx on the cutoff collar; integrated with a
    7-point triangle rule on a dedicated fine mesh of the collar.
    """
    cut = cutoff if cutoff is not None else default_cutoff(cavity)
    x_open = cavity.inner_axes[0] * math.cos(cavity.phi0)
    geometric_fit = (cut.x_lo > x_open + 1e-9) and (cut.x_hi < mode.a1)
    if collar_h is None:
        collar_h = min((cut.x_hi - cut.x_lo) / 6.0,
                       2.0 * np.pi / mode.k / 6.0)
    collar = _collar_curve(mode, cut)
    cmesh = hm.mesh_interior(collar, collar_h)

    p = cmesh.nodes[cmesh.triangles]
    areas = cmesh.triangle_areas()
    total = 0.0
    for bary, w in zip(_TRI7_BARY, _TRI7_W):
        pts = np.einsum("v,tvc->tc", bary, p)
        # clamp quadrature points to the open ellipse (boundary roundoff)
        rr = (pts[:, 0] / mode.a1) ** 2 + (pts[:, 1] / mode.a2) ** 2
        shrink = np.sqrt(np.minimum(1.0, (1.0 - 1e-13) / np.maximum(rr, 1e-300)))
        pts = pts * shrink[:, None]
        u = ellipse_mode_field(mode, pts)
        grad = ellipse_mode_gradient(mode, pts)
        defect = cut.d2chi(pts[:, 0]) * u + 2.0 * cut.dchi(pts[:, 0]) * grad[:, 0]
        total += float(np.sum(w * areas * defect ** 2))
    eps_raw = math.sqrt(total)

    norm_chi = _chi_u_norm(mode, cut)
    # the cutoff "escapes the cavity" when the mode carries significant
    # mass beyond it: more than 2% of the L2 mass removed by chi
    support_ok = geometric_fit and (1.0 - norm_chi ** 2) <= 0.02
    return QuasimodeReport(mode=mode, cavity_kind=cavity.kind, cutoff=cut,
                           quality=eps_raw,
                           quality_renormalized=eps_raw / norm_chi,
                           norm_chi_u=norm_chi, support_ok=support_ok)


def _chi_u_norm(mode: EllipseMode, cut: CutoffSpec, grid: int = 400) -> float:
    x = (np.arange(grid) + 0.5) / grid * (2 * mode.a1) - mode.a1
    y = (np.arange(grid) + 0.5) / grid * (2 * mode.a2) - mode.a2
    X, Y = np.meshgrid(x, y, indexing="ij")
    inside = (X / mode.a1) ** 2 + (Y / mode.a2) ** 2 < 1.0
    pts = np.stack([X[inside], Y[inside]], axis=-1)
    vals = ellipse_mode_field(mode, pts) * cut.chi(pts[:, 0])
    da = (2 * mode.a1 / grid) * (2 * mode.a2 / grid)
    return math.sqrt(float(np.sum(vals ** 2) * da))


def multiplicity_in_window(reports: list[QuasimodeReport], window):
    """Mode count in the window plus the pairwise chi-u overlap matrix."""
    k_lo, k_hi = window
    if not reports:
        return 0, np.zeros((0, 0)), []
    kinds = {r.cavity_kind for r in reports}
    if len(kinds) != 1:
        raise LabError("all quasimode reports must share the cavity")
    selected = [r for r in reports if k_lo <= r.mode.k <= k_hi]
    m = len(selected)
    overlap = np.eye(m)
    flags = []
    grid = 400
    if m > 1:
        a1, a2 = selected[0].mode.a1, selected[0].mode.a2
        x = (np.arange(grid) + 0.5) / grid * (2 * a1) - a1
        y = (np.arange(grid) + 0.5) / grid * (2 * a2) - a2
        X, Y = np.meshgrid(x, y, indexing="ij")
        inside = (X / a1) ** 2 + (Y / a2) ** 2 < 1.0
        pts = np.stack([X[inside], Y[inside]], axis=-1)
        da = (2 * a1 / grid) * (2 * a2 / grid)
        fields = []
        for r in selected:
            f = ellipse_mode_field(r.mode, pts) * r.cutoff.chi(pts[:, 0])
            fields.append(f / math.sqrt(float(np.sum(f ** 2) * da)))
        eps_ref = max(r.quality_renormalized for r in selected)
        for i in range(m):
            for j in range(i + 1, m):
                val = abs(float(np.sum(fields[i] * fields[j]) * da))
                overlap[i, j] = overlap[j, i] = val
                if val > max(eps_ref, 1e-12):
                    flags.append((selected[i].mode, selected[j].mode, val))
    return m, overlap, flags


# ----------------------------------------------------------------------
# Theorem check
# ----------------------------------------------------------------------


def theorem1_check(domain: geo.DomainSpec, mode: EllipseMode | None,
                   alpha: float, nev: int = 4, h: float | None = None,
                   dtn_backend: str = "fourier",
                   quality: float | None = None) -> dict:
    """Single-frequency consistency check |mu_min| <= k^alpha eps(k)."""
    if alpha <= 4.5:
        raise LabError("alpha must exceed 3(d+1)/2 = 4.5 for d=2")
    if mode is None:
        return {"applicable": False, "reason": "no quasimode at this frequency"}
    k = mode.k
    if quality is None:
        if domain.obstacle is None or not hasattr(domain.obstacle, "spec"):
            raise LabError("domain has no cavity spec for the quality integral")
        quality = quasimode_quality(mode, domain.obstacle.spec).quality_renormalized
    h_used = h if h is not None else hm.meshwidth_rule(k)
    recs = spectrum_near_zero(domain, k, nev, dtn_backend=dtn_backend, h=h_used)
    mu_min = min(abs(r.mu) for r in recs)
    bound = k ** alpha * quality
    # leading P1 eigenvalue-error scale; crude but reported, not hidden
    budget = (k * h_used) ** 2 * k * k / 12.0
    return {"applicable": True, "k": k, "alpha": alpha, "mu_min": mu_min,
            "bound": bound, "budget": budget, "quality": quality,
            "h": h_used, "passed": bool(mu_min <= bound + budget)}


# ----------------------------------------------------------------------
# Output files (versioned schemas)
# ----------------------------------------------------------------------


def write_spectra_csv(path: str, rows) -> None:
    """rows: iterables of (k, mu, residual, track_id)."""
    with open(path, "w", newline="\n") as f:
        f.write("# format: 1\n")
        f.write("k,re_mu,im_mu,residual,track_id\n")
        for k, mu, resid, tid in rows:
            f.write(f"{k:.17g},{mu.real:.17g},{mu.imag:.17g},"
                    f"{resid:.17g},{tid}\n")


def spectra_rows_from_records(k, records):
    return [(k, r.mu, r.residual, -1) for r in records]


def spectra_rows_from_trajectories(traj: TrajectorySet):
    rows = []
    for tr in traj.tracks:
        for k, mu, conf in zip(tr.ks, tr.mus, tr.confidences):
            rows.append((k, mu, conf, tr.track_id))
    rows.sort(key=lambda r: (r[0], r[3]))
    return rows


def write_boxcount_json(path: str, box: BoxSpec, count: int, members) -> None:
    with open(path, "w", newline="\n") as f:
        json.dump({"format": 1, "eps1": box.eps1, "eps0": box.eps0,
                   "k_minus": box.k_minus, "k_plus": box.k_plus,
                   "count": count, "track_ids": sorted(members)}, f, indent=2)
        f.write("\n")
