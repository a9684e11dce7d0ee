"""Parametric boundary geometry: cavity obstacles and the truncation circle.

The obstacle is a closed chain of parametric segments (ellipse arcs, straight
caps, optional Bezier fillets) oriented counterclockwise. Normals follow the
convention that they point out of the computational domain: into the obstacle
on its boundary, radially outward on the truncation circle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

CHAIN_TOL = 1e-12
# Points closer than this to a boundary are classified as not contained.
BOUNDARY_TOL = 1e-10


class GeometryError(ValueError):
    """Raised for degenerate or inconsistent boundary definitions."""


# ----------------------------------------------------------------------
# Parametric segments
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class EllipseArc:
    """Arc of an axis-aligned ellipse, traversed from t0 to t1 (t1 < t0 ok)."""
    ax: float
    ay: float
    t0: float
    t1: float

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([self.ax * np.cos(t), self.ay * np.sin(t)], axis=-1)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        v = np.stack([-self.ax * np.sin(t), self.ay * np.cos(t)], axis=-1)
        return v if self.t1 >= self.t0 else -v

    @property
    def param_range(self):
        return (self.t0, self.t1)

    def length(self):
        return _segment_length(self)


@dataclass(frozen=True)
class Line:
    """Straight segment from p0 to p1, parameter in [0, 1]."""
    p0: tuple
    p1: tuple

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        a = np.asarray(self.p0, dtype=float)
        b = np.asarray(self.p1, dtype=float)
        return a + t * (b - a)

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        d = np.asarray(self.p1, dtype=float) - np.asarray(self.p0, dtype=float)
        return np.broadcast_to(d, t.shape + (2,)).copy()

    @property
    def param_range(self):
        return (0.0, 1.0)

    def length(self):
        return float(np.hypot(*(np.asarray(self.p1) - np.asarray(self.p0))))


@dataclass(frozen=True)
class Bezier2:
    """Quadratic Bezier (used for optional corner fillets), t in [0, 1]."""
    p0: tuple
    pc: tuple
    p1: tuple

    def point(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        a, c, b = (np.asarray(p, dtype=float) for p in (self.p0, self.pc, self.p1))
        return (1 - t) ** 2 * a + 2 * t * (1 - t) * c + t ** 2 * b

    def velocity(self, t):
        t = np.asarray(t, dtype=float)[..., None]
        a, c, b = (np.asarray(p, dtype=float) for p in (self.p0, self.pc, self.p1))
        return 2 * (1 - t) * (c - a) + 2 * t * (b - c)

    @property
    def param_range(self):
        return (0.0, 1.0)

    def length(self):
        return _segment_length(self)


def _segment_length(seg, npts: int = 129) -> float:
    t0, t1 = seg.param_range
    t = np.linspace(t0, t1, npts)
    p = seg.point(t)
    return float(np.sum(np.hypot(*np.diff(p, axis=0).T)))


def _param_grid(seg, n: int) -> np.ndarray:
    """n+1 parameter values equispaced in arclength along seg."""
    t0, t1 = seg.param_range
    tf = np.linspace(t0, t1, 16 * max(n, 4) + 1)
    p = seg.point(tf)
    s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(p, axis=0).T))])
    targets = np.linspace(0.0, s[-1], n + 1)
    return np.interp(targets, s, tf)


# ----------------------------------------------------------------------
# Closed boundary chains
# ----------------------------------------------------------------------


@dataclass
class BoundaryCurveSet:
    """Ordered closed chain of parametric segments (counterclockwise).

    role is "obstacle" (Gamma_D) or "truncation" (Gamma_tr); it decides
    which way the out-of-domain normal points.
    """
    segments: list
    role: str = "obstacle"
    closed: bool = True
    _polyline_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.role not in ("obstacle", "truncation"):
            raise GeometryError(f"unknown boundary role {self.role!r}")
        if not self.segments:
            raise GeometryError("empty boundary chain")
        self._validate_chain()

    def _validate_chain(self):
        ends = [seg.point(np.asarray(seg.param_range[1])) for seg in self.segments]
        starts = [seg.point(np.asarray(seg.param_range[0])) for seg in self.segments]
        n = len(self.segments)
        gaps = [float(np.hypot(*(ends[i] - starts[(i + 1) % n])))
                for i in range(n)]
        if max(gaps) > CHAIN_TOL:
            raise GeometryError(f"segment chain has gap {max(gaps):.2e} > {CHAIN_TOL}")

    def polyline(self, spacing: float, min_edges_per_segment: int = 2) -> np.ndarray:
        """Closed polyline resampled at ~spacing arclength, corners kept.

        Short segments are refined so each receives at least
        min_edges_per_segment edges. Returns the vertex array without the
        repeated first point.
        """
        key = (round(spacing, 14), min_edges_per_segment)
        if key not in self._polyline_cache:
            pts = []
            for seg in self.segments:
                n = max(int(math.ceil(seg.length() / spacing)),
                        min_edges_per_segment)
                t = _param_grid(seg, n)
                pts.append(seg.point(t)[:-1])
            self._polyline_cache[key] = np.concatenate(pts, axis=0)
        return self._polyline_cache[key]

    def signed_area(self) -> float:
        p = self.polyline(min(seg.length() for seg in self.segments) / 64.0)
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def is_simple(self, spacing: float = 1e-2) -> bool:
        p = self.polyline(spacing)
        return _polyline_is_simple(p)

    def bounding_radius(self) -> float:
        p = self.polyline(1e-2)
        return float(np.max(np.hypot(p[:, 0], p[:, 1])))


def _polyline_is_simple(p: np.ndarray) -> bool:
    """All-pairs proper-intersection test for a closed polyline."""
    n = len(p)
    a = p
    b = np.roll(p, -1, axis=0)
    for i in range(n):
        # skip this edge and its two neighbours
        js = np.arange(i + 2, n if i > 0 else n - 1)
        if js.size == 0:
            continue
        d1 = b[i] - a[i]
        d2 = (b[js] - a[js])
        r = a[js] - a[i]
        denom = d1[0] * d2[:, 1] - d1[1] * d2[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / denom
            u = (r[:, 0] * d1[1] - r[:, 1] * d1[0]) / denom
        hit = (np.abs(denom) > 1e-300) & (t > 1e-12) & (t < 1 - 1e-12) \
            & (u > 1e-12) & (u < 1 - 1e-12)
        if np.any(hit):
            return False
    return True


def curve_point(seg, t, role: str = "obstacle"):
    """Point, unit tangent and out-of-domain unit normal at parameter t.

    The tangent follows the traversal direction; the normal points out of
    the computational domain (into the obstacle on Gamma_D, radially
    outward on Gamma_tr).
    """
    lo, hi = seg.param_range
    lo, hi = min(lo, hi), max(lo, hi)
    if not (lo - 1e-12 <= float(t) <= hi + 1e-12):
        raise GeometryError(f"parameter {t} outside [{lo}, {hi}]")
    p = seg.point(np.asarray(float(t)))
    v = seg.velocity(np.asarray(float(t)))
    tang = v / np.hypot(*v)
    if role == "obstacle":
        normal = np.array([-tang[1], tang[0]])
    elif role == "truncation":
        normal = np.array([tang[1], -tang[0]])
    else:
        raise GeometryError(f"unknown boundary role {role!r}")
    return p, tang, normal


# ----------------------------------------------------------------------
# Cavity construction
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CavitySpec:
    """Geometric parameters of the horseshoe cavity.

    The obstacle is the shell between the inner arc (t in [-phi0, phi0] on
    the a1 x a2 ellipse) and the outer arc (t in [-phi1, phi1] on the
    A1 x A2 ellipse), closed by straight vertical caps. phi1 is derived so
    the cap endpoints share their x coordinate.
    """
    inner_axes: tuple = (1.0, 0.5)
    outer_axes: tuple = (1.3, 0.6)
    phi0: float = 7.0 * math.pi / 10.0
    kind: str = "custom"
    fillet_radius: float = 0.0
    phi1: float = field(init=False)

    def __post_init__(self):
        a1, a2 = self.inner_axes
        A1, A2 = self.outer_axes
        if min(a1, a2, A1, A2) <= 0:
            raise GeometryError("axes must be positive")
        if not 0.0 < self.phi0 < math.pi:
            raise GeometryError("phi0 must lie in (0, pi)")
        ratio = math.cos(self.phi0) * a1 / A1
        if abs(ratio) > 1.0:
            raise GeometryError("no outer-arc angle matches phi0")
        object.__setattr__(self, "phi1", math.acos(ratio))
        ex, ey = a1 * math.cos(self.phi0), a2 * math.sin(self.phi0)
        if (ex / A1) ** 2 + (ey / A2) ** 2 >= 1.0:
            raise GeometryError("outer ellipse does not contain the inner arc endpoints")


def build_cavity(kind: str = "small", **overrides) -> BoundaryCurveSet:
    """Closed obstacle boundary for the named cavity.

    kind "small" uses phi0 = 7pi/10, "large" phi0 = 9pi/10; "custom"
    requires an explicit phi0 override. Axes default to 1 x 0.5 (inner)
    and 1.3 x 0.6 (outer).
    """
    if kind == "small":
        params = dict(phi0=7.0 * math.pi / 10.0)
    elif kind == "large":
        params = dict(phi0=9.0 * math.pi / 10.0)
    elif kind == "custom":
        params = {}
    else:
        raise GeometryError(f"unknown cavity kind {kind!r}")
    params.update(overrides)
    spec = CavitySpec(kind=kind, **params)
    curve = _cavity_chain(spec)
    if not curve.is_simple(spacing=5e-3):
        raise GeometryError("cavity boundary self-intersects")
    return curve


def _cavity_chain(spec: CavitySpec) -> BoundaryCurveSet:
    a1, a2 = spec.inner_axes
    A1, A2 = spec.outer_axes
    phi0, phi1 = spec.phi0, spec.phi1

    inner_top = np.array([a1 * math.cos(phi0), a2 * math.sin(phi0)])
    inner_bot = np.array([a1 * math.cos(phi0), -a2 * math.sin(phi0)])
    outer_top = np.array([A1 * math.cos(phi1), A2 * math.sin(phi1)])
    outer_bot = np.array([A1 * math.cos(phi1), -A2 * math.sin(phi1)])
    if np.hypot(*(outer_top - inner_top)) < 1e-12:
        raise GeometryError("degenerate cap: arc endpoints coincide")

    segments = [
        EllipseArc(A1, A2, -phi1, phi1),          # outer arc, ccw
        Line(tuple(outer_top), tuple(inner_top)),  # upper cap, inward
        EllipseArc(a1, a2, phi0, -phi0),          # inner arc, cw in t
        Line(tuple(inner_bot), tuple(outer_bot)),  # lower cap, outward
    ]
    if spec.fillet_radius > 0.0:
        segments = _fillet_corners(segments, spec.fillet_radius)
    curve = BoundaryCurveSet(segments=segments, role="obstacle")
    curve.spec = spec
    if curve.signed_area() <= 0:
        raise GeometryError("cavity chain is not counterclockwise")
    return curve


def _fillet_corners(segments: list, radius: float) -> list:
    """Replace each chain corner by a C^1 quadratic Bezier of ~radius size."""
    out = []
    n = len(segments)
    cuts = []
    for seg in segments:
        cut = min(radius, 0.3 * seg.length())
        t0, t1 = seg.param_range
        grid = _param_grid(seg, 64)
        # parameters at arclength cut from either end
        p = seg.point(grid)
        s = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(p, axis=0).T))])
        ta = float(np.interp(cut, s, grid))
        tb = float(np.interp(s[-1] - cut, s, grid))
        cuts.append((ta, tb))
    for i, seg in enumerate(segments):
        ta, tb = cuts[i]
        if isinstance(seg, EllipseArc):
            out.append(EllipseArc(seg.ax, seg.ay, ta, tb))
        else:
            t0, t1 = seg.param_range
            out.append(Line(tuple(seg.point(np.asarray(ta))),
                            tuple(seg.point(np.asarray(tb)))))
        nxt = segments[(i + 1) % n]
        corner = nxt.point(np.asarray(nxt.param_range[0]))
        end = out[-1].point(np.asarray(out[-1].param_range[1]))
        start = nxt.point(np.asarray(cuts[(i + 1) % n][0]))
        out.append(Bezier2(tuple(end), tuple(corner), tuple(start)))
    return out


def truncation_circle(radius: float) -> BoundaryCurveSet:
    if radius <= 0:
        raise GeometryError("truncation radius must be positive")
    return BoundaryCurveSet(
        segments=[EllipseArc(radius, radius, 0.0, 2.0 * math.pi)],
        role="truncation")


# ----------------------------------------------------------------------
# Domain
# ----------------------------------------------------------------------


@dataclass
class DomainSpec:
    """Computational domain: ball of given radius minus the closed obstacle."""
    obstacle: BoundaryCurveSet | None
    truncation_radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.truncation_radius <= 0:
            raise GeometryError("truncation radius must be positive")
        if self.center != (0.0, 0.0):
            raise GeometryError("off-center truncation circles are not supported")
        if self.obstacle is not None:
            if self.obstacle.bounding_radius() >= self.truncation_radius - 1e-9:
                raise GeometryError("obstacle must lie strictly inside the truncation circle")

    def truncation_boundary(self) -> BoundaryCurveSet:
        return truncation_circle(self.truncation_radius)

    def obstacle_interior_point(self) -> np.ndarray:
        """A point strictly inside the obstacle (mesh hole marker)."""
        if self.obstacle is None:
            raise GeometryError("domain has no obstacle")
        poly = self.obstacle.polyline(5e-3)
        seg = self.obstacle.segments[0]
        tm = 0.5 * (seg.param_range[0] + seg.param_range[1])
        p, _, normal = curve_point(seg, tm, role="obstacle")
        for eps in (1e-2, 1e-3, 1e-4):
            cand = p + eps * normal
            if _winding_inside(poly, cand[None, :])[0]:
                return cand
        raise GeometryError("failed to locate obstacle interior point")


def _winding_inside(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Even-odd crossing test of pts against the closed polyline poly."""
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    cond = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = cond & (xcross > x)
    return (np.sum(hits, axis=1) % 2).astype(bool)


def _distance_to_curve(curve: BoundaryCurveSet, pts: np.ndarray,
                       coarse: np.ndarray) -> np.ndarray:
    """Refined distance from pts to the exact curve segments.

    coarse is the polyline-vertex distance used as a seed; only used for
    points already known to be near the boundary, so a dense local
    parameter search per segment is affordable.
    """
    d = np.full(len(pts), np.inf)
    for seg in curve.segments:
        t0, t1 = seg.param_range
        tgrid = np.linspace(t0, t1, 2049)
        sp = seg.point(tgrid)
        for i, p in enumerate(pts):
            dd = np.min(np.hypot(sp[:, 0] - p[0], sp[:, 1] - p[1]))
            if dd < d[i]:
                d[i] = dd
    return d


def contains(domain: DomainSpec, points) -> np.ndarray:
    """True where a point lies in the open computational domain.

    Membership is a winding-number test against the obstacle chain plus a
    radius test; points within BOUNDARY_TOL of either boundary are
    classified as outside.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.hypot(pts[:, 0], pts[:, 1])
    inside = r < domain.truncation_radius - BOUNDARY_TOL
    if domain.obstacle is not None:
        poly = domain.obstacle.polyline(2e-3)
        in_obstacle = _winding_inside(poly, pts)
        inside &= ~in_obstacle
        # near-boundary band: settle with refined distances to the exact curve
        seg_d = _coarse_polyline_distance(poly, pts)
        band = seg_d < 2e-3
        if np.any(band):
            refined = _distance_to_curve(domain.obstacle, pts[band], seg_d[band])
            inside[band] &= refined > BOUNDARY_TOL
            flip = refined <= BOUNDARY_TOL
            # on-boundary points are not contained regardless of winding
            idx = np.nonzero(band)[0][flip]
            inside[idx] = False
    if np.isscalar(points[0]) and np.asarray(points).ndim == 1:
        return bool(inside[0])
    return inside


def _coarse_polyline_distance(poly: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Distance from pts to the polyline's edges (vectorized, chunked)."""
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    out = np.empty(len(pts))
    chunk = max(1, int(4e6 / max(len(poly), 1)))
    for lo in range(0, len(pts), chunk):
        p = pts[lo:lo + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("ijk,jk->ij", ap, ab)
                    / np.maximum(np.einsum("jk,jk->j", ab, ab), 1e-300), 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.hypot(p[:, None, 0] - closest[:, :, 0], p[:, None, 1] - closest[:, :, 1])
        out[lo:lo + chunk] = d.min(axis=1)
    return out


def geometry_json(spec: CavitySpec, truncation_radius: float) -> str:
    """Serialize the cavity + truncation geometry (documented field names)."""
    doc = {
        "kind": spec.kind,
        "a1": spec.inner_axes[0],
        "a2": spec.inner_axes[1],
        "A1": spec.outer_axes[0],
        "A2": spec.outer_axes[1],
        "phi0": spec.phi0,
        "phi1": spec.phi1,
        "R": truncation_radius,
    }
    return json.dumps(doc, indent=2, sort_keys=False)
