"""Cavity geometry: chain closure, orientation, membership, symmetry."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helmlab import geometry as geo

shapely_geometry = pytest.importorskip("shapely.geometry")


def chain_gaps(curve):
    segs = curve.segments
    gaps = []
    for i, seg in enumerate(segs):
        end = seg.point(np.asarray(seg.param_range[1]))
        nxt = segs[(i + 1) % len(segs)]
        start = nxt.point(np.asarray(nxt.param_range[0]))
        gaps.append(float(np.hypot(*(end - start))))
    return gaps


class TestBuildCavity:
    def test_small_cavity_angles(self):
        curve = geo.build_cavity("small")
        spec = curve.spec
        assert spec.phi0 == pytest.approx(7 * math.pi / 10, abs=1e-15)
        assert spec.phi0 == pytest.approx(2.199114857512855, abs=1e-12)
        assert spec.phi1 == pytest.approx(math.acos(math.cos(7 * math.pi / 10) / 1.3),
                                          abs=1e-15)
        assert spec.phi1 == pytest.approx(2.0399622614931703, abs=1e-12)

    def test_large_cavity_angle(self):
        curve = geo.build_cavity("large")
        assert curve.spec.phi0 == pytest.approx(9 * math.pi / 10, abs=1e-15)

    @pytest.mark.parametrize("kind", ["small", "large"])
    def test_chain_closure(self, kind):
        assert max(chain_gaps(geo.build_cavity(kind))) < 1e-12

    @pytest.mark.parametrize("kind", ["small", "large"])
    def test_counterclockwise(self, kind):
        assert geo.build_cavity(kind).signed_area() > 0

    def test_phi1_identity(self):
        for kind in ("small", "large"):
            spec = geo.build_cavity(kind).spec
            assert abs(1.3 * math.cos(spec.phi1) - math.cos(spec.phi0)) < 1e-12

    def test_rejects_degenerate_geometry(self):
        with pytest.raises(geo.GeometryError):
            geo.build_cavity("custom", phi0=0.5, inner_axes=(1.0, 0.5),
                             outer_axes=(1.05, 0.4))

    def test_rejects_bad_phi0(self):
        with pytest.raises(geo.GeometryError):
            geo.build_cavity("custom", phi0=0.0)
        with pytest.raises(geo.GeometryError):
            geo.build_cavity("custom", phi0=math.pi)

    def test_fillet_keeps_closure(self):
        curve = geo.build_cavity("small", fillet_radius=0.02)
        assert max(chain_gaps(curve)) < 1e-12
        assert curve.signed_area() > 0

    def test_mirror_symmetry(self):
        for kind in ("small", "large"):
            curve = geo.build_cavity(kind)
            outer, inner = curve.segments[0], curve.segments[2]
            for t in (0.3, 0.9, 1.7):
                p_plus = outer.point(np.asarray(t))
                p_minus = outer.point(np.asarray(-t))
                assert p_plus[0] == p_minus[0]
                assert p_plus[1] == -p_minus[1]
                q_plus = inner.point(np.asarray(t))
                q_minus = inner.point(np.asarray(-t))
                assert q_plus[0] == q_minus[0]
                assert q_plus[1] == -q_minus[1]


class TestCurvePoint:
    def test_inner_arc_axis_point(self):
        curve = geo.build_cavity("small")
        inner = curve.segments[2]
        p, _, n = geo.curve_point(inner, 0.0, role="obstacle")
        assert p == pytest.approx([1.0, 0.0], abs=1e-15)
        assert n == pytest.approx([1.0, 0.0], abs=1e-14)

    def test_outer_arc_axis_point(self):
        outer = geo.build_cavity("small").segments[0]
        p, _, _ = geo.curve_point(outer, 0.0, role="obstacle")
        assert p == pytest.approx([1.3, 0.0], abs=1e-15)

    def test_truncation_circle_top(self):
        circ = geo.truncation_circle(2.0).segments[0]
        p, t, n = geo.curve_point(circ, math.pi / 2, role="truncation")
        assert p == pytest.approx([0.0, 2.0], abs=1e-12)
        assert n == pytest.approx([0.0, 1.0], abs=1e-12)

    def test_out_of_range_parameter(self):
        circ = geo.truncation_circle(1.0).segments[0]
        with pytest.raises(geo.GeometryError):
            geo.curve_point(circ, 7.0, role="truncation")

    def test_normals_are_unit(self):
        curve = geo.build_cavity("large")
        for seg in curve.segments:
            t0, t1 = seg.param_range
            for lam in (0.1, 0.5, 0.9):
                t = t0 + lam * (t1 - t0)
                _, tang, n = geo.curve_point(seg, t, role="obstacle")
                assert np.hypot(*tang) == pytest.approx(1.0, abs=1e-14)
                assert np.hypot(*n) == pytest.approx(1.0, abs=1e-14)


class TestContains:
    def setup_method(self):
        self.domain = geo.DomainSpec(obstacle=geo.build_cavity("small"),
                                     truncation_radius=2.0)

    def test_point_above_obstacle(self):
        assert geo.contains(self.domain, (0.0, 1.8))

    def test_origin_is_inside(self):
        # the cavity mouth is open; the origin lies in the domain
        assert geo.contains(self.domain, (0.0, 0.0))

    def test_outside_circle(self):
        assert not geo.contains(self.domain, (0.0, 3.0))

    def test_inside_shell_is_outside_domain(self):
        assert not geo.contains(self.domain, (1.15, 0.0))

    def test_boundary_point_not_contained(self):
        assert not geo.contains(self.domain, (0.0, 2.0))
        assert not geo.contains(self.domain, (1.0, 0.0))

    @given(x=st.floats(-2.2, 2.2), y=st.floats(-2.2, 2.2))
    @settings(max_examples=120, deadline=None)
    def test_matches_shapely_oracle(self, x, y):
        poly = self.domain.obstacle.polyline(1e-3)
        shell = shapely_geometry.Polygon(poly)
        p = shapely_geometry.Point(x, y)
        # skip the near-boundary band where polyline vs exact curve differ
        if shell.exterior.distance(p) < 5e-3 or abs(np.hypot(x, y) - 2.0) < 5e-3:
            return
        expected = np.hypot(x, y) < 2.0 and not shell.contains(p)
        assert geo.contains(self.domain, (x, y)) == expected

    def test_obstacle_interior_point(self):
        p = self.domain.obstacle_interior_point()
        assert not geo.contains(self.domain, tuple(p))


class TestDomainSpec:
    def test_rejects_obstacle_touching_circle(self):
        with pytest.raises(geo.GeometryError):
            geo.DomainSpec(obstacle=geo.build_cavity("small"), truncation_radius=1.29)

    def test_disc_mode(self):
        d = geo.DomainSpec(obstacle=None, truncation_radius=1.0)
        assert geo.contains(d, (0.3, 0.2))
        assert not geo.contains(d, (1.2, 0.0))


def test_geometry_json_round_trip():
    import json
    curve = geo.build_cavity("large")
    doc = json.loads(geo.geometry_json(curve.spec, 2.0))
    assert set(doc) == {"kind", "a1", "a2", "A1", "A2", "phi0", "phi1", "R"}
    assert doc["kind"] == "large"
    assert doc["a1"] == 1.0 and doc["a2"] == 0.5
    assert doc["A1"] == 1.3 and doc["A2"] == 0.6
    assert doc["R"] == 2.0
    assert doc["phi0"] == pytest.approx(9 * math.pi / 10)
