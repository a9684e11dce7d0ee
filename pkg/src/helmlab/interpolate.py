"""Point location and P1 interpolation on triangle meshes.

Bucket-grid locator: triangles are binned by bounding box into a uniform
grid sized by the typical edge length, queries resolve barycentric
coordinates against the candidates of their cell.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh


class P1Interpolator:
    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        self.nodes = mesh.nodes
        self.tris = mesh.triangles
        p = self.nodes[self.tris]
        self.tri_min = p.min(axis=1)
        self.tri_max = p.max(axis=1)
        self.lo = self.nodes.min(axis=0)
        hi = self.nodes.max(axis=0)
        cell = max(mesh.h_max, 1e-12)
        self.cell = cell
        self.shape = np.maximum(((hi - self.lo) / cell).astype(int) + 1, 1)
        buckets: dict[tuple, list] = {}
        ij_min = ((self.tri_min - self.lo) / cell).astype(int)
        ij_max = ((self.tri_max - self.lo) / cell).astype(int)
        for t in range(len(self.tris)):
            for i in range(ij_min[t, 0], ij_max[t, 0] + 1):
                for j in range(ij_min[t, 1], ij_max[t, 1] + 1):
                    buckets.setdefault((i, j), []).append(t)
        self.buckets = {key: np.array(val) for key, val in buckets.items()}

    def locate(self, pts: np.ndarray):
        """Triangle index (-1 outside) and barycentric coords per point."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        npts = len(pts)
        tri_idx = -np.ones(npts, dtype=np.int64)
        bary = np.zeros((npts, 3))
        cells = ((pts - self.lo) / self.cell).astype(int)
        order = np.lexsort((cells[:, 1], cells[:, 0]))
        sorted_cells = cells[order]
        boundaries = np.nonzero(np.any(np.diff(sorted_cells, axis=0) != 0,
                                       axis=1))[0] + 1
        groups = np.split(order, boundaries)
        for grp in groups:
            key = (int(cells[grp[0], 0]), int(cells[grp[0], 1]))
            cand = self.buckets.get(key)
            if cand is None:
                continue
            p = pts[grp]
            remaining = np.arange(len(grp))
            for t in cand:
                if remaining.size == 0:
                    break
                a, b, c = self.nodes[self.tris[t]]
                det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
                q = p[remaining]
                l1 = ((q[:, 0] - a[0]) * (c[1] - a[1])
                      - (c[0] - a[0]) * (q[:, 1] - a[1])) / det
                l2 = ((b[0] - a[0]) * (q[:, 1] - a[1])
                      - (q[:, 0] - a[0]) * (b[1] - a[1])) / det
                l0 = 1.0 - l1 - l2
                tol = -1e-11
                hit = (l0 >= tol) & (l1 >= tol) & (l2 >= tol)
                if np.any(hit):
                    rows = grp[remaining[hit]]
                    tri_idx[rows] = t
                    bary[rows, 0] = l0[hit]
                    bary[rows, 1] = l1[hit]
                    bary[rows, 2] = l2[hit]
                    remaining = remaining[~hit]
        return tri_idx, bary

    def interpolate(self, node_values: np.ndarray, pts: np.ndarray,
                    fill=np.nan):
        """P1 interpolation of nodal data; fill outside the mesh."""
        tri_idx, bary = self.locate(pts)
        out = np.full(len(np.atleast_2d(pts)), fill, dtype=node_values.dtype)
        inside = tri_idx >= 0
        vert_vals = node_values[self.tris[tri_idx[inside]]]
        out[inside] = np.sum(vert_vals * bary[inside], axis=1)
        return out
