"""P1 finite elements on the truncated domain.

Assembles the real stiffness and mass matrices with exact element
integrals, eliminates the obstacle-boundary (Dirichlet) degrees of
freedom, and builds the trace coupling between volume hat functions and
the boundary P1 space on the truncation circle. The boundary space reuses
the mesh's circle nodes, ordered by angle, so the coupling is conforming.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix

from .mesh import Mesh, TAG_GAMMA_D, TAG_GAMMA_TR


class FemError(RuntimeError):
    pass


@dataclass
class AssembledFem:
    """Galerkin matrices on the retained (non-Dirichlet) dofs.

    K and M are the raw stiffness/mass on all mesh nodes; A_k = K - k^2 M
    restricted to retained dofs, stored complex for the coupled pencil.
    dof_of_node is -1 on eliminated nodes; gamma_tr_dofs lists the
    truncation-circle dofs ordered by angle.
    """
    K: csr_matrix
    M: csr_matrix
    A_k: csr_matrix
    M_dof: csr_matrix
    dof_of_node: np.ndarray
    node_of_dof: np.ndarray
    gamma_tr_dofs: np.ndarray
    gamma_tr_nodes: np.ndarray
    k: float
    mesh: Mesh


def _element_matrices(mesh: Mesh):
    """Exact P1 element stiffness and mass contributions, vectorized."""
    t = mesh.triangles
    p = mesh.nodes[t]
    x, y = p[..., 0], p[..., 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    area2 = x[:, 0] * b[:, 0] + x[:, 1] * b[:, 1] + x[:, 2] * b[:, 2]
    if np.any(area2 <= 0):
        raise FemError("mesh has non-positively-oriented triangles")
    area = 0.5 * area2
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) \
        / (4.0 * area)[:, None, None]
    mass_ref = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    me = area[:, None, None] * mass_ref[None, :, :]
    return ke, me


def _assemble_pattern(mesh: Mesh, ke, me):
    t = mesh.triangles
    n = mesh.n_nodes
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    K = coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    M = coo_matrix((me.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return K, M


def assemble_fem(mesh: Mesh, k: float) -> AssembledFem:
    """Stiffness/mass assembly with Gamma_D elimination at wavenumber k."""
    if k <= 0:
        raise FemError("wavenumber must be positive")
    ke, me = _element_matrices(mesh)
    K, M = _assemble_pattern(mesh, ke, me)

    dirichlet_nodes = mesh.nodes_with_tag(TAG_GAMMA_D)
    keep = np.ones(mesh.n_nodes, dtype=bool)
    keep[dirichlet_nodes] = False
    node_of_dof = np.nonzero(keep)[0]
    if node_of_dof.size == 0:
        raise FemError("empty dof set after Dirichlet elimination")
    dof_of_node = -np.ones(mesh.n_nodes, dtype=np.int64)
    dof_of_node[node_of_dof] = np.arange(node_of_dof.size)

    K_dof = K[node_of_dof][:, node_of_dof].tocsr()
    M_dof = M[node_of_dof][:, node_of_dof].tocsr()
    A_k = (K_dof - (k * k) * M_dof).astype(np.complex128)

    if np.any(mesh.boundary_tags == TAG_GAMMA_TR):
        tr_nodes = gamma_tr_nodes_in_order(mesh)
        tr_dofs = dof_of_node[tr_nodes]
        if np.any(tr_dofs < 0):
            raise FemError("truncation-circle node was eliminated as Dirichlet")
    else:
        # interior problem (oracle meshes): every boundary is Dirichlet
        tr_nodes = np.empty(0, dtype=np.int64)
        tr_dofs = np.empty(0, dtype=np.int64)
    return AssembledFem(K=K, M=M, A_k=A_k, M_dof=M_dof,
                        dof_of_node=dof_of_node, node_of_dof=node_of_dof,
                        gamma_tr_dofs=tr_dofs, gamma_tr_nodes=tr_nodes,
                        k=k, mesh=mesh)


def gamma_tr_nodes_in_order(mesh: Mesh) -> np.ndarray:
    """Circle-boundary node ids sorted by polar angle in [0, 2pi)."""
    ids = mesh.nodes_with_tag(TAG_GAMMA_TR)
    if ids.size == 0:
        raise FemError("mesh has no truncation boundary")
    theta = np.mod(np.arctan2(mesh.nodes[ids, 1], mesh.nodes[ids, 0]),
                   2.0 * np.pi)
    return ids[np.argsort(theta)]


def boundary_edge_lengths(mesh: Mesh, tr_nodes: np.ndarray) -> np.ndarray:
    """Length of each boundary panel between consecutive circle nodes."""
    p = mesh.nodes[tr_nodes]
    nxt = np.roll(p, -1, axis=0)
    return np.hypot(*(nxt - p).T)


def assemble_trace(fem: AssembledFem) -> csr_matrix:
    """Boundary mass coupling <gamma_0 v_j, psi_i> on the circle.

    Rows follow the boundary P1 basis (one hat per circle node, ordered by
    angle); columns follow the retained volume dofs. Exact 1-D P1 products
    on each panel: diagonal L/3 from each side, off-diagonal L/6.
    """
    tr_nodes = fem.gamma_tr_nodes
    nb = tr_nodes.size
    ell = boundary_edge_lengths(fem.mesh, tr_nodes)
    i_idx, j_idx, vals = [], [], []
    for shift_i, shift_j, weight in (
            (0, 0, 1.0 / 3.0), (1, 1, 1.0 / 3.0),
            (0, 1, 1.0 / 6.0), (1, 0, 1.0 / 6.0)):
        i_idx.append((np.arange(nb) + shift_i) % nb)
        j_idx.append((np.arange(nb) + shift_j) % nb)
        vals.append(weight * ell)
    rows = np.concatenate(i_idx)
    cols_boundary = np.concatenate(j_idx)
    cols = fem.gamma_tr_dofs[cols_boundary]
    data = np.concatenate(vals)
    n_dof = fem.node_of_dof.size
    return coo_matrix((data, (rows, cols)), shape=(nb, n_dof)).tocsr()


def export_matrix(path: str, mat) -> None:
    """Coordinate text dump (row col re im) for debugging."""
    m = coo_matrix(mat)
    with open(path, "w", newline="\n") as f:
        f.write(f"% {m.shape[0]} {m.shape[1]} {m.nnz}\n")
        for r, c, v in zip(m.row, m.col, m.data):
            v = complex(v)
            f.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
