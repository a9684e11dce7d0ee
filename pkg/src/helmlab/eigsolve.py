"""Shift-invert eigensolver for the coupled FEM-BEM pencil.

The pencil is Atilde u = mu B u with B = blockdiag(M, 0); eigenvalues
nearest the origin are found by Arnoldi iteration on Atilde^{-1} B with
modified Gram-Schmidt (one re-orthogonalization pass) and Krylov-Schur
thick restarts. Desk-scale systems are factored dense; large systems go
through a sparse bordered LU (scipy SuperLU), which is the documented
sparse extension of the dense path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DEFAULT_SEED = 0x5EED
NU_FLOOR = 1e-12          # Ritz values below this are infinite-mu artifacts
DENSE_LIMIT = 2500        # total dimension below which the dense path is used


class EigsolveError(RuntimeError):
    pass


class SingularPencilError(EigsolveError):
    def __init__(self, k, detail=""):
        msg = f"coupled matrix numerically singular at k={k:.12g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.k = k


@dataclass
class CoupledSystem:
    """Blocks of the discretised coupled eigenproblem.

    Atilde = [[A, C12], [C21, C22]], B = [[M, 0], [0, 0]]. A and M are
    sparse on the FEM dofs; the C blocks couple to the auxiliary boundary
    unknowns (BEM density or Fourier trace coefficients).
    """
    A: sp.spmatrix
    C12: np.ndarray
    C21: np.ndarray
    C22: np.ndarray
    M: sp.spmatrix
    k: float
    backend: str = "bem"
    meta: dict = field(default_factory=dict)

    @property
    def n_fem(self) -> int:
        return self.A.shape[0]

    @property
    def n_aux(self) -> int:
        return self.C22.shape[0]

    @property
    def n_bem(self) -> int:
        return self.n_aux

    @property
    def n(self) -> int:
        return self.n_fem + self.n_aux

    def atilde_dense(self) -> np.ndarray:
        def dense(m):
            return np.asarray(m.todense() if sp.issparse(m) else m,
                              dtype=complex)

        a = dense(self.A)
        if self.n_aux == 0:
            return a
        top = np.hstack([a, dense(self.C12)])
        bot = np.hstack([dense(self.C21), dense(self.C22)])
        return np.vstack([top, bot]).astype(np.complex128)

    def atilde_sparse(self) -> sp.csc_matrix:
        if self.n_aux == 0:
            return sp.csc_matrix(self.A, dtype=np.complex128)
        return sp.bmat([[self.A, sp.csr_matrix(self.C12)],
                        [sp.csr_matrix(self.C21), sp.csr_matrix(self.C22)]],
                       format="csc", dtype=np.complex128)

    def b_matvec(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        out[:self.n_fem] = self.M @ v[:self.n_fem]
        return out

    def atilde_fro(self) -> float:
        def fro(m):
            if sp.issparse(m):
                return spla.norm(m, "fro")
            m = np.asarray(m)
            return np.linalg.norm(m, "fro") if m.size else 0.0

        return float(np.sqrt(fro(self.A) ** 2 + fro(self.C12) ** 2
                             + fro(self.C21) ** 2 + fro(self.C22) ** 2))

    def solver(self):
        """Callable b -> Atilde^{-1} b.

        Dense LU at desk scale; above it, sparse LU of the FEM block plus
        a dense Schur complement on the auxiliary block (the coupling rows
        would otherwise poison the sparse ordering with fill).
        """
        if self.n <= DENSE_LIMIT:
            fac = lu_factor(self.atilde_dense(), k=self.k)
            return fac.solve
        try:
            lu = spla.splu(sp.csc_matrix(self.A))
        except RuntimeError as exc:
            raise SingularPencilError(self.k, str(exc)) from exc
        if self.n_aux == 0:
            return lu.solve
        nf, na = self.n_fem, self.n_aux
        c12 = self.C12.tocsc() if sp.issparse(self.C12) else np.asarray(self.C12)
        schur = np.asarray(self.C22.todense() if sp.issparse(self.C22)
                           else self.C22, dtype=complex).copy()
        block = max(1, min(32, int(2e8 / max(nf, 1) / 16)))
        for lo in range(0, na, block):
            hi = min(lo + block, na)
            cols = c12[:, lo:hi]
            cols = np.asarray(cols.todense()) if sp.issparse(cols) else cols
            w = lu.solve(np.ascontiguousarray(cols, dtype=complex))
            schur[:, lo:hi] -= self.C21 @ w
        fac_s = lu_factor(schur, k=self.k)

        def solve(b):
            b = np.asarray(b, dtype=complex)
            t = lu.solve(b[:nf])
            y = fac_s.solve(b[nf:] - self.C21 @ t)
            x = t - lu.solve(c12 @ y)
            return np.concatenate([x, y])

        return solve


@dataclass
class EigenRecord:
    mu: complex
    vector: np.ndarray
    residual: float
    k: float
    converged: bool = True


@dataclass
class Factorization:
    """Row-pivoted dense LU with a reciprocal-condition estimate."""
    lu: np.ndarray
    piv: np.ndarray
    rcond: float
    k: float

    def solve(self, b):
        return sla.lu_solve((self.lu, self.piv), b)


def lu_factor(a: np.ndarray, k: float = float("nan")) -> Factorization:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] != a.shape[1]:
        raise EigsolveError("matrix must be square")
    if not np.all(np.isfinite(a)):
        raise EigsolveError("matrix has non-finite entries")
    anorm = np.linalg.norm(a, 1)
    lu, piv = sla.lu_factor(a)
    diag = np.abs(np.diag(lu))
    if np.any(diag < 1e-300):
        raise SingularPencilError(k, "zero pivot")
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond = float(gecon(lu, anorm, norm="1")[0]) if anorm > 0 else 0.0
    if rcond < 1e-15:
        raise SingularPencilError(k, f"rcond ~ {rcond:.1e}")
    return Factorization(lu=lu, piv=piv, rcond=rcond, k=k)


def eig_residual(rec: EigenRecord, sys: CoupledSystem) -> float:
    """|| Atilde u - mu B u ||_2 / (||Atilde||_F ||u||_2)."""
    u = rec.vector
    if sp.issparse(sys.A):
        au = np.empty(sys.n, dtype=complex)
        au[:sys.n_fem] = sys.A @ u[:sys.n_fem] + sys.C12 @ u[sys.n_fem:]
        au[sys.n_fem:] = sys.C21 @ u[:sys.n_fem] + sys.C22 @ u[sys.n_fem:]
    else:
        au = sys.atilde_dense() @ u
    r = au - rec.mu * sys.b_matvec(u)
    return float(np.linalg.norm(r) / (sys.atilde_fro() * np.linalg.norm(u)))


def _arnoldi_extend(op, V, H, start, m):
    """Extend an Arnoldi factorization from column start to m (MGS + reorth)."""
    for j in range(start, m):
        w = op(V[:, j])
        h = V[:, :j + 1].conj().T @ w
        w = w - V[:, :j + 1] @ h
        h2 = V[:, :j + 1].conj().T @ w
        w = w - V[:, :j + 1] @ h2
        h = h + h2
        H[:j + 1, j] = h
        beta = np.linalg.norm(w)
        H[j + 1, j] = beta
        if beta < 1e-14 * max(1.0, np.abs(H[:j + 1, j]).max()):
            return j + 1, True       # happy breakdown: invariant subspace
        V[:, j + 1] = w / beta
    return m, False


def shift_invert_arnoldi(sys: CoupledSystem, nev: int, tol: float = 1e-10,
                         seed: int = DEFAULT_SEED, max_iter: int = 300,
                         subspace: int | None = None) -> list[EigenRecord]:
    """Eigenvalues of the pencil nearest the origin.

    Runs Arnoldi on v -> Atilde^{-1} B v; the largest-|nu| Ritz values give
    mu = 1/nu. Thick (Krylov-Schur) restarts keep 2*nev vectors. Returned
    records carry the pencil residual; non-converged candidates are
    returned flagged if max_iter is exhausted.
    """
    if nev < 1:
        raise EigsolveError("nev must be >= 1")
    n = sys.n
    solve = sys.solver()
    op = lambda v: solve(sys.b_matvec(v))

    m = subspace or max(2 * nev + 12, 20)
    m = min(m, n)
    keep = min(2 * nev, m - 2) if m > 2 else 1

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v0 /= np.linalg.norm(v0)

    V = np.zeros((n, m + 1), dtype=complex)
    H = np.zeros((m + 1, m), dtype=complex)
    V[:, 0] = v0
    size, breakdown = _arnoldi_extend(op, V, H, 0, m)

    for _ in range(max_iter):
        Hs = H[:size, :size]
        beta = H[size, size - 1] if not breakdown else 0.0
        nu, Y = np.linalg.eig(Hs)
        order = np.argsort(-np.abs(nu))
        nu, Y = nu[order], Y[:, order]
        resid = np.abs(beta) * np.abs(Y[-1, :])
        good = resid <= tol * np.maximum(np.abs(nu), NU_FLOOR)
        wanted = np.abs(nu) > NU_FLOOR
        n_conv = 0
        for i in range(len(nu)):
            if not wanted[i]:
                continue
            if not good[i]:
                break
            n_conv += 1
        if n_conv >= nev or breakdown or size >= n:
            break

        # Krylov-Schur restart: reorder the Schur form, keep the leading block
        kk = min(keep, size - 1)
        absnu = np.sort(np.abs(np.linalg.eigvals(Hs)))[::-1]
        cut = absnu[kk - 1] if kk <= len(absnu) else absnu[-1]
        T, Z, sdim = sla.schur(Hs, output="complex",
                               sort=lambda z: abs(z) >= cut * (1 - 1e-12))
        p = max(min(sdim, keep), 1)
        Vnew = V[:, :size] @ Z[:, :p]
        spike = beta * Z[size - 1, :p]
        V[:, :p] = Vnew
        V[:, p] = V[:, size]
        H[:, :] = 0.0
        H[:p, :p] = T[:p, :p]
        H[p, :p] = spike
        size, breakdown = _arnoldi_extend(op, V, H, p, m)
    else:
        pass  # fall through with whatever converged

    Hs = H[:size, :size]
    beta = H[size, size - 1] if size <= m and not breakdown else 0.0
    nu, Y = np.linalg.eig(Hs)
    order = np.argsort(-np.abs(nu))
    nu, Y = nu[order], Y[:, order]
    resid = np.abs(beta) * np.abs(Y[-1, :])

    records = []
    fro = sys.atilde_fro()
    for i in range(len(nu)):
        if len(records) >= nev:
            break
        if np.abs(nu[i]) <= NU_FLOOR:
            continue            # infinite-mu direction from singular B
        u = V[:, :size] @ Y[:, i]
        u = _normalize_fem_part(u, sys)
        mu = 1.0 / nu[i]
        rec = EigenRecord(mu=mu, vector=u, residual=0.0, k=sys.k,
                          converged=bool(resid[i] <= tol * abs(nu[i])))
        rec.residual = eig_residual(rec, sys)
        records.append(rec)
    return records


def _normalize_fem_part(u: np.ndarray, sys: CoupledSystem) -> np.ndarray:
    uf = u[:sys.n_fem]
    nrm = np.sqrt(abs(np.vdot(uf, sys.M @ uf)))
    if nrm < 1e-300:
        return u
    u = u / nrm
    # fix the global phase: largest FEM entry real positive
    i = int(np.argmax(np.abs(u[:sys.n_fem])))
    phase = u[i] / abs(u[i])
    return u / phase


def dense_pencil_eigs(sys_or_pair, near: complex = 0.0, count: int | None = None):
    """Brute-force QZ oracle: all finite eigenvalues, sorted by |mu - near|."""
    if isinstance(sys_or_pair, CoupledSystem):
        a = sys_or_pair.atilde_dense()
        b = np.zeros_like(a)
        n_fem = sys_or_pair.n_fem
        b[:n_fem, :n_fem] = np.asarray(sys_or_pair.M.todense())
    else:
        a, b = sys_or_pair
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
    alpha, beta = sla.eig(a, b, right=False, homogeneous_eigvals=True)
    scale = float(np.max(np.abs(alpha) + np.abs(beta)))
    finite = np.abs(beta) > 1e-12 * scale
    mu = alpha[finite] / beta[finite]
    mu = mu[np.argsort(np.abs(mu - near))]
    return mu[:count] if count is not None else mu
