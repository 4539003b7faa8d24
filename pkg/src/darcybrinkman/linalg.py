"""Sparse symmetric storage, CG kernels, Schur-complement driver, inf-sup estimation.

All solvers here are deterministic: fixed iteration order, zero (or caller
supplied) starting vectors, no threading.  Repeated calls on identical inputs
return bit-identical results, which the report layer relies on.

Sign convention of ``schur_solve``: it solves the symmetric saddle system

    A v + B' p = f
    B v       = h

by outer CG on the Schur complement S = B A^{-1} B' (SPD when A is SPD and B
has full row rank), i.e. S p = B A^{-1} f - h, then back-substitution for v.
Callers whose weak form carries the opposite pressure sign (A v - B' p = f)
negate p on the way out.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class NonConvergence(RuntimeError):
    """Iteration cap reached before the requested tolerance."""

    def __init__(self, what: str, iterations: int, residual: float):
        super().__init__(f"{what}: no convergence after {iterations} iterations "
                         f"(residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class SingularSystem(RuntimeError):
    """Operator detected semidefinite/singular within tolerance."""


class SparseSym:
    """Sparse symmetric matrix stored once per unordered index pair.

    Entries are kept as coalesced COO triplets with row <= col, so symmetry is
    structural: there is no way to represent an unsymmetric matrix.  The full
    CSR expansion used for matvecs is built lazily and cached.
    """

    __slots__ = ("n", "rows", "cols", "vals", "_csr")

    def __init__(self, n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        self.n = int(n)
        self.rows = rows
        self.cols = cols
        self.vals = vals
        self._csr = None

    @classmethod
    def from_triplets(cls, n, rows, cols, vals) -> "SparseSym":
        """Build from (row, col, value) triplets.

        Triplets may address either triangle and may repeat; duplicates are
        summed.  Non-finite values are rejected.
        """
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or cols.min() < 0
                          or rows.max() >= n or cols.max() >= n):
            raise ValueError("triplet index out of range")
        if not np.all(np.isfinite(vals)):
            raise ValueError("non-finite value in triplets")
        lo = np.minimum(rows, cols)
        hi = np.maximum(rows, cols)
        key = lo * n + hi
        order = np.argsort(key, kind="stable")
        key = key[order]
        v = vals[order]
        uniq, start = np.unique(key, return_index=True)
        sums = np.add.reduceat(v, start) if v.size else v
        return cls(n, (uniq // n).astype(np.int64), (uniq % n).astype(np.int64), sums)

    @classmethod
    def zeros(cls, n: int) -> "SparseSym":
        e = np.empty(0)
        return cls(n, e.astype(np.int64), e.astype(np.int64), e)

    @classmethod
    def diagonal(cls, d) -> "SparseSym":
        d = np.asarray(d, dtype=np.float64)
        idx = np.arange(d.size, dtype=np.int64)
        return cls.from_triplets(d.size, idx, idx, d)

    @property
    def nnz(self) -> int:
        return self.vals.size

    def to_csr(self) -> sp.csr_matrix:
        if self._csr is None:
            off = self.rows != self.cols
            r = np.concatenate([self.rows, self.cols[off]])
            c = np.concatenate([self.cols, self.rows[off]])
            v = np.concatenate([self.vals, self.vals[off]])
            self._csr = sp.csr_matrix((v, (r, c)), shape=(self.n, self.n))
        return self._csr

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.to_csr() @ x

    def quad(self, w: np.ndarray) -> float:
        """Quadratic form w' M w."""
        return float(w @ self.matvec(w))

    def diag(self) -> np.ndarray:
        d = np.zeros(self.n)
        on = self.rows == self.cols
        d[self.rows[on]] = self.vals[on]
        return d

    def toarray(self) -> np.ndarray:
        return self.to_csr().toarray()

    def scaled(self, c: float) -> "SparseSym":
        return SparseSym(self.n, self.rows, self.cols, c * self.vals)

    def resized(self, n: int) -> "SparseSym":
        """Same entries viewed in a larger (or equal) dimension."""
        if self.rows.size and max(self.rows.max(), self.cols.max()) >= n:
            raise ValueError("cannot shrink below occupied indices")
        return SparseSym(n, self.rows, self.cols, self.vals)

    def __add__(self, other: "SparseSym") -> "SparseSym":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return SparseSym.from_triplets(
            self.n,
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.cols, other.cols]),
            np.concatenate([self.vals, other.vals]),
        )


def sparse_sum(n: int, terms) -> SparseSym:
    """Sum an iterable of SparseSym terms into one matrix of dimension n."""
    rows, cols, vals = [], [], []
    for t in terms:
        rows.append(t.rows)
        cols.append(t.cols)
        vals.append(t.vals)
    if not rows:
        return SparseSym.zeros(n)
    return SparseSym.from_triplets(
        n, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def _as_operator(M):
    if isinstance(M, SparseSym):
        csr = M.to_csr()
        return lambda x: csr @ x
    if sp.issparse(M):
        csr = M.tocsr()
        return lambda x: csr @ x
    if callable(M):
        return M
    M = np.asarray(M)
    return lambda x: M @ x


def cg_solve(M, rhs, tol: float = 1e-12, cap: int | None = None,
             x0=None, callback=None) -> np.ndarray:
    """Conjugate gradients for an SPD operator.

    Stops when ||rhs - M x|| <= tol * ||rhs|| (absolute tol if rhs == 0).
    ``callback(k, x, rnorm)``, when given, observes every accepted iterate.
    Raises NonConvergence at the cap and SingularSystem on nonpositive
    curvature (M not SPD within roundoff).
    """
    apply_M = _as_operator(M)
    b = np.asarray(rhs, dtype=np.float64)
    n = b.size
    if tol <= 0:
        raise ValueError("tol must be positive")
    if cap is None:
        cap = max(10 * n, 50)
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - apply_M(x) if x.any() else b.copy()
    bnorm = np.linalg.norm(b)
    target = tol * bnorm if bnorm > 0 else tol
    rnorm = np.linalg.norm(r)
    if callback is not None:
        callback(0, x.copy(), rnorm)
    if rnorm <= target:
        return x
    p = r.copy()
    rs = float(r @ r)
    for k in range(1, cap + 1):
        Mp = apply_M(p)
        curv = float(p @ Mp)
        if not np.isfinite(curv):
            raise SingularSystem("cg: non-finite curvature")
        if curv <= 0.0:
            raise SingularSystem(
                f"cg: nonpositive curvature {curv:.3e} at iteration {k}")
        alpha = rs / curv
        x += alpha * p
        r -= alpha * Mp
        rnorm = np.linalg.norm(r)
        if callback is not None:
            callback(k, x.copy(), rnorm)
        if rnorm <= target:
            return x
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NonConvergence("cg", cap, rnorm / max(bnorm, 1.0))


@dataclass
class SchurStats:
    """Iteration diagnostics of one saddle solve."""
    outer_iterations: int = 0
    inner_applications: int = 0
    outer_residual: float = 0.0


def _factorized_spd(A: SparseSym):
    """Direct solver for A with one step of iterative refinement per apply.

    The refinement step keeps the apply-residual at roundoff level even for
    badly scaled A (small-epsilon viscous blocks), which the outer CG needs.
    """
    csr = A.to_csr()
    lu = spla.splu(csr.tocsc(), permc_spec="MMD_AT_PLUS_A")

    def solve(b):
        x = lu.solve(b)
        x += lu.solve(b - csr @ x)
        return x

    return solve


def schur_solve(A: SparseSym, B, f, h, *,
                inner_tol: float = 1e-13, outer_tol: float = 1e-12,
                inner_cap: int | None = None, outer_cap: int | None = None,
                inner: str = "direct", p0=None, refine: int = 0,
                stats: SchurStats | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Solve A v + B' p = f, B v = h with A SPD and B of full row rank.

    Outer CG runs on S p = B A^{-1} f - h.  The inner A-solve is either a
    sparse direct factorization ("direct", default) or nested CG at
    ``inner_tol`` ("cg").  ``refine`` extra passes re-solve for the full KKT
    residual, pushing the solution error toward roundoff (used where scheme
    exactness is asserted).  Raises NonConvergence past the caps and
    SingularSystem when the Schur operator shows nonpositive curvature.
    """
    f = np.asarray(f, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    n = A.n
    Bc = sp.csr_matrix(B) if not sp.issparse(B) else B.tocsr()
    m = Bc.shape[0]
    if Bc.shape[1] != n or f.size != n or h.size != m:
        raise ValueError("dimension mismatch between A, B, f, h")
    if stats is None:
        stats = SchurStats()

    if inner == "direct":
        apply_Ainv = _factorized_spd(A)
    elif inner == "cg":
        cap = inner_cap if inner_cap is not None else max(10 * n, 50)

        def apply_Ainv(b):
            return cg_solve(A, b, tol=inner_tol, cap=cap)
    else:
        raise ValueError(f"unknown inner solver '{inner}'")

    def count_Ainv(b):
        stats.inner_applications += 1
        return apply_Ainv(b)

    if m == 0:
        v = count_Ainv(f)
        return v, np.zeros(0)

    Bt = Bc.T.tocsr()

    def apply_S(q):
        return Bc @ count_Ainv(Bt @ q)

    rhs_s = Bc @ count_Ainv(f) - h
    cap_out = outer_cap if outer_cap is not None else max(5 * m, 50)

    def on_iter(k, _p, rnorm):
        stats.outer_iterations = k
        stats.outer_residual = rnorm

    def solve_pair(fv, hv, start=None):
        rhs = Bc @ count_Ainv(fv) - hv
        try:
            q = cg_solve(apply_S, rhs, tol=outer_tol, cap=cap_out, x0=start,
                         callback=on_iter)
        except NonConvergence as e:
            raise NonConvergence("schur", e.iterations, e.residual) from e
        except SingularSystem as e:
            raise SingularSystem(f"schur complement not definite: {e}") from e
        u = count_Ainv(fv - Bt @ q)
        # extra Ainv pass scrubs the momentum residual after the CG stop
        u += count_Ainv(fv - Bt @ q - A.matvec(u))
        return u, q

    v, p = solve_pair(f, h, start=p0)
    for _ in range(refine):
        dv, dp = solve_pair(f - A.matvec(v) - Bt @ p, h - Bc @ v)
        v += dv
        p += dp
    return v, p


@dataclass
class InfSupReport:
    """Numerically estimated inf-sup (LBB) constant of a constraint block."""
    problem: str
    resolution: int
    constant: float
    eigenvalue: float
    power_iterations: int
    converged: bool = True
    notes: str = ""


def estimate_inf_sup(sys, gram: SparseSym, *, tag: str = "", resolution: int = 0,
                     tol: float = 1e-8, cap: int = 500, seed: int = 0) -> InfSupReport:
    """Smallest generalized singular value of B w.r.t. the velocity Gram matrix.

    Computes sqrt(lambda_min) of  B G^{-1} B' q = lambda M_p q  by inverse
    power iteration on the pencil; M_p is the (diagonal) pressure mass carried
    by the saddle system.  The Rayleigh quotient is declared converged when
    its relative change drops below ``tol``.
    """
    Bc = sys.B.tocsr()
    mp = np.asarray(sys.pressure_mass, dtype=np.float64)
    m = Bc.shape[0]
    if gram.n != Bc.shape[1]:
        raise ValueError("gram dimension does not match B columns")
    solve_G = _factorized_spd(gram)
    Bt = Bc.T.tocsr()

    def apply_S(q):
        return Bc @ solve_G(Bt @ q)

    rng = np.random.default_rng(seed)
    q = rng.standard_normal(m)
    q /= np.sqrt(q @ (mp * q))
    lam = float(q @ apply_S(q))
    iterations = 0
    for k in range(1, cap + 1):
        iterations = k
        y = cg_solve(apply_S, mp * q, tol=1e-10, cap=max(10 * m, 200))
        q = y / np.sqrt(y @ (mp * y))
        lam_new = float(q @ apply_S(q)) / float(q @ (mp * q))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            lam = lam_new
            break
        lam = lam_new
    else:
        raise NonConvergence("inverse power iteration", cap, abs(lam))
    return InfSupReport(problem=tag, resolution=resolution,
                        constant=float(np.sqrt(max(lam, 0.0))),
                        eigenvalue=lam, power_iterations=iterations)


def dense_inf_sup(sys, gram: SparseSym) -> float:
    """Dense eigensolve oracle for the inf-sup constant (small systems only)."""
    import scipy.linalg as la

    Bd = sys.B.toarray()
    Gd = gram.toarray()
    S = Bd @ la.solve(Gd, Bd.T, assume_a="pos")
    S = 0.5 * (S + S.T)
    Mp = np.diag(np.asarray(sys.pressure_mass, dtype=np.float64))
    w = la.eigh(S, Mp, eigvals_only=True)
    return float(np.sqrt(max(w[0], 0.0)))
