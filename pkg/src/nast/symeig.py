"""Dense symmetric eigensolver built from classical kernels.

Pipeline: Householder tridiagonalization (vectorized rank-2 updates),
implicit-shift QL iteration for all eigenvalues of the tridiagonal
matrix, and inverse iteration with partial-pivot LU solves for the
requested eigenvectors, orthogonalizing within clusters of close
eigenvalues.  The scalar-loop kernels are numba-compiled when numba is
importable and fall back to pure Python otherwise.

Deterministic: inverse-iteration start vectors come from a fixed
internal stream keyed by the problem size, never from user seeds.
"""

from __future__ import annotations

import numpy as np

from .rng import generator

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


__all__ = ["EigenConvergenceError", "tridiagonalize", "tridiag_eigenvalues", "symmetric_eigh"]

_EPS = float(np.finfo(np.float64).eps)
_QL_MAX_SWEEPS = 50
_INVIT_MAX_ITER = 5
_INVIT_RESTARTS = 3
_STREAM_TAG = 0x51E16E  # internal tag for inverse-iteration start vectors


class EigenConvergenceError(RuntimeError):
    """QL sweep cap exceeded or eigenvector refinement failed."""


@njit(cache=True)
def _tridiag_kernel(A):  # pragma: no cover - exercised via tridiagonalize
    """In-place Householder reduction; returns (d, e, V) like tridiagonalize."""
    n = A.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    V = np.zeros((n, max(n - 2, 0)))
    v = np.empty(n)
    w = np.empty(n)
    p = np.empty(n)
    for k in range(n - 2):
        alpha2 = 0.0
        for i in range(k + 1, n):
            alpha2 += A[i, k] * A[i, k]
        if alpha2 == 0.0:
            e[k] = 0.0
            continue
        alpha = alpha2 ** 0.5
        x0 = A[k + 1, k]
        if x0 > 0.0:
            alpha = -alpha
        e[k] = alpha
        v0 = x0 - alpha
        vnorm = (alpha2 - x0 * x0 + v0 * v0) ** 0.5
        if vnorm == 0.0:
            continue
        v[k + 1] = v0 / vnorm
        for i in range(k + 2, n):
            v[i] = A[i, k] / vnorm
        tau = 0.0
        for i in range(k + 1, n):
            s = 0.0
            for j in range(k + 1, n):
                s += A[i, j] * v[j]
            w[i] = s
            tau += v[i] * s
        for i in range(k + 1, n):
            p[i] = w[i] - tau * v[i]
        for i in range(k + 1, n):
            vi = v[i]
            pi = p[i]
            for j in range(k + 1, n):
                A[i, j] -= 2.0 * (vi * p[j] + pi * v[j])
        for i in range(k + 1, n):
            V[i, k] = v[i]
    for i in range(n):
        d[i] = A[i, i]
    if n >= 2:
        e[n - 2] = A[n - 1, n - 2]
    return d, e, V


def _tridiag_numpy(A: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized fallback used when numba is unavailable."""
    n = A.shape[0]
    d = np.empty(n)
    e = np.zeros(max(n - 1, 0))
    V = np.zeros((n, max(n - 2, 0)))
    for k in range(n - 2):
        x = A[k + 1 :, k]
        alpha = float(np.linalg.norm(x))
        if alpha == 0.0:
            e[k] = 0.0
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm = float(np.linalg.norm(v))
        e[k] = alpha
        if vnorm == 0.0:
            continue
        v /= vnorm
        B = A[k + 1 :, k + 1 :]
        w = B @ v
        tau = float(v @ w)
        p = w - tau * v
        B -= 2.0 * (np.outer(v, p) + np.outer(p, v))
        V[k + 1 :, k] = v
    if n >= 2:
        e[n - 2] = A[n - 1, n - 2]
    d[:] = np.diagonal(A)
    return d, e, V


def tridiagonalize(M: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce symmetric M to tridiagonal form by Householder reflections.

    Returns (d, e, V): diagonal, subdiagonal, and the unit reflector
    vectors stored columnwise (column k acts on rows k+1:).  The
    similarity transform is Q^T M Q with Q = H_0 H_1 ... H_{n-3}.
    """
    A = np.asarray(M, dtype=np.float64)
    A = 0.5 * (A + A.T)  # exact for symmetric input, guards stray asymmetry
    if _HAVE_NUMBA:
        return _tridiag_kernel(A)
    return _tridiag_numpy(A)


def _apply_q(V: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Back-transform tridiagonal eigenvectors: Z <- Q Z."""
    for k in range(V.shape[1] - 1, -1, -1):
        v = V[k + 1 :, k]
        if not v.any():
            continue
        Z[k + 1 :, :] -= 2.0 * np.outer(v, v @ Z[k + 1 :, :])
    return Z


@njit(cache=True)
def _ql_kernel(d, e):  # pragma: no cover - exercised via tridiag_eigenvalues
    """Implicit-shift QL on (d, e); d becomes the eigenvalues (unsorted).

    e has length n with e[n-1] = 0 and is destroyed.  Returns 0 on
    success, or l+1 if eigenvalue l failed to converge.
    """
    n = d.shape[0]
    eps = 2.220446049250313e-16
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > 50:
                return l + 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = (g * g + 1.0) ** 0.5
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = (f * f + g * g) ** 0.5
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return 0


@njit(cache=True)
def _gtlu_factor(dl, dd, du, du2, ipiv, safe):  # pragma: no cover
    """Partial-pivot LU of a tridiagonal matrix, LAPACK dgttrf layout.

    Pivots smaller than ``safe`` are bumped to keep the solves finite
    (the inverse-iteration shift sits essentially on an eigenvalue).
    """
    n = dd.shape[0]
    for i in range(n - 1):
        if abs(dd[i]) >= abs(dl[i]):
            ipiv[i] = 0
            if abs(dd[i]) < safe:
                dd[i] = safe if dd[i] >= 0.0 else -safe
            fact = dl[i] / dd[i]
            dl[i] = fact
            dd[i + 1] -= fact * du[i]
            if i < n - 2:
                du2[i] = 0.0
        else:
            ipiv[i] = 1
            fact = dd[i] / dl[i]
            dd[i] = dl[i]
            dl[i] = fact
            tmp = du[i]
            du[i] = dd[i + 1]
            dd[i + 1] = tmp - fact * dd[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
    if abs(dd[n - 1]) < safe:
        dd[n - 1] = safe if dd[n - 1] >= 0.0 else -safe


@njit(cache=True)
def _gtlu_solve(dl, dd, du, du2, ipiv, b):  # pragma: no cover
    """Solve L U x = b in place given the _gtlu_factor output."""
    n = dd.shape[0]
    for i in range(n - 1):
        if ipiv[i] == 0:
            b[i + 1] -= dl[i] * b[i]
        else:
            tmp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = tmp - dl[i] * b[i + 1]
    b[n - 1] /= dd[n - 1]
    if n >= 2:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i]


def tridiag_eigenvalues(d: np.ndarray, e: np.ndarray) -> np.ndarray:
    """All eigenvalues of the symmetric tridiagonal (d, e), unsorted."""
    n = d.size
    dw = d.astype(np.float64).copy()
    ew = np.zeros(n)
    ew[: n - 1] = e
    status = _ql_kernel(dw, ew)
    if status != 0:
        raise EigenConvergenceError(
            f"QL iteration exceeded {_QL_MAX_SWEEPS} sweeps at eigenvalue {status - 1}"
        )
    return dw


def _tridiag_residual(d: np.ndarray, e: np.ndarray, lam: float, x: np.ndarray) -> float:
    y = d * x - lam * x
    y[:-1] += e * x[1:]
    y[1:] += e * x[:-1]
    return float(np.linalg.norm(y))


def _inverse_iteration(
    d: np.ndarray, e: np.ndarray, lams: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Eigenvectors of the tridiagonal (d, e) for shifts ``lams`` (descending).

    Clusters of eigenvalues closer than 1e-3 * ||T|| are orthogonalized
    against each other, and coincident shifts are separated by a small
    perturbation, following the classical tinvit/dstein recipe.
    """
    n = d.size
    k = lams.size
    Z = np.empty((n, k))
    anorm = float(np.abs(d).max(initial=0.0))
    if n > 1:
        pad = np.zeros(n)
        pad[:-1] += np.abs(e)
        pad[1:] += np.abs(e)
        anorm = float(max(anorm, (np.abs(d) + pad).max()))
    if anorm == 0.0:
        Z[:] = np.eye(n)[:, :k]
        return Z
    ortol = 1e-3 * anorm
    pertol = 10.0 * _EPS * anorm
    safe = _EPS * anorm
    rtol = 1e-10 * anorm
    group_start = 0
    prev_shift = np.inf
    for j in range(k):
        lam = float(lams[j])
        if j > 0 and lams[j - 1] - lam > ortol:
            group_start = j
        shift = lam
        if prev_shift - shift < pertol:
            shift = prev_shift - pertol
        dl = np.empty(n)
        dl[: n - 1] = e
        dd = d - shift
        du = np.empty(n)
        du[: n - 1] = e
        du2 = np.zeros(n)
        ipiv = np.zeros(n, dtype=np.int64)
        _gtlu_factor(dl, dd, du, du2, ipiv, safe)
        best = None
        best_res = np.inf
        for attempt in range(_INVIT_RESTARTS):
            x = rng.standard_normal(n)
            x /= np.linalg.norm(x)
            for _ in range(_INVIT_MAX_ITER):
                _gtlu_solve(dl, dd, du, du2, ipiv, x)
                nrm = float(np.linalg.norm(x))
                if nrm == 0.0 or not np.isfinite(nrm):
                    break
                x /= nrm
                if group_start < j:
                    G = Z[:, group_start:j]
                    x -= G @ (G.T @ x)
                    nrm = float(np.linalg.norm(x))
                    if nrm < 1e-2:
                        break  # collapsed into the span; retry fresh
                    x /= nrm
                res = _tridiag_residual(d, e, lam, x)
                if res < best_res:
                    best_res = res
                    best = x.copy()
                if res <= rtol:
                    break
            if best_res <= rtol:
                break
        if best is None:  # pragma: no cover - defensive
            raise EigenConvergenceError(f"inverse iteration failed for eigenvalue {lam!r}")
        Z[:, j] = best
        prev_shift = shift
    return Z


def symmetric_eigh(M: np.ndarray, k: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Top-k algebraic eigenpairs of a symmetric matrix, descending.

    Returns (values, vectors) with orthonormal columns.  k defaults to
    the full spectrum.
    """
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix must be square")
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n == 1:
        return np.array([float(M[0, 0])]), np.ones((1, 1))
    d, e, V = tridiagonalize(M)
    vals = tridiag_eigenvalues(d, e)
    top = vals[np.argsort(vals)[::-1][:k]]
    rng = generator(_STREAM_TAG, n, k)
    Z = _inverse_iteration(d, e, top, rng)
    vecs = _apply_q(V, Z)
    # One modified Gram-Schmidt pass keeps clustered columns orthonormal
    # after the back-transform.
    for j in range(k):
        for i in range(j):
            vecs[:, j] -= (vecs[:, i] @ vecs[:, j]) * vecs[:, i]
        nrm = np.linalg.norm(vecs[:, j])
        if nrm > 0:
            vecs[:, j] /= nrm
    return top, vecs
