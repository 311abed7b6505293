import numpy as np
import pytest

from nast.symeig import symmetric_eigh, tridiag_eigenvalues, tridiagonalize


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return A + A.T


def test_tridiagonal_form_preserves_spectrum():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 25))
        A = random_symmetric(rng, n)
        d, e, _ = tridiagonalize(A)
        T = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
        got = np.sort(np.linalg.eigvalsh(T))
        want = np.sort(np.linalg.eigvalsh(A))
        assert np.allclose(got, want, atol=1e-10 * max(1.0, np.abs(want).max()))


def test_ql_eigenvalues_match_lapack():
    rng = np.random.default_rng(1)
    for _ in range(30):
        n = int(rng.integers(1, 40))
        A = random_symmetric(rng, n)
        d, e, _ = tridiagonalize(A)
        vals = np.sort(tridiag_eigenvalues(d, e))
        want = np.sort(np.linalg.eigvalsh(A))
        assert np.allclose(vals, want, atol=1e-10 * max(1.0, np.abs(want).max()))


def test_full_decomposition_reconstructs():
    rng = np.random.default_rng(2)
    A = random_symmetric(rng, 20)
    vals, vecs = symmetric_eigh(A)
    recon = (vecs * vals) @ vecs.T
    assert np.linalg.norm(A - recon) <= 1e-8 * np.linalg.norm(A)


def test_partial_decomposition_accuracy():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 40))
        k = int(rng.integers(1, n + 1))
        A = random_symmetric(rng, n)
        vals, vecs = symmetric_eigh(A, k)
        fnorm = np.linalg.norm(A)
        assert np.all(np.diff(vals) <= 1e-12)  # descending
        resid = np.linalg.norm(A @ vecs - vecs * vals, axis=0)
        assert resid.max() <= 1e-8 * fnorm
        gram = vecs.T @ vecs
        assert np.abs(gram - np.eye(k)).max() <= 1e-8


def test_clustered_eigenvalues():
    # repeated eigenvalues force the cluster-orthogonalization path
    rng = np.random.default_rng(4)
    n = 24
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    vals = np.repeat([3.0, 1.0, -2.0], n // 3)
    A = (Q * vals) @ Q.T
    A = 0.5 * (A + A.T)
    got, vecs = symmetric_eigh(A, 10)
    assert np.allclose(got, np.sort(vals)[::-1][:10], atol=1e-9)
    resid = np.linalg.norm(A @ vecs - vecs * got, axis=0)
    assert resid.max() <= 1e-8 * np.linalg.norm(A)
    assert np.abs(vecs.T @ vecs - np.eye(10)).max() <= 1e-8


def test_zero_matrix():
    vals, vecs = symmetric_eigh(np.zeros((6, 6)), 6)
    assert np.array_equal(vals, np.zeros(6))
    assert np.abs(vecs.T @ vecs - np.eye(6)).max() <= 1e-12


def test_two_by_two_swap():
    vals, vecs = symmetric_eigh(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(vals, [1.0, -1.0])
    assert np.allclose(np.abs(vecs[:, 0]), 1 / np.sqrt(2))


def test_one_by_one():
    vals, vecs = symmetric_eigh(np.array([[4.5]]))
    assert vals[0] == 4.5
    assert vecs[0, 0] == 1.0


def test_deterministic():
    rng = np.random.default_rng(5)
    A = random_symmetric(rng, 30)
    v1, V1 = symmetric_eigh(A, 5)
    v2, V2 = symmetric_eigh(A, 5)
    assert np.array_equal(v1, v2)
    assert np.array_equal(V1, V2)


def test_bad_k_rejected():
    with pytest.raises(ValueError):
        symmetric_eigh(np.eye(3), 4)
    with pytest.raises(ValueError):
        symmetric_eigh(np.eye(3), 0)
