import numpy as np
import pytest
from scipy import stats

from graphpredict.errors import (
    ConfigError,
    ConnectivityError,
    ValidationError,
)
from graphpredict.reduce import (
    isomap,
    mds_classical,
    spectral_embedding,
    spectral_from_affinity,
    symmetric_eigen,
    tsne,
    validate_distance_matrix,
)
from graphpredict.reduce.isomap import knn_edges, pairwise_euclidean
from graphpredict.reduce.tsne import joint_probabilities

from conftest import procrustes_rmse


# -- eigensolver --------------------------------------------------------------

def test_eigen_identity():
    w, V = symmetric_eigen(np.eye(5))
    assert np.allclose(w, 1.0)
    assert np.allclose(V @ V.T, np.eye(5), atol=1e-12)


def test_eigen_diagonal_sorted_descending():
    w, V = symmetric_eigen(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(w, [3.0, 2.0, 1.0])
    # eigenvectors are signed permutation columns
    assert np.allclose(np.abs(V), np.eye(3)[:, [1, 2, 0]], atol=1e-12)


def test_eigen_reconstruction():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(8, 8))
    A = (A + A.T) / 2
    w, V = symmetric_eigen(A)
    assert np.allclose(V @ np.diag(w) @ V.T, A, atol=1e-10)
    assert np.allclose(V.T @ V, np.eye(8), atol=1e-10)
    assert np.all(np.diff(w) <= 1e-12)


def test_eigen_rejects_asymmetric():
    A = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValidationError):
        symmetric_eigen(A)


# -- classical MDS ------------------------------------------------------------

def test_mds_recovers_planted_points():
    rng = np.random.default_rng(1)
    P = rng.normal(size=(25, 2)) * 3.0
    D = pairwise_euclidean(P)
    red = mds_classical(D)
    _, Y = red.points()
    assert procrustes_rmse(P, Y) < 1e-6
    assert red.diagnostics["positive_eigenmass_fraction"] == pytest.approx(
        1.0, abs=1e-9)


def test_mds_345_triangle():
    D = np.array([[0.0, 3.0, 5.0], [3.0, 0.0, 4.0], [5.0, 4.0, 0.0]])
    _, Y = mds_classical(D).points()
    got = pairwise_euclidean(Y)
    assert np.allclose(got, D, atol=1e-9)


def test_mds_all_zero_distances():
    _, Y = mds_classical(np.zeros((4, 4))).points()
    assert np.allclose(Y, 0.0)


def test_mds_translation_invariant_input():
    rng = np.random.default_rng(2)
    P = rng.normal(size=(10, 2))
    D = pairwise_euclidean(P)
    D2 = pairwise_euclidean(P + 100.0)
    _, Y1 = mds_classical(D).points()
    _, Y2 = mds_classical(D2).points()
    assert procrustes_rmse(Y1, Y2) < 1e-8


def test_mds_input_validation():
    with pytest.raises(ValidationError):
        mds_classical(np.zeros((2, 2)))          # n < 3
    bad = np.ones((3, 3)) - np.eye(3)
    bad[0, 1] = 2.0                              # asymmetric
    with pytest.raises(ValidationError):
        validate_distance_matrix(bad)
    with pytest.raises(ValidationError):
        validate_distance_matrix(np.eye(3))      # nonzero diagonal


def test_mds_ids_carried_through():
    D = pairwise_euclidean(np.random.default_rng(3).normal(size=(5, 2)))
    red = mds_classical(D, ids=[10, 20, 30, 40, 50])
    assert sorted(red.coordinates) == [10, 20, 30, 40, 50]


# -- isomap -------------------------------------------------------------------

def test_isomap_unrolls_line():
    """Collinear points keep their order along the first coordinate."""
    t = np.linspace(0, 1, 20)
    X = np.stack([t, 2 * t, -t], axis=1)
    red = isomap((list(range(20)), X), k_neighbors=2)
    _, Y = red.points()
    rho, _ = stats.spearmanr(t, Y[:, 0])
    assert abs(rho) == pytest.approx(1.0)


def test_isomap_complete_graph_equals_mds():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(12, 5))
    red_iso = isomap((list(range(12)), X), k_neighbors=11)
    red_mds = mds_classical(pairwise_euclidean(X))
    _, Yi = red_iso.points()
    _, Ym = red_mds.points()
    assert np.allclose(Yi, Ym, atol=1e-9)


def test_isomap_disconnection_is_error():
    X = np.vstack([np.random.default_rng(5).normal(size=(6, 2)),
                   np.random.default_rng(6).normal(size=(6, 2)) + 1e6])
    with pytest.raises(ConnectivityError) as exc:
        isomap((list(range(12)), X), k_neighbors=2)
    assert exc.value.component_sizes == [6, 6]


def test_isomap_parameter_validation():
    X = np.random.default_rng(7).normal(size=(5, 2))
    with pytest.raises(ConfigError):
        isomap((list(range(5)), X), k_neighbors=0)
    with pytest.raises(ConfigError):
        isomap((list(range(5)), X), k_neighbors=5)


def test_knn_edges_symmetrized():
    D = pairwise_euclidean(np.array([[0.0], [1.0], [10.0]]))
    A = knn_edges(D, 1)
    assert np.array_equal(A, A.T)
    assert A[2, 1] and A[1, 2]      # union symmetrization keeps 2's pick


# -- spectral -----------------------------------------------------------------

def two_cliques_affinity():
    n = 20
    A = np.zeros((n, n))
    for base in (0, 10):
        for i in range(10):
            for j in range(10):
                if i != j:
                    A[base + i, base + j] = 1.0
    A[9, 10] = A[10, 9] = 1.0
    return A


def test_spectral_splits_cliques():
    red = spectral_from_affinity(two_cliques_affinity())
    _, Y = red.points()
    signs = np.sign(Y[:, 0])
    left, right = signs[:10], signs[10:]
    misplaced = min(np.sum(left != left_mode) + np.sum(right == left_mode)
                    for left_mode in (-1.0, 1.0))
    assert misplaced <= 1
    lam = red.diagnostics["laplacian_eigenvalues_smallest"]
    assert abs(lam[0]) < 1e-8
    assert lam[1] > 0


def test_spectral_eigenvector_orthonormality():
    A = two_cliques_affinity()
    n = A.shape[0]
    d = A.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(d)
    L = np.eye(n) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    w, V = symmetric_eigen(L)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-8)
    assert np.allclose(V @ np.diag(w) @ V.T, L, atol=1e-8)


def test_spectral_knn_pipeline_runs():
    rng = np.random.default_rng(8)
    X = np.vstack([rng.normal(size=(10, 3)), rng.normal(size=(10, 3)) + 8.0])
    # k large enough to keep the two blobs connected
    red = spectral_embedding((list(range(20)), X), k_neighbors=12)
    _, Y = red.points()
    assert Y.shape == (20, 2)
    assert np.all(np.isfinite(Y))


def test_spectral_disconnected_rejected():
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = 1.0
    A[2, 3] = A[3, 2] = 1.0
    with pytest.raises(ConnectivityError):
        spectral_from_affinity(A)


# -- t-SNE --------------------------------------------------------------------

def test_tsne_kl_descends():
    rng = np.random.default_rng(42)
    X = rng.normal(size=(30, 10))
    red = tsne((list(range(30)), X), iterations=500, seed=42)
    d = red.diagnostics
    assert d["kl_final"] < d["kl_initial"]
    assert d["bisection_converged"]
    assert d["bisection_failures"] == 0


def test_tsne_perplexity_preconditions():
    X = np.random.default_rng(0).normal(size=(10, 3))
    with pytest.raises(ConfigError):
        tsne((list(range(10)), X), perplexity=4.0)     # > (n-1)/3
    with pytest.raises(ConfigError):
        tsne((list(range(10)), X), perplexity=0.5)     # < 1
    with pytest.raises(ConfigError):
        tsne((list(range(4)), X[:4]))                   # n < 5


def test_tsne_deterministic():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(15, 6))
    r1 = tsne((list(range(15)), X), iterations=100, seed=9)
    r2 = tsne((list(range(15)), X), iterations=100, seed=9)
    assert r1.coordinates == r2.coordinates


def test_tsne_duplicates_stay_mutual_neighbors():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(14, 5))
    X[7] = X[3]                                  # exact duplicate pair
    red = tsne((list(range(14)), X), iterations=400, seed=0)
    _, Y = red.points()
    D = pairwise_euclidean(Y)
    np.fill_diagonal(D, np.inf)
    assert np.argmin(D[3]) == 7
    assert np.argmin(D[7]) == 3


def test_joint_probabilities_contract():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 4))
    P, flags = joint_probabilities(X, perplexity=5.0)
    assert flags.all()
    assert P.sum() == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(P, P.T)
    assert np.all(P > 0)
