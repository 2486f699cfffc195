"""Simplex-constrained least squares: golden cases, random oracles, KKT."""

import numpy as np
import pytest

from dinaq import kkt_residuals, simplex_lsq

GOLDEN_T = np.array([
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0],
])


def _random_simplex(rng, n, size):
    return rng.dirichlet(np.ones(n), size=size)


def _best_random_value(m, beta, rng, n_points=1000):
    pts = _random_simplex(rng, m.shape[1], n_points)
    return np.linalg.norm(pts @ m.T - beta, axis=1).min()


# ---------------------------------------------------------------------------
# golden instances

def test_exact_fit_recovers_distribution():
    p = np.array([0.4, 0.25, 0.35])
    sol = simplex_lsq(GOLDEN_T, GOLDEN_T @ p)
    assert sol.status == "optimal"
    assert sol.residual <= 1e-12
    np.testing.assert_allclose(sol.x, p, atol=1e-10)


def test_identity_interior_projection():
    # projecting (2,2,2) onto the simplex lands at the barycenter
    sol = simplex_lsq(np.eye(3), np.full(3, 2.0))
    np.testing.assert_allclose(sol.x, np.full(3, 1 / 3), atol=1e-12)
    assert sol.residual == pytest.approx(5 / np.sqrt(3), abs=1e-12)


def test_identity_vertex_projection():
    # a target far beyond one vertex projects onto that vertex
    sol = simplex_lsq(np.eye(3), np.array([5.0, 0.0, 0.0]))
    np.testing.assert_allclose(sol.x, [1.0, 0.0, 0.0], atol=1e-12)
    assert sol.residual == pytest.approx(4.0, abs=1e-12)


def test_feasible_target_zero_residual():
    sol = simplex_lsq(np.eye(3), np.array([0.2, 0.3, 0.5]))
    assert sol.residual <= 1e-12
    np.testing.assert_allclose(sol.x, [0.2, 0.3, 0.5], atol=1e-10)


def test_wide_matrix_more_columns_than_rows():
    rng = np.random.default_rng(11)
    m = rng.uniform(0, 1, (3, 8))
    beta = rng.uniform(0, 1, 3)
    sol = simplex_lsq(m, beta)
    assert sol.x.min() >= 0
    assert sol.x.sum() == pytest.approx(1.0, abs=1e-12)
    assert sol.residual <= _best_random_value(m, beta, rng) + 1e-9


def test_single_column():
    sol = simplex_lsq(np.array([[2.0], [1.0]]), np.array([1.0, 1.0]))
    assert sol.x[0] == 1.0
    assert sol.residual == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# solution quality on random instances

@pytest.mark.parametrize("seed", range(25))
def test_beats_random_search(seed):
    rng = np.random.default_rng(1_000 + seed)
    rows = rng.integers(2, 9)
    cols = rng.integers(2, 9)
    m = rng.normal(size=(rows, cols))
    beta = rng.normal(size=rows)
    sol = simplex_lsq(m, beta)
    assert sol.residual <= _best_random_value(m, beta, rng) + 1e-9


@pytest.mark.parametrize("seed", range(25))
def test_matches_projected_gradient_oracle(seed):
    """Independent route: long projected-gradient run from the barycenter."""
    rng = np.random.default_rng(2_000 + seed)
    n = int(rng.integers(2, 7))
    m = rng.normal(size=(int(rng.integers(2, 7)), n))
    beta = rng.normal(size=m.shape[0])

    def project(v):
        # Euclidean projection onto the probability simplex
        u = np.sort(v)[::-1]
        css = np.cumsum(u) - 1
        ks = np.arange(1, n + 1)
        cond = u - css / ks > 0
        rho = ks[cond][-1]
        theta = css[cond][-1] / rho
        return np.maximum(v - theta, 0.0)

    x = np.full(n, 1 / n)
    lip = np.linalg.norm(m, 2) ** 2 * 2
    for _ in range(20_000):
        grad = 2 * m.T @ (m @ x - beta)
        x = project(x - grad / lip)
    oracle = np.linalg.norm(m @ x - beta)
    sol = simplex_lsq(m, beta)
    assert sol.residual <= oracle + 1e-7


# ---------------------------------------------------------------------------
# KKT certificates

@pytest.mark.parametrize("seed", range(20))
def test_kkt_certificate(seed):
    rng = np.random.default_rng(3_000 + seed)
    m = rng.normal(size=(rng.integers(2, 8), rng.integers(2, 8)))
    beta = rng.normal(size=m.shape[0])
    sol = simplex_lsq(m, beta)
    cert = kkt_residuals(m, beta, sol.x)
    assert cert["sum_error"] <= 1e-12
    assert cert["min_coord"] >= -1e-12
    assert cert["stationarity_gap"] <= 1e-8
    assert cert["dual_gap"] >= -1e-8


# ---------------------------------------------------------------------------
# determinism, starts, validation

def test_deterministic():
    rng = np.random.default_rng(5)
    m = rng.normal(size=(6, 5))
    beta = rng.normal(size=6)
    a = simplex_lsq(m, beta)
    b = simplex_lsq(m, beta)
    assert np.array_equal(a.x, b.x)
    assert a.residual == b.residual
    assert a.iterations == b.iterations


@pytest.mark.parametrize("seed", range(10))
def test_warm_starts_agree(seed):
    rng = np.random.default_rng(4_000 + seed)
    m = rng.normal(size=(5, 6))
    beta = rng.normal(size=5)
    base = simplex_lsq(m, beta)
    for _ in range(3):
        x0 = rng.dirichlet(np.ones(6))
        warm = simplex_lsq(m, beta, x0=x0)
        assert warm.residual == pytest.approx(base.residual, abs=1e-9)


def test_rejects_nan():
    with pytest.raises(ValueError):
        simplex_lsq(np.array([[np.nan, 1.0]]), np.array([1.0]))
    with pytest.raises(ValueError):
        simplex_lsq(np.eye(2), np.array([np.inf, 0.0]))


def test_rejects_bad_start():
    m = np.eye(3)
    beta = np.zeros(3)
    with pytest.raises(ValueError):
        simplex_lsq(m, beta, x0=np.array([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        simplex_lsq(m, beta, x0=np.array([1.5, -0.5, 0.0]))


def test_rejects_shape_mismatch():
    with pytest.raises(ValueError):
        simplex_lsq(np.eye(3), np.zeros(2))


def test_solution_is_clean_distribution():
    rng = np.random.default_rng(99)
    for _ in range(20):
        m = rng.normal(size=(4, 5))
        beta = rng.normal(size=4)
        sol = simplex_lsq(m, beta)
        assert sol.x.min() >= 0.0
        assert sol.x.sum() == pytest.approx(1.0, abs=1e-12)
