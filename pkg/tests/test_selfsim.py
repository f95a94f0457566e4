import math

import numpy as np
import pytest

from cantor_frame.haar import HaarFrame, atom_change_of_basis, diff_position, indicator_to_haar
from cantor_frame.operators import assemble_kinf_truncated, assemble_km_closed, embed, truncation_error_bound
from cantor_frame.selfsim import (block_form_residual, block_matrix, branch_isometry, cuntz_check,
                                  neumann_partial_sum, phi_apply, psi_apply, root_projection, unitary_w)
from cantor_frame.words import Word, enumerate_words

P_GRID = [0.2, 0.35, 0.5, 0.65, 0.8]


def branch_by_atoms(branch, p, m):
    """U in Haar coordinates from its action on normalized atoms: atom a -> atom (branch a)."""
    s = np.zeros((1 << (m + 1), 1 << m))
    offset = 0 if branch == 0 else 1 << m
    s[np.arange(1 << m) + offset, np.arange(1 << m)] = 1.0
    return atom_change_of_basis(HaarFrame(m + 1, p)).T @ s @ atom_change_of_basis(HaarFrame(m, p))


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return a + a.T


@pytest.mark.parametrize("p", P_GRID)
@pytest.mark.parametrize("branch", [0, 2])
def test_branch_isometry_matches_atom_oracle(p, branch):
    for m in range(7):
        u = branch_isometry(branch, p, m).matrix
        assert np.abs(u - branch_by_atoms(branch, p, m)).max() <= 1e-12


@pytest.mark.parametrize("p", [0.3, 0.5, 0.7])
def test_branch_isometry_on_indicators(p):
    """U_0 1_{C_w} = p**-1/2 1_{C_0w} and U_2 1_{C_w} = (1-p)**-1/2 1_{C_2w}."""
    m = 4
    small, big = HaarFrame(m, p), HaarFrame(m + 1, p)
    u0 = branch_isometry(0, p, m).matrix
    u2 = branch_isometry(2, p, m).matrix
    for w in enumerate_words(m):
        c = indicator_to_haar(w, small)
        assert np.abs(u0 @ c - indicator_to_haar(w.prepend(0), big) / math.sqrt(p)).max() <= 1e-12
        assert np.abs(u2 @ c - indicator_to_haar(w.prepend(2), big) / math.sqrt(1 - p)).max() <= 1e-12


def test_branch_columns():
    u0 = branch_isometry(0, 0.3, 3).matrix
    w = Word.parse("02")
    col = u0[:, diff_position(w)]
    assert col[diff_position(w.prepend(0))] == 1.0 and np.count_nonzero(col) == 1
    root = branch_isometry(0, 0.5, 2).matrix[:, 0]
    assert np.allclose(root[:2], [1 / math.sqrt(2)] * 2, atol=1e-15) and not root[2:].any()
    u2 = branch_isometry(2, 0.3, 2).matrix
    assert np.allclose(u2[:2, 0], [math.sqrt(0.7), -math.sqrt(0.3)], atol=1e-15)
    assert np.allclose(np.linalg.norm(u0, axis=0), 1.0, atol=1e-15)
    with pytest.raises(ValueError):
        branch_isometry(1, 0.3, 2)


@pytest.mark.parametrize("p", P_GRID)
def test_cuntz_relations(p):
    for m in range(1, 8):
        rep = cuntz_check(p, m)
        assert rep.max_residual <= 1e-12
    with pytest.raises(ValueError):
        cuntz_check(p, 0)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.7])
def test_completeness_in_atom_coordinates(p):
    """U_0U_0* + U_2U_2* is multiplication by 1_{C_0} + 1_{C_2} = 1."""
    m = 5
    q = atom_change_of_basis(HaarFrame(m + 1, p))
    u0, u2 = branch_isometry(0, p, m).matrix, branch_isometry(2, p, m).matrix
    left = q @ u0 @ u0.T @ q.T
    right = q @ u2 @ u2.T @ q.T
    half = 1 << m
    assert np.abs(left - np.diag([1.0] * half + [0.0] * half)).max() <= 1e-12
    assert np.abs(right - np.diag([0.0] * half + [1.0] * half)).max() <= 1e-12


@pytest.mark.parametrize("p", P_GRID)
def test_psi_reproduces_closed_form(p):
    for m in range(7):
        out = psi_apply(assemble_km_closed(p, m), p)
        assert out.depth == m + 1
        assert np.abs(out.entries - assemble_km_closed(p, m + 1).entries).max() <= 1e-12


def test_psi_of_zero_is_root_projection():
    out = psi_apply(np.zeros((4, 4)), 0.3)
    assert np.array_equal(out.entries, root_projection(3))


@pytest.mark.parametrize("p", P_GRID)
def test_psi_lipschitz_constant_is_alpha(p):
    rng = np.random.default_rng(7)
    alpha = max(p, 1 - p)
    for _ in range(20):
        a, b = random_symmetric(rng, 16), random_symmetric(rng, 16)
        num = np.linalg.norm(psi_apply(a, p).entries - psi_apply(b, p).entries, 2)
        assert num / np.linalg.norm(a - b, 2) == pytest.approx(alpha, abs=1e-10)


@pytest.mark.parametrize("p", P_GRID)
def test_phi_norm_bounded_by_alpha(p):
    rng = np.random.default_rng(3)
    for _ in range(10):
        t = random_symmetric(rng, 8)
        assert np.linalg.norm(phi_apply(t, p), 2) <= max(p, 1 - p) * np.linalg.norm(t, 2) + 1e-12


@pytest.mark.parametrize("p", P_GRID)
def test_fixed_point_residual_decay(p):
    alpha = max(p, 1 - p)
    prev = math.inf
    for m in range(7):
        k = assemble_km_closed(p, m).entries
        gap = np.linalg.norm(psi_apply(k, p).entries - embed(k, 2 * k.shape[0]), 2)
        assert gap <= truncation_error_bound(p, m) * (1 + alpha)
        assert gap < prev
        prev = gap


@pytest.mark.parametrize("p", P_GRID)
def test_neumann_partial_sums(p):
    assert np.array_equal(neumann_partial_sum(p, 0).entries, [[1.0]])
    for n in range(7):
        assert np.abs(neumann_partial_sum(p, n).entries - assemble_km_closed(p, n).entries).max() <= 1e-12


@pytest.mark.parametrize("p", P_GRID)
def test_block_form(p):
    for M in range(2, 7):
        assert block_form_residual(p, M) <= 1e-10
        w = unitary_w(p, M)
        assert np.abs(w.T @ w - np.eye(w.shape[0])).max() <= 1e-12


def test_block_form_examples():
    assert block_form_residual(0.5, 4) <= 1e-10
    assert block_form_residual(0.3, 5) <= 1e-10
    # a wrong K' must show up
    k_prev = assemble_kinf_truncated(0.3, 3).entries.copy()
    w = unitary_w(0.3, 4)
    k = assemble_kinf_truncated(0.3, 4).entries
    k_prev[1, 1] += 1e-3
    assert np.abs(w.T @ k @ w - block_matrix(0.3, k_prev)).max() > 1e-4
