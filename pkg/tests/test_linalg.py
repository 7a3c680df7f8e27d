import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altcsit import linalg
from altcsit.errors import DimensionError, NotHermitian, NotPositiveDefinite, RankDeficient
from oracles import cofactor_det, gram_schmidt_null, phase_fix, random_complex


def test_canonical_rows_leave_third_axis():
    v = linalg.null_space_unit_vector([[1, 0, 0], [0, 1, 0]])
    np.testing.assert_allclose(v, [0, 0, 1], atol=1e-15)


def test_two_dim_orthogonal_direction():
    v = linalg.null_space_unit_vector([[2**-0.5, 2**-0.5]])
    np.testing.assert_allclose(v, np.array([1, -1]) / np.sqrt(2), atol=1e-15)


def test_random_2x3_matches_gram_schmidt(rng):
    a = random_complex(rng, (2, 3))
    v = linalg.null_space_unit_vector(a)
    assert np.linalg.norm(a @ v) < 1e-10
    (ref,) = gram_schmidt_null(a)
    np.testing.assert_allclose(v, phase_fix(ref), atol=1e-12)


def test_basis_of_single_row():
    basis = linalg.null_space_basis([[1, 0, 0]])
    assert basis.shape == (3, 2)
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(basis[0], 0, atol=1e-15)


def test_basis_of_random_row(rng):
    a = random_complex(rng, (1, 4))
    basis = linalg.null_space_basis(a)
    assert basis.shape == (4, 3)
    assert len(gram_schmidt_null(a)) == 3
    np.testing.assert_allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)
    assert np.all(np.abs(a @ basis) < 1e-10)


def test_full_rank_square_has_empty_basis():
    assert linalg.null_space_basis(np.eye(2)).shape == (2, 0)


def test_empty_matrix_null_space_is_everything():
    np.testing.assert_array_equal(linalg.null_space_basis(np.zeros((0, 3))), np.eye(3))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        linalg.null_space_unit_vector(np.eye(3))
    with pytest.raises(DimensionError):
        linalg.null_space_basis(np.ones((3, 2)))


def test_rank_deficient_rows():
    with pytest.raises(RankDeficient):
        linalg.null_space_unit_vector([[1, 2, 3], [2, 4, 6]])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        linalg.null_space_unit_vector([[np.nan, 1, 0]])


def test_phase_convention_first_entry_real_positive(rng):
    for _ in range(50):
        v = linalg.null_space_unit_vector(random_complex(rng, (2, 3)))
        first = v[np.argmax(np.abs(v) > 1e-12)]
        assert first.imag == 0.0 and first.real > 0


@pytest.mark.parametrize("shape", [(1, 2), (2, 3), (3, 4), (5, 6), (2, 5), (1, 6)])
def test_residual_and_orthonormality_over_many_draws(shape):
    rng = np.random.default_rng(hash(shape) % 2**32)
    for _ in range(1000):
        a = random_complex(rng, shape)
        basis = linalg.null_space_basis(a)
        assert basis.shape[1] == shape[1] - shape[0]
        assert np.max(np.linalg.norm(a @ basis, axis=0)) <= 1e-10 * np.linalg.norm(a)
        assert np.max(np.abs(basis.conj().T @ basis - np.eye(basis.shape[1]))) <= 1e-12


def test_deterministic_bytes(rng):
    a = random_complex(rng, (2, 4))
    assert linalg.null_space_basis(a).tobytes() == linalg.null_space_basis(a.copy()).tobytes()


def test_log_det_identity_and_diagonal():
    assert linalg.log_det_hermitian_pd(np.eye(5)) == 0.0
    assert linalg.log_det_hermitian_pd(np.diag([2.0, 8.0])) == pytest.approx(4.0, rel=1e-15)


def test_log_det_matches_cofactor(rng):
    b = random_complex(rng, (4, 4))
    m = b @ b.conj().T + np.eye(4)
    ref = np.log2(cofactor_det(m).real)
    assert linalg.log_det_hermitian_pd(m) == pytest.approx(ref, rel=1e-9)


def test_log_det_inverse_cancels(rng):
    for _ in range(20):
        b = random_complex(rng, (4, 4))
        m = b @ b.conj().T + np.eye(4)
        inv = np.linalg.inv(m)
        inv = (inv + inv.conj().T) / 2
        assert abs(linalg.log_det_hermitian_pd(m) + linalg.log_det_hermitian_pd(inv)) < 1e-8


def test_log_det_errors():
    with pytest.raises(NotHermitian):
        linalg.log_det_hermitian_pd([[1, 1], [0, 1]])
    with pytest.raises(NotPositiveDefinite):
        linalg.log_det_hermitian_pd(np.diag([1.0, -1.0]))
    with pytest.raises(DimensionError):
        linalg.log_det_hermitian_pd(np.ones((2, 3)))


def _mp_log2det(m):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 60
    d = mpmath.det(mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in m]))
    return float(mpmath.log(mpmath.re(d), 2))


def test_log_det_conditioned_1e12():
    # graded matrix D C D: condition number ~1e12, exact value from 60-digit arithmetic
    rng = np.random.default_rng(5)
    f = random_complex(rng, (4, 4))
    c = f @ f.conj().T + 4 * np.eye(4)
    d = np.array([1e6, 1e3, 1.0, 1.0])
    m = d[:, None] * c * d[None, :]
    m = (m + m.conj().T) / 2
    assert np.linalg.cond(m) > 1e11
    assert linalg.log_det_hermitian_pd(m) == pytest.approx(_mp_log2det(m), rel=1e-9)


def test_identity_plus_gram_matches_dense(rng):
    f = random_complex(rng, (4, 6)) * 30
    dense = np.linalg.slogdet(np.eye(4) + f @ f.conj().T)[1] / np.log(2)
    assert linalg.log_det_identity_plus_gram(f) == pytest.approx(dense, rel=1e-12)
    assert linalg.log_det_identity_plus_gram(np.zeros((0, 3))) == 0.0


@settings(max_examples=60, deadline=None)
@given(
    rows=st.integers(1, 4),
    extra=st.integers(1, 3),
    seed=st.integers(0, 2**32 - 1),
    scale=st.floats(1e-3, 1e3),
)
def test_null_vector_property(rows, extra, seed, scale):
    a = random_complex(np.random.default_rng(seed), (rows, rows + extra)) * scale
    v = linalg.null_space_unit_vector(a)
    assert abs(np.linalg.norm(v) - 1) <= 1e-12
    assert np.linalg.norm(a @ v) <= 1e-10 * np.linalg.norm(a)


def test_whitened_gain_matches_difference_of_log_dets(rng):
    fb = random_complex(rng, (4, 6)) * 5
    fe = random_complex(rng, (4, 2))
    ld = lambda f: np.linalg.slogdet(np.eye(4) + f @ f.conj().T)[1] / np.log(2)
    expected = ld(np.hstack([fb, fe])) - ld(fb)
    assert linalg.log_det_whitened_gain(fb, fe) == pytest.approx(expected, rel=1e-12)


def test_whitened_gain_keeps_tiny_differences():
    mpmath = pytest.importorskip("mpmath")
    rng = np.random.default_rng(3)
    fb = random_complex(rng, (2, 4)) * 1e7
    fe = random_complex(rng, (2, 1)) * 1e-3
    with mpmath.workdps(60):
        def ld(f):
            m = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in f])
            return mpmath.log(mpmath.re(mpmath.det(mpmath.eye(2) + m * m.transpose_conj())), 2)
        exact = float(ld(np.hstack([fb, fe])) - ld(fb))
    assert 0 < exact < 1e-15
    assert linalg.log_det_whitened_gain(fb, fe) == pytest.approx(exact, rel=1e-9)


def test_whitened_gain_edge_shapes():
    assert linalg.log_det_whitened_gain(np.zeros((0, 2)), np.zeros((0, 1))) == 0.0
    assert linalg.log_det_whitened_gain(np.zeros((2, 0)), np.eye(2)) == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        linalg.log_det_whitened_gain(np.ones((2, 2)), np.ones((3, 1)))
