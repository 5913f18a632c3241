import numpy as np
import pytest

from conftest import random_complex, random_hermitian, random_psd, random_unitary
from uhlmann import matcore
from uhlmann.errors import DimensionMismatchError, NotHermitianError, NotPsdError
from uhlmann.matcore import (
    dagger,
    hermitian_eigen,
    image_projector,
    matrix_sign,
    op_norm,
    pseudoinverse,
    psd_sqrt,
    schur_psd_check,
    svd,
    trace_norm,
)


def test_hermitian_eigen_identity():
    eig = hermitian_eigen(np.eye(3))
    assert eig.values == pytest.approx([1, 1, 1])


def test_hermitian_eigen_diagonal():
    eig = hermitian_eigen(np.diag([2.0, -1.0]))
    assert eig.values == pytest.approx([2, -1])
    assert abs(eig.vectors[0, 0]) == pytest.approx(1)
    assert abs(eig.vectors[1, 1]) == pytest.approx(1)


def test_hermitian_eigen_reconstructs(rng):
    h = random_hermitian(rng, 5)
    eig = hermitian_eigen(h)
    np.testing.assert_allclose(eig.reconstruct(), h, atol=1e-10)
    np.testing.assert_allclose(dagger(eig.vectors) @ eig.vectors, np.eye(5), atol=1e-12)
    assert (np.diff(eig.values) <= 1e-15).all()


def test_hermitian_eigen_rejects_nonhermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eigen(np.array([[0, 1], [0, 0]], dtype=complex))


def test_svd_zero_and_unitary(rng):
    assert svd(np.zeros((2, 2))).singulars == pytest.approx([0, 0])
    u = random_unitary(rng, 4)
    assert svd(u).singulars == pytest.approx([1, 1, 1, 1])


def test_svd_matches_eigen_oracle(rng):
    m = random_complex(rng, 4, 3)
    f = svd(m)
    gram_eigs = hermitian_eigen(dagger(m) @ m).values
    np.testing.assert_allclose(f.singulars**2, gram_eigs, atol=1e-10)
    np.testing.assert_allclose(f.reconstruct(), m, atol=1e-12)


def test_pseudoinverse_examples(rng):
    np.testing.assert_allclose(
        pseudoinverse(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]), atol=1e-14
    )
    np.testing.assert_array_equal(pseudoinverse(np.zeros((2, 3))), np.zeros((3, 2)))
    m = random_complex(rng, 4, 4)  # generically invertible
    np.testing.assert_allclose(m @ pseudoinverse(m), np.eye(4), atol=1e-10)
    u = rng.normal(size=3) + 1j * rng.normal(size=3)
    v = rng.normal(size=3) + 1j * rng.normal(size=3)
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    np.testing.assert_allclose(
        pseudoinverse(np.outer(u, v.conj())), np.outer(v, u.conj()), atol=1e-12
    )


def test_penrose_conditions(rng):
    for _ in range(50):
        rows, cols = rng.integers(1, 7, size=2)
        rank = int(rng.integers(1, min(rows, cols) + 1))
        m = random_complex(rng, rows, rank) @ random_complex(rng, rank, cols)
        p = pseudoinverse(m)
        assert op_norm(m @ p @ m - m) <= 1e-9 * (1 + op_norm(m))
        assert op_norm(p @ m @ p - p) <= 1e-9 * (1 + op_norm(p))
        assert op_norm(m @ p - dagger(m @ p)) <= 1e-9
        assert op_norm(p @ m - dagger(p @ m)) <= 1e-9


def test_matrix_sign_examples(rng):
    np.testing.assert_allclose(
        matrix_sign(np.diag([2.0, 0.0, -3.0])), np.diag([1.0, 0.0, -1.0]), atol=1e-12
    )
    u = random_unitary(rng, 4)
    np.testing.assert_allclose(matrix_sign(u), u, atol=1e-10)


def test_matrix_sign_polar_reconstruction(rng):
    m = random_complex(rng, 4, 4)
    w = matrix_sign(m)
    np.testing.assert_allclose(w @ psd_sqrt(dagger(m) @ m), m, atol=1e-9)


def test_matrix_sign_is_partial_isometry(rng):
    for _ in range(50):
        d = int(rng.integers(2, 7))
        rank = int(rng.integers(1, d + 1))
        m = random_complex(rng, d, rank) @ random_complex(rng, rank, d)
        w = matrix_sign(m)
        assert op_norm(w @ dagger(w) @ w - w) <= 1e-9


def test_matrix_sign_gauge_free_on_degenerate_singulars():
    # two equal singular values; result must still be the exact swap-free sign
    m = np.diag([3.0, 3.0, 0.0])
    np.testing.assert_allclose(matrix_sign(m), np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_psd_sqrt_examples(rng):
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    v /= np.linalg.norm(v)
    proj = np.outer(v, v.conj())
    np.testing.assert_allclose(psd_sqrt(proj), proj, atol=1e-10)
    p = random_psd(rng, 5)
    r = psd_sqrt(p)
    np.testing.assert_allclose(r @ r, p, atol=1e-9)


def test_psd_sqrt_clamps_dust_but_rejects_negatives():
    np.testing.assert_allclose(
        psd_sqrt(np.diag([1.0, -1e-12])), np.diag([1.0, 0.0]), atol=1e-12
    )
    with pytest.raises(NotPsdError):
        psd_sqrt(np.diag([1.0, -1e-3]))


def test_image_projector(rng):
    m = random_complex(rng, 4, 4)
    np.testing.assert_allclose(image_projector(m), np.eye(4), atol=1e-10)
    np.testing.assert_allclose(image_projector(np.zeros((3, 3))), np.zeros((3, 3)), atol=0)
    m2 = random_complex(rng, 3, 2) @ random_complex(rng, 2, 3)
    pi = image_projector(m2)
    assert np.trace(pi).real == pytest.approx(2, abs=1e-9)
    assert op_norm(pi @ m2 - m2) <= 1e-9 * op_norm(m2)


def test_norms(rng):
    assert trace_norm(np.eye(5)) == pytest.approx(5)
    assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3)
    assert op_norm(np.eye(3)) == pytest.approx(1)
    assert op_norm(2 * random_unitary(rng, 3)) == pytest.approx(2)
    m = random_complex(rng, 5, 5)
    eig = hermitian_eigen(dagger(m) @ m)
    assert trace_norm(m) == pytest.approx(np.sqrt(eig.values).sum(), abs=1e-10)
    assert op_norm(m) == pytest.approx(np.sqrt(eig.values[0]), abs=1e-10)


def test_schur_psd_check_examples(rng):
    eye = np.eye(3)
    assert schur_psd_check(eye, np.zeros((3, 3)), eye)
    assert not schur_psd_check(eye, 2 * eye, eye)
    b = random_complex(rng, 3, 3)
    b = b / op_norm(b) * 0.9
    assert schur_psd_check(eye, b, eye)


def test_schur_psd_check_singular_block():
    # A singular: the generalized criterion must reject B leaking out of Image(A)
    a = np.diag([1.0, 0.0])
    b = np.array([[0.0], [1.0]], dtype=complex)
    c = np.eye(1, dtype=complex)
    assert not schur_psd_check(a, b, c)
    assert schur_psd_check(a, np.array([[1.0], [0.0]], dtype=complex), c)


def test_schur_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        schur_psd_check(np.eye(2), np.zeros((3, 2)), np.eye(2))


def test_schur_two_paths_agree(rng):
    agree = 0
    for _ in range(200):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        a = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
        c = random_psd(rng, m, rank=int(rng.integers(1, m + 1)))
        b = random_complex(rng, n, m)
        if rng.random() < 0.5:
            b *= 0.1  # bias towards feasible blocks
        block = np.block([[a, b], [dagger(b), c]])
        margin = np.linalg.eigvalsh((block + dagger(block)) / 2).min()
        if abs(margin) <= 1e-6:
            continue
        assert schur_psd_check(a, b, c) == (margin >= 0)
        agree += 1
    assert agree > 100


def test_cmjson_roundtrip(tmp_path, rng):
    m = random_complex(rng, 3, 2)
    path = tmp_path / "m.json"
    matcore.write_matrix(path, m)
    np.testing.assert_array_equal(matcore.read_matrix(path), m)


def test_cmjson_rejects_nonfinite(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"rows":1,"cols":1,"data":[[NaN,0.0]]}')
    with pytest.raises(ValueError):
        matcore.read_matrix(path)


def test_cmjson_write_is_17_digits(tmp_path):
    path = tmp_path / "m.json"
    matcore.write_matrix(path, np.array([[1 / 3 + 0j]]))
    assert "0.33333333333333331" in path.read_text()
