import numpy as np
import pytest

from rbflab.core_random import RngStream, sample_cscg_matrix, sample_orthonormal_beams


def test_stream_is_reproducible():
    a = RngStream(42, 7).generator().standard_normal(16)
    b = RngStream(42, 7).generator().standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_generator_opens_fresh_each_time():
    stream = RngStream(3)
    first = stream.generator().standard_normal(8)
    second = stream.generator().standard_normal(8)
    np.testing.assert_array_equal(first, second)


def test_child_streams_depend_on_tags():
    root = RngStream(11)
    same = root.child(1, 2).generator().standard_normal(8)
    again = root.child(1, 2).generator().standard_normal(8)
    other = root.child(1, 3).generator().standard_normal(8)
    np.testing.assert_array_equal(same, again)
    assert not np.array_equal(same, other)


def test_child_tags_are_order_sensitive():
    root = RngStream(11)
    ab = root.child(1, 2).stream_id
    ba = root.child(2, 1).stream_id
    assert ab != ba


def test_cscg_shape_and_moments():
    g = RngStream(5).generator()
    z = sample_cscg_matrix(g, 200, 100)
    assert z.shape == (200, 100)
    assert z.dtype == np.complex128
    n = z.size
    # CN(0,1): mean 0, unit power, halved per component; tolerances are
    # several standard errors at n = 2e4
    assert abs(z.mean()) < 5 / np.sqrt(n)
    assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 5 / np.sqrt(n)
    assert abs(np.var(z.real) - 0.5) < 5 / np.sqrt(n)


def test_cscg_rejects_bad_shapes():
    g = RngStream(5).generator()
    with pytest.raises(ValueError):
        sample_cscg_matrix(g, 0, 3)
    with pytest.raises(ValueError):
        sample_cscg_matrix(g, 3, -1)


def test_beams_are_orthonormal():
    g = RngStream(9).generator()
    for dim, m in [(1, 1), (4, 2), (6, 6)]:
        beams = sample_orthonormal_beams(g, dim, m)
        assert beams.shape == (dim, m)
        gram = beams.conj().T @ beams
        np.testing.assert_allclose(gram, np.eye(m), atol=1e-12)


def test_beams_reject_impossible_counts():
    g = RngStream(9).generator()
    with pytest.raises(ValueError):
        sample_orthonormal_beams(g, 3, 4)
    with pytest.raises(ValueError):
        sample_orthonormal_beams(g, 3, 0)


def test_beam_components_are_isotropic():
    # for a Haar column in C^dim, E|v_i|^2 = 1/dim for every i
    g = RngStream(13).generator()
    dim, draws = 3, 4000
    acc = np.zeros(dim)
    for _ in range(draws):
        acc += np.abs(sample_orthonormal_beams(g, dim, 1)[:, 0]) ** 2
    acc /= draws
    np.testing.assert_allclose(acc, 1.0 / dim, atol=0.02)
