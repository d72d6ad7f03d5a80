import math
import os

import numpy as np
import pytest

import torus_floer as tf

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIGS = os.path.join(HERE, "..", "..", "configs")


def h_eps():
    return tf.TrigHamiltonian(1, [tf.TrigTerm(0.01, [1, 0]), tf.TrigTerm(0.01, [0, 1])])


def test_orbit_census():
    orbits = tf.find_orbits(h_eps())
    assert [o["cz"] for o in orbits] == [1, 0, 0, -1]
    assert orbits[0]["action"] == pytest.approx(0.02, abs=1e-8)
    assert orbits[-1]["action"] == pytest.approx(-0.02, abs=1e-8)


def test_cz_diagonal():
    for lam in (0.5, 7.0, -3.0, 13.0):
        for n in (1, 2):
            assert tf.cz_diagonal(n, lam) == -2 * n * math.floor(lam / (2 * math.pi)) - n


def test_hamiltonian_gradient_matches_difference():
    h = h_eps()
    x = np.array([0.13, 0.71])
    eps = 1e-6
    fd = [(h.value(0.0, x + eps * e) - h.value(0.0, x - eps * e)) / (2 * eps) for e in np.eye(2)]
    assert np.allclose(h.gradient(0.0, x), fd, atol=1e-9)


def test_action_of_single_mode_loop():
    # H = 0 and x(t) = exp(2 pi J0 t) v give A = -pi |v|^2.
    h0 = tf.TrigHamiltonian(1, [])
    N = 2
    modes = np.zeros(2 * (2 * N + 1))
    v = np.array([0.3, -0.2])
    modes[(1 + N) * 2:(1 + N) * 2 + 2] = v
    assert tf.action(h0, N, modes) == pytest.approx(-math.pi * v @ v, rel=1e-12)


def test_fredholm_index():
    r = tf.fredholm_diag(math.pi, 5 * math.pi)
    assert (r["dim_ker"], r["dim_coker"], r["index"]) == (4, 0, 4)


def test_homology_of_torus_complex():
    ranks = tf.homology_ranks({0: [[0, 0]], 1: [[0], [0]]}, {-1: 1, 0: 2, 1: 1})
    assert ranks == {-1: 1, 0: 2, 1: 1}


def test_config_errors():
    with pytest.raises(tf.FloerError):
        tf.parse_config("n = 1\nbogus = 2\n")
    cfg = tf.load_config(os.path.join(CONFIGS, "h_eps.cfg"))
    assert cfg.N == 4 and len(cfg.terms) == 2


def test_pipeline_indices(tmp_path):
    cfg = tf.load_config(os.path.join(CONFIGS, "h_eps.cfg"))
    cfg.out = str(tmp_path)
    p = tf.Pipeline(cfg)
    p.cz()
    assert p.all_pass()
    assert [o["rel_index"] for o in p.orbit_list()] == [1, 0, 0, -1]
    assert (tmp_path / "cz.json").exists()
