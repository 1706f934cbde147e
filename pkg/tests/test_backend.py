"""Compiled pair-sum extension vs the numpy fallback: identical semantics."""

import numpy as np
import pytest

from stokestring import _pairsum_py
from stokestring import backend
from stokestring import geometry as geo
from stokestring import spectral as sp
from stokestring import velocity as vel

compiled = pytest.importorskip("stokestring._pairsum",
                               reason="compiled extension not built")


def _random_problem(m=96, n=64, seed=0, near_hits=True):
    rng = np.random.default_rng(seed)
    ta = np.sort(rng.uniform(-np.pi, np.pi, m))
    sa = sp.grid_points(n)
    if near_hits:
        # exercise the series branch: exact hit, tiny offsets, threshold edge
        ta[0] = sa[3]
        ta[1] = sa[10] + 1e-9
        ta[2] = sa[20] - 1e-4
        ta[3] = sa[30] + 9.9e-4
    arr = lambda shape: np.ascontiguousarray(rng.standard_normal(shape))
    tgt = [ta] + [arr((m, 2)) for _ in range(5)]
    src = [sa, arr((n, 2)), arr((n, 2))]
    tgt[1] += 3.0
    src[1] += 3.0
    return tgt, src, rng


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_apply_w_and_r_match(seed):
    tgt, src, rng = _random_problem(seed=seed)
    dens = np.ascontiguousarray(rng.standard_normal((64, 2)))
    for fn in ("apply_w", "apply_r"):
        a = getattr(compiled, fn)(*tgt, *src, dens, 0.07)
        b = getattr(_pairsum_py, fn)(*tgt, *src, dens, 0.07)
        assert np.max(np.abs(a - b)) < 1e-13 * max(1.0, np.max(np.abs(b)))


@pytest.mark.parametrize("seed", [0, 3])
def test_apply_delta_q_matches(seed):
    tgt, src, rng = _random_problem(seed=seed)
    ta, tz, tz1, tz2, tz3, _ = tgt
    fs = np.ascontiguousarray(rng.standard_normal((64, 2)))
    ft, fp, fpp, fppp = (np.ascontiguousarray(rng.standard_normal((96, 2)))
                         for _ in range(4))
    a = compiled.apply_delta_q(ta, tz, tz1, tz2, tz3, *src,
                               fs, ft, fp, fpp, fppp, 0.07)
    b = _pairsum_py.apply_delta_q(ta, tz, tz1, tz2, tz3, *src,
                                  fs, ft, fp, fpp, fppp, 0.07)
    assert np.max(np.abs(a - b)) < 1e-13 * max(1.0, np.max(np.abs(b)))


def test_full_velocity_matches_between_backends(monkeypatch):
    st = geo.normalize_initial_data(
        sp.grid_points(128) + 0.03 * np.sin(2 * sp.grid_points(128)),
        0.02 * np.sin(3 * sp.grid_points(128)))
    params = geo.ForceParams(lam=0.2)
    u_compiled = vel.curve_velocity(st, params).u_alpha
    wrapped = backend._contiguous
    monkeypatch.setattr(vel, "apply_w", wrapped(_pairsum_py.apply_w))
    monkeypatch.setattr(vel, "apply_delta_q", wrapped(_pairsum_py.apply_delta_q))
    import stokestring.backend as bk
    monkeypatch.setattr(bk, "apply_r", wrapped(_pairsum_py.apply_r))
    u_python = vel.curve_velocity(st, params).u_alpha
    assert np.max(np.abs(u_compiled - u_python)) < 1e-12
