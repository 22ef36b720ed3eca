import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cazacsearch.correlate import (
    aperiodic_ambiguity,
    aperiodic_autocorrelation,
    periodic_ambiguity,
    periodic_autocorrelation,
    read_grid,
    sidelobe_metrics,
    write_grid,
)
from cazacsearch.families import bjorck, zadoff_chu

from .conftest import random_unit
from .oracles import (
    aperiodic_ambiguity_loops,
    aperiodic_lag_loops,
    periodic_ambiguity_loops,
    periodic_lag_loops,
)

BARKER4 = np.array([1, 1, 1, -1], dtype=complex)


def test_periodic_autocorrelation_examples():
    np.testing.assert_allclose(periodic_autocorrelation(np.ones(5)), np.ones(5), atol=1e-15)
    np.testing.assert_allclose(periodic_autocorrelation(BARKER4), [1, 0, 0, 0], atol=1e-15)
    ac = periodic_autocorrelation(zadoff_chu(7))
    assert abs(ac[0] - 1) < 1e-12
    assert np.max(np.abs(ac[1:])) < 1e-12


def test_periodic_autocorrelation_zero_lag_is_mean_power(rng):
    x = rng.normal(size=9) + 1j * rng.normal(size=9)
    for method in ("fft", "direct"):
        ac0 = periodic_autocorrelation(x, method)[0]
        assert ac0.real == pytest.approx(np.mean(np.abs(x) ** 2))
        assert abs(ac0.imag) < 1e-12


def test_periodic_ambiguity_zero_doppler_column(rng):
    x = random_unit(rng, 11)
    grid = periodic_ambiguity(x)
    np.testing.assert_allclose(grid.values[:, 0], periodic_autocorrelation(x), atol=1e-14)
    assert grid.kind == "periodic" and grid.n == 11


def test_periodic_ambiguity_two_ones():
    grid = periodic_ambiguity(np.ones(2))
    assert abs(grid.values[0, 1]) < 1e-15
    assert grid.values[0, 0] == pytest.approx(1)


@pytest.mark.parametrize("n", range(1, 9))
def test_periodic_ambiguity_energy(n, rng):
    x = random_unit(rng, n)
    oracle = periodic_ambiguity_loops(list(x))
    assert np.sum(np.abs(oracle) ** 2) == pytest.approx(n, rel=1e-12)
    assert np.sum(np.abs(periodic_ambiguity(x).values) ** 2) == pytest.approx(n, rel=1e-12)


def test_aperiodic_autocorrelation_examples():
    for method in ("fft", "direct"):
        np.testing.assert_allclose(aperiodic_autocorrelation(BARKER4, method), [4, 1, 0, -1], atol=1e-14)
        np.testing.assert_allclose(aperiodic_autocorrelation(np.ones(3), method), [3, 2, 1], atol=1e-14)


def test_aperiodic_last_lag_has_unit_modulus(rng):
    for n in (2, 5, 17):
        x = random_unit(rng, n)
        assert abs(aperiodic_autocorrelation(x)[-1]) == pytest.approx(1)


def test_aperiodic_ambiguity_examples(rng):
    grid = aperiodic_ambiguity(BARKER4)
    np.testing.assert_allclose(grid.values[:, 0], [4, 1, 0, -1], atol=1e-14)
    for n in (3, 8, 13):
        x = random_unit(rng, n)
        assert aperiodic_ambiguity(x).values[0, 0] == pytest.approx(n)


def test_zadoff_chu_43_aperiodic_grid_normalizes():
    grid = aperiodic_ambiguity(zadoff_chu(43))
    mag = grid.normalized_magnitude()
    assert mag.shape == (43, 43)
    assert mag[0, 0] == 1.0
    assert 0 < grid.max_off_origin() < 1


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 13, 21, 34, 55, 64])
def test_fft_matches_loops(n, rng):
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    xl = list(x)
    per = periodic_ambiguity_loops(xl)
    ape = aperiodic_ambiguity_loops(xl)
    for method in ("fft", "direct"):
        scale = np.max(np.abs(per))
        assert np.max(np.abs(periodic_ambiguity(x, method).values - per)) <= 1e-10 * scale
        scale = np.max(np.abs(ape))
        assert np.max(np.abs(aperiodic_ambiguity(x, method).values - ape)) <= 1e-10 * scale
        assert np.max(np.abs(periodic_autocorrelation(x, method) - per[:, 0])) <= 1e-10 * np.max(np.abs(per[:, 0]))
        assert np.max(np.abs(aperiodic_autocorrelation(x, method) - ape[:, 0])) <= 1e-10 * np.max(np.abs(ape[:, 0]))


@pytest.mark.parametrize("n", range(1, 11))
def test_conjugate_symmetry(n, rng):
    x = list(rng.normal(size=n) + 1j * rng.normal(size=n))
    ac = periodic_autocorrelation(x)
    for k in range(1, n):
        assert ac[n - k] == pytest.approx(np.conj(ac[k]), abs=1e-12)
        assert periodic_lag_loops(x, n - k) == pytest.approx(np.conj(periodic_lag_loops(x, k)), abs=1e-12)
        assert aperiodic_lag_loops(x, -k) == pytest.approx(np.conj(aperiodic_lag_loops(x, k)), abs=1e-12)
    aac = aperiodic_autocorrelation(x)
    for k in range(n):
        assert aac[k] == pytest.approx(aperiodic_lag_loops(x, k), abs=1e-12)


def test_sidelobe_metrics_examples():
    m = sidelobe_metrics(BARKER4)
    assert m.psl == 0.25 and m.isl == 0.125
    m = sidelobe_metrics(np.ones(3))
    assert m.psl == pytest.approx(2 / 3) and m.isl == pytest.approx(5 / 9)


def test_sidelobe_metrics_reference_pairs():
    zc = sidelobe_metrics(zadoff_chu(43))
    bj = sidelobe_metrics(bjorck(43))
    for m in (zc, bj):
        assert 0 < m.psl < 1 and m.isl >= m.psl**2
    assert zc != bj


def test_sidelobe_metrics_need_two_entries():
    with pytest.raises(ValueError):
        sidelobe_metrics([1])


@settings(max_examples=150)
@given(st.lists(st.floats(0, 2 * np.pi), min_size=2, max_size=30), st.floats(0, 2 * np.pi))
def test_sidelobe_invariances(ph, c):
    x = np.exp(1j * np.array(ph))
    m = sidelobe_metrics(x)
    for y in (np.exp(1j * c) * x, np.conj(x)):
        my = sidelobe_metrics(y)
        assert my.psl == pytest.approx(m.psl, rel=1e-9, abs=1e-12)
        assert my.isl == pytest.approx(m.isl, rel=1e-9, abs=1e-12)
    assert m.isl >= m.psl**2 * (1 - 1e-12)


def test_grid_export_format():
    grid = periodic_ambiguity(zadoff_chu(5))
    buf = io.StringIO()
    write_grid(buf, grid)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n=5,kind=periodic"
    assert len(lines) == 6
    assert all(len(row.split(",")) == 5 for row in lines[1:])
    assert lines[1].split(",")[0] == "1"
    kind, mag = read_grid(io.StringIO(buf.getvalue()))
    assert kind == "periodic"
    np.testing.assert_allclose(mag, grid.normalized_magnitude(), rtol=1e-8, atol=1e-12)


def test_unknown_method():
    with pytest.raises(ValueError):
        periodic_autocorrelation([1, 1], method="naive")
