import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossfuzzy.crossbar import Crossbar, ReadConfig, load_delta_csv, save_delta_csv
from crossfuzzy.device import DEFAULT_PARAMS, MemristorState, apply_flux
from oracles import rk4_memristance

R_ON = DEFAULT_PARAMS.r_on
R_OFF = DEFAULT_PARAMS.r_off

# One full-grade pulse (summed drive 2 V for 1e-4 s) on a pristine cell.
M_ONE_PULSE = 99980.19803941179
DELTA_ONE_PULSE = 19.80196058821457


def one_cell_after_pulse() -> Crossbar:
    xb = Crossbar(1, 1, DEFAULT_PARAMS)
    xb.write_pulse([1.0], [1.0], 1e-4)
    return xb


def test_write_pulse_single_cell():
    xb = one_cell_after_pulse()
    assert xb.memristance[0, 0] == pytest.approx(M_ONE_PULSE, rel=1e-12)
    assert xb.snapshot_delta()[0, 0] == pytest.approx(DELTA_ONE_PULSE, rel=1e-12)
    ode = rk4_memristance(R_OFF, 2.0, 1e-4, DEFAULT_PARAMS, steps=20000)
    assert xb.memristance[0, 0] == pytest.approx(ode, rel=1e-9)


def test_write_pulse_zero_grades_is_identity():
    xb = Crossbar(3, 4, DEFAULT_PARAMS)
    xb.write_pulse([0.7, 0.1, 0.0, 0.4], [0.2, 0.9, 0.5], 1e-4)
    before = xb.memristance.copy()
    xb.write_pulse(np.zeros(4), np.zeros(3), 1e-4)
    assert np.array_equal(xb.memristance, before)


def test_write_pulse_skips_faulted_cells():
    mask = np.zeros((2, 2), dtype=bool)
    mask[0, 1] = True
    xb = Crossbar(2, 2, DEFAULT_PARAMS, fault_mask=mask)
    xb.write_pulse([1.0, 1.0], [1.0, 1.0], 1e-4)
    assert xb.memristance[0, 1] == R_OFF
    assert xb.snapshot_delta()[0, 1] == 0.0
    assert np.all(xb.memristance[~mask] < R_OFF)


def test_write_pulse_matches_per_cell_device_update():
    xb = Crossbar(3, 5, DEFAULT_PARAMS)
    rng = np.random.default_rng(7)
    col = rng.uniform(0, 1, 5)
    row = rng.uniform(0, 1, 3)
    xb.write_pulse(col, row, 2e-4)
    for i in range(3):
        for j in range(5):
            cell = apply_flux(MemristorState(R_OFF), DEFAULT_PARAMS, (col[j] + row[i]) * 2e-4)
            assert xb.memristance[i, j] == pytest.approx(cell.memristance, rel=1e-12)


def test_write_pulse_validation():
    xb = Crossbar(2, 3, DEFAULT_PARAMS)
    with pytest.raises(ValueError):
        xb.write_pulse([1.0, 0.5], [0.1, 0.2], 1e-4)  # wrong column count
    with pytest.raises(ValueError):
        xb.write_pulse([1.0, 0.5, 0.1], [0.1], 1e-4)  # wrong row count
    with pytest.raises(ValueError):
        xb.write_pulse([1.2, 0.5, 0.1], [0.1, 0.2], 1e-4)  # grade above 1
    with pytest.raises(ValueError):
        xb.write_pulse([-0.1, 0.5, 0.1], [0.1, 0.2], 1e-4)  # negative grade
    with pytest.raises(ValueError):
        xb.write_pulse([1.0, 0.5, 0.1], [0.1, 0.2], 0.0)  # non-positive pulse


def test_saturation_counting():
    xb = Crossbar(1, 2, DEFAULT_PARAMS)
    # Drive one column hard enough to clamp its cell at r_on.
    for _ in range(3):
        xb.write_pulse([1.0, 0.0], [1.0], 0.2)
    assert xb.memristance[0, 0] == R_ON
    assert xb.saturation_count >= 1


def test_read_pristine_cancels():
    xb = Crossbar(5, 8, DEFAULT_PARAMS)
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 1, 8)
    # exact mode cancels only to float rounding; ideal mode is exactly zero
    assert np.allclose(xb.read_exact(x), 0.0, atol=1e-12)
    assert np.all(xb.read_ideal(x) == 0.0)


def test_read_zero_input_gives_zero():
    xb = one_cell_after_pulse()
    assert xb.read_exact(np.zeros(1))[0] == 0.0
    assert xb.read_ideal(np.zeros(1))[0] == 0.0


def test_read_exact_single_cell_value():
    xb = one_cell_after_pulse()
    y = xb.read_exact([0.5])
    assert y[0] == pytest.approx(-9.90294127063418e-05, rel=1e-12)


def test_read_ideal_single_cell_value_and_gap():
    xb = one_cell_after_pulse()
    yi = xb.read_ideal([0.5])[0]
    ye = xb.read_exact([0.5])[0]
    assert yi == pytest.approx(-9.900980294107284e-05, rel=1e-12)
    assert abs(ye - yi) / abs(ye) == pytest.approx(2e-4, rel=0.05)


def test_read_ideal_extracts_columns():
    rng = np.random.default_rng(11)
    delta = rng.uniform(0, 50.0, (6, 4))
    xb = Crossbar.from_delta(delta, DEFAULT_PARAMS)
    stored = xb.snapshot_delta()  # from_delta quantizes at r_off's ulp
    assert np.allclose(stored, delta, rtol=0, atol=1e-10)
    for k in range(4):
        x = np.zeros(4)
        x[k] = 0.8
        expected = (-1.0 / R_OFF) * 0.8 * stored[:, k]
        assert np.allclose(xb.read_ideal(x), expected, rtol=1e-12, atol=0.0)


def test_read_dimension_mismatch():
    xb = Crossbar(2, 3, DEFAULT_PARAMS)
    with pytest.raises(ValueError):
        xb.read_exact([1.0, 2.0])
    with pytest.raises(ValueError):
        xb.read_ideal([1.0, 2.0, 3.0, 4.0])


def test_read_config_dispatch():
    xb = one_cell_after_pulse()
    assert xb.read([0.5], ReadConfig("exact"))[0] == xb.read_exact([0.5])[0]
    assert xb.read([0.5], ReadConfig("ideal"))[0] == xb.read_ideal([0.5])[0]
    with pytest.raises(ValueError):
        ReadConfig("approximate")


def test_inject_faults_counts_and_determinism():
    xb = Crossbar(180, 100, DEFAULT_PARAMS)
    xb.inject_faults(0.5, seed=99)
    assert int(xb.fault_mask.sum()) == 9000
    again = Crossbar(180, 100, DEFAULT_PARAMS)
    again.inject_faults(0.5, seed=99)
    assert np.array_equal(xb.fault_mask, again.fault_mask)
    other = Crossbar(180, 100, DEFAULT_PARAMS)
    other.inject_faults(0.5, seed=100)
    assert not np.array_equal(xb.fault_mask, other.fault_mask)


def test_inject_faults_extremes():
    xb = Crossbar(4, 4, DEFAULT_PARAMS)
    xb.inject_faults(0.0, seed=1)
    assert not xb.fault_mask.any()
    xb.write_pulse(np.ones(4), np.ones(4), 1e-4)
    xb.inject_faults(1.0, seed=1)
    assert xb.fault_mask.all()
    # everything stuck at r_off: the stored pattern is gone
    assert np.all(xb.read_ideal(np.ones(4)) == 0.0)
    with pytest.raises(ValueError):
        xb.inject_faults(1.5, seed=1)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    delta = rng.uniform(0, 100.0, (7, 3))
    path = tmp_path / "surface.csv"
    save_delta_csv(path, delta, R_OFF)
    loaded, r_off = load_delta_csv(path)
    assert r_off == R_OFF
    assert np.array_equal(loaded, delta)
    header = path.read_text().splitlines()[0]
    assert header == f"# rows=7 cols=3 r_off={R_OFF}"


# -- properties ---------------------------------------------------------------


def random_small_crossbar(rng, max_delta=90.0):
    m, n = int(rng.integers(1, 15)), int(rng.integers(1, 15))
    delta = rng.uniform(0.0, max_delta, (m, n))
    return Crossbar.from_delta(delta, DEFAULT_PARAMS)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_read_ideal_is_the_matrix_product(seed):
    rng = np.random.default_rng(seed)
    xb = random_small_crossbar(rng)
    x = rng.uniform(0, 1, xb.cols)
    oracle = (-1.0 / R_OFF) * (xb.snapshot_delta() @ x)
    assert np.array_equal(xb.read_ideal(x), oracle)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_read_linearity(seed):
    rng = np.random.default_rng(seed)
    xb = random_small_crossbar(rng)
    x = rng.uniform(-1, 1, xb.cols)
    z = rng.uniform(-1, 1, xb.cols)
    a, b = rng.uniform(-2, 2, 2)
    for read in (xb.read_exact, xb.read_ideal):
        lhs = read(a * x + b * z)
        rhs = a * read(x) + b * read(z)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_exact_vs_ideal_second_order_bound(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 30)), int(rng.integers(1, 30))
    eps = rng.uniform(1e-5, 1e-3)
    delta = rng.uniform(0.0, 1.0, (m, n))
    delta *= eps * R_OFF / delta.max()
    xb = Crossbar.from_delta(delta, DEFAULT_PARAMS)
    x = rng.uniform(0, 1, n)
    gap = np.abs(xb.read_exact(x) - xb.read_ideal(x))
    bound = x.sum() * eps**2 / (1.0 - eps)
    assert np.all(gap <= bound + 1e-15)


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**31))
def test_write_monotonicity(seed):
    rng = np.random.default_rng(seed)
    xb = Crossbar(int(rng.integers(1, 10)), int(rng.integers(1, 10)), DEFAULT_PARAMS)
    previous_delta = xb.snapshot_delta()
    for _ in range(int(rng.integers(1, 6))):
        before = xb.memristance.copy()
        xb.write_pulse(
            rng.uniform(0, 1, xb.cols), rng.uniform(0, 1, xb.rows), 10 ** rng.uniform(-5, -2)
        )
        assert np.all(xb.memristance <= before)
        delta = xb.snapshot_delta()
        assert np.all(delta >= previous_delta)
        assert np.all(xb.memristance >= R_ON)
        previous_delta = delta


@settings(max_examples=200, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31),
    fraction=st.floats(min_value=0.0, max_value=1.0),
)
def test_fault_mask_determinism(seed, fraction):
    a = Crossbar(9, 13, DEFAULT_PARAMS)
    b = Crossbar(9, 13, DEFAULT_PARAMS)
    a.inject_faults(fraction, seed)
    b.inject_faults(fraction, seed)
    assert np.array_equal(a.fault_mask, b.fault_mask)
    assert int(a.fault_mask.sum()) == int(fraction * 9 * 13)
