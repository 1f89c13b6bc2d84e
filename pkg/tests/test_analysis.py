"""Fidelity metrics, transition-time extraction, sweeps and threading."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tripod_stirap import analysis, dk
from tripod_stirap.analysis import (
    Engine, default_threads, fidelity, fidelity_from_adiabatic, sweep, transition_time,
)
from tripod_stirap.errors import AmbiguousCrossing, NoCrossing, NonHermitianState, WrongOrdering
from tripod_stirap.pulses import DephasingMatrix, Ordering, PulseConfig
from tripod_stirap.tripod import geometric_phase, target_state


def _cfg(ordering: str = "overlap", gamma: float = 0.0, **kw) -> PulseConfig:
    return PulseConfig(ordering=ordering, omega0=50.0, tau=1.5,
                       gamma=DephasingMatrix.equal(gamma), **kw)


# ------------------------------------------------------------------- fidelity

def test_fidelity_of_the_pure_target_is_one():
    tgt = target_state(_cfg())
    rho = np.outer(tgt.amplitudes, tgt.amplitudes.conj())
    assert fidelity(rho, tgt) == pytest.approx(1.0, abs=1e-14)


def test_fidelity_rejects_wrong_shape():
    tgt = target_state(_cfg())
    with pytest.raises(ValueError, match="must be 4x4"):
        fidelity(np.eye(3), tgt)


def test_fidelity_rejects_non_hermitian_state():
    tgt = target_state(_cfg())
    rho = np.diag([1.0, 0.0, 0.0, 0.0]).astype(complex)
    rho[0, 1] = 1e-3
    with pytest.raises(NonHermitianState, match="not Hermitian"):
        fidelity(rho, tgt)


def test_fidelity_rejects_bad_trace():
    tgt = target_state(_cfg())
    with pytest.raises(NonHermitianState, match="trace deviates"):
        fidelity(0.5 * np.eye(4, dtype=complex), tgt)


@pytest.mark.parametrize("ordering,gamma", [
    ("overlap", 1.0), ("scp", 0.0), ("scp", 1.0), ("fractional", 1.0),
])
def test_dark_block_fidelity_matches_the_bare_basis(master_run, ordering, gamma):
    # the target lives in the final dark doublet, so the dark block of rho^a
    # carries the whole fidelity up to residual bright leakage
    traj = master_run(ordering, gamma=gamma)
    fa = fidelity_from_adiabatic(traj.rho_a[-1], traj.target.theta_g)
    assert fa == pytest.approx(traj.fidelity[-1], abs=1e-5)


# -------------------------------------------------------------- transition time

def test_transition_time_on_a_logistic_rise():
    k = 2.3
    times = np.linspace(-8.0, 8.0, 1500)
    fid = 1.0 / (1.0 + np.exp(-k * times))
    expected = 2.0 * math.log(9.0) / k
    got = transition_time(times, fid, 0.1, Ordering.OVERLAP)
    assert got == pytest.approx(expected, rel=1e-6)


def test_transition_time_on_a_linear_ramp_is_exact():
    # pchip through collinear samples is that straight line
    times = np.linspace(0.0, 10.0, 21)
    fid = times / 10.0
    assert transition_time(times, fid, 0.1, Ordering.SCP) == pytest.approx(8.0, abs=1e-12)


def test_transition_time_fractional_threshold_scales_with_the_start():
    times = np.linspace(0.0, 10.0, 201)
    fid = 0.3 + 0.07 * times   # starts at 0.3, ends at 1.0
    t_low = (1.1 * 0.3 - 0.3) / 0.07
    t_high = (0.9 - 0.3) / 0.07
    got = transition_time(times, fid, 0.1, Ordering.FRACTIONAL)
    assert got == pytest.approx(t_high - t_low, abs=1e-12)


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, 0.7])
def test_transition_time_rejects_bad_eps(eps):
    times = np.linspace(0.0, 1.0, 10)
    with pytest.raises(ValueError, match="eps must be inside"):
        transition_time(times, times, eps, Ordering.OVERLAP)


def test_transition_time_rejects_mismatched_series():
    with pytest.raises(ValueError, match="need matching 1-d"):
        transition_time(np.linspace(0, 1, 5), np.zeros(4), 0.1, Ordering.OVERLAP)
    with pytest.raises(ValueError, match="need matching 1-d"):
        transition_time(np.zeros((2, 2)), np.zeros((2, 2)), 0.1, Ordering.OVERLAP)


def test_transition_time_without_a_crossing():
    times = np.linspace(0.0, 1.0, 50)
    with pytest.raises(NoCrossing, match="never rises through"):
        transition_time(times, np.full(50, 0.05), 0.1, Ordering.OVERLAP)


def test_transition_time_warns_on_multiple_crossings():
    # rises through 0.1 twice; the first crossing must win
    times = np.linspace(0.0, 12.0, 1201)
    fid = np.interp(times, [0.0, 2.0, 4.0, 6.0, 12.0], [0.0, 0.2, 0.05, 0.2, 1.0])
    with pytest.warns(AmbiguousCrossing, match="using the first"):
        got = transition_time(times, fid, 0.1, Ordering.OVERLAP)
    t_low_first = 1.0          # 0 -> 0.2 over [0, 2] crosses 0.1 at t = 1
    t_high = 6.0 + 0.7 / 0.8 * 6.0
    assert got == pytest.approx(t_high - t_low_first, rel=1e-3)


# ---------------------------------------------------------------------- sweeps

def test_sweep_rejects_unknown_axis():
    with pytest.raises(ValueError, match="axis must be 'gamma' or 'tau'"):
        sweep(_cfg(), "omega0", [1.0], Engine.ANALYTIC)


def test_sweep_rejects_empty_and_unsorted_grids():
    with pytest.raises(ValueError, match="values must be non-empty"):
        sweep(_cfg(), "gamma", [], Engine.ANALYTIC)
    with pytest.raises(ValueError, match="strictly increasing"):
        sweep(_cfg(), "gamma", [1.0, 1.0], Engine.ANALYTIC)
    with pytest.raises(ValueError, match="strictly increasing"):
        sweep(_cfg(), "gamma", [2.0, 1.0], Engine.ANALYTIC)


def test_analytic_engine_requires_the_overlap_ordering():
    with pytest.raises(WrongOrdering, match="analytic engine requires overlap ordering"):
        sweep(_cfg(ordering="scp"), "gamma", [0.5], Engine.ANALYTIC)


def test_analytic_engine_requires_equal_rates_on_a_tau_axis():
    m = np.full((4, 4), 0.5)
    m[0, 2] = m[2, 0] = 1.5
    np.fill_diagonal(m, 0.0)
    cfg = PulseConfig(ordering="overlap", omega0=50.0, tau=1.5, gamma=DephasingMatrix(m))
    with pytest.raises(WrongOrdering, match="equal dephasing rates"):
        sweep(cfg, "tau", [1.0, 1.5], Engine.ANALYTIC)


def test_analytic_gamma_sweep_values():
    values = [0.0, 0.5, 1.0]
    res = sweep(_cfg(), "gamma", values, Engine.ANALYTIC, eps=0.1)
    assert res.succeeded() == 3
    law = 1.0 / (2.0 * 1.5) * math.log(9.0)
    for point, g in zip(res.points, values):
        cfg_pt = _cfg(gamma=g)
        assert point.F2_final == pytest.approx(dk.analytic_fidelity(g, cfg_pt, math.inf), rel=1e-12)
        assert point.F2_tmax == pytest.approx(dk.analytic_fidelity(g, cfg_pt, 5.0), rel=1e-12)
        assert point.T_tr == pytest.approx(law, rel=1e-12)
        assert point.theta_g == pytest.approx(0.0, abs=1e-9)
        assert point.error is None


def test_analytic_tau_sweep_uses_the_updated_delay():
    res = sweep(_cfg(gamma=1.0), "tau", [1.0, 2.0], Engine.ANALYTIC, eps=0.1)
    law = [1.0 / 2.0 * math.log(9.0), 1.0 / 4.0 * math.log(9.0)]
    for point, expected in zip(res.points, law):
        assert point.T_tr == pytest.approx(expected, rel=1e-12)
    assert res.points[0].F2_final == pytest.approx(
        dk.analytic_fidelity(1.0, _cfg(gamma=1.0).with_updates(tau=1.0), math.inf), rel=1e-12)


def test_sweep_records_failures_per_row():
    # at gamma = 1 the fidelity saturates near 0.4 and never reaches 0.9,
    # so that row must carry a NoCrossing marker instead of aborting
    res = sweep(_cfg(), "gamma", [0.0, 1.0], Engine.EFFECTIVE, samples=400)
    assert res.succeeded() == 1
    ok, bad = res.points
    assert ok.error is None and math.isfinite(ok.T_tr)
    assert bad.error is not None and bad.error.startswith("NoCrossing")
    assert math.isnan(bad.T_tr)
    assert bad.F2_final == pytest.approx(0.403, abs=0.01)


def test_sweep_clamps_the_evaluation_time_to_the_window():
    res = sweep(_cfg(gamma=1.0), "gamma", [1.0], Engine.EFFECTIVE,
                samples=400, t_max_eval=1e9)
    p = res.points[0]
    assert p.F2_tmax == pytest.approx(p.F2_final, rel=1e-9)


def test_sweep_master_engine_carries_run_stats():
    res = sweep(_cfg(), "gamma", [0.5], Engine.MASTER, samples=300)
    assert res.points[0].stats["nfev"] > 0
    assert res.points[0].stats["trace_error"] < 1e-7


def test_threaded_sweep_matches_the_serial_one():
    values = [0.0, 0.3, 0.6, 0.9]
    serial = sweep(_cfg(), "gamma", values, Engine.EFFECTIVE, samples=400, threads=1)
    threaded = sweep(_cfg(), "gamma", values, Engine.EFFECTIVE, samples=400, threads=3)
    for a, b in zip(serial.points, threaded.points):
        assert a.value == b.value
        assert a.F2_final == b.F2_final
        assert a.T_tr == b.T_tr or (math.isnan(a.T_tr) and math.isnan(b.T_tr))


# ------------------------------------------------------------------- threading

def test_default_threads_reads_the_environment(monkeypatch):
    monkeypatch.delenv("TRIPOD_THREADS", raising=False)
    assert default_threads() == 1
    monkeypatch.setenv("TRIPOD_THREADS", "4")
    assert default_threads() == 4
    monkeypatch.setenv("TRIPOD_THREADS", "0")
    assert default_threads() == 1
    monkeypatch.setenv("TRIPOD_THREADS", "not-a-number")
    assert default_threads() == 1
