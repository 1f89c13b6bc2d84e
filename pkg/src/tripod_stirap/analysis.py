"""Fidelity metrics, transition-time extraction and parameter sweeps."""

from __future__ import annotations

import enum
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import dk, effective, liouville
from .errors import AmbiguousCrossing, NoCrossing, NonHermitianState, TripodError, WrongOrdering
from .pulses import DephasingMatrix, Ordering, PulseConfig
from .tripod import TargetState, geometric_phase

_SQRT2 = math.sqrt(2.0)


class Engine(enum.Enum):
    MASTER = "master"
    EFFECTIVE = "effective"
    ANALYTIC = "analytic"


def fidelity(rho: np.ndarray, target: TargetState) -> float:
    """Squared overlap <Psi|rho|Psi> after validating the state."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"density matrix must be 4x4, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-9:
        raise NonHermitianState(f"density matrix is not Hermitian (deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-9:
        raise NonHermitianState(f"density matrix trace deviates from 1 by {abs(tr - 1.0):.3e}")
    value = complex(target.amplitudes.conj() @ rho @ target.amplitudes)
    if abs(value.imag) > 1e-9:
        raise NonHermitianState(f"fidelity acquired an imaginary part {value.imag:.3e}")
    return float(value.real)


def fidelity_from_adiabatic(rho_a: np.ndarray, theta_g: float) -> float:
    """Fidelity from the dark block of rho^a and the geometric angle alone.

    Valid in the adiabatic limit where the bright levels are empty at the
    end of the run.
    """
    c2, s2 = math.cos(2.0 * theta_g), math.sin(2.0 * theta_g)
    return float(0.5 * np.real(rho_a[0, 0] + rho_a[1, 1])
                 + c2 * np.real(rho_a[0, 1]) - s2 * np.imag(rho_a[0, 1]))


def _first_upward_crossing(times: np.ndarray, fid: np.ndarray, threshold: float,
                           interp: PchipInterpolator) -> float:
    d = fid - threshold
    hits = np.nonzero((d[:-1] < 0.0) & (d[1:] >= 0.0))[0]
    if hits.size == 0:
        raise NoCrossing(f"fidelity never rises through {threshold:.6g}")
    if hits.size > 1:
        warnings.warn(f"multiple upward crossings of {threshold:.6g}; using the first",
                      AmbiguousCrossing)
    i = int(hits[0])
    if d[i + 1] == 0.0:
        return float(times[i + 1])
    return float(brentq(lambda t: interp(t) - threshold, times[i], times[i + 1]))


def transition_time(times: np.ndarray, fid: np.ndarray, eps: float,
                    ordering: Ordering) -> float:
    """Time for the fidelity to rise between its two threshold values.

    The lower threshold is eps, except for the fractional ordering, which
    starts at a finite fidelity and uses (1 + eps) times the initial value.
    Crossings are located on a monotone cubic interpolant of the samples.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError("eps must be inside (0, 1/2)")
    times = np.asarray(times, dtype=float)
    fid = np.asarray(fid, dtype=float)
    if times.ndim != 1 or times.size < 2 or times.shape != fid.shape:
        raise ValueError("need matching 1-d time and fidelity series with at least 2 samples")
    interp = PchipInterpolator(times, fid)
    if ordering is Ordering.FRACTIONAL:
        low = (1.0 + eps) * fid[0]
    else:
        low = eps
    t_low = _first_upward_crossing(times, fid, low, interp)
    t_high = _first_upward_crossing(times, fid, 1.0 - eps, interp)
    return t_high - t_low


@dataclass(frozen=True)
class SweepPoint:
    value: float
    F2_final: float
    F2_tmax: float
    T_tr: float
    theta_g: float
    error: str | None = None
    stats: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: np.ndarray
    points: list[SweepPoint]
    engine: Engine

    def succeeded(self) -> int:
        return sum(1 for p in self.points if p.error is None)


def _point_config(cfg: PulseConfig, axis: str, value: float):
    if axis == "gamma":
        return cfg.with_updates(gamma=DephasingMatrix.equal(value)), float(value)
    cfg_pt = cfg.with_updates(tau=float(value))
    return cfg_pt, cfg_pt.gamma.equal_rate()


def _series_point(traj, value: float, eps: float, t_max_eval: float) -> SweepPoint:
    interp = PchipInterpolator(traj.t, traj.fidelity)
    t_eval = min(max(t_max_eval, traj.t[0]), traj.t[-1])
    f2_tmax = float(interp(t_eval))
    error = None
    try:
        t_tr = transition_time(traj.t, traj.fidelity, eps, traj.cfg.ordering)
    except NoCrossing as exc:
        t_tr, error = math.nan, f"{type(exc).__name__}: {exc}"
    return SweepPoint(value=float(value), F2_final=float(traj.fidelity[-1]),
                      F2_tmax=f2_tmax, T_tr=t_tr, theta_g=traj.target.theta_g,
                      error=error, stats=dict(traj.stats))


def _evaluate_point(cfg: PulseConfig, axis: str, value: float, engine: Engine,
                    samples: int, eps: float, t_max_eval: float) -> SweepPoint:
    cfg_pt, gamma_scalar = _point_config(cfg, axis, value)
    if engine is Engine.MASTER:
        return _series_point(liouville.integrate(cfg_pt, samples=samples), value, eps, t_max_eval)
    if engine is Engine.EFFECTIVE:
        return _series_point(effective.integrate_suv(cfg_pt, samples=samples), value, eps, t_max_eval)
    # closed-form route: population/coherence formulas plus the lossless
    # transition-time law T^2/(2 tau) * log((1-eps)/eps)
    f2_final = dk.analytic_fidelity(gamma_scalar, cfg_pt, math.inf)
    f2_tmax = dk.analytic_fidelity(gamma_scalar, cfg_pt, t_max_eval)
    t_tr = cfg_pt.width ** 2 / (2.0 * cfg_pt.tau) * math.log((1.0 - eps) / eps)
    return SweepPoint(value=float(value), F2_final=f2_final, F2_tmax=f2_tmax,
                      T_tr=t_tr, theta_g=geometric_phase(cfg_pt), error=None, stats={})


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("TRIPOD_THREADS", "1")))
    except ValueError:
        return 1


def sweep(cfg: PulseConfig, axis: str, values, engine: Engine,
          samples: int = 2000, eps: float = 0.1, t_max_eval: float | None = None,
          threads: int | None = None) -> SweepResult:
    """Evaluate one scalar axis (gamma or tau) point by point.

    Engine failures are recorded per row instead of aborting the sweep;
    rows stay ordered by axis value regardless of thread count.
    """
    if axis not in ("gamma", "tau"):
        raise ValueError(f"axis must be 'gamma' or 'tau', got {axis!r}")
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("values must be non-empty")
    if values.size > 1 and np.any(np.diff(values) <= 0.0):
        raise ValueError("values must be strictly increasing")
    if engine is Engine.ANALYTIC:
        if cfg.ordering is not Ordering.OVERLAP:
            raise WrongOrdering("analytic engine requires overlap ordering")
        if axis != "gamma" and cfg.gamma.equal_rate() is None:
            raise WrongOrdering("analytic engine requires equal dephasing rates")
    if t_max_eval is None:
        t_max_eval = 5.0 * cfg.width
    if threads is None:
        threads = default_threads()

    def job(value: float) -> SweepPoint:
        try:
            return _evaluate_point(cfg, axis, value, engine, samples, eps, t_max_eval)
        except TripodError as exc:
            return SweepPoint(value=float(value), F2_final=math.nan, F2_tmax=math.nan,
                              T_tr=math.nan, theta_g=math.nan,
                              error=f"{type(exc).__name__}: {exc}")

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(job, values))
    else:
        points = [job(v) for v in values]
    return SweepResult(axis=axis, values=values, points=points, engine=engine)
