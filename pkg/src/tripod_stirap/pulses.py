"""Pulse sequences, dephasing-rate matrices and run configuration.

All four pulse orderings use Gaussian envelopes

    Omega_k(t) = Omega0 * exp(-(t - c_k)^2 / (w_k * T^2))

with centers c_k and width multipliers w_k fixed by the ordering.  The
mixing angles derived from the envelopes,

    tan(phi)   = Omega_c / Omega_s
    tan(theta) = Omega_p / sqrt(Omega_s^2 + Omega_c^2),

are evaluated from differences of the Gaussian exponents so that they stay
finite and smooth even where every envelope has underflowed to zero.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

# exp() underflows/overflows in float64 near +-745; stay well inside
_EXP_CLAMP = 700.0

T_SCALE = 1.0  # characteristic pulse width, all times are in units of T


class Ordering(str, enum.Enum):
    """Temporal arrangement of the pump, Stokes and control pulses."""

    OVERLAP = "overlap"
    SCP = "scp"
    CSP = "csp"
    FRACTIONAL = "fractional"

    @classmethod
    def parse(cls, name: str) -> "Ordering":
        key = name.strip().lower().replace("-", "_")
        aliases = {
            "stokes_control_pump": cls.SCP,
            "control_stokes_pump": cls.CSP,
            "fractional_stirap": cls.FRACTIONAL,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            valid = ", ".join(o.value for o in cls)
            raise ValueError(f"unknown ordering {name!r} (expected one of: {valid})") from None


# (center multiplier of tau, width multiplier of T^2) for (pump, stokes, control)
_SHAPES = {
    Ordering.OVERLAP: ((+0.5, 1.0), (-0.5, 1.0), (-0.5, 1.0)),
    Ordering.SCP: ((+0.5, 1.0), (-0.5, 1.0), (0.0, 1.0)),
    Ordering.CSP: ((+0.5, 1.0), (0.0, 1.0), (-0.5, 1.0)),
    Ordering.FRACTIONAL: ((-0.5, 1.0), (-0.5, 2.0), (+0.5, 2.0)),
}


class DephasingMatrix:
    """Symmetric matrix of pairwise dephasing rates gamma_mn >= 0.

    The diagonal is identically zero; only relative phases between distinct
    levels decay.  Instances are immutable.
    """

    def __init__(self, rates: np.ndarray):
        rates = np.asarray(rates, dtype=float)
        if rates.shape != (4, 4):
            raise ValueError(f"dephasing matrix must be 4x4, got shape {rates.shape}")
        if not np.allclose(rates, rates.T, rtol=0.0, atol=1e-12):
            raise ValueError("dephasing matrix must be symmetric")
        if np.any(np.abs(np.diag(rates)) > 1e-12):
            raise ValueError("dephasing matrix must have a zero diagonal")
        if np.any(rates < -1e-12):
            raise ValueError("dephasing rates must be non-negative")
        rates = 0.5 * (rates + rates.T)
        np.fill_diagonal(rates, 0.0)
        rates.flags.writeable = False
        self._rates = rates

    @property
    def rates(self) -> np.ndarray:
        return self._rates

    def __getitem__(self, idx) -> float:
        return float(self._rates[idx])

    def __eq__(self, other) -> bool:
        return isinstance(other, DephasingMatrix) and np.array_equal(self._rates, other._rates)

    def __repr__(self) -> str:
        return f"DephasingMatrix({self._rates.tolist()!r})"

    @classmethod
    def zeros(cls) -> "DephasingMatrix":
        return cls(np.zeros((4, 4)))

    @classmethod
    def equal(cls, rate: float) -> "DephasingMatrix":
        """All six pairwise rates set to the same value."""
        rates = float(rate) * (np.ones((4, 4)) - np.eye(4))
        return cls(rates)

    @classmethod
    def from_file(cls, path: str) -> "DephasingMatrix":
        """Read a 4x4 whitespace-separated matrix; '#' starts a comment."""
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    rows.append([float(tok) for tok in line.split()])
        values = np.array(rows, dtype=float)
        if values.size != 16:
            raise ValueError(f"dephasing matrix file must contain 16 numbers, got {values.size}")
        return cls(values.reshape(4, 4))

    def is_zero(self) -> bool:
        return not np.any(self._rates)

    def equal_rate(self) -> float | None:
        """The common off-diagonal rate, or None if the rates differ."""
        off = self._rates[~np.eye(4, dtype=bool)]
        if np.allclose(off, off[0], rtol=0.0, atol=1e-12 * max(1.0, abs(off[0]))):
            return float(off[0])
        return None


@dataclass(frozen=True)
class PulseConfig:
    """A single run: ordering, peak Rabi frequency, delay and dephasing.

    Times are in units of T, rates in units of 1/T.  `t_start`/`t_end`
    default to a window wide enough that every envelope is below
    ~1e-15 * omega0 at both edges.
    """

    ordering: Ordering
    omega0: float
    tau: float
    gamma: DephasingMatrix = field(default_factory=DephasingMatrix.zeros)
    width: float = T_SCALE
    t_start: float | None = None
    t_end: float | None = None

    def __post_init__(self):
        if isinstance(self.ordering, str):
            object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        if self.omega0 <= 0.0:
            raise ValueError("omega0 must be positive")
        if self.tau < 0.0:
            raise ValueError("tau must be non-negative")
        if self.width <= 0.0:
            raise ValueError("width must be positive")
        if self.start >= self.end:
            raise ValueError("t_start must be earlier than t_end")

    @property
    def start(self) -> float:
        if self.t_start is not None:
            return self.t_start
        return -(6.0 * self.width + self.tau)

    @property
    def end(self) -> float:
        if self.t_end is not None:
            return self.t_end
        return 6.0 * self.width + self.tau

    def with_updates(self, **changes) -> "PulseConfig":
        return replace(self, **changes)

    def shapes(self) -> tuple[tuple[float, float], ...]:
        """(center, width multiplier) for the pump, Stokes and control pulse."""
        return tuple((m * self.tau, w) for m, w in _SHAPES[self.ordering])


@dataclass(frozen=True)
class MixingAngles:
    """theta, phi and their time derivatives at one instant."""

    theta: float
    phi: float
    theta_dot: float
    phi_dot: float


def _exponents(t, cfg: PulseConfig):
    """Gaussian exponents a_k = (t - c_k)^2 / (w_k T^2) and their rates a_k'."""
    t = np.asarray(t, dtype=float)
    T2 = cfg.width * cfg.width
    a, adot = [], []
    for center, wmul in cfg.shapes():
        dt = t - center
        a.append(dt * dt / (wmul * T2))
        adot.append(2.0 * dt / (wmul * T2))
    return a, adot


def pulse_envelopes(t, cfg: PulseConfig):
    """Instantaneous (Omega_p, Omega_s, Omega_c); accepts scalars or arrays."""
    a, _ = _exponents(t, cfg)
    return tuple(cfg.omega0 * np.exp(-np.minimum(ak, _EXP_CLAMP)) for ak in a)


def rms_rabi(t, cfg: PulseConfig):
    """Root-mean-square Rabi frequency sqrt(Omega_p^2 + Omega_s^2 + Omega_c^2)."""
    op, os_, oc = pulse_envelopes(t, cfg)
    return np.sqrt(op * op + os_ * os_ + oc * oc)


def mixing_angles(t, cfg: PulseConfig) -> MixingAngles:
    """Mixing angles and derivatives, stable against envelope underflow.

    phi depends only on the Stokes/control exponent difference; theta is
    evaluated with the smallest exponent factored out, so ratios of
    underflowed envelopes never appear.
    """
    (ap, as_, ac), (dp, ds, dc) = _exponents(t, cfg)

    da = np.clip(as_ - ac, -_EXP_CLAMP, _EXP_CLAMP)
    phi = np.arctan(np.exp(da))
    phi_dot = (ds - dc) / (2.0 * np.cosh(da))

    m = np.minimum(as_, ac)
    us, uc = as_ - m, ac - m
    q2 = np.exp(-2.0 * us) + np.exp(-2.0 * uc)
    # r is half-clamped: only exp(-2r) is ever formed
    r = np.clip(ap - m, -0.5 * _EXP_CLAMP, 0.5 * _EXP_CLAMP)
    q = np.sqrt(q2)
    theta = np.arctan2(np.exp(-r), q)

    ws, wc = np.exp(-2.0 * us) / q2, np.exp(-2.0 * uc) / q2
    lever = -dp + ws * ds + wc * dc
    sin_cos = q * np.exp(-r) / (q2 + np.exp(-2.0 * r))
    theta_dot = sin_cos * lever

    return MixingAngles(
        theta=theta if theta.ndim else float(theta),
        phi=phi if phi.ndim else float(phi),
        theta_dot=theta_dot if theta_dot.ndim else float(theta_dot),
        phi_dot=phi_dot if phi_dot.ndim else float(phi_dot),
    )
