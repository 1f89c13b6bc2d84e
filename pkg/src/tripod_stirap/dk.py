"""Closed-form analytics for the overlapping ordering with equal rates.

For simultaneous Stokes and control pulses (phi = pi/4) the coherence pair
(s, u) decouples from v and behaves as a dissipative two-level system with
coupling Omega_su(t), detuning Delta_su(t) and decay Gamma_v(t).  In the
dimensionless variable x = 4 t tau / T^2 everything reduces to three
profile functions; approximating the rotated coupling by a sech pulse
with a tanh-chirped detuning gives a model whose asymptotic transition
amplitudes are ratios of real gamma functions.  Together with two
adiabatic-decay integrals this yields the final dark-state population, the
coherence and the fidelity without integrating anything stiff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import GammaPole, StepSizeUnderflow, ToleranceNotMet, WrongOrdering, ZeroDelay
from .pulses import Ordering, PulseConfig, mixing_angles

_EXP_CLAMP = 700.0

# total swing of the rotation angle xi; also fixes the sech pulse area
ATAN_2SQRT2 = math.atan(2.0 * math.sqrt(2.0))
ALPHA = ATAN_2SQRT2 / (2.0 * math.pi)

# Lanczos approximation, g = 7, 15 coefficients (double precision)
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    1.0000000000000000,
    676.52036812188354,
    -1259.1392167222818,
    771.32342877543897,
    -176.61502914601414,
    12.507343225284132,
    -0.13857103397073096,
    1.0097985714045852e-05,
    -3.6295318308898549e-07,
    8.7419973248120632e-07,
    -9.1169205605037839e-07,
    6.5245122815968995e-07,
    -3.1964264626657758e-07,
    9.5826342974993923e-08,
    -1.3181772315455953e-08,
)


def gamma_real(x: float) -> float:
    """Gamma function for real x, Lanczos series plus reflection for x < 1/2.

    Accurate to ~1e-13 relative over the argument range used here (|x| of
    order unity).  Raises GammaPole within 1e-12 of a non-positive integer.
    """
    if x < 0.5:
        n = round(x)
        if n <= 0 and abs(x - n) < 1e-12:
            raise GammaPole(f"gamma function pole at {x!r}")
        return math.pi / (math.sin(math.pi * x) * gamma_real(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for k in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[k] / (z + k)
    zg = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * zg ** (z + 0.5) * math.exp(-zg) * acc


def _require_overlap_equal(cfg: PulseConfig) -> None:
    if cfg.ordering is not Ordering.OVERLAP:
        raise WrongOrdering("closed forms require the overlap ordering")
    if cfg.gamma.equal_rate() is None:
        raise WrongOrdering("closed forms require equal dephasing rates")


def x_of_t(t: float, cfg: PulseConfig) -> float:
    """Dimensionless time x = 4 t tau / T^2."""
    return 4.0 * t * cfg.tau / (cfg.width * cfg.width)


def _bigS(x: float) -> float:
    if x <= 0.0:
        return math.sqrt(1.0 + 8.0 / (1.0 + math.exp(x)) ** 2)
    w = math.exp(-min(x, _EXP_CLAMP))
    return math.sqrt(1.0 + 8.0 * w * w / (1.0 + w) ** 2)


def f1(x: float) -> float:
    """Signed detuning profile; f1(0) = 0, limits 3/4 and -1 at x -> -/+ inf."""
    if x <= 0.0:
        e = math.exp(max(x, -_EXP_CLAMP))
        return (1.0 - e * e) * _bigS(x) / (2.0 + e) ** 2
    w = math.exp(-min(x, _EXP_CLAMP))
    return (w * w - 1.0) * _bigS(x) / (1.0 + 2.0 * w) ** 2


def f2(x: float) -> float:
    """Coupling profile; f2(0) = sqrt(2)/3, peak sqrt(2)/2 at x = ln 3; positive."""
    x = min(max(x, -_EXP_CLAMP), _EXP_CLAMP)
    return 4.0 * math.sqrt(2.0) / (2.0 + math.exp(x) + 9.0 * math.exp(-x))


def g_s(x: float) -> float:
    if x <= 0.0:
        e = math.exp(max(x, -_EXP_CLAMP))
        return 2.0 * (1.0 + 2.0 * e) / (2.0 + e) ** 2
    w = math.exp(-min(x, _EXP_CLAMP))
    return 2.0 * w * (w + 2.0) / (1.0 + 2.0 * w) ** 2


def g_plus(x: float) -> float:
    s = _bigS(x)
    if x <= 0.0:
        e = math.exp(max(x, -_EXP_CLAMP))
        return (1.0 - e * e) * (1.0 + s) / (2.0 * (2.0 + e) ** 2)
    w = math.exp(-min(x, _EXP_CLAMP))
    return (w * w - 1.0) * (1.0 + s) / (2.0 * (1.0 + 2.0 * w) ** 2)


def g_minus(x: float) -> float:
    s = _bigS(x)
    if x <= 0.0:
        e = math.exp(max(x, -_EXP_CLAMP))
        return 4.0 * (e - 1.0) / ((1.0 + e) * (2.0 + e) ** 2 * (1.0 + s))
    w = math.exp(-min(x, _EXP_CLAMP))
    return 4.0 * w * w * (1.0 - w) / ((1.0 + w) * (1.0 + 2.0 * w) ** 2 * (1.0 + s))


def su_two_level(t: float, gamma: float, cfg: PulseConfig):
    """(Omega_su, Delta_su, Gamma_v) of the reduced (s, u) two-level system."""
    _require_overlap_equal(cfg)
    ang = mixing_angles(t, cfg)
    st, ct = math.sin(ang.theta), math.cos(ang.theta)
    s2t2 = (2.0 * st * ct) ** 2
    omega_su = 0.25 * gamma * (s2t2 - ct * ct * (1.0 + st * st))
    delta_su = 0.25 * gamma * (0.75 * s2t2 + ct * ct) - gamma * st * st
    gamma_v = gamma * ct * ct
    return omega_su, delta_su, gamma_v


def epsilon_rates(t: float, gamma: float, cfg: PulseConfig):
    """Smooth eigenvalue branches of the (s, u) decay matrix; they cross at x = 0."""
    _require_overlap_equal(cfg)
    x = x_of_t(t, cfg)
    return gamma * g_plus(x), gamma * g_minus(x)


def xi_angle(t: float, gamma: float, cfg: PulseConfig):
    """Rotation angle mixing s and u, continuous through the branch point, and its rate."""
    _require_overlap_equal(cfg)
    x = x_of_t(t, cfg)
    xi = -0.5 * math.atan(2.0 * math.sqrt(2.0) / (1.0 + math.exp(min(x, _EXP_CLAMP))))
    xi_dot = cfg.tau / (cfg.width * cfg.width) * f2(x)
    return xi, xi_dot


@dataclass(frozen=True)
class DKParams:
    """sech/tanh model parameters; alpha is universal, beta and delta carry the dephasing."""

    A: float
    T_eff: float
    t_max: float
    Dconst: float
    B: float
    alpha: float
    beta: float
    delta: float


def dk_params(gamma: float, cfg: PulseConfig) -> DKParams:
    _require_overlap_equal(cfg)
    if cfg.tau == 0.0:
        raise ZeroDelay("pulse delay must be positive: the model parameters diverge at tau = 0")
    T2 = cfg.width * cfg.width
    a = cfg.tau / (math.sqrt(2.0) * T2)
    t_eff = ATAN_2SQRT2 * T2 / (math.sqrt(2.0) * math.pi * cfg.tau)
    t_max = T2 / (4.0 * cfg.tau) * math.log(3.0)
    dconst = -4.0 * math.sqrt(6.0) * gamma / 25.0
    b = -64.0 * math.sqrt(3.0) * gamma * ATAN_2SQRT2 / (125.0 * math.pi)
    return DKParams(A=a, T_eff=t_eff, t_max=t_max, Dconst=dconst, B=b,
                    alpha=a * t_eff, beta=0.5 * b * t_eff, delta=0.5 * dconst * t_eff)


@dataclass(frozen=True)
class DKAmplitudes:
    """Asymptotic survival/transition amplitudes of the sech/tanh model."""

    U_pp: float
    U_mp: float


def dk_amplitudes(p: DKParams) -> DKAmplitudes:
    """Gamma-function form of the asymptotic amplitudes."""
    root = math.sqrt(p.beta * p.beta + p.alpha * p.alpha)
    u_pp = (gamma_real(0.5 + p.delta - p.beta) * gamma_real(0.5 + p.delta + p.beta)
            / (gamma_real(0.5 + p.delta + root) * gamma_real(0.5 + p.delta - root)))
    u_mp = (p.alpha * gamma_real(0.5 + p.delta - p.beta) * gamma_real(0.5 - p.delta - p.beta)
            / (gamma_real(1.0 - p.beta + root) * gamma_real(1.0 - p.beta - root)))
    return DKAmplitudes(U_pp=u_pp, U_mp=u_mp)


def dk_amplitudes_ode(p: DKParams, span: float = 12.0) -> DKAmplitudes:
    """Brute-force amplitudes: integrate the two-level model across the sech pulse.

    Keeps the gamma-function route honest.  The dressing exponent is anchored
    so that it vanishes with the dephasing constants, matching the phase
    convention of the closed form; the sech tail at span = 12 T_eff is below
    1e-10.
    """
    t0, t1 = p.t_max - span * p.T_eff, p.t_max + span * p.T_eff

    def dressing(t: float) -> float:
        z = (t - p.t_max) / p.T_eff
        # log(2 cosh z) evaluated without overflow
        log2cosh = abs(z) + math.log1p(math.exp(-2.0 * abs(z)))
        return p.Dconst * (t - p.t_max) + p.B * p.T_eff * log2cosh

    def rhs(t, y):
        c_m, c_p = y
        rate = p.A / math.cosh((t - p.t_max) / p.T_eff)
        phi = dressing(t)
        return [rate * math.exp(phi) * c_p, -rate * math.exp(-phi) * c_m]

    sol = solve_ivp(rhs, (t0, t1), [0.0, 1.0], method="RK45", rtol=1e-10, atol=1e-13)
    if not sol.success:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise ToleranceNotMet(msg)
    c_m, c_p = sol.y[0, -1], sol.y[1, -1]
    return DKAmplitudes(U_pp=float(c_p), U_mp=float(c_m))


@dataclass(frozen=True)
class AdiabaticIntegrals:
    """Decay integrals of the adiabatic solution and their dimensionless constants."""

    I_s: float
    I_u_finite: float
    c_s: float
    c_u: float


@lru_cache(maxsize=8)
def _decay_constants(epsabs: float) -> tuple[float, float]:
    opts = dict(epsabs=epsabs, epsrel=epsabs, limit=400)
    left, _ = quad(lambda x: g_plus(x) - g_s(x), -np.inf, 0.0, **opts)
    right_s, _ = quad(lambda x: g_minus(x) - g_s(x), 0.0, np.inf, **opts)
    right_u, _ = quad(lambda x: g_plus(x) - g_s(x) + 1.0, 0.0, np.inf, **opts)
    return -(left + right_s), -(left + right_u)


def adiabatic_integrals(gamma: float, cfg: PulseConfig, epsabs: float = 1e-10) -> AdiabaticIntegrals:
    """I_s and the finite part of I_u; the divergent part is the e^{-gamma t} factor."""
    _require_overlap_equal(cfg)
    if cfg.tau == 0.0:
        raise ZeroDelay("pulse delay must be positive: the decay integrals diverge at tau = 0")
    c_s, c_u = _decay_constants(epsabs)
    scale = gamma * cfg.width * cfg.width / (4.0 * cfg.tau)
    return AdiabaticIntegrals(I_s=-c_s * scale, I_u_finite=-c_u * scale, c_s=c_s, c_u=c_u)


def analytic_dark_observables(gamma: float, cfg: PulseConfig, t: float):
    """(rho^a_11 at the end of the run, Re rho^a_12 at time t).

    The population is time-independent once the pulses are over; the
    coherence keeps decaying as e^{-gamma t}.
    """
    _require_overlap_equal(cfg)
    if cfg.tau == 0.0:
        raise ZeroDelay("pulse delay must be positive")
    if gamma == 0.0:
        # exact lossless limit: U_mp -> 1/sqrt(3), U_pp -> sqrt(2/3)
        return 0.5, 0.5
    amps = dk_amplitudes(dk_params(gamma, cfg))
    ai = adiabatic_integrals(gamma, cfg)
    rho_a_11 = 0.25 + math.sqrt(3.0) / 4.0 * amps.U_mp * math.exp(ai.I_s)
    re_rho_a_12 = math.sqrt(3.0 / 8.0) * amps.U_pp * math.exp(ai.I_u_finite - gamma * t)
    return rho_a_11, re_rho_a_12


def analytic_fidelity(gamma: float, cfg: PulseConfig, t_max_eval: float) -> float:
    """Squared fidelity: final population plus the coherence at t_max_eval.

    An infinite t_max_eval drops the coherence term for gamma > 0 (the
    long-time fidelity); at gamma = 0 nothing decays and the result is 1.
    """
    rho_a_11, re_rho_a_12 = analytic_dark_observables(gamma, cfg, 0.0)
    if gamma > 0.0:
        if math.isinf(t_max_eval):
            re_rho_a_12 = 0.0
        else:
            re_rho_a_12 *= math.exp(-gamma * t_max_eval)
    return rho_a_11 + re_rho_a_12


def analytic_fidelity_expansion(gamma: float, cfg: PulseConfig, t_max_eval: float) -> float:
    """Weak-dephasing form: unit amplitudes, adiabatic decay factors only."""
    _require_overlap_equal(cfg)
    if cfg.tau == 0.0:
        raise ZeroDelay("pulse delay must be positive")
    ai = adiabatic_integrals(gamma, cfg)
    if gamma == 0.0:
        coh = 0.5
    elif math.isinf(t_max_eval):
        coh = 0.0
    else:
        coh = 0.5 * math.exp(ai.I_u_finite - gamma * t_max_eval)
    return 0.25 * (1.0 + math.exp(ai.I_s)) + coh
