"""Tripod Hamiltonian, adiabatic frame and geometric phase.

Four levels: three ground states (indices 0, 2, 3) coupled to one excited
state (index 1) by the pump, Stokes and control fields.  On resonance the
instantaneous eigenbasis contains two degenerate dark states |Phi_1>,
|Phi_2> with zero eigenvalue and two bright states |Phi_3>, |Phi_4> at
+-Omega/2.  The dark doublet is degenerate throughout, so transport inside
it is purely geometric: the accumulated angle is

    theta_g = integral  phi'(t) sin(theta(t)) dt.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .pulses import MixingAngles, Ordering, PulseConfig, mixing_angles, pulse_envelopes, rms_rabi

_SQRT2 = np.sqrt(2.0)


def hamiltonian(t: float, cfg: PulseConfig) -> np.ndarray:
    """4x4 rotating-frame Hamiltonian at time t (hbar = 1)."""
    op, os_, oc = pulse_envelopes(t, cfg)
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1] = h[1, 0] = 0.5 * op
    h[1, 2] = h[2, 1] = 0.5 * os_
    h[1, 3] = h[3, 1] = 0.5 * oc
    return h


def frame_matrix(angles: MixingAngles) -> np.ndarray:
    """Unitary whose columns are |Phi_1>, |Phi_2>, |Phi_3>, |Phi_4>."""
    st, ct = np.sin(angles.theta), np.cos(angles.theta)
    sp, cp = np.sin(angles.phi), np.cos(angles.phi)
    r = np.empty((4, 4), dtype=complex)
    r[:, 0] = [ct, 0.0, -(st * cp + 1j * sp), -(st * sp - 1j * cp)]
    r[:, 1] = [ct, 0.0, -(st * cp - 1j * sp), -(st * sp + 1j * cp)]
    r[:, 2] = [st, 1.0, ct * cp, ct * sp]
    r[:, 3] = [st, -1.0, ct * cp, ct * sp]
    return r / _SQRT2


def frame_velocity(angles: MixingAngles) -> np.ndarray:
    """dR/dt from the analytic partial derivatives of the columns."""
    st, ct = np.sin(angles.theta), np.cos(angles.theta)
    sp, cp = np.sin(angles.phi), np.cos(angles.phi)
    d_th = np.empty((4, 4), dtype=complex)
    d_th[:, 0] = d_th[:, 1] = [-st, 0.0, -ct * cp, -ct * sp]
    d_th[:, 2] = d_th[:, 3] = [ct, 0.0, -st * cp, -st * sp]
    d_ph = np.empty((4, 4), dtype=complex)
    d_ph[:, 0] = [0.0, 0.0, st * sp - 1j * cp, -st * cp - 1j * sp]
    d_ph[:, 1] = [0.0, 0.0, st * sp + 1j * cp, -st * cp + 1j * sp]
    d_ph[:, 2] = d_ph[:, 3] = [0.0, 0.0, -ct * sp, ct * cp]
    return (d_th * angles.theta_dot + d_ph * angles.phi_dot) / _SQRT2


@dataclass(frozen=True)
class AdiabaticFrame:
    """Instantaneous eigenframe: R, eigenvalues and the generator R^dag dR/dt."""

    t: float
    R: np.ndarray
    energies: np.ndarray
    generator: np.ndarray
    angles: MixingAngles


def adiabatic_frame(t: float, cfg: PulseConfig) -> AdiabaticFrame:
    angles = mixing_angles(t, cfg)
    r = frame_matrix(angles)
    omega = float(rms_rabi(t, cfg))
    energies = np.array([0.0, 0.0, 0.5 * omega, -0.5 * omega])
    gen = r.conj().T @ frame_velocity(angles)
    return AdiabaticFrame(t=float(t), R=r, energies=energies, generator=gen, angles=angles)


def geometric_phase(cfg: PulseConfig, epsabs: float = 1e-10) -> float:
    """Signed angle swept inside the dark doublet over the full window."""

    def rate(t: float) -> float:
        ang = mixing_angles(t, cfg)
        return ang.phi_dot * np.sin(ang.theta)

    value, _ = quad(rate, cfg.start, cfg.end, epsabs=epsabs, epsrel=1e-10, limit=400)
    return value


@dataclass(frozen=True)
class TargetState:
    """Ideal lossless final state |Psi(t_end)> and the angle that built it."""

    amplitudes: np.ndarray
    theta_g: float

    def expectation(self, rho: np.ndarray) -> float:
        """<Psi| rho |Psi>, the squared overlap with a density matrix."""
        return float(np.real(self.amplitudes.conj() @ rho @ self.amplitudes))


def target_state(cfg: PulseConfig, theta_g: float | None = None) -> TargetState:
    """Bare-basis end state reached by ideal adiabatic dark-state transport.

    Starting from the first ground state, the final superposition is fixed
    by the ordering and the geometric angle alone.
    """
    if theta_g is None:
        theta_g = geometric_phase(cfg)
    c, s = np.cos(theta_g), np.sin(theta_g)
    if cfg.ordering is Ordering.OVERLAP:
        amps = np.array([0.0, 0.0, -1.0, -1.0]) / _SQRT2
    elif cfg.ordering is Ordering.SCP:
        amps = np.array([0.0, 0.0, -s, -c])
    elif cfg.ordering is Ordering.CSP:
        amps = np.array([0.0, 0.0, -c, s])
    else:  # fractional: the pump turns back off, part of the population returns
        amps = np.array([c, 0.0, -s, 0.0])
    return TargetState(amplitudes=amps.astype(complex), theta_g=float(theta_g))
