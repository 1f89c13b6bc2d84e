"""Master equation for the dephasing tripod and its adiabatic-frame form.

The bare-basis equation of motion is

    i rho' = [H, rho] + D(rho),      D(rho) = -i * gamma (.) rho,

where (.) is the elementwise (Hadamard) product, so coherences decay as
rho_mn' = -gamma_mn rho_mn while populations are untouched.  The same
dynamics can be propagated in the instantaneous eigenframe, where the
non-adiabatic generator R^dag dR/dt appears explicitly; the two routes must
agree and are cross-checked in the tests.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepSizeUnderflow, ToleranceNotMet
from .pulses import DephasingMatrix, PulseConfig
from .tripod import TargetState, adiabatic_frame, hamiltonian, target_state

RTOL = 1e-9
ATOL = 1e-12


class Basis(enum.Enum):
    BARE = "bare"
    ADIABATIC = "adiabatic"


def dissipator(rho: np.ndarray, gamma: DephasingMatrix) -> np.ndarray:
    """Dephasing matrix D with D_mn = -i * gamma_mn * rho_mn, zero diagonal."""
    return -1j * gamma.rates * rho


def rhs_bare(t: float, rho: np.ndarray, cfg: PulseConfig) -> np.ndarray:
    h = hamiltonian(t, cfg)
    return -1j * (h @ rho - rho @ h + dissipator(rho, cfg.gamma))


def to_adiabatic(rho: np.ndarray, t: float, cfg: PulseConfig) -> np.ndarray:
    """rho^a = R^dag rho R in the instantaneous eigenframe at time t."""
    r = adiabatic_frame(t, cfg).R
    return r.conj().T @ rho @ r


def from_adiabatic(rho_a: np.ndarray, t: float, cfg: PulseConfig) -> np.ndarray:
    r = adiabatic_frame(t, cfg).R
    return r @ rho_a @ r.conj().T


def rhs_adiabatic(t: float, rho_a: np.ndarray, cfg: PulseConfig) -> np.ndarray:
    """Eigenframe equation: diagonal Hamiltonian, frame generator, dephasing."""
    frame = adiabatic_frame(t, cfg)
    h_a = np.diag(frame.energies).astype(complex)
    w = frame.generator
    rho = frame.R @ rho_a @ frame.R.conj().T
    d_a = frame.R.conj().T @ dissipator(rho, cfg.gamma) @ frame.R
    return -1j * (h_a @ rho_a - rho_a @ h_a + d_a) - (w @ rho_a - rho_a @ w)


@dataclass
class Trajectory:
    """Sampled solution of one run, in both bases, with derived observables."""

    cfg: PulseConfig
    basis: Basis
    t: np.ndarray
    rho: np.ndarray        # (n, 4, 4) bare basis
    rho_a: np.ndarray      # (n, 4, 4) adiabatic basis
    fidelity: np.ndarray   # (n,) squared overlap with the ideal end state
    target: TargetState
    stats: dict = field(default_factory=dict)

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.einsum("nii->ni", self.rho))

    @property
    def adiabatic_populations(self) -> np.ndarray:
        return np.real(np.einsum("nii->ni", self.rho_a))


def _solve(fun, t_span, y0, t_eval):
    sol = solve_ivp(fun, t_span, y0, method="RK45", t_eval=t_eval, rtol=RTOL, atol=ATOL)
    if not sol.success:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower():
            raise StepSizeUnderflow(msg)
        raise ToleranceNotMet(msg)
    return sol


def integrate(cfg: PulseConfig, basis: Basis = Basis.BARE, samples: int = 2000) -> Trajectory:
    """Propagate |psi_1><psi_1| from t_start to t_end, sampling on a uniform grid.

    The bare basis is the default; the adiabatic basis exercises the frame
    generator and is kept as a verification mode.
    """
    if samples < 2:
        raise ValueError("samples must be at least 2")
    t_eval = np.linspace(cfg.start, cfg.end, samples)
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[0, 0] = 1.0

    if basis is Basis.BARE:
        fun = lambda t, y: rhs_bare(t, y.reshape(4, 4), cfg).ravel()
        y0 = rho0.ravel()
    else:
        fun = lambda t, y: rhs_adiabatic(t, y.reshape(4, 4), cfg).ravel()
        y0 = to_adiabatic(rho0, cfg.start, cfg).ravel()

    sol = _solve(fun, (cfg.start, cfg.end), y0, t_eval)
    states = sol.y.T.reshape(-1, 4, 4)

    if basis is Basis.BARE:
        rho = states
        rho_a = np.stack([to_adiabatic(states[i], t_eval[i], cfg) for i in range(samples)])
    else:
        rho_a = states
        rho = np.stack([from_adiabatic(states[i], t_eval[i], cfg) for i in range(samples)])

    tgt = target_state(cfg)
    fid = np.array([tgt.expectation(rho[i]) for i in range(samples)])

    trace_err = float(np.max(np.abs(np.einsum("nii->n", rho) - 1.0)))
    herm_err = float(np.max(np.abs(rho - np.conj(np.transpose(rho, (0, 2, 1))))))
    min_eig = float(min(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0] for m in rho))
    if min_eig < -1e-6:
        warnings.warn(f"density matrix lost positivity: min eigenvalue {min_eig:.3e}")

    stats = {
        "nfev": int(sol.nfev),
        "trace_error": trace_err,
        "hermiticity_error": herm_err,
        "min_eigenvalue": min_eig,
    }
    return Trajectory(cfg=cfg, basis=basis, t=t_eval, rho=rho, rho_a=rho_a,
                      fidelity=fid, target=tgt, stats=stats)
