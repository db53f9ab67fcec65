import numpy as np
from hypothesis import HealthCheck, settings

from mbdarboux.linalg import J
from mbdarboux.model import derivative

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def lax_errors(state, lam, C, tau, zeta, h=1e-4, zeta_eq=True):
    """Relative errors of psi_tau = (U - lam J) psi and psi_zeta = <alpha A> psi."""
    psi = lambda t, z: state.psi(lam, C, t, z)
    p = psi(tau, zeta)
    snap = state.evaluate(tau, zeta)
    dt = derivative(psi, tau, zeta, h, "tau", order=4)
    rhs_t = np.einsum("...ij,...j->...i", snap.U - lam * J, p)
    scale = np.maximum(1.0, np.max(np.abs(p), axis=-1))
    et = float(np.max(np.abs(dt - rhs_t).max(axis=-1) / scale))
    if not zeta_eq:
        return et, None
    det = state.detuning
    V = det.bracket(det.alpha(lam)[:, None, None] * snap.A, axis=-3)
    dz = derivative(psi, tau, zeta, h, "zeta", order=4)
    rhs_z = np.einsum("...ij,...j->...i", V, p)
    ez = float(np.max(np.abs(dz - rhs_z).max(axis=-1) / scale))
    return et, ez


def left_lax_errors(state, kappa, C, tau, zeta, h=1e-4):
    """Errors of xi_tau = -xi (U - kappa J) and xi_zeta = -xi <alpha(kappa) A>."""
    xi = lambda t, z: state.xi(kappa, C, t, z)
    x = xi(tau, zeta)
    snap = state.evaluate(tau, zeta)
    det = state.detuning
    dt = derivative(xi, tau, zeta, h, "tau", order=4)
    dz = derivative(xi, tau, zeta, h, "zeta", order=4)
    rt = -np.einsum("...i,...ij->...j", x, snap.U - kappa * J)
    V = det.bracket(det.alpha(kappa)[:, None, None] * snap.A, axis=-3)
    rz = -np.einsum("...i,...ij->...j", x, V)
    scale = np.maximum(1.0, np.max(np.abs(x), axis=-1))
    return (float(np.max(np.abs(dt - rt).max(axis=-1) / scale)),
            float(np.max(np.abs(dz - rz).max(axis=-1) / scale)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
