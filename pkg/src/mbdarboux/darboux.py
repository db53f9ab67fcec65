"""Binary Darboux transformations and dressing chains.

One binary step with right solution ``phi`` at ``mu`` and left solution
``chi`` at ``nu`` uses the dressing matrix

    D(lam) = 1 - (mu - nu) P / (lam - nu),   P = phi (x) chi / (chi, phi),

which maps ``U -> U - (mu - nu)[J, P]`` and, node by node,
``A -> D(l0) A D(l0)^-1`` with ``l0 = -i(eta - Delta)/2``. The reduced step
(``nu = -mu*``, ``chi = phi^H``) keeps ``U`` anti-Hermitian and ``A``
Hermitian; the general step is needed for the infinitesimal limit.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import kernels
from .errors import (DegenerateInnerProduct, NormDriftExceeded, SingularityError,
                     SpectralPole, TrivialStep)
from .linalg import EPS_PROJ, _first_location, commutator_J, projector_from_vector
from .model import MBFieldState, Snapshot
from .seeds import SeedBackground, SeedState, as_constants

NORM_TOL = 1e-10


@dataclass(frozen=True)
class DressingStep:
    """Spectral parameter and wave constants of one binary step.

    ``nu=None`` selects the reduction-preserving step (``nu = -mu*`` with
    left constants ``conj(constants)``).
    """

    mu: complex
    constants: Tuple[complex, complex, complex]
    nu: Optional[complex] = None
    left_constants: Optional[Tuple[complex, complex, complex]] = None

    def __post_init__(self):
        object.__setattr__(self, "mu", complex(self.mu))
        object.__setattr__(self, "constants", tuple(as_constants(self.constants).tolist()))
        if self.nu is None:
            if self.mu.real == 0.0:
                raise TrivialStep(f"Re(mu) must be nonzero, got mu={self.mu}")
            if self.left_constants is not None:
                raise ValueError("left constants are implied for a reduced step")
        else:
            object.__setattr__(self, "nu", complex(self.nu))
            if self.nu == self.mu:
                raise TrivialStep("mu and nu coincide; the step is the identity")
            if self.left_constants is None:
                raise ValueError("a general step needs left constants")
            object.__setattr__(self, "left_constants",
                               tuple(as_constants(self.left_constants).tolist()))

    @property
    def reduced(self):
        return self.nu is None

    @property
    def nu_eff(self):
        return -np.conj(self.mu) if self.nu is None else self.nu

    @property
    def s(self):
        """``mu - nu``; real ``2 Re mu`` for a reduced step."""
        return 2.0 * self.mu.real if self.nu is None else self.mu - self.nu

    def alphas(self, detuning):
        a_mu = detuning.alpha(self.mu)
        a_nu = -np.conj(a_mu) if self.reduced else detuning.alpha(self.nu)
        return a_mu, a_nu


def _validate_steps(steps):
    for q, st in enumerate(steps):
        for p in range(q):
            prev = steps[p]
            if st.mu == prev.mu:
                raise ValueError(f"step {q} repeats the spectral parameter of step {p}")
            if st.mu == prev.nu_eff:
                raise ValueError(f"step {q}: mu={st.mu} sits on the pole of step {p}")
            if not st.reduced and st.nu == prev.mu:
                raise ValueError(f"step {q}: nu={st.nu} sits on the pole of step {p}")


class DressedState(MBFieldState):
    """A seed state dressed by an ordered sequence of binary steps."""

    def __init__(self, base, steps):
        if not isinstance(base, SeedState):
            raise TypeError("DressedState is built over a SeedState")
        steps = tuple(steps)
        _validate_steps(steps)
        self.base = base
        self.steps = steps
        self.detuning = base.detuning
        self._alphas = [st.alphas(self.detuning) for st in steps]

    @property
    def has_pure(self):
        return self.base.has_pure

    def _apply_D(self, Ps, upto, lam, v):
        for p in range(upto):
            st = self.steps[p]
            den = lam - st.nu_eff
            if den == 0:
                raise SpectralPole(f"lambda={lam} is a pole of dressing step {p}")
            v = kernels.rank_one_apply(Ps[p], v, -st.s / den)
        return v

    def _apply_Dinv(self, Ps, upto, kappa, v):
        for p in range(upto):
            st = self.steps[p]
            den = kappa - st.mu
            if den == 0:
                raise SpectralPole(f"kappa={kappa} is a pole of inverse dressing step {p}")
            v = kernels.rank_one_apply_row(v, Ps[p], st.s / den)
        return v

    def projectors(self, tau, zeta):
        """Projectors of every step at the given points, in step order."""
        t, z = np.broadcast_arrays(np.asarray(tau, float), np.asarray(zeta, float))
        Ps = []
        for q, st in enumerate(self.steps):
            try:
                phi = self._apply_D(Ps, q, st.mu, self.base.psi_scaled(st.mu, st.constants, t, z))
                if st.reduced:
                    P = projector_from_vector(phi, tau=t, zeta=z)
                else:
                    chi = self._apply_Dinv(Ps, q, st.nu,
                                           self.base.xi_scaled(st.nu, st.left_constants, t, z))
                    P, inner = kernels.outer_projector(phi, chi)
                    bad = ~(np.abs(inner) > EPS_PROJ) | ~np.all(np.isfinite(P), axis=(-2, -1))
                    if np.any(bad):
                        raise DegenerateInnerProduct("(chi, phi) vanishes",
                                                     _first_location(bad, t, z))
            except SingularityError as err:
                err.step = q
                err.args = (f"step {q}: {err.args[0]}",)
                raise
            Ps.append(P)
        return Ps

    def evaluate(self, tau, zeta):
        t, z = np.broadcast_arrays(np.asarray(tau, float), np.asarray(zeta, float))
        snap = self.base.evaluate(t, z)
        U, A, a = snap.U, snap.A, snap.a
        for st, P, (a_mu, a_nu) in zip(self.steps, self.projectors(t, z), self._alphas):
            s = st.s
            U = U - s * commutator_J(P)
            A = kernels.dress_bloch(A, P, a_mu, a_nu, s)
            if a is not None:
                a = _dress_amplitudes(a, P, s, a_nu, st.reduced)
        return Snapshot(U, A, a)

    def psi(self, lam, constants, tau, zeta):
        t, z = np.broadcast_arrays(np.asarray(tau, float), np.asarray(zeta, float))
        Ps = self.projectors(t, z)
        return self._apply_D(Ps, len(Ps), complex(lam), self.base.psi(lam, constants, t, z))

    def xi(self, kappa, constants, tau, zeta):
        t, z = np.broadcast_arrays(np.asarray(tau, float), np.asarray(zeta, float))
        Ps = self.projectors(t, z)
        return self._apply_Dinv(Ps, len(Ps), complex(kappa),
                                self.base.xi(kappa, constants, t, z))


def _dress_amplitudes(a, P, s, a_nu, reduced):
    new = kernels.dress_pure(a, P, 2.0 * s * a_nu)
    if reduced:
        n0 = np.sum(np.abs(a) ** 2, axis=-1)
        n1 = np.sum(np.abs(new) ** 2, axis=-1)
        drift = float(np.max(np.abs(n1 - n0) / np.maximum(n0, 1.0), initial=0.0))
        if drift > NORM_TOL:
            raise NormDriftExceeded(f"pure-state norm drifted by {drift:.3e}")
    return new


def _split(state):
    if isinstance(state, DressedState):
        return state.base, state.steps
    if isinstance(state, SeedState):
        return state, ()
    if isinstance(state, SeedBackground):
        return SeedState(state), ()
    raise TypeError(f"cannot dress {type(state).__name__}")


def dress_once(state, mu, constants):
    """Reduction-preserving binary step with spectral parameter ``mu``."""
    base, steps = _split(state)
    return DressedState(base, steps + (DressingStep(mu, constants),))


def dress_once_general(state, mu, nu, right_constants, left_constants):
    """Two-parameter binary step: right solution at ``mu``, left solution at ``nu``."""
    base, steps = _split(state)
    return DressedState(base, steps + (DressingStep(mu, right_constants, nu, left_constants),))


def dress_pure(a, mu, P, detuning, nu=None):
    """Transform per-node amplitudes ``a`` (shape ``(..., M, 3)``) by one step.

    Reduced step: ``a - 2(mu + mu*) alpha(mu)* P a``, checked to conserve
    the norm; raises :class:`NormDriftExceeded` otherwise.
    """
    mu = complex(mu)
    if nu is None:
        s = 2.0 * mu.real
        a_nu = -np.conj(detuning.alpha(mu))
    else:
        s = mu - complex(nu)
        a_nu = detuning.alpha(nu)
    return _dress_amplitudes(np.asarray(a, dtype=np.complex128), P, s, a_nu, nu is None)


@dataclass(frozen=True)
class DressingChain:
    seed: SeedBackground
    steps: Tuple[DressingStep, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        _validate_steps(self.steps)


def evaluate_chain(chain, grid=None):
    """Fold the chain's steps over its seed.

    With ``grid`` given the result is evaluated once there so that
    singular points surface immediately (errors carry the step index).
    """
    base = SeedState(chain.seed)
    state = DressedState(base, chain.steps) if chain.steps else base
    if grid is not None:
        t, z = grid.flat()
        state.evaluate(t, z)
    return state
