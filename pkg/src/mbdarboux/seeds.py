"""Exact seed backgrounds and their Lax wavefunctions.

Right wavefunctions solve ``psi_tau = (U - lam J) psi`` and
``psi_zeta = <alpha(lam) A> psi``; left (row) wavefunctions solve
``xi_tau = -xi (U - kappa J)`` and ``xi_zeta = -xi <alpha(kappa) A>`` and are
obtained from the right ones through ``xi(kappa) = psi(-kappa*)^H``.

Wave constants are three complex numbers: ``(C1, C2, C3)`` for the static
backgrounds and ``(C1, C_plus, C_minus)`` for the periodic ones.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import BranchPointAtE, PopulationsOutOfRange
from .model import DetuningModel, MBFieldState, Snapshot, build_U

_J = np.array([1.0, 1.0, -1.0])


def as_constants(C):
    C = np.asarray(C, dtype=np.complex128)
    if C.shape != (3,):
        raise ValueError(f"wave constants must be 3 complex numbers, got shape {C.shape}")
    if not np.any(C != 0):
        raise ValueError("wave constants must not all vanish")
    return C


def _grid(tau, zeta):
    return np.broadcast_arrays(np.asarray(tau, dtype=float), np.asarray(zeta, dtype=float))


@dataclass(frozen=True, kw_only=True)
class SeedBackground:
    detuning: DetuningModel = field(default_factory=DetuningModel)

    def fields(self, tau, zeta):
        t, _ = _grid(tau, zeta)
        return np.zeros(t.shape, complex), np.zeros(t.shape, complex)

    def psi(self, lam, constants, tau, zeta):
        raise NotImplementedError

    def psi_scaled(self, lam, constants, tau, zeta):
        """``psi`` divided by a positive pointwise factor that keeps it finite.

        Projectors only depend on the ray of the wavefunction, so dressing
        uses this form to stay finite far from the pulse cores.
        """
        return self.psi(lam, constants, tau, zeta)

    def xi(self, kappa, constants, tau, zeta):
        """Left wavefunction via the automorphism, analytic in ``constants``."""
        C = np.conj(as_constants(constants))
        return np.conj(self.psi(-np.conj(complex(kappa)), C, tau, zeta))

    def xi_scaled(self, kappa, constants, tau, zeta):
        C = np.conj(as_constants(constants))
        return np.conj(self.psi_scaled(-np.conj(complex(kappa)), C, tau, zeta))


@dataclass(frozen=True, kw_only=True)
class _DiagonalSeed(SeedBackground):
    @property
    def populations(self):
        raise NotImplementedError

    def _exponents(self, lam, tau, zeta):
        lam = complex(lam)
        g = self.detuning.bracket(self.detuning.alpha(lam))
        t, z = _grid(tau, zeta)
        n = np.asarray(self.populations)
        return -_J * lam * t[..., None] + g * n * z[..., None]

    def psi(self, lam, constants, tau, zeta):
        return as_constants(constants) * np.exp(self._exponents(lam, tau, zeta))

    def psi_scaled(self, lam, constants, tau, zeta):
        C = as_constants(constants)
        expo = self._exponents(lam, tau, zeta)
        shift = np.max(np.where(C != 0, expo.real, -np.inf), axis=-1, keepdims=True)
        return C * np.exp(expo - shift)


@dataclass(frozen=True, kw_only=True)
class ZeroSeed(_DiagonalSeed):
    """Vanishing field over the medium in its lower state."""

    @property
    def populations(self):
        return (0.0, 0.0, 1.0)


@dataclass(frozen=True, kw_only=True)
class PopulationsSeed(_DiagonalSeed):
    """Vanishing field over static level populations ``n_am + n_ap + n_b = 1``."""

    n_am: float
    n_ap: float
    n_b: float

    def __post_init__(self):
        vals = (self.n_am, self.n_ap, self.n_b)
        if any(not 0.0 <= v <= 1.0 for v in vals) or abs(sum(vals) - 1.0) > 1e-12:
            raise PopulationsOutOfRange(f"populations {vals} must lie in [0,1] and sum to 1")

    @property
    def populations(self):
        return (self.n_am, self.n_ap, self.n_b)


@dataclass(frozen=True, kw_only=True)
class PeriodicPumpSeed(SeedBackground):
    """Plane wave ``e_+ = E exp(i k zeta)`` driving the b <-> a+ transition.

    The medium starts from a state with empty upper levels, which fixes
    ``n_b = (1 + branch * x / sqrt(4|E|^2 + x^2)) / 2`` with ``x = eta - Delta``.
    """

    E: complex
    branch: int = 1

    def __post_init__(self):
        object.__setattr__(self, "E", complex(self.E))
        if not abs(self.E) > 0:
            raise ValueError("periodic pump amplitude E must be nonzero")
        if self.branch not in (1, -1):
            raise ValueError("branch must be +1 or -1")

    @property
    def inv_root(self):
        """``(4|E|^2 + x^2)^(-1/2)`` per node; equals ``branch*(2 n_b - 1)/x``."""
        return 1.0 / np.sqrt(4.0 * abs(self.E) ** 2 + self.detuning.x ** 2)

    @property
    def n_b(self):
        return 0.5 * (1.0 + self.branch * self.detuning.x * self.inv_root)

    @property
    def k(self):
        return -self.branch * float(self.detuning.bracket(self.inv_root))

    def fields(self, tau, zeta):
        t, z = _grid(tau, zeta)
        return np.zeros(t.shape, complex), self.E * np.exp(1j * self.k * z)

    def sigma(self, lam):
        s = np.sqrt(complex(lam) ** 2 - abs(self.E) ** 2)
        if abs(s) <= 1e-12 * max(1.0, abs(self.E)):
            raise BranchPointAtE(f"lambda={lam} is a branch point +-|E|")
        return s

    def psi(self, lam, constants, tau, zeta):
        return self._psi(lam, constants, tau, zeta, scaled=False)

    def psi_scaled(self, lam, constants, tau, zeta):
        return self._psi(lam, constants, tau, zeta, scaled=True)

    def _psi(self, lam, constants, tau, zeta, scaled):
        C1, Cp, Cm = as_constants(constants)
        lam = complex(lam)
        sig = self.sigma(lam)
        al = self.detuning.alpha(lam)
        g = self.detuning.bracket(al)
        c = 1j * self.branch * self.detuning.bracket(self.inv_root * al)
        k = self.k
        t, z = _grid(tau, zeta)
        th = sig * (t + c * z)
        e1 = -lam * t
        half = 0.5 * g * z
        shift = np.zeros(t.shape)
        if scaled:
            # largest real exponent among the terms that are present
            parts = [x.real for x, on in ((e1, C1), (th + half, Cp), (half - th, Cm)) if on != 0]
            shift = np.max(parts, axis=0)
        ep, em = np.exp(th + half - shift), np.exp(half - th - shift)
        out = np.empty(t.shape + (3,), dtype=np.complex128)
        out[..., 0] = C1 * np.exp(e1 - shift)
        out[..., 1] = (Cp * ep + Cm * em) * np.exp(-0.5j * k * z)
        out[..., 2] = (-(Cp * (lam + sig) * ep + Cm * (lam - sig) * em)
                       * np.exp(0.5j * k * z) / np.conj(self.E))
        return out


@dataclass(frozen=True, kw_only=True)
class NlsPeriodicSeed(SeedBackground):
    """Plane wave ``e_+ = E exp(i(k zeta + omega tau))``, ``k = omega^2 - |E|^2``.

    Only the ``tau`` Lax equation is modelled; the ``zeta`` factors follow
    the closed form without independent verification and there is no
    medium, so this seed cannot produce an :class:`MBFieldState`.
    """

    E: complex
    omega: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "E", complex(self.E))
        if not abs(self.E) > 0:
            raise ValueError("NLS background amplitude E must be nonzero")

    @property
    def k(self):
        return self.omega ** 2 - abs(self.E) ** 2

    def fields(self, tau, zeta):
        t, z = _grid(tau, zeta)
        return np.zeros(t.shape, complex), self.E * np.exp(1j * (self.k * z + self.omega * t))

    def sigma(self, lam):
        s = np.sqrt((complex(lam) - 0.5j * self.omega) ** 2 - abs(self.E) ** 2)
        if abs(s) <= 1e-12 * max(1.0, abs(self.E)):
            raise BranchPointAtE(f"lambda={lam} is a branch point of the NLS background")
        return s

    def psi(self, lam, constants, tau, zeta):
        C1, Cp, Cm = as_constants(constants)
        lam = complex(lam)
        lp = lam - 0.5j * self.omega
        sig = self.sigma(lam)
        t, z = _grid(tau, zeta)
        th = sig * (t + 1j * (lam + 0.5j * self.omega) * z)
        ep, em = np.exp(th), np.exp(-th)
        ph = self.k * z + self.omega * t
        out = np.empty(t.shape + (3,), dtype=np.complex128)
        out[..., 0] = C1 * np.exp(-lam * t + 1j * lam ** 2 * z)
        out[..., 1] = (Cp * ep + Cm * em) * np.exp(-0.5j * ph)
        out[..., 2] = (-(Cp * (lp + sig) * ep + Cm * (lp - sig) * em)
                       * np.exp(0.5j * ph) / np.conj(self.E))
        return out

    def potential(self, tau, zeta):
        return build_U(*self.fields(tau, zeta))


class SeedState(MBFieldState):
    """:class:`MBFieldState` of an exact background."""

    def __init__(self, seed):
        if isinstance(seed, NlsPeriodicSeed):
            raise ValueError("the NLS background has no Bloch state")
        self.seed = seed
        self.detuning = seed.detuning
        M = self.detuning.n_nodes
        if isinstance(seed, PeriodicPumpSeed):
            self._pure = True
        else:
            pops = np.asarray(seed.populations)
            self._pure = bool(np.any(pops == 1.0))
            self._diag = np.zeros((M, 3, 3), dtype=np.complex128)
            self._diag[:, [0, 1, 2], [0, 1, 2]] = pops

    @property
    def has_pure(self):
        return self._pure

    def evaluate(self, tau, zeta):
        t, z = _grid(tau, zeta)
        em, ep = self.seed.fields(t, z)
        U = build_U(em, ep)
        x = self.detuning.x
        if isinstance(self.seed, PeriodicPumpSeed):
            seed = self.seed
            R = seed.inv_root
            n_b = seed.n_b
            phase = np.exp(1j * seed.k * z)[..., None]
            nu_p = 1j * seed.branch * R * seed.E * phase
            A = np.zeros(t.shape + (len(x), 3, 3), dtype=np.complex128)
            A[..., 1, 1] = 1.0 - n_b
            A[..., 2, 2] = n_b
            A[..., 2, 1] = nu_p
            A[..., 1, 2] = np.conj(nu_p)
            a = None
            if self._pure:
                m = -0.5j * seed.branch / R
                u2 = np.sqrt(1.0 - n_b)
                u3 = (0.5j * x - m) * u2 / np.conj(seed.E)
                rot = np.exp(m * t[..., None])
                a = np.zeros(t.shape + (len(x), 3), dtype=np.complex128)
                a[..., 1] = u2 * rot
                a[..., 2] = u3 * phase * rot
            return Snapshot(U, A, a)
        A = np.broadcast_to(self._diag, t.shape + self._diag.shape).copy()
        a = None
        if self._pure:
            pops = np.asarray(self.seed.populations)
            a = np.zeros(t.shape + (len(x), 3), dtype=np.complex128)
            a[..., :] = pops * np.exp(0.5j * x[:, None] * _J * t[..., None, None])
        return Snapshot(U, A, a)

    def psi(self, lam, constants, tau, zeta):
        return self.seed.psi(lam, constants, tau, zeta)

    def psi_scaled(self, lam, constants, tau, zeta):
        return self.seed.psi_scaled(lam, constants, tau, zeta)

    def xi(self, kappa, constants, tau, zeta):
        return self.seed.xi(kappa, constants, tau, zeta)

    def xi_scaled(self, kappa, constants, tau, zeta):
        return self.seed.xi_scaled(kappa, constants, tau, zeta)


def seed_state(seed):
    return SeedState(seed)


def seed_wavefunction(seed, constants, lam, tau, zeta):
    return seed.psi(lam, constants, tau, zeta)


def seed_wavefunction_left(seed, constants, kappa, tau, zeta):
    return seed.xi(kappa, constants, tau, zeta)
