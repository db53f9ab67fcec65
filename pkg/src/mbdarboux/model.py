"""Field state, Lax matrices and finite-difference verification.

A solution of the reduced Maxwell-Bloch system is represented by an
:class:`MBFieldState`: a bundle of vectorised evaluators returning, for
arrays of ``(tau, zeta)``, the potential ``U`` (carrying ``e_-`` and
``e_+``), the per-node Bloch matrices ``A`` and optionally the pure-state
amplitudes ``a``. Every check in this module treats the evaluators as
black boxes and differentiates them numerically.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from .broadening import BroadeningModel, SharpLine
from .errors import MissingPureState, SpectralPole
from .linalg import commutator, commutator_J, dagger, max_norm

EPS_POLE = 1e-12
CHUNK = 4096


@dataclass(frozen=True)
class DetuningModel:
    """Resonance shift ``Delta`` together with the broadening of ``eta``."""

    resonance_shift: float = 0.0
    broadening: BroadeningModel = field(default_factory=SharpLine)

    @cached_property
    def nodes(self):
        return self.broadening.materialize()

    @property
    def eta(self):
        return self.nodes.eta

    @property
    def weights(self):
        return self.nodes.weights

    @cached_property
    def x(self):
        """Effective detunings ``eta - Delta`` per node."""
        return self.nodes.eta - self.resonance_shift

    @property
    def n_nodes(self):
        return len(self.nodes)

    def alpha(self, lam):
        """``alpha(lam)`` at every node, shape ``(M,)``."""
        den = 2.0 * complex(lam) + 1j * self.x
        if np.any(np.abs(den) <= EPS_POLE):
            raise SpectralPole(f"spectral parameter {lam} lies on the pole line 2*lam = -i(eta - Delta)")
        return 1.0 / den

    def bracket(self, values, axis=-1):
        """Weighted node average along ``axis``."""
        values = np.moveaxis(np.asarray(values), axis, -1)
        return values @ self.weights


def alpha(lam, eta, delta, eps=EPS_POLE):
    """Return ``1 / (2 lam + i (eta - delta))``."""
    den = 2.0 * complex(lam) + 1j * (eta - delta)
    if abs(den) <= eps:
        raise SpectralPole(f"alpha has a pole at lambda={lam}, eta-Delta={eta - delta}")
    return 1.0 / den


def build_U(e_minus, e_plus):
    """Anti-Hermitian potential ``[[0,0,-e_-*],[0,0,-e_+*],[e_-,e_+,0]]``."""
    e_minus, e_plus = np.broadcast_arrays(np.asarray(e_minus, dtype=complex),
                                          np.asarray(e_plus, dtype=complex))
    U = np.zeros(e_minus.shape + (3, 3), dtype=np.complex128)
    U[..., 0, 2] = -np.conj(e_minus)
    U[..., 1, 2] = -np.conj(e_plus)
    U[..., 2, 0] = e_minus
    U[..., 2, 1] = e_plus
    return U


@dataclass(frozen=True)
class BlochComponents:
    n_am: float = 0.0
    n_ap: float = 0.0
    n_b: float = 0.0
    nu_m: complex = 0j
    nu_p: complex = 0j
    nu_a: complex = 0j

    @classmethod
    def from_matrix(cls, A):
        A = np.asarray(A)
        return cls(float(A[0, 0].real), float(A[1, 1].real), float(A[2, 2].real),
                   complex(A[2, 0]), complex(A[2, 1]), complex(A[0, 1]))


def build_A(c):
    """Hermitian Bloch matrix from its components.

    ``c`` is a :class:`BlochComponents` or any object exposing the same
    (possibly array-valued) attributes.
    """
    n_am, n_ap, n_b, nu_m, nu_p, nu_a = np.broadcast_arrays(
        *(np.asarray(v, dtype=complex) for v in (c.n_am, c.n_ap, c.n_b, c.nu_m, c.nu_p, c.nu_a)))
    A = np.empty(n_am.shape + (3, 3), dtype=np.complex128)
    A[..., 0, 0] = n_am
    A[..., 0, 1] = nu_a
    A[..., 0, 2] = np.conj(nu_m)
    A[..., 1, 0] = np.conj(nu_a)
    A[..., 1, 1] = n_ap
    A[..., 1, 2] = np.conj(nu_p)
    A[..., 2, 0] = nu_m
    A[..., 2, 1] = nu_p
    A[..., 2, 2] = n_b
    return A


@dataclass
class Snapshot:
    """State values at a batch of points.

    ``U``: ``(S, 3, 3)``; ``A``: ``(S, M, 3, 3)``; ``a``: ``(S, M, 3)`` or None.
    """

    U: np.ndarray
    A: np.ndarray
    a: Optional[np.ndarray] = None

    @property
    def e_minus(self):
        return self.U[..., 2, 0]

    @property
    def e_plus(self):
        return self.U[..., 2, 1]


class MBFieldState:
    """Base class for solution evaluators.

    Subclasses implement :meth:`evaluate`; wavefunction factories
    :meth:`psi` (right, column) and :meth:`xi` (left, row) are available on
    states that can be dressed further.
    """

    detuning: DetuningModel
    has_pure = False

    def evaluate(self, tau, zeta) -> Snapshot:
        raise NotImplementedError

    def psi(self, lam, constants, tau, zeta):
        raise NotImplementedError(f"{type(self).__name__} carries no wavefunction factory")

    def xi(self, kappa, constants, tau, zeta):
        raise NotImplementedError(f"{type(self).__name__} carries no wavefunction factory")

    def e_minus(self, tau, zeta):
        return self.evaluate(tau, zeta).e_minus

    def e_plus(self, tau, zeta):
        return self.evaluate(tau, zeta).e_plus

    def U_field(self, tau, zeta):
        return self.evaluate(tau, zeta).U

    def A_field(self, tau, zeta):
        return self.evaluate(tau, zeta).A

    def bloch(self, node, tau, zeta):
        A = self.evaluate(np.float64(tau), np.float64(zeta)).A
        return BlochComponents.from_matrix(A[node])

    def pure_state(self, node, tau, zeta):
        if not self.has_pure:
            raise MissingPureState(f"{type(self).__name__} has no pure-state amplitudes")
        return self.evaluate(np.float64(tau), np.float64(zeta)).a[node]


class CorruptedState(MBFieldState):
    """Wrap a state and rescale its field components (sensitivity checks)."""

    def __init__(self, base, e_minus_scale=1.0, e_plus_scale=1.0):
        self.base = base
        self.detuning = base.detuning
        self.has_pure = base.has_pure
        self.e_minus_scale = e_minus_scale
        self.e_plus_scale = e_plus_scale

    def evaluate(self, tau, zeta):
        snap = self.base.evaluate(tau, zeta)
        em = snap.e_minus * self.e_minus_scale
        ep = snap.e_plus * self.e_plus_scale
        return Snapshot(build_U(em, ep), snap.A, snap.a)


@dataclass(frozen=True)
class Grid2D:
    """Inclusive rectangular sampling grid, row-major in ``tau`` then ``zeta``."""

    tau_min: float
    tau_max: float
    n_tau: int
    zeta_min: float
    zeta_max: float
    n_zeta: int

    def __post_init__(self):
        if self.n_tau < 1 or self.n_zeta < 1:
            raise ValueError("grid needs at least one point per axis")
        if self.tau_max < self.tau_min or self.zeta_max < self.zeta_min:
            raise ValueError("grid bounds are reversed")

    @property
    def taus(self):
        return np.linspace(self.tau_min, self.tau_max, self.n_tau)

    @property
    def zetas(self):
        return np.linspace(self.zeta_min, self.zeta_max, self.n_zeta)

    def mesh(self):
        return np.meshgrid(self.taus, self.zetas, indexing="ij")

    def flat(self):
        T, Z = self.mesh()
        return T.ravel(), Z.ravel()

    @property
    def size(self):
        return self.n_tau * self.n_zeta

    def describe(self):
        return (f"tau=[{self.tau_min!r},{self.tau_max!r}]x{self.n_tau} "
                f"zeta=[{self.zeta_min!r},{self.zeta_max!r}]x{self.n_zeta}")


@dataclass
class ResidualReport:
    """Max-abs residual per equation over a grid."""

    kind: str
    residuals: Dict[str, float]
    grid: Grid2D
    h: float
    order: int

    @property
    def max_residual(self):
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol):
        return self.max_residual <= tol

    def to_text(self):
        lines = [f"kind={self.kind}", f"grid={self.grid.describe()}",
                 f"h={self.h!r}", f"order={self.order}"]
        lines += [f"{self.kind}.{k}={v!r}" for k, v in self.residuals.items()]
        lines.append(f"{self.kind}.max={self.max_residual!r}")
        return "\n".join(lines) + "\n"


def n_threads():
    env = os.environ.get("MBD_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def _chunks(n):
    return [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]


def map_chunks(fn, tau, zeta):
    """Apply ``fn(tau_chunk, zeta_chunk)`` over flat point arrays; results in order."""
    spans = _chunks(len(tau))
    work = [(tau[a:b], zeta[a:b]) for a, b in spans]
    workers = n_threads()
    if workers == 1 or len(work) == 1:
        return [fn(t, z) for t, z in work]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda tz: fn(*tz), work))


def merge_max(parts):
    out = {}
    for part in parts:
        for k, v in part.items():
            out[k] = max(out.get(k, 0.0), v)
    return out


def stencil(order):
    """Central first-derivative stencil: ``(offsets, weights)`` in units of ``h``."""
    if order == 2:
        return (-1.0, 1.0), (-0.5, 0.5)
    if order == 4:
        return (-2.0, -1.0, 1.0, 2.0), (1 / 12, -8 / 12, 8 / 12, -1 / 12)
    raise ValueError(f"unsupported finite-difference order {order}")


def derivative(fn, tau, zeta, h, axis, order=2):
    """Central difference of ``fn(tau, zeta)`` along ``axis`` ('tau' or 'zeta')."""
    offs, ws = stencil(order)
    acc = None
    for o, w in zip(offs, ws):
        if axis == "tau":
            v = fn(tau + o * h, zeta)
        else:
            v = fn(tau, zeta + o * h)
        acc = w * v if acc is None else acc + w * v
    return acc / h


def _snapshot_derivatives(state, tau, zeta, h, order):
    offs, ws = stencil(order)
    dA = None
    dU = None
    da = None
    for o, w in zip(offs, ws):
        s = state.evaluate(tau + o * h, zeta)
        dA = w * s.A if dA is None else dA + w * s.A
        if s.a is not None:
            da = w * s.a if da is None else da + w * s.a
        s = state.evaluate(tau, zeta + o * h)
        dU = w * s.U if dU is None else dU + w * s.U
    return dU / h, dA / h, (None if da is None else da / h)


def _amax(v):
    return float(np.max(np.abs(v), initial=0.0))


def residual_mb(state, grid, h=1e-3, order=2):
    """Residuals of the component Maxwell-Bloch equations on ``grid``.

    Field lines ``e_{-/+},zeta + <nu_{-/+}>``; population and coherence
    lines as implied by the matrix Bloch equation with ``A_12 = nu_a``.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x = state.detuning.x
    det = state.detuning

    def chunk(t, z):
        c = state.evaluate(t, z)
        dU, dA, _ = _snapshot_derivatives(state, t, z, h, order)
        A = c.A
        em = c.e_minus[:, None]
        ep = c.e_plus[:, None]
        n_am, n_ap, n_b = A[..., 0, 0], A[..., 1, 1], A[..., 2, 2]
        nu_m, nu_p, nu_a = A[..., 2, 0], A[..., 2, 1], A[..., 0, 1]
        flux_m = nu_m * np.conj(em) + np.conj(nu_m) * em
        flux_p = nu_p * np.conj(ep) + np.conj(nu_p) * ep
        return {
            "e_minus": _amax(dU[:, 2, 0] + det.bracket(nu_m)),
            "e_plus": _amax(dU[:, 2, 1] + det.bracket(nu_p)),
            "n_am": _amax(dA[..., 0, 0] + flux_m),
            "n_ap": _amax(dA[..., 1, 1] + flux_p),
            "n_b": _amax(dA[..., 2, 2] - flux_m - flux_p),
            "nu_minus": _amax(dA[..., 2, 0] - (-1j * x * nu_m + (n_am - n_b) * em
                                               + np.conj(nu_a) * ep)),
            "nu_plus": _amax(dA[..., 2, 1] - (-1j * x * nu_p + (n_ap - n_b) * ep
                                              + nu_a * em)),
            "nu_a": _amax(dA[..., 0, 1] - (-nu_p * np.conj(em) - np.conj(nu_m) * ep)),
        }

    tau, zeta = grid.flat()
    return ResidualReport("mb", merge_max(map_chunks(chunk, tau, zeta)), grid, h, order)


def residual_pure(state, grid, h=1e-3, order=2):
    """Residuals of the pure-state amplitude equations ``a_tau = (U + i(eta-Delta)J/2) a``."""
    if not state.has_pure:
        raise MissingPureState(f"{type(state).__name__} has no pure-state amplitudes")
    x = state.detuning.x
    det = state.detuning

    def chunk(t, z):
        c = state.evaluate(t, z)
        dU, _, da = _snapshot_derivatives(state, t, z, h, order)
        a = c.a
        a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
        em = c.e_minus[:, None]
        ep = c.e_plus[:, None]
        return {
            "e_minus": _amax(dU[:, 2, 0] + det.bracket(a3 * np.conj(a1))),
            "e_plus": _amax(dU[:, 2, 1] + det.bracket(a3 * np.conj(a2))),
            "a1": _amax(da[..., 0] - (0.5j * x * a1 - a3 * np.conj(em))),
            "a2": _amax(da[..., 1] - (0.5j * x * a2 - a3 * np.conj(ep))),
            "a3": _amax(da[..., 2] - (-0.5j * x * a3 + a1 * em + a2 * ep)),
        }

    tau, zeta = grid.flat()
    return ResidualReport("pure", merge_max(map_chunks(chunk, tau, zeta)), grid, h, order)


def _zcr_chunk(fn, det, t, z, h, order):
    x = det.x[None, :, None, None]
    U, A = fn(t, z)
    offs, ws = stencil(order)
    dU = sum(w * fn(t, z + o * h)[0] for o, w in zip(offs, ws)) / h
    dA = sum(w * fn(t + o * h, z)[1] for o, w in zip(offs, ws)) / h
    Abar = det.bracket(A, axis=1)
    line1 = dU - 0.5 * commutator_J(Abar)
    line2 = dA - commutator(U[:, None], A) - 0.5j * x * commutator_J(A)
    return {
        "U_zeta": _amax(line1),
        "A_tau": _amax(line2),
        "A_tau_averaged": _amax(det.bracket(line2, axis=1)),
    }


def residual_zcr(U_field, A_field, detuning, grid, h=1e-3, order=2):
    """Residuals of ``U_zeta = [J,<A>]/2`` and ``A_tau = [U,A] - i(eta-Delta)[A,J]/2``.

    ``U_field(tau, zeta)`` returns ``(S,3,3)`` and ``A_field(tau, zeta)``
    returns ``(S,M,3,3)``. Neither reduction is assumed.
    """
    def fn(t, z):
        return U_field(t, z), A_field(t, z)

    tau, zeta = grid.flat()
    parts = map_chunks(lambda t, z: _zcr_chunk(fn, detuning, t, z, h, order), tau, zeta)
    return ResidualReport("zcr", merge_max(parts), grid, h, order)


def residual_zcr_state(state, grid, h=1e-3, order=2):
    def fn(t, z):
        s = state.evaluate(t, z)
        return s.U, s.A

    tau, zeta = grid.flat()
    parts = map_chunks(lambda t, z: _zcr_chunk(fn, state.detuning, t, z, h, order), tau, zeta)
    return ResidualReport("zcr", merge_max(parts), grid, h, order)


def conservation_report(state, grid):
    """Hermiticity of ``A`` and drift along ``tau`` of ``tr A``, ``tr A^2`` and ``|a|^2``.

    Drifts are ``max |q(tau, zeta) - q(tau_min, zeta)|`` over the grid and
    nodes; ``purity_norm_drift`` is None for mixed states.
    """
    def chunk(t, z):
        s = state.evaluate(t, z)
        A = s.A
        herm = float(max_norm(A - dagger(A)))
        u_anti = float(max_norm(s.U + dagger(s.U)))
        tr = np.trace(A, axis1=-2, axis2=-1)
        tr2 = np.einsum("...ij,...ji->...", A, A)
        nrm = None if s.a is None else np.sum(np.abs(s.a) ** 2, axis=-1)
        return herm, u_anti, tr, tr2, nrm

    tau, zeta = grid.flat()
    parts = map_chunks(chunk, tau, zeta)
    shape = (grid.n_tau, grid.n_zeta, -1)

    def drift(arrs):
        q = np.concatenate(arrs).reshape(shape)
        return float(np.max(np.abs(q - q[:1]), initial=0.0))

    purity = None
    if parts[0][4] is not None:
        purity = drift([p[4] for p in parts])
    return {
        "hermiticity_dev": max(p[0] for p in parts),
        "u_antihermiticity_dev": max(p[1] for p in parts),
        "trace_drift": drift([p[2] for p in parts]),
        "trace_sq_drift": drift([p[3] for p in parts]),
        "purity_norm_drift": purity,
    }
