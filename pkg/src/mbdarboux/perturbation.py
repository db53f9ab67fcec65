"""Infinitesimal dressing: exact solutions of the linearised equations.

Letting the left spectral parameter approach the right one, ``nu -> mu``,
the binary step becomes ``U -> U + delta U1``, ``A -> A + delta A1`` with

    U1 = [J, P0],   A1 = 2 alpha(mu) [A, P0],   P0 = phi (x) chi,

where ``phi`` is a right and ``chi`` a left solution, both at ``mu`` and
normalised so that the (constant) pairing ``(chi, phi)`` equals one.
Linear combinations over several ``mu`` are again solutions, and pairing
each term with its partner at ``-mu*`` yields real (reduction-preserving)
perturbations.
"""
import csv
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .darboux import dress_once_general
from .errors import ConvergenceFailure, DegenerateInnerProduct, TrivialStep
from .linalg import commutator, commutator_J, dagger
from .model import ResidualReport, map_chunks, merge_max, stencil
from .seeds import SeedBackground, SeedState, as_constants

#: Relative variation of ``(chi, phi)`` tolerated over a grid.
PAIRING_TOL = 1e-9


@dataclass
class PerturbationField:
    """Callables giving ``U1 (S,3,3)`` and ``A1 (S,M,3,3)`` at flat points."""

    U1: Callable
    A1: Callable

    def __add__(self, other):
        return PerturbationField(lambda t, z: self.U1(t, z) + other.U1(t, z),
                                 lambda t, z: self.A1(t, z) + other.A1(t, z))


def _state(state):
    return SeedState(state) if isinstance(state, SeedBackground) else state


def _flat(tau, zeta):
    t, z = np.broadcast_arrays(np.asarray(tau, float), np.asarray(zeta, float))
    return t.ravel(), z.ravel()


@dataclass
class _Term:
    state: object
    mu: complex
    beta: complex
    right: np.ndarray
    left: np.ndarray
    norm: complex
    conjugate: bool = False

    def projector(self, t, z):
        phi = self.state.psi(self.mu, self.right, t, z)
        chi = self.state.xi(self.mu, self.left, t, z)
        P = phi[..., :, None] * chi[..., None, :] / self.norm
        return dagger(P) if self.conjugate else P

    def weights(self):
        a = self.state.detuning.alpha(self.mu)
        if self.conjugate:
            return np.conj(self.beta), -np.conj(a)
        return self.beta, a


def _make_term(state, mu, right, left, beta=1.0):
    mu = complex(mu)
    right, left = as_constants(right), as_constants(left)
    z0 = np.zeros(1)
    n0 = complex(np.sum(state.xi(mu, left, z0, z0) * state.psi(mu, right, z0, z0)))
    if not abs(n0) > 1e-300:
        raise DegenerateInnerProduct("(chi, phi) vanishes; pick other constants",
                                     location=(0.0, 0.0))
    return _Term(state, mu, complex(beta), right, left, n0)


def _field_from_terms(state, terms):
    det = state.detuning

    def pieces(t, z):
        t, z = _flat(t, z)
        M = 0
        N = 0
        for term in terms:
            P = term.projector(t, z)
            beta, a = term.weights()
            M = M + beta * P
            N = N + beta * a[None, :, None, None] * P[:, None]
        return t, z, M, N

    def U1(t, z):
        _, _, M, _ = pieces(t, z)
        return commutator_J(M)

    def A1(t, z):
        t, z, _, N = pieces(t, z)
        A = state.evaluate(t, z).A
        return 2.0 * commutator(A, N)

    return PerturbationField(U1, A1)


def infinitesimal_dt(state, mu, right_constants, left_constants):
    """Perturbation ``(U1, A1)`` generated at spectral parameter ``mu``."""
    state = _state(state)
    term = _make_term(state, mu, right_constants, left_constants)
    pf = _field_from_terms(state, [term])
    pf.pairing = lambda t, z: _pairing(term, t, z)
    return pf


def _pairing(term, t, z):
    t, z = _flat(t, z)
    phi = term.state.psi(term.mu, term.right, t, z)
    chi = term.state.xi(term.mu, term.left, t, z)
    return np.sum(chi * phi, axis=-1) / term.norm


def pairing_variation(state, mu, right_constants, left_constants, grid):
    """Max ``|(chi, phi) - 1|`` over ``grid`` after normalisation at the origin."""
    term = _make_term(_state(state), mu, right_constants, left_constants)
    t, z = grid.flat()
    return float(np.max(np.abs(_pairing(term, t, z) - 1.0)))


@dataclass(frozen=True)
class ContourSpec:
    """Discrete superposition ``sum_i beta_i (U1, A1)(mu_i)``.

    ``terms`` holds tuples ``(mu, beta, right_constants, left_constants)``.
    With ``hermitian_pairing`` every term is accompanied by its partner at
    ``-mu*`` (weight ``beta*``, constants swapped and conjugated), which
    makes ``U1`` anti-Hermitian and ``A1`` Hermitian.
    """

    terms: Tuple = ()
    hermitian_pairing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(tuple(t) for t in self.terms))
        if not self.terms:
            raise ValueError("contour needs at least one term")
        for t in self.terms:
            if len(t) != 4:
                raise ValueError("each term is (mu, beta, right_constants, left_constants)")


def superpose_symmetries(state, contour):
    state = _state(state)
    terms = []
    for mu, beta, right, left in contour.terms:
        term = _make_term(state, mu, right, left, beta)
        terms.append(term)
        if contour.hermitian_pairing:
            terms.append(_Term(state, term.mu, term.beta, term.right, term.left, term.norm,
                               conjugate=True))
    return _field_from_terms(state, terms)


def _lin_chunk(base, pert, det, t, z, h, order):
    x = det.x[None, :, None, None]
    offs, ws = stencil(order)
    snap = base.evaluate(t, z)
    U, A = snap.U, snap.A
    U1, A1 = pert.U1(t, z), pert.A1(t, z)
    dU1 = sum(w * pert.U1(t, z + o * h) for o, w in zip(offs, ws)) / h
    dA1 = sum(w * pert.A1(t + o * h, z) for o, w in zip(offs, ws)) / h
    line1 = dU1 - 0.5 * commutator_J(det.bracket(A1, axis=1))
    line2 = (dA1 - commutator(U[:, None], A1) - commutator(U1[:, None], A)
             - 0.5j * x * commutator_J(A1))
    return {"U1_zeta": float(np.max(np.abs(line1), initial=0.0)),
            "A1_tau": float(np.max(np.abs(line2), initial=0.0))}


def linearized_residual(base, pert, grid, h=1e-3, order=2):
    """Residuals of the linearised zero-curvature equations for ``pert`` about ``base``."""
    base = _state(base)
    tau, zeta = grid.flat()
    parts = map_chunks(lambda t, z: _lin_chunk(base, pert, base.detuning, t, z, h, order),
                       tau, zeta)
    return ResidualReport("linearized", merge_max(parts), grid, h, order)


@dataclass
class ConvergenceTable:
    """Finite-step error of ``(X[nu] - X)/(nu - mu)`` against ``X1``, per ``delta``."""

    deltas: List[float]
    err_U: List[float]
    err_A: List[float]
    min_order: float = 0.9

    @property
    def orders(self):
        out = []
        for i in range(1, len(self.deltas)):
            r = np.log(self.deltas[i - 1] / self.deltas[i])
            e0 = max(self.err_U[i - 1], self.err_A[i - 1])
            e1 = max(self.err_U[i], self.err_A[i])
            out.append(float(np.log(e0 / e1) / r) if e1 > 0 and e0 > 0 else float("inf"))
        return out

    @property
    def converged(self):
        return all(o >= self.min_order for o in self.orders)

    def rows(self):
        orders = [None] + self.orders
        return [(d, u, a, o) for d, u, a, o in zip(self.deltas, self.err_U, self.err_A, orders)]

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["delta", "err_U", "err_A", "order"])
            for d, u, a, o in self.rows():
                w.writerow([repr(d), repr(u), repr(a), "" if o is None else repr(o)])


def finite_difference_validation(state, mu, deltas, right_constants, left_constants, grid,
                                 direction=1.0, min_order=0.9, check=True):
    """Compare the general step with ``nu = mu + direction*delta`` to the limit.

    The step's left solution sits at ``nu`` with the same left constants,
    so the error against ``(U1, A1)`` is ``O(delta)``. With ``check`` a
    measured order below ``min_order`` raises :class:`ConvergenceFailure`.
    """
    state = _state(state)
    deltas = [float(d) for d in deltas]
    if any(d == 0 for d in deltas):
        raise TrivialStep("delta = 0 gives the identity step")
    mu = complex(mu)
    direction = complex(direction)
    pert = infinitesimal_dt(state, mu, right_constants, left_constants)
    t, z = grid.flat()
    snap = state.evaluate(t, z)
    U1, A1 = pert.U1(t, z), pert.A1(t, z)
    eu, ea = [], []
    for d in deltas:
        dn = direction * d
        dressed = dress_once_general(state, mu, mu + dn, right_constants, left_constants)
        s1 = dressed.evaluate(t, z)
        eu.append(float(np.max(np.abs((s1.U - snap.U) / dn - U1))))
        ea.append(float(np.max(np.abs((s1.A - snap.A) / dn - A1))))
    table = ConvergenceTable(deltas, eu, ea, min_order)
    if check and not table.converged:
        raise ConvergenceFailure(f"delta-expansion orders {table.orders} below {min_order}")
    return table
