"""Inhomogeneous-broadening distributions and the averaging bracket.

A distribution of detunings ``f(eta)`` is always discretised into a fixed
set of quadrature nodes; Bloch variables are carried on exactly these
nodes, so that field equations and averages share one discretisation.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numpy.polynomial.hermite_e import hermegauss

from .errors import EmptyNodeSet, NonpositiveWidth


@dataclass(frozen=True)
class Nodes:
    """Materialised quadrature: detunings ``eta`` and weights summing to one."""

    eta: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.eta)

    def pairs(self):
        return list(zip(self.eta.tolist(), self.weights.tolist()))


class BroadeningModel:
    def materialize(self) -> Nodes:
        raise NotImplementedError

    def average(self, integrand):
        return average(self, integrand)


@dataclass(frozen=True)
class SharpLine(BroadeningModel):
    eta0: float = 0.0

    def materialize(self):
        return Nodes(np.array([float(self.eta0)]), np.array([1.0]))


@dataclass(frozen=True)
class Discrete(BroadeningModel):
    nodes: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple((float(e), float(w)) for e, w in self.nodes))
        if not self.nodes:
            raise EmptyNodeSet("discrete broadening needs at least one node")
        if any(w < 0 for _, w in self.nodes):
            raise ValueError("discrete broadening weights must be non-negative")
        if sum(w for _, w in self.nodes) <= 0:
            raise ValueError("discrete broadening weights must not all vanish")

    def materialize(self):
        eta = np.array([e for e, _ in self.nodes])
        w = np.array([w for _, w in self.nodes])
        return Nodes(eta, w / w.sum())


@dataclass(frozen=True)
class Gaussian(BroadeningModel):
    """Normal distribution with standard deviation ``width``.

    Nodes are probabilists' Gauss-Hermite points scaled about ``center``.
    """

    center: float = 0.0
    width: float = 1.0
    n_nodes: int = 9

    def __post_init__(self):
        if not self.width > 0:
            raise NonpositiveWidth(f"width must be positive, got {self.width}")
        if self.n_nodes < 2:
            raise ValueError("Gaussian broadening needs n_nodes >= 2")

    def materialize(self):
        x, w = hermegauss(self.n_nodes)
        w = w / w.sum()
        return Nodes(self.center + self.width * x, w)


@dataclass(frozen=True)
class Lorentzian(BroadeningModel):
    """Cauchy distribution with half-width ``width``, truncated at ``center +- cutoff``.

    With ``eta = center + width*tan(theta)`` the density becomes uniform in
    ``theta``; nodes are midpoints of a uniform ``theta`` partition and the
    truncated mass is renormalised away.
    """

    center: float = 0.0
    width: float = 1.0
    n_nodes: int = 16
    cutoff: float = 20.0

    def __post_init__(self):
        if not self.width > 0:
            raise NonpositiveWidth(f"width must be positive, got {self.width}")
        if not self.cutoff > 0:
            raise ValueError("Lorentzian cutoff must be positive")
        if self.n_nodes < 2:
            raise ValueError("Lorentzian broadening needs n_nodes >= 2")

    def materialize(self):
        theta_c = np.arctan(self.cutoff / self.width)
        edges = np.linspace(-theta_c, theta_c, self.n_nodes + 1)
        theta = 0.5 * (edges[1:] + edges[:-1])
        eta = self.center + self.width * np.tan(theta)
        return Nodes(eta, np.full(self.n_nodes, 1.0 / self.n_nodes))


def materialize(model: BroadeningModel) -> Nodes:
    return model.materialize()


def average(model, integrand):
    """Bracket ``<F> = sum_i w_i F(eta_i)`` over the materialised nodes.

    ``integrand`` is called once per node with a scalar detuning. ``model``
    may also be an already materialised :class:`Nodes`.
    """
    nodes = model if isinstance(model, Nodes) else model.materialize()
    total = 0j
    for eta, w in zip(nodes.eta, nodes.weights):
        total += w * integrand(float(eta))
    return total


def from_config(cfg):
    """Build a model from ``{"kind": "sharp"|"discrete"|"gaussian"|"lorentzian", ...}``."""
    kind = cfg.get("kind", "sharp")
    if kind == "sharp":
        return SharpLine(float(cfg.get("eta0", 0.0)))
    if kind == "discrete":
        return Discrete(tuple((n[0], n[1]) for n in cfg["nodes"]))
    if kind == "gaussian":
        return Gaussian(float(cfg.get("center", 0.0)), float(cfg["width"]),
                        int(cfg.get("n_nodes", 9)))
    if kind == "lorentzian":
        return Lorentzian(float(cfg.get("center", 0.0)), float(cfg["width"]),
                          int(cfg.get("n_nodes", 16)), float(cfg["cutoff"]))
    raise ValueError(f"unknown broadening kind {kind!r}")
