import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import lax_errors, left_lax_errors
from mbdarboux.broadening import Discrete, Gaussian, SharpLine
from mbdarboux.errors import BranchPointAtE, PopulationsOutOfRange
from mbdarboux.linalg import J
from mbdarboux.model import DetuningModel, Grid2D, derivative, residual_mb, residual_pure
from mbdarboux.seeds import (NlsPeriodicSeed, PeriodicPumpSeed, PopulationsSeed, SeedState,
                             ZeroSeed, seed_state, seed_wavefunction, seed_wavefunction_left)

BROAD = DetuningModel(0.2, Gaussian(0.0, 0.8, 7))
SEEDS = [
    ZeroSeed(),
    ZeroSeed(detuning=BROAD),
    PopulationsSeed(n_am=0.1, n_ap=0.3, n_b=0.6),
    PopulationsSeed(n_am=0.25, n_ap=0.5, n_b=0.25, detuning=BROAD),
    PeriodicPumpSeed(E=1.0),
    PeriodicPumpSeed(E=0.6 - 0.5j, branch=-1, detuning=BROAD),
]


def test_zero_seed_state():
    s = seed_state(ZeroSeed()).evaluate(np.array([0.3]), np.array([-1.0]))
    assert np.all(s.U == 0)
    assert np.array_equal(s.A[0, 0], np.diag([0, 0, 1]))


def test_populations_validation():
    with pytest.raises(PopulationsOutOfRange):
        PopulationsSeed(n_am=0.5, n_ap=0.6, n_b=-0.1)
    with pytest.raises(PopulationsOutOfRange):
        PopulationsSeed(n_am=0.5, n_ap=0.5, n_b=0.5)


def test_periodic_resonance_limits():
    for b in (1, -1):
        seed = PeriodicPumpSeed(E=1.0, branch=b)
        assert seed.n_b[0] == 0.5
        assert abs(seed.k - (-b / 2)) < 1e-15
        for x in (1e-6, -1e-6):
            near = PeriodicPumpSeed(E=1.0, branch=b, detuning=DetuningModel(0.0, SharpLine(x)))
            assert abs(near.n_b[0] - 0.5) < 1e-6
            assert abs(near.k + b / 2) < 1e-6


def test_periodic_branches_give_both_signs():
    det = DetuningModel(0.0, SharpLine(1.0))
    hi = PeriodicPumpSeed(E=1.0, branch=1, detuning=det).n_b[0]
    lo = PeriodicPumpSeed(E=1.0, branch=-1, detuning=det).n_b[0]
    assert hi > 0.5 > lo and abs(hi + lo - 1) < 1e-15


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: type(s).__name__)
def test_seed_states_are_exact(seed):
    st_ = seed_state(seed)
    g = Grid2D(-3, 3, 13, -3, 3, 13)
    assert residual_mb(st_, g, h=1e-3, order=4).max_residual <= 1e-10
    if st_.has_pure:
        assert residual_pure(st_, g, h=1e-3, order=4).max_residual <= 1e-10


@pytest.mark.parametrize("seed", SEEDS[4:], ids=["sharp", "broad"])
def test_periodic_traces_constant(seed):
    s = seed_state(seed).evaluate(*Grid2D(-4, 4, 9, -4, 4, 9).flat())
    tr = np.trace(s.A, axis1=-2, axis2=-1)
    tr2 = np.einsum("...ij,...ji->...", s.A, s.A)
    assert np.max(np.abs(tr - 1)) <= 1e-12
    assert np.max(np.abs(tr2 - tr2[:1])) <= 1e-12


def test_zero_seed_wavefunction_example():
    seed = ZeroSeed()
    psi = seed_wavefunction(seed, (1, 0, 1), 0.5, 0.0, 0.0)
    assert np.allclose(psi, (1, 0, 1))
    et, ez = lax_errors(SeedState(seed), 0.5, (1, 0, 1), np.array([0.2, -1.0]), np.array([0.3, 0.7]))
    assert et <= 1e-8 and ez <= 1e-8
    xi = seed_wavefunction_left(seed, (1, 0, 1), -0.5, 0.0, 0.0)
    assert np.allclose(xi, (1, 0, 1))


def _samples(rng, n=50):
    lam = rng.uniform(-1.5, 1.5, n) + 1j * rng.uniform(-1.5, 1.5, n)
    return lam, rng.uniform(-2, 2, n), rng.uniform(-2, 2, n)


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: type(s).__name__)
def test_right_and_left_lax_equations(seed):
    rng = np.random.default_rng(11)
    st_ = SeedState(seed)
    C = (1.0, 0.5 - 0.2j, 0.3j)
    for lam, t, z in zip(*_samples(rng)):
        if abs(lam.real) < 0.05:
            continue
        t, z = np.array([t]), np.array([z])
        et, ez = lax_errors(st_, lam, C, t, z)
        assert et <= 1e-7 and ez <= 1e-7, lam
        lt, lz = left_lax_errors(st_, lam, C, t, z)
        assert lt <= 1e-7 and lz <= 1e-7, lam


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: type(s).__name__)
def test_left_right_pairing_constant(seed):
    g = Grid2D(-2, 2, 9, -2, 2, 9)
    t, z = g.flat()
    lam = 0.4 + 0.7j
    pair = np.sum(seed.xi(lam, (0.3, 1, 0.2j), t, z) * seed.psi(lam, (1, 0.5, 0.5), t, z), -1)
    assert np.max(np.abs(pair - pair[0])) <= 1e-10 * max(1.0, abs(pair[0]))


def test_populations_zeta_exponents():
    seed = PopulationsSeed(n_am=0.1, n_ap=0.3, n_b=0.6)
    lam = 0.7 + 0.2j
    z = np.array([0.0, 1.0])
    psi = seed.psi(lam, (1, 1, 1), np.zeros(2), z)
    g = complex(seed.detuning.bracket(seed.detuning.alpha(lam)))
    ratio = (psi[1, 1] / psi[1, 0]) / (psi[0, 1] / psi[0, 0])
    assert abs(ratio - np.exp(g * (0.3 - 0.1))) <= 1e-12


@pytest.mark.parametrize("omega", [0.0, 0.7, -1.3])
def test_nls_tau_equation(omega):
    rng = np.random.default_rng(2)
    seed = NlsPeriodicSeed(E=0.8 + 0.3j, omega=omega)
    for lam, t, z in zip(*_samples(rng)):
        t, z = np.array([t]), np.array([z])
        psi = lambda tt, zz: seed.psi(lam, (1, 0.4, -0.7j), tt, zz)
        p = psi(t, z)
        d = derivative(psi, t, z, 1e-4, "tau", order=4)
        rhs = np.einsum("...ij,...j->...i", seed.potential(t, z) - lam * J, p)
        assert np.max(np.abs(d - rhs)) / max(1.0, np.abs(p).max()) <= 1e-8


def test_nls_has_no_bloch_state():
    with pytest.raises(ValueError):
        SeedState(NlsPeriodicSeed(E=1.0))


def test_branch_point_rejected():
    with pytest.raises(BranchPointAtE):
        PeriodicPumpSeed(E=0.8).psi(0.8, (1, 1, 1), 0.0, 0.0)


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False,
                          allow_infinity=False))
def test_constant_gauge_leaves_projector(c):
    from mbdarboux.linalg import projector_from_vector
    seed = PeriodicPumpSeed(E=0.9, detuning=DetuningModel(0.0, Discrete([(-1, 1), (1, 1)])))
    t, z = np.linspace(-1, 1, 5), np.linspace(0, 1, 5)
    C = np.array([0.4, 1.0, 0.2j])
    P1 = projector_from_vector(seed.psi(0.6 + 0.4j, C, t, z))
    P2 = projector_from_vector(seed.psi(0.6 + 0.4j, c * C, t, z))
    assert np.max(np.abs(P1 - P2)) <= 1e-12


def test_sigma_principal_branch_continuity():
    seed = PeriodicPumpSeed(E=1.0)
    lams = 1.5 + 1j * np.linspace(-1, 1, 201)
    sig = np.array([seed.sigma(l) for l in lams])
    assert np.all(sig.real > 0)
    assert np.max(np.abs(np.diff(sig))) < 0.05


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: type(s).__name__)
def test_scaled_wavefunction_is_same_ray(seed):
    rng = np.random.default_rng(5)
    t, z = rng.uniform(-4, 4, 20), rng.uniform(-4, 4, 20)
    for C in ((1, 0.5j, -0.3), (0, 1, 0.2), (1, 0, 0)):
        p = seed.psi(0.6 + 0.4j, C, t, z)
        q = seed.psi_scaled(0.6 + 0.4j, C, t, z)
        ratio = np.sum(np.conj(q) * p, -1) / np.sum(np.abs(q) ** 2, -1)
        assert np.all(ratio.real > 0) and np.allclose(ratio.imag, 0, atol=1e-12 * abs(ratio))
        assert np.allclose(p, ratio[:, None] * q, rtol=1e-12, atol=0)
        assert np.all(np.max(np.abs(q), -1) <= 1e3)


@pytest.mark.parametrize("seed", SEEDS, ids=lambda s: type(s).__name__)
def test_scaled_wavefunction_finite_far_out(seed):
    t = np.array([-3000.0, 3000.0, 0.0])
    z = np.array([0.0, 500.0, -2000.0])
    q = seed.psi_scaled(0.6 + 0.4j, (1, 0.5, 0.5), t, z)
    assert np.all(np.isfinite(q)) and np.all(np.max(np.abs(q), -1) > 0.1)
