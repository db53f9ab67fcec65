"""Acceptance criteria 1-9, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (shown at the end of
the pytest run) and then asserts on the same condition.
"""
import itertools
import json
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import curve_fit, minimize_scalar

from conftest import ACCEPTANCE_LINES
from mbdarboux import cli
from mbdarboux.broadening import Gaussian, SharpLine
from mbdarboux.darboux import DressingChain, DressingStep, dress_once, evaluate_chain
from mbdarboux.closedforms import TwoSolitonParams, reconcile
from mbdarboux.linalg import J, anti_hermitian_deviation, hermitian_deviation
from mbdarboux.model import DetuningModel, Grid2D, conservation_report, derivative, residual_mb
from mbdarboux.perturbation import (ContourSpec, finite_difference_validation, infinitesimal_dt,
                                    linearized_residual, superpose_symmetries)
from mbdarboux.seeds import (NlsPeriodicSeed, PeriodicPumpSeed, PopulationsSeed, ZeroSeed,
                             seed_state)

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def verdict(label, ok, detail):
    line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def envelope(state, tau, zeta):
    s = state.evaluate(tau, zeta)
    return np.sqrt(np.abs(s.e_minus) ** 2 + np.abs(s.e_plus) ** 2)


def test_criterion_1_one_soliton_validity():
    state = dress_once(seed_state(ZeroSeed()), 0.5 + 0.3j, (1, 1, 1))
    grid = Grid2D(-10, 10, 201, -10, 10, 201)
    r1 = residual_mb(state, grid, h=1e-3).max_residual
    r2 = residual_mb(state, grid, h=5e-4).max_residual
    order = np.log2(r1 / r2)
    verdict(1, r1 <= 5e-6 and order >= 1.9, f"residual={r1:.3e} order={order:.3f}")


def test_criterion_2_amplitude_and_area():
    worst_amp = worst_area = 0.0
    for mu, zeta in ((0.5, 0.0), (0.5 + 0.3j, 1.7)):
        state = dress_once(seed_state(ZeroSeed()), mu, (1, 0, 1))
        em = lambda t: float(np.abs(state.e_minus(np.array([t]), np.array([zeta]))[0]))
        res = minimize_scalar(lambda t: -em(t), bounds=(-20, 20), method="bounded",
                              options={"xatol": 1e-10})
        worst_amp = max(worst_amp, abs(-res.fun - 2 * mu.real))
        t0 = res.x
        area = sum(quad(lambda t: 2 * em(t), a, b, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
                   for a, b in ((-np.inf, t0), (t0, np.inf)))
        worst_area = max(worst_area, abs(area - 2 * np.pi))
    verdict(2, worst_amp <= 1e-9 and worst_area <= 1e-4,
            f"amplitude_err={worst_amp:.2e} area_err={worst_area:.2e}")


GAUSS9 = DetuningModel(0.2, Gaussian(0.0, 1.0, 9))
STEP_POOL = [(0.5 + 0.3j, (1, 1, 1)), (0.8 - 0.2j, (0.3, 1, 0.5j)), (1.1 + 0.1j, (1, 0.2, 0.7))]


def _conservation_cases():
    seeds = [ZeroSeed(detuning=GAUSS9),
             PopulationsSeed(n_am=0.1, n_ap=0.3, n_b=0.6, detuning=GAUSS9),
             PeriodicPumpSeed(E=0.7 + 0.2j, detuning=GAUSS9),
             PeriodicPumpSeed(E=0.5 - 0.3j, branch=-1, detuning=GAUSS9)]
    for seed in seeds:
        for n in range(4):
            yield seed, STEP_POOL[:n]


def test_criterion_3_conservation():
    grid = Grid2D(-6, 6, 41, -4, 4, 9)
    worst = {"herm": 0.0, "trace": 0.0, "norm": 0.0}
    for seed, steps in _conservation_cases():
        state = evaluate_chain(DressingChain(seed, [DressingStep(m, C) for m, C in steps]))
        rep = conservation_report(state, grid)
        worst["herm"] = max(worst["herm"], rep["hermiticity_dev"])
        worst["trace"] = max(worst["trace"], rep["trace_drift"], rep["trace_sq_drift"])
        if rep["purity_norm_drift"] is not None:
            worst["norm"] = max(worst["norm"], rep["purity_norm_drift"])
    ok = worst["herm"] <= 1e-10 and worst["trace"] <= 1e-9 and worst["norm"] <= 1e-10
    verdict(3, ok, " ".join(f"{k}={v:.2e}" for k, v in worst.items()))


def _sech(t, amp, t0):
    return amp / np.cosh(amp * (t - t0))


def test_criterion_4_two_soliton():
    mus = (0.5 + 0.2j, 0.8 - 0.1j)
    state = evaluate_chain(DressingChain(ZeroSeed(), [DressingStep(mus[0], (1, 0.5, 1)),
                                                      DressingStep(mus[1], (0.3, 1, 1))]))
    res = residual_mb(state, Grid2D(-10, 10, 81, -10, 10, 81)).max_residual
    fit_err = 0.0
    t = np.linspace(-80, 80, 32001)
    for zeta in (-40.0, 40.0):
        env = envelope(state, t, np.full_like(t, zeta))
        amps = []
        for guess in (2 * m.real for m in mus):
            # window around the peak whose height is closest to the expected amplitude
            peaks = np.flatnonzero((env[1:-1] > env[:-2]) & (env[1:-1] >= env[2:])) + 1
            i = peaks[np.argmin(np.abs(env[peaks] - guess))]
            win = np.abs(t - t[i]) <= 4 / guess
            (amp, _), _ = curve_fit(_sech, t[win], env[win], p0=(env[i], t[i]))
            amps.append(amp)
        fit_err = max(fit_err, max(abs(a - 2 * m.real) for a, m in zip(amps, mus)))
    params = TwoSolitonParams(0.5 + 0.3j, 1, 0.4 - 0.2j, 0.3j, 0.8, 1.2, 0.7 + 0.1j)
    dev = reconcile("two_soliton", params, Grid2D(-6, 6, 41, -6, 6, 41)).max_deviation
    verdict(4, res <= 1e-5 and fit_err <= 1e-3 and dev <= 1e-9,
            f"residual={res:.2e} sech_fit_err={fit_err:.2e} reconcile={dev:.2e}")


def _conversion(rate_factor):
    seed = PopulationsSeed(n_am=0.1, n_ap=0.3, n_b=0.6)
    mu = 0.5 + 0.2j
    state = dress_once(seed_state(seed), mu, (1, 1, 1))
    det = seed.detuning
    g = complex(det.bracket(det.alpha(mu))).real * (0.3 - 0.1)
    t = np.linspace(-80, 80, 16001)
    worst = 0.0
    ratios = []
    for zeta in np.linspace(0, 20, 11):
        s = state.evaluate(t, np.full_like(t, zeta))
        ratios.append(np.max(np.abs(s.e_plus)) / np.max(np.abs(s.e_minus)))
    ratios = np.array(ratios)
    zetas = np.linspace(0, 20, 11)
    predicted = ratios[0] * np.exp(rate_factor * g * zetas)
    worst = float(np.max(np.abs(ratios / predicted - 1)))
    direction = "e_minus -> e_plus" if ratios[-1] > ratios[0] else "e_plus -> e_minus"
    return worst, g, direction


def test_criterion_5_pulse_conversion_literal_rate():
    # stated rate exp(2 Re<alpha (n_ap - n_am)> zeta); see docs/errata.md
    worst, g, direction = _conversion(2.0)
    verdict(5, worst <= 0.01, f"rate=2*{g:.4f} max_rel_dev={worst:.3e} direction={direction}")


def test_criterion_5_pulse_conversion_measured_rate():
    worst, g, direction = _conversion(1.0)
    verdict("5 (rate Re<alpha>(n_ap-n_am))", worst <= 0.01,
            f"rate={g:.4f} max_rel_dev={worst:.3e} direction={direction}")


def test_criterion_6_periodic_background():
    E = 0.8 + 0.2j
    grid = Grid2D(-10, 10, 41, -10, 10, 41)
    seed_res = max(residual_mb(seed_state(s), grid, order=4).max_residual
                   for s in (PeriodicPumpSeed(E=E), PeriodicPumpSeed(E=E, branch=-1),
                             PeriodicPumpSeed(E=E, detuning=GAUSS9)))
    dressed = dress_once(seed_state(PeriodicPumpSeed(E=E)), 1.1 + 0.3j, (1, 0.5, 0.3j))
    # same 4th-order stencil as the seed check; the 2nd-order figure is reported
    dressed_res = residual_mb(dressed, grid, order=4).max_residual
    o2 = [residual_mb(dressed, grid, h=h).max_residual for h in (1e-3, 5e-4)]
    far = np.array([-50.0, 50.0, -50.0, 50.0])
    z = np.array([0.0, 0.0, 3.0, -3.0])
    tail = float(np.max(np.abs(np.abs(dressed.e_plus(far, z)) - abs(E))))
    nb_res = [float(PeriodicPumpSeed(E=E, branch=b).n_b[0]) for b in (1, -1)]
    off = DetuningModel(0.0, SharpLine(1.0))
    nb_off = [PeriodicPumpSeed(E=E, branch=b, detuning=off).n_b[0] - 0.5 for b in (1, -1)]
    branch_ok = nb_res == [0.5, 0.5] and nb_off[0] > 0 > nb_off[1]
    verdict(6, seed_res <= 1e-10 and dressed_res <= 1e-5 and tail <= 1e-6 and branch_ok,
            f"seed={seed_res:.2e} dressed={dressed_res:.2e} "
            f"(2nd order {o2[0]:.2e}, order {np.log2(o2[0] / o2[1]):.2f}) tail={tail:.2e} "
            f"n_b(x=0)={nb_res} n_b-1/2(x=1)=({nb_off[0]:+.3f},{nb_off[1]:+.3f})")


def test_criterion_7_infinitesimal_dt():
    families = [ZeroSeed(), PopulationsSeed(n_am=0.1, n_ap=0.3, n_b=0.6),
                PeriodicPumpSeed(E=0.8 + 0.1j)]
    grid = Grid2D(-3, 3, 21, -3, 3, 21)
    small = Grid2D(-1, 1, 11, -1, 1, 11)
    cr, cl = (1, 0.5, 0.3j), (0.2, 1, 0.7)
    terms = ((0.7j, 1.0, cr, cl), (0.2 - 0.4j, 0.5j, (1, 1, 1), (1, -1, 1)),
             (-0.1 + 0.9j, 0.3, (0.5, 0, 1), (1, 0.2, 0)))
    lin = ratio_lo = red = 0.0
    ratio_lo, ratio_hi = np.inf, 0.0
    for seed in families:
        pf = infinitesimal_dt(seed, 0.7j, cr, cl)
        lin = max(lin, linearized_residual(seed, pf, grid).max_residual)
        table = finite_difference_validation(seed, 0.7j, [1e-4, 5e-5, 2.5e-5], cr, cl, small,
                                             check=False)
        for errs in (table.err_U, table.err_A):
            r = np.asarray(errs[:-1]) / np.asarray(errs[1:])
            ratio_lo, ratio_hi = min(ratio_lo, r.min()), max(ratio_hi, r.max())
        paired = superpose_symmetries(seed, ContourSpec(terms, hermitian_pairing=True))
        t, zz = grid.flat()
        red = max(red, anti_hermitian_deviation(paired.U1(t, zz)),
                  hermitian_deviation(paired.A1(t, zz)))
    ok = lin <= 5e-6 and 1.6 <= ratio_lo and ratio_hi <= 2.4 and red <= 1e-11
    verdict(7, ok, f"linearized={lin:.2e} ratios=[{ratio_lo:.3f},{ratio_hi:.3f}] "
                   f"reduction={red:.2e}")


def test_criterion_8_nls_tau_equation():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(50):
        seed = NlsPeriodicSeed(E=complex(*rng.uniform(-1, 1, 2)), omega=rng.uniform(-1.5, 1.5))
        lam = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
        C = tuple(complex(*rng.uniform(-1, 1, 2)) for _ in range(3))
        t, z = np.array([rng.uniform(-5, 5)]), np.array([rng.uniform(-5, 5)])
        psi = lambda tt, zz: seed.psi(lam, C, tt, zz)
        p = psi(t, z)
        d = derivative(psi, t, z, 1e-4, "tau", order=4)
        rhs = np.einsum("...ij,...j->...i", seed.potential(t, z) - lam * J, p)
        worst = max(worst, float(np.max(np.abs(d - rhs)) / max(1.0, np.abs(p).max())))
    verdict(8, worst <= 1e-8, f"max_rel_err={worst:.2e} samples=50")


COMMANDS = {"generate": ["one_soliton.json", "periodic.json"],
            "verify": ["one_soliton.json", "one_soliton_corrupted.json", "periodic.json"],
            "reconcile": ["two_soliton_reconcile.json", "two_soliton_literal.json",
                          "dressed_periodic_reconcile.json"],
            "perturb": ["perturb.json"]}


def test_criterion_9_determinism(tmp_path):
    mismatched = []
    for command, configs in COMMANDS.items():
        for cfg in configs:
            runs = []
            for i in range(2):
                d = tmp_path / f"{command}-{cfg}-{i}"
                d.mkdir()
                cli.run([command, "--config", str(CONFIGS / cfg), "--out", str(d / "out")])
                runs.append({p.name: p.read_bytes() for p in d.iterdir()})
            if runs[0] != runs[1] or not runs[0]:
                mismatched.append(f"{command}:{cfg}")
    total = sum(map(len, COMMANDS.values()))
    verdict(9, not mismatched, f"{total - len(mismatched)}/{total} command runs byte-identical")


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
