"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured figure
and its tolerance, then asserts.  Run with ``-s`` to see the lines alone::

    pytest tests/test_acceptance.py -s
"""

import math
from pathlib import Path

import mpmath
import numpy as np
import pytest

from spinfreeze import (
    FlipEvent,
    LogicalPairing,
    YSpec,
    build_bifurcated_y,
    build_chain,
    build_y,
    network_spectrum,
    run_schedule,
    single_excitation_hamiltonian,
    site_state,
)
from spinfreeze.measures import (
    concurrence,
    entanglement_of_formation,
    eof_from_concurrence,
    fidelity,
    frozen_entanglement,
    logical_entanglement,
    minus_state,
    named_target,
    plus_state,
    reduced_two_qubit_rho,
)
from spinfreeze.runner import oracle_check, sweep_flip_times
from spinfreeze.scenario import load_scenario, parse_grid, parse_scenario

from .conftest import HALF_PI, all_topologies, random_state

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}")
        return ok

    return emit


def flipped_bifurcated(spec, t1, t2, times):
    net = build_bifurcated_y(spec)
    pairing = LogicalPairing.from_network(net)
    events = [FlipEvent(t1, pairing.pair1[0]), FlipEvent(t2, pairing.pair2[0])]
    return net, run_schedule(net, net.input_site, events, times)


def test_criterion_1_perfect_state_transfer(report):
    worst = math.inf
    for n in range(2, 21):
        net = build_chain(n)
        traj = run_schedule(net, 0, [], [HALF_PI, HALF_PI + math.pi])
        worst = min(worst, *(abs(c[n - 1]) ** 2 for c in traj.states))
    ok = worst >= 1 - 1e-9
    report(1, "PST chains N=2..20 at pi/2 and pi/2+pi", ok, f"min |c_N|^2 = 1 - {1 - worst:.2e} (tol 1e-9)")
    assert ok


@pytest.mark.parametrize("l", [3, 10])
def test_criterion_2_y_structure_dynamics(report, l):
    net = build_y(YSpec(l, l))
    n2, n3 = net.tags["output"]
    times = [HALF_PI, HALF_PI + math.pi, HALF_PI + 2 * math.pi]
    traj = run_schedule(net, net.input_site, [], times)
    c = traj.states[0]
    errs = {
        "p_n2": abs(abs(c[n2]) ** 2 - 0.5),
        "p_n3": abs(abs(c[n3]) ** 2 - 0.5),
        "F_plus": abs(fidelity(c, plus_state(n2, n3)) - 1),
    }
    for k, state in enumerate(traj.states):
        errs[f"E_F(k={k})"] = abs(entanglement_of_formation(reduced_two_qubit_rho(state, n2, n3)) - 1)
    worst = max(errs, key=errs.get)
    ok = all(v <= 1e-9 for v in errs.values())
    report(2, f"Y({l},{l},{l}) outputs {n2 + 1},{n3 + 1}", ok, f"max deviation {errs[worst]:.2e} ({worst}, tol 1e-9)")
    assert ok


def test_criterion_3_decoupling(report):
    net = build_y(YSpec(1, 1))
    assert net.n_sites == 4
    minus = minus_state(*net.tags["output"]).vector(4)
    traj = run_schedule(net, net.input_site, [], np.linspace(0, 4 * math.pi, 200))
    worst = max(abs(np.vdot(minus, c)) for c in traj.states)
    ok = worst <= 1e-12
    report(3, "decoupled |-> on the 4-site Y, 200 points", ok, f"max |<-|c>| = {worst:.2e} (tol 1e-12)")
    assert ok


@pytest.mark.parametrize("l", [1, 3])
def test_criterion_4_freezing(report, l):
    times = np.linspace(HALF_PI, HALF_PI + 10 * math.pi, 401)
    net, traj = flipped_bifurcated(YSpec(l, l), HALF_PI, HALF_PI, times)
    psi_a = named_target(net, "psi_a").vector(net.n_sites)
    h_norm = float(np.linalg.norm(single_excitation_hamiltonian(net) @ psi_a))
    pairing = LogicalPairing.from_network(net)
    fid_err = ef_err = weight_err = 0.0
    for c in traj.states:
        fid_err = max(fid_err, abs(fidelity(c, named_target(net, "psi_a")) - 1))
        for ef, weight in (logical_entanglement(c, pairing), frozen_entanglement(c, pairing)):
            ef_err = max(ef_err, abs(ef - 1))
            weight_err = max(weight_err, abs(weight - 1))
    ok = fid_err <= 1e-9 and h_norm <= 1e-10 and ef_err <= 1e-9 and weight_err <= 1e-9
    report(
        4,
        f"freezing on bifurcated Y({l},{l},{l}), ten periods",
        ok,
        f"|F_a-1| {fid_err:.1e}, |H psi_a| {h_norm:.1e}, |E_F-1| {ef_err:.1e}, |w-1| {weight_err:.1e}",
    )
    assert ok


@pytest.mark.parametrize(
    "t1, t2", [(HALF_PI + 0.1, HALF_PI + 0.1), (HALF_PI - 0.1, HALF_PI - 0.1), (HALF_PI + 0.1, HALF_PI - 0.1)]
)
def test_criterion_5_imperfect_timing(report, t1, t2):
    start = max(t1, t2)
    times = start + np.linspace(0, 4 * math.pi, 801)
    net, traj = flipped_bifurcated(YSpec(3, 3), t1, t2, times)
    f_a = np.array([fidelity(c, named_target(net, "psi_a")) for c in traj.states])
    f_s = np.array([fidelity(c, named_target(net, "psi_s")) for c in traj.states])
    spread = float(f_a.max() - f_a.min())
    # 800 steps over 4 pi: a shift of 200 samples is one period pi
    period_err = float(np.abs(f_s[200:] - f_s[:-200]).max())
    swing = float(f_s.max() - f_s.min())
    ok = spread <= 1e-9 and 0 < f_a[0] < 1 and period_err <= 1e-9 and swing > 1e-6
    report(
        5,
        f"flips at pi/2{t1 - HALF_PI:+.1f}, pi/2{t2 - HALF_PI:+.1f}",
        ok,
        f"F_a = {f_a[0]:.6f} (spread {spread:.1e}), F_s period-pi error {period_err:.1e}, swing {swing:.3f}",
    )
    assert ok


def test_criterion_6_sweep_surface(report):
    scenario = load_scenario(SCENARIOS / "bifurcated_freezing.yaml")
    grid = parse_grid("pi/2-0.5 : pi/2+0.5 : 21")
    table = sweep_flip_times(scenario, scenario.sweep_spec(grid, grid))
    ef = table.column("ef").reshape(21, 21)
    peak = np.unravel_index(np.argmax(ef), ef.shape)
    asym = float(np.abs(ef - ef.T).max())
    ok = peak == (10, 10) and abs(ef[10, 10] - 1) <= 1e-9 and asym <= 1e-9
    report(
        6,
        "21x21 frozen E_F surface",
        ok,
        f"argmax {tuple(int(i) for i in peak)}, E_F(centre) = 1 - {1 - ef[10, 10]:.1e}, asymmetry {asym:.1e}",
    )
    assert ok


ORACLE_CASES = {
    "chain2": build_chain(2),
    "chain7": build_chain(7),
    "y11": build_y(YSpec(1, 1)),
    "y33": build_y(YSpec(3, 3)),
    "bif11": build_bifurcated_y(YSpec(1, 1)),
}


@pytest.mark.parametrize("name", ORACLE_CASES)
def test_criterion_7_oracle_equivalence(report, name):
    net = ORACLE_CASES[name]
    observables = ["site_probabilities"]
    if "output" in net.tags and len(net.tags["output"]) == 2:
        observables.append("ef:output")
    scenario = parse_scenario(
        {
            "network": _as_document(net),
            "samples": {"start": 0, "stop": 4 * math.pi, "count": 50},
            "observables": observables,
        }
    )
    r = oracle_check(scenario, max_n=12)
    ok = r.passed
    report(
        7,
        f"oracle equivalence {name} ({net.n_sites} sites, 50 times)",
        ok,
        f"amp {r.max_amplitude_error:.1e}, rho {r.max_rho_error:.1e} (tol 1e-10), leak {r.max_leakage:.1e} (tol 1e-12)",
    )
    assert ok


def _as_document(net):
    return {
        "sites": net.n_sites,
        "edges": [[i, j, float(c)] for i, j, c in net.edges],
        "tags": {k: list(v) for k, v in net.tags.items()},
    }


def test_criterion_8_measures(report, rng):
    n = 6
    worst = 0.0
    for _ in range(1000):
        c = random_state(rng, n)
        for a in range(n):
            for b in range(a + 1, n):
                worst = max(worst, abs(concurrence(reduced_two_qubit_rho(c, a, b)) - 2 * abs(c[a]) * abs(c[b])))
    endpoints = (eof_from_concurrence(0.0), eof_from_concurrence(1.0))
    half = eof_from_concurrence(0.5)
    with mpmath.workdps(40):
        x = (1 + mpmath.sqrt(1 - mpmath.mpf(1) / 4)) / 2
        ref = float(-x * mpmath.log(x, 2) - (1 - x) * mpmath.log(1 - x, 2))
    ok = worst <= 1e-10 and endpoints == (0.0, 1.0) and abs(half - 0.3546) <= 5e-4 and abs(half - ref) <= 1e-12
    report(
        8,
        "concurrence/E_F on 1000 random states",
        ok,
        f"|C - 2|ca||cb|| {worst:.1e} (tol 1e-10), E_F(0), E_F(1) = {endpoints}, E_F(1/2) = {half:.6f} (ref {ref:.6f})",
    )
    assert ok


@pytest.mark.parametrize("name", list(all_topologies()))
def test_criterion_9_conservation(report, name):
    net = all_topologies()[name]
    h = single_excitation_hamiltonian(net)
    last = net.n_sites - 1
    events = [FlipEvent(0.37, 0), FlipEvent(HALF_PI, last), FlipEvent(50.0, net.n_sites // 2)]
    times = np.linspace(0, 100 * math.pi, 2001)
    traj = run_schedule(net, net.input_site, events, times, network_spectrum(net))
    norm_err = 0.0
    segments = {}
    for t, c in traj:
        norm_err = max(norm_err, abs(float(np.vdot(c, c).real) - 1))
        segment = sum(ev.time <= t for ev in events)
        segments.setdefault(segment, []).append(float(np.vdot(c, h @ c).real))
    energy_err = max(max(v) - min(v) for v in segments.values())
    ok = norm_err <= 1e-12 and energy_err <= 1e-10
    report(
        9,
        f"conservation {name}, 100 periods, 3 flips",
        ok,
        f"norm {norm_err:.1e} (tol 1e-12), energy between flips {energy_err:.1e} (tol 1e-10)",
    )
    assert ok
