import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

from spinfreeze import (
    FlipEvent,
    YSpec,
    build_chain,
    build_y,
    evolve_state,
    network_spectrum,
    run_schedule,
    single_excitation_hamiltonian,
    site_state,
)
from spinfreeze.errors import BudgetError
from spinfreeze.lattice import SpinNetwork
from spinfreeze.measures import plus_state
from spinfreeze.oracle import (
    MAX_ORACLE_SITES,
    FullPropagator,
    embed,
    excitation_number,
    full_evolve,
    full_hamiltonian,
    full_hamiltonian_sparse,
    full_partial_trace,
    full_phase_flip,
    leakage,
    restrict,
    single_excitation_indices,
)

from .conftest import HALF_PI, all_topologies, random_state

SMALL = {k: v for k, v in all_topologies().items() if v.n_sites <= 12}


def test_two_site_hopping_element():
    h = full_hamiltonian(build_chain(2))
    # |01> is index 1, |10> is index 2
    assert h[1, 2] == pytest.approx(1.0) and h[2, 1] == pytest.approx(1.0)
    assert np.count_nonzero(np.abs(h) > 1e-15) == 2


@pytest.mark.parametrize("name", sorted(SMALL))
def test_restriction_equals_single_excitation_matrix(name):
    net = SMALL[name]
    idx = single_excitation_indices(net.n_sites)
    h = full_hamiltonian_sparse(net)
    assert np.abs(h[np.ix_(idx, idx)].toarray() - single_excitation_hamiltonian(net)).max() <= 1e-14
    number = sp.diags(excitation_number(net.n_sites))
    assert abs(h @ number - number @ h).max() <= 1e-14


def test_uniform_field_restriction():
    net = SpinNetwork(3, ((0, 1, 1.0), (1, 2, 2.0)), energies=(0.7, 0.7, 0.7))
    idx = single_excitation_indices(3)
    assert np.allclose(full_hamiltonian(net)[np.ix_(idx, idx)], single_excitation_hamiltonian(net), atol=1e-14)


def test_budget():
    with pytest.raises(BudgetError, match="MAX_ORACLE_SITES"):
        full_hamiltonian(build_chain(MAX_ORACLE_SITES + 1))
    with pytest.raises(BudgetError):
        full_partial_trace(embed(site_state(6, 0)), [0, 1, 2, 3, 4])


def test_full_evolve_identity_at_zero(rng):
    net = build_y(YSpec(1, 2))
    psi = rng.standard_normal(2**net.n_sites) + 0j
    psi /= np.linalg.norm(psi)
    assert np.allclose(full_evolve(net, psi, 0.0), psi, atol=1e-13)


def test_full_hamiltonian_is_hermitian_dense():
    h = full_hamiltonian(build_y(YSpec(1, 2)))
    assert h.shape == (64, 64)
    assert np.array_equal(h, h.conj().T)


def test_full_evolve_matches_expm(rng):
    net = build_y(YSpec(1, 1))
    psi = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    psi /= np.linalg.norm(psi)
    assert np.allclose(full_evolve(net, psi, 0.9), expm(-0.9j * full_hamiltonian(net)) @ psi, atol=1e-12)


@pytest.mark.parametrize("name", sorted(SMALL))
def test_engines_agree(name, rng):
    net = SMALL[name]
    n = net.n_sites
    c0 = random_state(rng, n)
    spec = network_spectrum(net)
    prop = FullPropagator(net)
    number = excitation_number(n)
    for t in np.linspace(0, 2 * math.pi, 50):
        full = prop(embed(c0), t)
        assert np.abs(restrict(full, n) - evolve_state(spec, c0, t)).max() <= 1e-10
        assert leakage(full, n) <= 1e-12
        assert abs(np.sum(number * np.abs(full) ** 2) - 1) <= 1e-12


def test_flip_agrees_with_single_sector(rng):
    c = random_state(rng, 5)
    assert np.allclose(restrict(full_phase_flip(embed(c), 2, 5), 5), np.where(np.arange(5) == 2, -c, c))


def test_partial_trace_keep_all_is_projector(rng):
    psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    psi /= np.linalg.norm(psi)
    assert np.allclose(full_partial_trace(psi, [0, 1, 2]), np.outer(psi, psi.conj()))


def test_partial_trace_order_matters():
    psi = embed(site_state(3, 0))
    assert np.allclose(np.diag(full_partial_trace(psi, [0, 1])).real, [0, 0, 1, 0])
    assert np.allclose(np.diag(full_partial_trace(psi, [1, 0])).real, [0, 1, 0, 0])


def test_schedule_with_flips_agrees():
    from spinfreeze import build_bifurcated_y

    net = build_bifurcated_y(YSpec(1, 1))
    events = [FlipEvent(time=1.2, site=2), FlipEvent(time=1.9, site=5)]
    times = np.linspace(0, 6, 25)
    traj = run_schedule(net, 0, events, times)
    prop = FullPropagator(net)
    psi, now = embed(site_state(6, 0)), 0.0
    pending = list(events)
    for t, c in zip(times, traj.states):
        while pending and pending[0].time <= t:
            ev = pending.pop(0)
            psi, now = full_phase_flip(prop(psi, ev.time - now), ev.site, 6), ev.time
        assert np.abs(restrict(prop(psi, t - now), 6) - c).max() <= 1e-10


def test_zero_input_branch_transfer_time():
    """Brute-force search for the first |+> peak of the l1 = 0 structure."""
    net = build_y(YSpec(0, 1))
    prop = FullPropagator(net)
    plus = embed(plus_state(*net.tags["output"]).vector(3))
    hub = embed(site_state(3, 0))

    def infidelity(t):
        return 1 - abs(np.vdot(plus, prop(hub, t))) ** 2

    grid = np.linspace(0, 3, 301)
    coarse = grid[np.argmin([infidelity(t) for t in grid])]
    best = minimize_scalar(infidelity, bounds=(coarse - 0.01, coarse + 0.01), method="bounded", options={"xatol": 1e-10})
    assert best.x == pytest.approx(HALF_PI, abs=1e-6)
    assert best.fun <= 1e-12
