"""Scenario execution, flip-timing sweeps, oracle cross-checks and CSV output."""

from __future__ import annotations

import io
import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetError, NumericalError, ValidationError
from .evolve import FlipEvent, Spectrum, network_spectrum, run_schedule, single_excitation_hamiltonian
from .expr import free_names
from .measures import (
    LogicalPairing,
    entanglement_of_formation,
    fidelity,
    four_site_rho,
    frozen_entanglement,
    logical_entanglement,
    named_target,
    reduced_two_qubit_rho,
)
from .oracle import (
    MAX_ORACLE_SITES,
    FullPropagator,
    embed,
    excitation_number,
    full_partial_trace,
    full_phase_flip,
    leakage,
    restrict,
    single_excitation_indices,
)
from .scenario import Scenario, SweepSpec

log = logging.getLogger(__name__)

CLAMP_TOL = 1e-9
NORM_TOL = 1e-12

SWEEP_COLUMNS = ("t1_alpha", "t2_alpha", "logical_weight", "ef", "projected_weight", "projected_ef")


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([row[k] for row in self.rows])

    def to_csv(self) -> str:
        """Header plus rows, 17 significant digits, ``,`` separated, ``\\n`` endings."""
        out = io.StringIO()
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(format(float(x), ".17g") for x in row) + "\n")
        return out.getvalue()

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def clamp_unit(value: float, name: str) -> float:
    """Clamp a [0, 1] quantity that strayed by rounding; raise past ``CLAMP_TOL``."""
    if -CLAMP_TOL <= value <= 1.0 + CLAMP_TOL:
        return min(max(value, 0.0), 1.0)
    raise NumericalError(f"{name} = {value!r} lies outside [0, 1]")


def _observe(scenario: Scenario, state: np.ndarray) -> list[float]:
    values = []
    net = scenario.network
    for obs in scenario.observables:
        if obs.kind == "probability":
            raw = [abs(state[s]) ** 2 for s in obs.sites]
        elif obs.kind == "fidelity":
            raw = [fidelity(state, named_target(net, obs.target))]
        elif obs.kind == "ef":
            raw = [entanglement_of_formation(reduced_two_qubit_rho(state, *obs.sites))]
        elif obs.kind == "logical_ef":
            raw = list(logical_entanglement(state, LogicalPairing(obs.sites[:2], obs.sites[2:])))
        elif obs.kind == "frozen_ef":
            raw = list(frozen_entanglement(state, LogicalPairing(obs.sites[:2], obs.sites[2:])))
        else:  # pragma: no cover - parse_observable guards kinds
            raise ValidationError(f"unknown observable kind {obs.kind!r}")
        values.extend(clamp_unit(float(v), col) for v, col in zip(raw, obs.columns))
    return values


def _bound_events(scenario: Scenario, overrides=None) -> list[FlipEvent]:
    unbound = {
        name
        for ev in scenario.events
        for name in free_names(ev.time) - set(scenario.params) - set(overrides or {})
    }
    if unbound:
        raise ValidationError(f"event times use unbound parameters {sorted(unbound)}; set them under params")
    return scenario.flip_events(overrides)


def execute(scenario: Scenario, spectrum: Spectrum | None = None, overrides=None) -> Table:
    """Run the scenario and tabulate its observables, one row per sample time.

    ``overrides`` rebinds event-time parameters, in rescaled units.
    """
    spectrum = spectrum or network_spectrum(scenario.network)
    events = _bound_events(scenario, overrides)
    traj = run_schedule(scenario.network, scenario.init, events, scenario.sample_times, spectrum)
    table = Table(scenario.columns)
    for t, state in traj:
        norm = float(np.vdot(state, state).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise NumericalError(f"norm drift at alpha*t = {t}", residual=abs(norm - 1.0))
        table.rows.append([float(t), *_observe(scenario, state)])
    return table


def _sweep_point(args) -> list[float]:
    network, spectrum, init, events, readout, pairing = args
    state = run_schedule(network, init, events, [readout], spectrum).states[0]
    frozen_ef, frozen_weight = frozen_entanglement(state, pairing)
    projected_ef, projected_weight = logical_entanglement(state, pairing)
    return [
        clamp_unit(frozen_weight, "logical_weight"),
        clamp_unit(frozen_ef, "ef"),
        clamp_unit(projected_weight, "projected_weight"),
        clamp_unit(projected_ef, "projected_ef"),
    ]


def sweep_flip_times(scenario: Scenario, sweep: SweepSpec, jobs: int = 1) -> Table:
    """Frozen logical entanglement over a grid of flip times ``(t1, t2)``.

    Each grid point applies the scenario's flips (with ``t1``/``t2`` bound),
    evolves to ``sweep.readout`` and reports the stationary encoded component:
    its weight and E_F.  The renormalised instantaneous projection at the
    readout time is added as ``projected_*`` columns.  Rows run over t1 in the
    outer loop and t2 in the inner loop regardless of ``jobs``.
    """
    spectrum = network_spectrum(scenario.network)
    pairing = sweep.pairing or LogicalPairing.from_network(scenario.network)
    points = [(t1, t2) for t1 in sweep.t1_grid for t2 in sweep.t2_grid]
    tasks = [
        (
            scenario.network,
            spectrum,
            scenario.init,
            _bound_events(scenario, {"t1": t1, "t2": t2}),
            sweep.readout,
            pairing,
        )
        for t1, t2 in points
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_sweep_point(task) for task in tasks]
    table = Table(list(SWEEP_COLUMNS))
    for (t1, t2), values in zip(points, results):
        table.rows.append([float(t1), float(t2), *values])
    return table


# --- oracle cross-check ------------------------------------------------------

AMPLITUDE_TOL = 1e-10
RHO_TOL = 1e-10
LEAK_TOL = 1e-12


@dataclass
class OracleReport:
    n_sites: int
    samples: int
    max_amplitude_error: float = 0.0
    max_rho_error: float = 0.0
    max_leakage: float = 0.0
    max_number_drift: float = 0.0
    restriction_error: float = 0.0

    @property
    def passed(self) -> bool:
        return (
            self.max_amplitude_error <= AMPLITUDE_TOL
            and self.max_rho_error <= RHO_TOL
            and self.max_leakage <= LEAK_TOL
            and self.max_number_drift <= LEAK_TOL
            and self.restriction_error <= AMPLITUDE_TOL
        )

    def lines(self) -> list[str]:
        def mark(value, tol):
            return "PASS" if value <= tol else "FAIL"

        return [
            f"sites={self.n_sites} samples={self.samples}",
            f"{mark(self.restriction_error, AMPLITUDE_TOL)} hamiltonian_restriction {self.restriction_error:.3e} (tol {AMPLITUDE_TOL:g})",
            f"{mark(self.max_amplitude_error, AMPLITUDE_TOL)} amplitudes {self.max_amplitude_error:.3e} (tol {AMPLITUDE_TOL:g})",
            f"{mark(self.max_rho_error, RHO_TOL)} reduced_density {self.max_rho_error:.3e} (tol {RHO_TOL:g})",
            f"{mark(self.max_leakage, LEAK_TOL)} sector_leakage {self.max_leakage:.3e} (tol {LEAK_TOL:g})",
            f"{mark(self.max_number_drift, LEAK_TOL)} excitation_number {self.max_number_drift:.3e} (tol {LEAK_TOL:g})",
        ]


def _check_pairs(scenario: Scenario) -> tuple[list[tuple[int, int]], list[tuple[int, ...]]]:
    net = scenario.network
    pairs, quads = [], []
    for obs in scenario.observables:
        if obs.kind == "ef":
            pairs.append(tuple(obs.sites))
        elif obs.kind in ("logical_ef", "frozen_ef"):
            quads.append(tuple(obs.sites))
    if len(net.tags.get("output", ())) == 2:
        pairs.append(tuple(net.tags["output"]))
    if len(net.tags.get("branch-end", ())) == 4:
        quads.append(tuple(net.tags["branch-end"]))
    if not pairs and net.n_sites >= 2:
        pairs.append((0, net.n_sites - 1))
    return sorted(set(pairs)), sorted(set(quads))


def oracle_check(
    scenario: Scenario,
    max_n: int = 12,
    sample_times: Sequence[float] | None = None,
    events: Sequence[FlipEvent] | None = None,
    overrides=None,
) -> OracleReport:
    """Compare the single-excitation engine with full 2^N evolution.

    Flips are applied in both engines at the same times.  Raises
    :class:`~spinfreeze.errors.BudgetError` above ``max_n`` sites.
    """
    net = scenario.network
    n = net.n_sites
    if n > min(max_n, MAX_ORACLE_SITES):
        raise BudgetError(f"network has {n} sites, oracle limit is {min(max_n, MAX_ORACLE_SITES)}")
    times = np.asarray(scenario.sample_times if sample_times is None else sample_times, dtype=float)
    events = sorted(_bound_events(scenario, overrides) if events is None else events)

    report = OracleReport(n, len(times))
    prop = FullPropagator(net)
    idx = single_excitation_indices(n)
    report.restriction_error = float(
        np.abs(prop.hamiltonian[np.ix_(idx, idx)].toarray() - single_excitation_hamiltonian(net)).max()
    )
    traj = run_schedule(net, scenario.init, events, times)
    number = excitation_number(n)

    psi = embed(scenario.init)
    now = 0.0
    pending = list(events)
    pairs, quads = _check_pairs(scenario)
    for t, c in zip(times, traj.states):
        while pending and pending[0].time <= t:
            ev = pending.pop(0)
            psi = full_phase_flip(prop(psi, ev.time - now), ev.site, n)
            now = ev.time
        full = prop(psi, t - now)
        report.max_amplitude_error = max(report.max_amplitude_error, float(np.abs(restrict(full, n) - c).max()))
        report.max_leakage = max(report.max_leakage, leakage(full, n))
        report.max_number_drift = max(
            report.max_number_drift, abs(float(np.sum(number * np.abs(full) ** 2)) - 1.0)
        )
        for a, b in pairs:
            diff = np.abs(full_partial_trace(full, [a, b]) - reduced_two_qubit_rho(c, a, b)).max()
            report.max_rho_error = max(report.max_rho_error, float(diff))
        for quad in quads:
            diff = np.abs(full_partial_trace(full, list(quad)) - four_site_rho(c, quad)).max()
            report.max_rho_error = max(report.max_rho_error, float(diff))
    log.debug("oracle check: %s", report)
    return report

