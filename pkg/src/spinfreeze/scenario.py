"""Scenario documents: which network, initial state, flips, time grid and
observables to record.

A scenario is YAML (JSON also parses)::

    name: y333
    alpha: 1.0
    time_units: alpha_t          # or "time": values are multiplied by alpha
    network: {builder: y, l1: 3, l2: 3}
    init: input                  # site ref, or plus / minus / psi_s / psi_a
    params: {t1: pi/2, t2: pi/2} # names usable in event times
    events:
      - {site: "pair1[0]", time: t1}
      - {site: "pair2[0]", time: t2}
    samples: {start: 0, stop: 4*pi, count: 201}
    observables: [site_probabilities, "fidelity:plus", "ef:output"]
    sweep:                       # optional defaults for the sweep command
      t1: "pi/2-0.5 : pi/2+0.5 : 21"
      t2: "pi/2-0.5 : pi/2+0.5 : 21"
      readout: 3*pi/2

``network`` is either a builder (``chain`` with ``n``; ``y`` or
``bifurcated_y`` with ``l1``, ``l2`` and optional ``l3``), ``{file: path}``
pointing at a network document, or an inline network document.

Site references are integers or tag lookups such as ``output[1]``,
``pair2[0]`` or ``hub``.  Observables:

``site_probabilities``       one ``p_<k>`` column per site
``p:<site>``                 one population
``fidelity:<target>``        target ``plus``, ``minus``, ``psi_s``, ``psi_a`` or ``site:<k>``
``ef:<a>,<b>`` / ``ef:output``
``logical_ef[:a,b,c,d]``     encoded-pair E_F plus its projection weight
``frozen_ef[:a,b,c,d]``      E_F of the stationary encoded component plus its weight
"""

from __future__ import annotations

import math
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .evolve import FlipEvent, site_state
from .expr import evaluate, free_names
from .lattice import (
    SpinNetwork,
    YSpec,
    build_chain,
    build_y,
    load_network,
    network_from_mapping,
    parse_document,
)
from .measures import LogicalPairing, named_target

SCENARIO_KEYS = (
    "name",
    "description",
    "alpha",
    "time_units",
    "network",
    "init",
    "params",
    "events",
    "samples",
    "observables",
    "sweep",
)
SWEEP_PARAMS = ("t1", "t2")
NAMED_STATES = ("plus", "minus", "psi_s", "psi_a")
DEFAULT_READOUT = 3 * math.pi / 2


@dataclass(frozen=True)
class Observable:
    kind: str  # probability | fidelity | ef | logical_ef | frozen_ef
    columns: tuple[str, ...]
    sites: tuple[int, ...] = ()
    target: str | None = None


@dataclass(frozen=True)
class EventTemplate:
    """A flip whose time is a number or an expression over ``params``/``t1``/``t2``."""

    site: int
    time: object


@dataclass(frozen=True)
class SweepSpec:
    t1_grid: np.ndarray
    t2_grid: np.ndarray
    flip_sites: tuple[int, int]
    readout: float = DEFAULT_READOUT
    pairing: LogicalPairing | None = None

    def __post_init__(self):
        for name in ("t1_grid", "t2_grid"):
            grid = np.asarray(getattr(self, name), dtype=float)
            if grid.ndim != 1 or len(grid) == 0 or not np.all(np.isfinite(grid)):
                raise ValidationError(f"{name} must be a non-empty finite grid")
            if np.any(grid < 0):
                raise ValidationError(f"{name} contains negative flip times")
            object.__setattr__(self, name, grid)
        if self.readout < max(self.t1_grid.max(), self.t2_grid.max()):
            raise ValidationError("sweep readout time precedes the latest flip")


@dataclass(frozen=True)
class Scenario:
    name: str
    network: SpinNetwork
    init: np.ndarray
    init_label: str
    events: tuple[EventTemplate, ...]
    params: Mapping[str, float]
    sample_times: np.ndarray
    observables: tuple[Observable, ...]
    time_scale: float = 1.0  # multiply document times by this to get alpha*t
    sweep: Mapping = field(default_factory=dict)

    @property
    def columns(self) -> list[str]:
        return ["t_alpha", *(c for obs in self.observables for c in obs.columns)]

    def flip_events(self, overrides: Mapping[str, float] | None = None) -> list[FlipEvent]:
        """Concrete flips; ``overrides`` (e.g. sweep t1/t2) are in rescaled units."""
        merged = dict(self.params)
        if overrides:
            merged.update({k: v / self.time_scale for k, v in overrides.items()})
        return [
            FlipEvent(time=self.time_scale * evaluate(ev.time, merged, locus="events"), site=ev.site)
            for ev in self.events
        ]

    def sweep_spec(self, t1_grid=None, t2_grid=None, readout=None) -> SweepSpec:
        """Combine the document's ``sweep`` section with command-line overrides.

        Overrides are already in rescaled units; document values are converted.
        """
        bound = {}
        for ev in self.events:
            names = free_names(ev.time)
            for p in SWEEP_PARAMS:
                if p in names:
                    if p in bound:
                        raise ValidationError(f"more than one event uses sweep parameter {p!r}")
                    bound[p] = ev.site
        if set(bound) != set(SWEEP_PARAMS):
            raise ValidationError("sweep needs one event timed by t1 and one by t2")
        section = self.sweep

        def grid(key, override):
            if override is not None:
                return np.asarray(override, dtype=float)
            if key not in section:
                raise ValidationError(f"no {key} grid given on the command line or in the scenario")
            return self.time_scale * parse_grid(section[key], locus=f"sweep.{key}")

        if readout is None:
            readout = (
                self.time_scale * evaluate(section["readout"], locus="sweep.readout")
                if "readout" in section
                else DEFAULT_READOUT
            )
        pairing = section.get("pairing")
        if pairing is not None:
            pairing = _pairing(self.network, pairing, "sweep.pairing")
        else:
            pairing = LogicalPairing.from_network(self.network)
        return SweepSpec(grid("t1", t1_grid), grid("t2", t2_grid), (bound["t1"], bound["t2"]), readout, pairing)


def parse_grid(value, locus: str = "grid") -> np.ndarray:
    """``"start:stop:n"`` or ``[start, stop, n]`` -> ``linspace(start, stop, n)``."""
    if isinstance(value, str):
        parts = value.split(":")
    elif isinstance(value, list):
        parts = value
    else:
        raise ParseError("expected 'start:stop:n' or [start, stop, n]", locus)
    if len(parts) != 3:
        raise ParseError("expected three fields start:stop:n", locus)
    start, stop = evaluate(parts[0], locus=locus), evaluate(parts[1], locus=locus)
    count = evaluate(parts[2], locus=locus)
    if count != int(count) or count < 1:
        raise ParseError(f"grid count must be a positive integer, got {parts[2]!r}", locus)
    if count > 1 and stop <= start:
        raise ValidationError(f"{locus}: grid stop must exceed start")
    return np.linspace(start, stop, int(count))


_REF = re.compile(r"^\s*([A-Za-z][\w-]*)\s*(?:\[\s*(\d+)\s*\])?\s*$")


def resolve_site(network: SpinNetwork, ref, locus: str) -> int:
    if isinstance(ref, int) and not isinstance(ref, bool):
        site = ref
    elif isinstance(ref, str) and ref.strip().lstrip("-").isdigit():
        site = int(ref)
    elif isinstance(ref, str) and (m := _REF.match(ref)):
        role, index = m.group(1), m.group(2)
        if role not in network.tags:
            raise ValidationError(f"{locus}: network has no tag {role!r}")
        members = network.tags[role]
        if index is None:
            if len(members) != 1:
                raise ValidationError(f"{locus}: tag {role!r} has {len(members)} sites; use {role}[k]")
            return members[0]
        if int(index) >= len(members):
            raise ValidationError(f"{locus}: {role}[{index}] out of range")
        return members[int(index)]
    else:
        raise ParseError(f"bad site reference {ref!r}", locus)
    if not 0 <= site < network.n_sites:
        raise ValidationError(f"{locus}: site {site} does not exist (network has {network.n_sites})")
    return site


def _site_list(network, text: str, locus: str) -> list[int]:
    return [resolve_site(network, part, locus) for part in text.split(",")]


def _pairing(network, value, locus) -> LogicalPairing:
    if isinstance(value, str):
        sites = _site_list(network, value, locus)
    elif isinstance(value, list):
        flat = [s for item in value for s in (item if isinstance(item, list) else [item])]
        sites = [resolve_site(network, s, locus) for s in flat]
    else:
        raise ParseError("expected four sites", locus)
    if len(sites) != 4:
        raise ValidationError(f"{locus}: a pairing needs four sites, got {len(sites)}")
    try:
        return LogicalPairing((sites[0], sites[1]), (sites[2], sites[3]))
    except ValidationError as exc:
        raise ValidationError(f"{locus}: {exc}") from None


def parse_observable(network: SpinNetwork, spec, locus: str) -> Observable:
    if not isinstance(spec, str):
        raise ParseError(f"observable must be a string, got {spec!r}", locus)
    kind, _, arg = spec.partition(":")
    kind, arg = kind.strip(), arg.strip()
    if kind == "site_probabilities" and not arg:
        return Observable("probability", tuple(f"p_{k}" for k in network.sites), tuple(network.sites))
    if kind == "p" and arg:
        site = resolve_site(network, arg, locus)
        return Observable("probability", (f"p_{site}",), (site,))
    if kind == "fidelity" and arg:
        try:
            named_target(network, arg)
        except ValidationError as exc:
            raise ValidationError(f"{locus}: {exc}") from None
        return Observable("fidelity", (f"fidelity_{arg.replace(':', '_')}",), target=arg)
    if kind == "ef" and arg:
        sites = list(network.tagged("output")) if arg == "output" else _site_list(network, arg, locus)
        if len(sites) != 2 or sites[0] == sites[1]:
            raise ValidationError(f"{locus}: ef needs two distinct sites")
        return Observable("ef", (f"ef_{sites[0]}_{sites[1]}",), tuple(sites))
    if kind in ("logical_ef", "frozen_ef"):
        if arg:
            pairing = _pairing(network, arg, locus)
        else:
            try:
                pairing = LogicalPairing.from_network(network)
            except ValidationError as exc:
                raise ValidationError(f"{locus}: {exc}") from None
        suffix = "_".join(str(s) for s in pairing.sites)
        stem = kind.split("_")[0]
        return Observable(kind, (f"{kind}_{suffix}", f"{stem}_weight_{suffix}"), pairing.sites)
    raise ParseError(f"unknown observable {spec!r}", locus)


def _build_network(doc, base_dir: Path | None, alpha: float) -> SpinNetwork:
    if not isinstance(doc, Mapping):
        raise ParseError("expected a mapping", "network")
    if "builder" in doc:
        builder = doc["builder"]
        allowed = {"chain": {"builder", "n"}, "y": {"builder", "l1", "l2", "l3"}, "bifurcated_y": {"builder", "l1", "l2", "l3"}}
        if builder not in allowed:
            raise ParseError(f"unknown builder {builder!r}", "network.builder")
        unknown = sorted(set(doc) - allowed[builder])
        if unknown:
            raise ParseError(f"unknown keys {unknown}", "network")
        if builder == "chain":
            if "n" not in doc:
                raise ParseError("chain builder needs n", "network")
            return build_chain(doc["n"], alpha)
        for key in ("l1", "l2"):
            if key not in doc:
                raise ParseError(f"{builder} builder needs {key}", "network")
        return build_y(YSpec(doc["l1"], doc["l2"], alpha, builder == "bifurcated_y", doc.get("l3")))
    if "file" in doc:
        if set(doc) != {"file"}:
            raise ParseError("'file' cannot be combined with other keys", "network")
        path = Path(doc["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read network file: {exc}", "network.file") from None
        return load_network(text).with_alpha(alpha)
    return network_from_mapping(doc, "network").with_alpha(alpha)


def parse_scenario(document, base_dir=None, alpha: float | None = None) -> Scenario:
    """Validate a scenario document (text or mapping).

    ``alpha`` overrides the document's value; it rescales raw times when
    ``time_units: time`` is used.
    """
    doc = parse_document(document) if isinstance(document, str) else document
    if not isinstance(doc, Mapping):
        raise ParseError("scenario document must be a mapping")
    unknown = sorted(set(doc) - set(SCENARIO_KEYS))
    if unknown:
        raise ParseError(f"unknown keys {unknown}")
    for key in ("network", "samples", "observables"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}")
    base_dir = Path(base_dir) if base_dir is not None else None

    if alpha is None:
        alpha = evaluate(doc.get("alpha", 1.0), locus="alpha")
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValidationError(f"alpha must be positive, got {alpha}")
    units = doc.get("time_units", "alpha_t")
    if units not in ("alpha_t", "time"):
        raise ParseError("time_units must be 'alpha_t' or 'time'", "time_units")
    scale = alpha if units == "time" else 1.0

    network = _build_network(doc["network"], base_dir, alpha)

    init_ref = doc.get("init", "input")
    if init_ref == "input":
        init = site_state(network.n_sites, network.input_site)
    elif init_ref in NAMED_STATES:
        try:
            init = named_target(network, init_ref).vector(network.n_sites)
        except ValidationError as exc:
            raise ValidationError(f"init: {exc}") from None
    else:
        init = site_state(network.n_sites, resolve_site(network, init_ref, "init"))

    params_doc = doc.get("params") or {}
    if not isinstance(params_doc, Mapping):
        raise ParseError("expected a mapping of name -> time", "params")
    params = {}
    for name, value in params_doc.items():
        if not (isinstance(name, str) and name.isidentifier()) or name in ("pi", "sqrt"):
            raise ParseError(f"bad parameter name {name!r}", "params")
        params[name] = evaluate(value, locus=f"params.{name}")

    events_doc = doc.get("events") or []
    if not isinstance(events_doc, list):
        raise ParseError("expected a list of {site, time}", "events")
    events = []
    for k, ev in enumerate(events_doc):
        locus = f"events[{k}]"
        if not isinstance(ev, Mapping) or set(ev) != {"site", "time"}:
            raise ParseError("each event needs exactly the keys site and time", locus)
        site = resolve_site(network, ev["site"], f"{locus}.site")
        names = free_names(ev["time"])
        unbound = names - set(params) - set(SWEEP_PARAMS)
        if unbound:
            raise ValidationError(f"{locus}.time: unknown names {sorted(unbound)}")
        if not names:
            value = evaluate(ev["time"], locus=f"{locus}.time")
            if not (math.isfinite(value) and value >= 0):
                raise ValidationError(f"{locus}.time must be finite and non-negative")
        events.append(EventTemplate(site, ev["time"]))

    samples = doc["samples"]
    if isinstance(samples, Mapping):
        unknown = sorted(set(samples) - {"start", "stop", "count"})
        if unknown or not {"start", "stop", "count"} <= set(samples):
            raise ParseError("samples needs exactly start, stop, count", "samples")
        times = parse_grid([samples["start"], samples["stop"], samples["count"]], "samples")
    elif isinstance(samples, list):
        times = np.array([evaluate(x, locus=f"samples[{k}]") for k, x in enumerate(samples)])
    else:
        raise ParseError("expected {start, stop, count} or a list of times", "samples")
    times = scale * times
    if len(times) == 0 or np.any(np.diff(times) <= 0):
        raise ValidationError("samples: time grid must be non-empty and strictly increasing")

    observables_doc = doc["observables"]
    if not isinstance(observables_doc, list) or not observables_doc:
        raise ParseError("expected a non-empty list", "observables")
    observables = tuple(
        parse_observable(network, spec, f"observables[{k}]") for k, spec in enumerate(observables_doc)
    )
    columns = [c for obs in observables for c in obs.columns]
    if len(set(columns)) != len(columns):
        raise ValidationError("observables produce duplicate columns")

    sweep = doc.get("sweep") or {}
    if not isinstance(sweep, Mapping):
        raise ParseError("expected a mapping", "sweep")
    unknown = sorted(set(sweep) - {"t1", "t2", "readout", "pairing"})
    if unknown:
        raise ParseError(f"unknown keys {unknown}", "sweep")

    scenario = Scenario(
        name=str(doc.get("name", "scenario")),
        network=network,
        init=init,
        init_label=str(init_ref),
        events=tuple(events),
        params=params,
        sample_times=times,
        observables=observables,
        time_scale=scale,
        sweep=dict(sweep),
    )
    if all(free_names(ev.time) <= set(params) for ev in events):
        scenario.flip_events()  # fully bound: surface bad times now
    return scenario


def load_scenario(path, alpha: float | None = None) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc}") from None
    return parse_scenario(text, base_dir=path.parent, alpha=alpha)
