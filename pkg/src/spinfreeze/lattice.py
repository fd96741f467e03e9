"""Spin network construction: perfect-transfer chains, Y structures and the
bifurcated freezing device, plus a plain-text network document format.

Couplings are stored in units of ``alpha``; ``alpha`` itself is recorded once
on the network.  Site ordering for Y structures is fixed: the input branch
from its free end towards the hub, the hub, then every site of the first
output branch walking outwards from the hub, then the second output branch in
the same order.  With 1-based numbering this reproduces the usual labels of a
(3, 3, 3) structure, outputs at sites 7 and 10.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import yaml

from .errors import ParseError, ValidationError
from .expr import evaluate

SQRT2 = math.sqrt(2.0)

#: Tags written by the builders.  ``branch2``/``branch3`` list the sites of
#: each output branch in hub-outward order; ``pair1``/``pair2`` are the two
#: final-site pairs of the bifurcated device.
KNOWN_TAGS = ("input", "hub", "output", "branch-end", "branch2", "branch3", "pair1", "pair2")


@dataclass(frozen=True)
class SpinNetwork:
    """Undirected weighted coupling graph of spin-1/2 sites.

    Parameters
    ----------
    n_sites : int
        Number of sites; sites are ``0 .. n_sites - 1``.
    edges : tuple of (i, j, J)
        Couplings in units of ``alpha``, normalised to ``i < j`` and sorted.
    energies : tuple of float
        On-site energies.  Must all be equal; defaults to zeros.
    alpha : float
        Coupling scale.
    tags : mapping of str to tuple of int
        Role tags (``input``, ``hub``, ``output``, ``branch-end``, ...).
    """

    n_sites: int
    edges: tuple[tuple[int, int, float], ...]
    energies: tuple[float, ...] = ()
    alpha: float = 1.0
    tags: Mapping[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        n = self.n_sites
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError(f"n_sites must be a positive integer, got {n!r}")
        if not (isinstance(self.alpha, (int, float)) and math.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError(f"alpha must be a positive finite number, got {self.alpha!r}")

        normalised = []
        seen = set()
        for k, edge in enumerate(self.edges):
            try:
                i, j, coupling = edge
            except (TypeError, ValueError):
                raise ValidationError(f"edges[{k}]: expected (i, j, J), got {edge!r}") from None
            i, j, coupling = int(i), int(j), float(coupling)
            if i == j:
                raise ValidationError(f"edges[{k}]: self-loop on site {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValidationError(f"edges[{k}]: site index out of range 0..{n - 1}")
            if not (math.isfinite(coupling) and coupling > 0):
                raise ValidationError(f"edges[{k}]: coupling must be positive and finite, got {coupling}")
            pair = (min(i, j), max(i, j))
            if pair in seen:
                raise ValidationError(f"edges[{k}]: duplicate edge {pair}")
            seen.add(pair)
            normalised.append((*pair, coupling))
        object.__setattr__(self, "edges", tuple(sorted(normalised)))

        energies = tuple(float(e) for e in self.energies) if self.energies else (0.0,) * n
        if len(energies) != n:
            raise ValidationError(f"energies has {len(energies)} entries for {n} sites")
        if any(abs(e - energies[0]) > 1e-12 for e in energies):
            raise ValidationError("non-uniform on-site energies are not supported")
        object.__setattr__(self, "energies", energies)

        tags = {}
        for role, sites in dict(self.tags).items():
            sites = tuple(int(s) for s in sites)
            if any(not 0 <= s < n for s in sites):
                raise ValidationError(f"tag {role!r} references a site outside 0..{n - 1}")
            tags[str(role)] = sites
        object.__setattr__(self, "tags", tags)

        if not _is_connected(n, self.edges):
            raise ValidationError("coupling graph is not connected")

    @property
    def sites(self) -> range:
        return range(self.n_sites)

    @property
    def couplings(self) -> dict[tuple[int, int], float]:
        return {(i, j): c for i, j, c in self.edges}

    def coupling(self, i: int, j: int) -> float:
        """Coupling between ``i`` and ``j`` in units of alpha (0 if not adjacent)."""
        return self.couplings.get((min(i, j), max(i, j)), 0.0)

    def physical_couplings(self) -> dict[tuple[int, int], float]:
        """Couplings in energy units, i.e. multiplied by ``alpha``."""
        return {(i, j): self.alpha * c for i, j, c in self.edges}

    def tagged(self, role: str) -> tuple[int, ...]:
        try:
            return self.tags[role]
        except KeyError:
            raise ValidationError(f"network has no sites tagged {role!r}") from None

    @property
    def input_site(self) -> int:
        """The site an excitation is injected at: ``input`` tag, else the hub, else site 0."""
        for role in ("input", "hub"):
            if self.tags.get(role):
                return self.tags[role][0]
        return 0

    def with_alpha(self, alpha: float) -> SpinNetwork:
        return SpinNetwork(self.n_sites, self.edges, self.energies, alpha, self.tags)

    def same_structure(self, other: SpinNetwork, rtol: float = 1e-12) -> bool:
        """Equal site count, edge set, energies and alpha up to ``rtol`` on the reals."""
        if self.n_sites != other.n_sites or len(self.edges) != len(other.edges):
            return False
        for (i, j, a), (k, l, b) in zip(self.edges, other.edges):
            if (i, j) != (k, l) or not math.isclose(a, b, rel_tol=rtol):
                return False
        if not all(math.isclose(a, b, rel_tol=rtol, abs_tol=rtol) for a, b in zip(self.energies, other.energies)):
            return False
        return math.isclose(self.alpha, other.alpha, rel_tol=rtol)


@dataclass(frozen=True)
class YSpec:
    """A symmetric Y structure ``(l1, l2, l2)``.

    ``l1`` is the number of input-branch sites (0 puts the excitation straight
    on the hub), ``l2`` the number of sites on each output branch.  ``l3`` may
    be given for documents that spell out all three lengths but must equal
    ``l2``.
    """

    l1: int
    l2: int
    alpha: float = 1.0
    bifurcated: bool = False
    l3: int | None = None

    def __post_init__(self):
        for name in ("l1", "l2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"{name} must be an integer, got {value!r}")
        if self.l1 < 0:
            raise ValidationError(f"l1 must be >= 0, got {self.l1}")
        if self.l2 < 1:
            raise ValidationError(f"l2 must be >= 1, got {self.l2}")
        if self.l3 is not None and self.l3 != self.l2:
            raise ValidationError(f"output branches must be congruent (l2={self.l2}, l3={self.l3})")
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValidationError(f"alpha must be positive, got {self.alpha}")

    @property
    def equivalent_length(self) -> int:
        return self.l1 + self.l2 + 1

    @property
    def n_sites(self) -> int:
        return self.l1 + 2 * self.l2 + 1 + (2 if self.bifurcated else 0)


def pst_couplings(n: int, alpha: float = 1.0) -> list[float]:
    """Perfect-transfer coupling profile ``alpha * sqrt(i (n - i))``, i = 1..n-1."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ValidationError(f"chain length must be an integer >= 2, got {n!r}")
    if not (math.isfinite(alpha) and alpha > 0):
        raise ValidationError(f"alpha must be positive, got {alpha!r}")
    return [alpha * math.sqrt(i * (n - i)) for i in range(1, n)]


def build_chain(n: int, alpha: float = 1.0) -> SpinNetwork:
    couplings = pst_couplings(n)
    edges = tuple((i, i + 1, c) for i, c in enumerate(couplings))
    return SpinNetwork(n, edges, alpha=alpha, tags={"input": (0,), "output": (n - 1,)})


def equivalent_chain(spec: YSpec) -> SpinNetwork:
    """The 1D chain a Y structure reduces to in its branch-symmetric sector."""
    return build_chain(spec.equivalent_length, spec.alpha)


def build_y(spec: YSpec) -> SpinNetwork:
    """Realise a Y structure from its equivalent chain.

    The input branch copies the first ``l1`` equivalent couplings.  The
    coupling that crosses the hub is divided by sqrt(2) and used for both
    hub-to-branch edges; deeper branch couplings are copied unchanged.
    A ``bifurcated`` spec is forwarded to :func:`build_bifurcated_y`.
    """
    if spec.bifurcated:
        return build_bifurcated_y(spec)
    l1, l2 = spec.l1, spec.l2
    eq = pst_couplings(spec.equivalent_length)
    hub = l1
    edges = [(i, i + 1, eq[i]) for i in range(l1)]
    branches = []
    for b in range(2):
        base = l1 + 1 + b * l2
        sites = tuple(range(base, base + l2))
        edges.append((hub, base, eq[l1] / SQRT2))
        edges.extend((base + k, base + k + 1, eq[l1 + 1 + k]) for k in range(l2 - 1))
        branches.append(sites)
    tags = {
        "input": (0,) if l1 else (hub,),
        "hub": (hub,),
        "output": (branches[0][-1], branches[1][-1]),
        "branch2": branches[0],
        "branch3": branches[1],
    }
    return SpinNetwork(spec.n_sites, tuple(edges), alpha=spec.alpha, tags=tags)


def build_bifurcated_y(spec: YSpec) -> SpinNetwork:
    """Y structure whose output-branch end sites are each split into two.

    Both final sites couple to the penultimate site (the hub when ``l2 == 1``)
    with the replaced end coupling divided by sqrt(2).  Sites tagged
    ``branch-end`` are ``(n1, n2, n3, n4)``; ``pair1 = (n1, n2)`` sits on the
    first output branch and ``pair2 = (n3, n4)`` on the second.
    """
    y = build_y(YSpec(spec.l1, spec.l2, spec.alpha))
    l1, l2 = spec.l1, spec.l2
    hub = l1
    old_couplings = y.couplings
    # Old branch site (b, k) -> new index; each branch gains one site at its end.
    def new_index(old: int) -> int:
        if old <= hub:
            return old
        b, k = divmod(old - hub - 1, l2)
        return hub + 1 + b * (l2 + 1) + k

    ends = set(y.tagged("output"))
    edges = []
    pairs = []
    for (i, j), c in sorted(old_couplings.items()):
        if j in ends:
            final = new_index(j)
            pair = (final, final + 1)
            edges.extend((new_index(i), f, c / SQRT2) for f in pair)
            pairs.append(pair)
        else:
            edges.append((new_index(i), new_index(j), c))
    pairs.sort()
    branch2 = tuple(range(hub + 1, hub + 2 + l2))
    branch3 = tuple(range(hub + 2 + l2, hub + 3 + 2 * l2))
    tags = {
        "input": y.tagged("input"),
        "hub": (hub,),
        "branch-end": pairs[0] + pairs[1],
        "pair1": pairs[0],
        "pair2": pairs[1],
        "branch2": branch2,
        "branch3": branch3,
    }
    return SpinNetwork(y.n_sites + 2, tuple(edges), alpha=spec.alpha, tags=tags)


def branch_swap_permutation(network: SpinNetwork) -> list[int]:
    """Site permutation exchanging the two output branches of a Y structure.

    Raises :class:`ValidationError` if the network lacks branch tags or the
    permutation is not a coupling-preserving automorphism.
    """
    b2, b3 = network.tagged("branch2"), network.tagged("branch3")
    if len(b2) != len(b3):
        raise ValidationError("output branches have different sizes")
    perm = list(network.sites)
    for a, b in zip(b2, b3):
        perm[a], perm[b] = b, a
    couplings = network.couplings
    for (i, j), c in couplings.items():
        image = (min(perm[i], perm[j]), max(perm[i], perm[j]))
        if not math.isclose(couplings.get(image, 0.0), c, rel_tol=1e-12):
            raise ValidationError("branch swap is not an automorphism of this network")
    return perm


def _is_connected(n: int, edges: Iterable[tuple[int, int, float]]) -> bool:
    adjacency: list[list[int]] = [[] for _ in range(n)]
    for i, j, _ in edges:
        adjacency[i].append(j)
        adjacency[j].append(i)
    seen = {0}
    queue = deque([0])
    while queue:
        for nxt in adjacency[queue.popleft()]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == n


# --- network documents ------------------------------------------------------

NETWORK_KEYS = ("sites", "edges", "energies", "alpha", "tags")


def parse_document(text: str) -> object:
    """Parse YAML (or JSON) text, converting syntax errors to :class:`ParseError`."""
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        locus = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise ParseError(str(exc.problem or exc), locus) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None


def network_from_mapping(doc: Mapping, locus: str = "") -> SpinNetwork:
    """Build a network from an already-parsed network document."""
    prefix = f"{locus}." if locus else ""
    if not isinstance(doc, Mapping):
        raise ParseError("network document must be a mapping", locus or None)
    unknown = sorted(set(doc) - set(NETWORK_KEYS))
    if unknown:
        raise ParseError(f"unknown keys {unknown}", locus or None)
    for key in ("sites", "edges"):
        if key not in doc:
            raise ParseError(f"missing required key {key!r}", locus or None)

    sites = doc["sites"]
    if isinstance(sites, int) and not isinstance(sites, bool):
        ids = list(range(sites))
    elif isinstance(sites, list) and all(isinstance(s, int) and not isinstance(s, bool) for s in sites):
        ids = list(sites)
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{prefix}sites: duplicate site identifiers")
    else:
        raise ParseError("expected an integer count or a list of integer ids", f"{prefix}sites")
    index = {s: k for k, s in enumerate(ids)}

    def site(value, where):
        if value not in index:
            raise ValidationError(f"{where}: unknown site {value!r}")
        return index[value]

    edges = doc["edges"]
    if not isinstance(edges, list):
        raise ParseError("expected a list of [i, j, J] triples", f"{prefix}edges")
    parsed_edges = []
    for k, edge in enumerate(edges):
        where = f"{prefix}edges[{k}]"
        if not isinstance(edge, list) or len(edge) != 3:
            raise ParseError("expected [i, j, J]", where)
        i, j = site(edge[0], where), site(edge[1], where)
        parsed_edges.append((i, j, evaluate(edge[2], locus=where)))

    energies = doc.get("energies")
    if energies is not None:
        if not isinstance(energies, list):
            raise ParseError("expected a list of numbers", f"{prefix}energies")
        energies = [evaluate(e, locus=f"{prefix}energies[{k}]") for k, e in enumerate(energies)]

    alpha = evaluate(doc.get("alpha", 1.0), locus=f"{prefix}alpha")

    tags = doc.get("tags") or {}
    if not isinstance(tags, Mapping):
        raise ParseError("expected a mapping of role -> site list", f"{prefix}tags")
    parsed_tags = {}
    for role, members in tags.items():
        if not isinstance(members, list):
            raise ParseError("expected a list of sites", f"{prefix}tags.{role}")
        parsed_tags[role] = tuple(site(m, f"{prefix}tags.{role}") for m in members)

    return SpinNetwork(len(ids), tuple(parsed_edges), tuple(energies or ()), alpha, parsed_tags)


def load_network(document: str | Mapping) -> SpinNetwork:
    """Parse a network document (YAML/JSON text or a mapping).

    Schema::

        sites: 4                 # count, or explicit list of integer ids
        edges:                   # [i, j, J] with J in units of alpha
          - [0, 1, sqrt(2)]
          - [1, 2, 1]
          - [1, 3, 1]
        energies: [0, 0, 0, 0]   # optional, must be uniform
        alpha: 1.0               # optional, default 1
        tags: {input: [0], hub: [1], output: [2, 3]}   # optional

    Numeric fields accept arithmetic expressions such as ``sqrt(12)/sqrt(2)``.
    """
    doc = parse_document(document) if isinstance(document, str) else document
    return network_from_mapping(doc)


def dump_network(network: SpinNetwork) -> str:
    """Serialise a network so that ``load_network(dump_network(net)) == net``."""
    doc = {
        "sites": network.n_sites,
        "edges": [[i, j, c] for i, j, c in network.edges],
        "energies": list(network.energies),
        "alpha": network.alpha,
    }
    if network.tags:
        doc["tags"] = {role: list(sites) for role, sites in network.tags.items()}
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def save_network(network: SpinNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_network(network))
