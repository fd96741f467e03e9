"""Observables: populations, fidelities, two-qubit reduced states,
concurrence, entanglement of formation and the encoded-pair logical state.

Two-qubit matrices use the basis ``|00>, |01>, |10>, |11>`` where the first
bit belongs to the first site argument and 1 means the site is excited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice import SpinNetwork

DENSITY_TOL = 1e-12
SIGMA_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))

TARGET_KINDS = ("plus", "minus", "psi_s", "psi_a", "site", "custom")


@dataclass(frozen=True)
class TargetState:
    """Reference single-excitation state supported on a few sites."""

    kind: str
    support: tuple[int, ...]
    amplitudes: tuple[complex, ...]

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise ValidationError(f"unknown target kind {self.kind!r}")
        if len(self.support) != len(self.amplitudes) or not self.support:
            raise ValidationError("target support and amplitudes must have the same non-zero length")
        if len(set(self.support)) != len(self.support):
            raise ValidationError("target support has repeated sites")
        norm = sum(abs(a) ** 2 for a in self.amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(f"target is not normalised (norm^2 = {norm})")

    def vector(self, n: int) -> np.ndarray:
        if max(self.support) >= n or min(self.support) < 0:
            raise ValidationError(f"target support {self.support} out of range for {n} sites")
        v = np.zeros(n, dtype=complex)
        v[list(self.support)] = self.amplitudes
        return v


def plus_state(a: int, b: int) -> TargetState:
    r = 1 / math.sqrt(2)
    return TargetState("plus", (a, b), (r, r))


def minus_state(a: int, b: int) -> TargetState:
    r = 1 / math.sqrt(2)
    return TargetState("minus", (a, b), (r, -r))


def psi_s_state(ends) -> TargetState:
    """Equal superposition over the four branch-end sites ``(n1, n2, n3, n4)``."""
    return TargetState("psi_s", tuple(ends), (0.5, 0.5, 0.5, 0.5))


def psi_a_state(ends) -> TargetState:
    """One sign flipped in each pair: ``(-|n1> + |n2> - |n3> + |n4>) / 2``.

    Matches ``|0001> - |0010> + |0100> - |1000>`` with spins ordered n1..n4.
    """
    return TargetState("psi_a", tuple(ends), (-0.5, 0.5, -0.5, 0.5))


def site_target(site: int) -> TargetState:
    return TargetState("site", (site,), (1.0,))


def named_target(network: SpinNetwork, name: str) -> TargetState:
    """Resolve ``plus``, ``minus``, ``psi_s``, ``psi_a`` or ``site:<k>`` on a network."""
    if name in ("plus", "minus"):
        outputs = network.tagged("output")
        if len(outputs) != 2:
            raise ValidationError(f"target {name!r} needs exactly two output sites")
        return (plus_state if name == "plus" else minus_state)(*outputs)
    if name in ("psi_s", "psi_a"):
        ends = network.tagged("branch-end")
        if len(ends) != 4:
            raise ValidationError(f"target {name!r} needs four branch-end sites")
        return (psi_s_state if name == "psi_s" else psi_a_state)(ends)
    if name.startswith("site:"):
        try:
            site = int(name.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"bad site target {name!r}") from None
        if not 0 <= site < network.n_sites:
            raise ValidationError(f"target site {site} out of range")
        return site_target(site)
    raise ValidationError(f"unknown target {name!r}")


def site_probabilities(state) -> np.ndarray:
    c = np.asarray(state)
    return (c.conj() * c).real


def fidelity(state, target: TargetState) -> float:
    """Squared overlap ``|<target|state>|^2``; blind to global phase."""
    c = np.asarray(state, dtype=complex)
    return float(abs(np.vdot(target.vector(len(c)), c)) ** 2)


def reduced_two_qubit_rho(state, a: int, b: int) -> np.ndarray:
    """Two-site reduced density matrix of a single-excitation pure state."""
    c = np.asarray(state, dtype=complex)
    n = len(c)
    if a == b:
        raise ValidationError("reduced_two_qubit_rho needs two distinct sites")
    for s in (a, b):
        if not 0 <= s < n:
            raise ValidationError(f"site {s} out of range 0..{n - 1}")
    ca, cb = c[a], c[b]
    pa, pb = abs(ca) ** 2, abs(cb) ** 2
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = max(1.0 - pa - pb, 0.0)
    rho[1, 1] = pb
    rho[2, 2] = pa
    rho[1, 2] = cb * ca.conjugate()
    rho[2, 1] = ca * cb.conjugate()
    return rho


def check_density(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValidationError(f"expected a 4x4 density matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {np.trace(rho).real!r}, expected 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidationError("density matrix has negative eigenvalues")
    return rho


def concurrence(rho) -> float:
    """Wootters concurrence ``max(l1 - l2 - l3 - l4, 0)``.

    The ``l_i`` are the square roots of the eigenvalues of
    ``rho (Y x Y) rho* (Y x Y)``.  They are computed as the singular values
    of ``sqrt(rho) (Y x Y) sqrt(rho)*``, which squares to the same matrix up
    to similarity but avoids taking square roots of rounding noise.
    """
    rho = check_density(rho)
    w, u = np.linalg.eigh(rho)
    root = (u * np.sqrt(np.clip(w, 0.0, None))) @ u.conj().T
    lam = np.linalg.svd(root @ SIGMA_YY @ root.conj(), compute_uv=False)
    lam = np.sort(lam)[::-1]
    return float(min(max(lam[0] - lam[1] - lam[2] - lam[3], 0.0), 1.0))


def binary_entropy(x: float) -> float:
    """``h(x) = -x log2 x - (1-x) log2 (1-x)`` with ``h(0) = h(1) = 0``."""
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def eof_from_concurrence(c: float) -> float:
    tangle = min(max(c, 0.0), 1.0) ** 2
    return binary_entropy((1.0 + math.sqrt(1.0 - tangle)) / 2.0)


def entanglement_of_formation(rho) -> float:
    return eof_from_concurrence(concurrence(rho))


# --- encoded pairs -----------------------------------------------------------


@dataclass(frozen=True)
class LogicalPairing:
    """Two site pairs, each encoding one qubit as ``|0_L> = |00>``,
    ``|1_L> = (|01> - |10>) / sqrt(2)``.

    Order inside a pair fixes the sign of ``|1_L>``: in ``(x, y)`` the state
    ``|01>`` has the excitation on ``y``.  Builders list the lower index first.
    """

    pair1: tuple[int, int]
    pair2: tuple[int, int]

    def __post_init__(self):
        sites = (*self.pair1, *self.pair2)
        if len(sites) != 4 or len(set(sites)) != 4:
            raise ValidationError(f"logical pairing needs four distinct sites, got {sites}")

    @property
    def sites(self) -> tuple[int, int, int, int]:
        return (*self.pair1, *self.pair2)

    @classmethod
    def from_network(cls, network: SpinNetwork) -> LogicalPairing:
        return cls(tuple(network.tagged("pair1")), tuple(network.tagged("pair2")))


def _logical_isometry() -> np.ndarray:
    """16x4 map from the logical basis ``|0L0L>, |0L1L>, |1L0L>, |1L1L>`` into
    four spins ordered (pair1, pair2)."""
    zero = np.array([1.0, 0.0, 0.0, 0.0])
    one = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2)
    return np.stack([np.kron(x, y) for x in (zero, one) for y in (zero, one)], axis=1)


LOGICAL_ISOMETRY = _logical_isometry()


def four_site_rho(state, sites) -> np.ndarray:
    """16x16 reduced density matrix of a single-excitation state on four sites.

    Basis index ``8 b0 + 4 b1 + 2 b2 + b3`` with ``b_k`` the occupation of
    ``sites[k]``.
    """
    c = np.asarray(state, dtype=complex)
    n = len(c)
    if len(set(sites)) != 4 or any(not 0 <= s < n for s in sites):
        raise ValidationError(f"need four distinct sites in range, got {tuple(sites)}")
    phi = np.zeros(16, dtype=complex)
    for k, s in enumerate(sites):
        phi[1 << (3 - k)] = c[s]
    rho = np.outer(phi, phi.conj())
    rho[0, 0] += max(1.0 - float(np.vdot(phi, phi).real), 0.0)
    return rho


def logical_two_qubit_rho(state, pairing: LogicalPairing) -> tuple[np.ndarray | None, float]:
    """Project the two-pair reduced state onto the encoded subspace.

    Returns ``(rho_L, weight)`` where ``weight = Tr(P rho P)`` and ``rho_L`` is
    the projected state renormalised to unit trace in the logical basis.
    ``rho_L`` is ``None`` when the weight vanishes (< 1e-14).
    """
    rho = four_site_rho(state, pairing.sites)
    projected = LOGICAL_ISOMETRY.T @ rho @ LOGICAL_ISOMETRY
    weight = float(np.trace(projected).real)
    if weight < 1e-14:
        return None, max(weight, 0.0)
    return projected / weight, weight


def frozen_logical_rho(state, pairing: LogicalPairing) -> tuple[np.ndarray, float]:
    """Logical state carried by the stationary pair-antisymmetric amplitudes.

    Each pair's antisymmetric combination ``(|y> - |x>) / sqrt(2)`` is a
    zero-energy eigenvector of a bifurcated network, so its amplitude is
    constant once both flips have been applied.  Those two amplitudes give
    the ``|1_L 0_L>`` and ``|0_L 1_L>`` components; all remaining probability
    is counted as ``|0_L 0_L>``.  The result is therefore time independent
    after the flips.  Returns ``(rho_L, frozen_weight)``.
    """
    c = np.asarray(state, dtype=complex)
    (x1, y1), (x2, y2) = pairing.pair1, pairing.pair2
    a1 = (c[y1] - c[x1]) / math.sqrt(2)
    a2 = (c[y2] - c[x2]) / math.sqrt(2)
    vec = np.array([0.0, a2, a1, 0.0], dtype=complex)
    weight = float(abs(a1) ** 2 + abs(a2) ** 2)
    rho = np.outer(vec, vec.conj())
    rho[0, 0] = max(1.0 - weight, 0.0)
    return rho, weight


def logical_entanglement(state, pairing: LogicalPairing) -> tuple[float, float]:
    """``(E_F, weight)`` of the renormalised logical projection; E_F is 0 at zero weight."""
    rho, weight = logical_two_qubit_rho(state, pairing)
    return (0.0 if rho is None else entanglement_of_formation(rho)), weight


def frozen_entanglement(state, pairing: LogicalPairing) -> tuple[float, float]:
    rho, weight = frozen_logical_rho(state, pairing)
    return entanglement_of_formation(rho), weight
