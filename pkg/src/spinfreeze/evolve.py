"""Single-excitation dynamics: Hamiltonian, exact propagator and flip schedules.

States are complex numpy vectors of site amplitudes ``c_i``.  Energies are in
units of ``alpha`` and times in units of ``1/alpha``, so a time value is the
rescaled time ``alpha * t``.
"""

from __future__ import annotations

import csv
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .jacobi import MAX_SWEEPS, jacobi_eigh
from .lattice import SpinNetwork

NORM_TOL = 1e-12
SPECTRUM_TOL = 1e-10


def single_excitation_hamiltonian(network: SpinNetwork) -> np.ndarray:
    """Hopping matrix of the XY network restricted to one flipped spin.

    ``H[i, j] = J_ij`` on every edge and ``H[i, i] = E_i``; all else zero.
    """
    n = network.n_sites
    h = np.zeros((n, n))
    for i, j, coupling in network.edges:
        h[i, j] = h[j, i] = coupling
    h[np.diag_indices(n)] = network.energies
    return h


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition ``H = V diag(eigenvalues) V^T``.

    Eigenvalues ascend; each eigenvector column has its largest-magnitude
    entry positive (first such entry on ties).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def to_csv(self, path) -> None:
        """Write one row per eigenpair: eigenvalue, then the eigenvector entries."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["eigenvalue", *(f"v_{i}" for i in range(self.dim))])
            for k, value in enumerate(self.eigenvalues):
                writer.writerow([f"{x:.17g}" for x in (value, *self.eigenvectors[:, k])])


def diagonalize(h: np.ndarray, max_sweeps: int = MAX_SWEEPS) -> Spectrum:
    """Full spectral decomposition of a real symmetric Hamiltonian.

    Raises
    ------
    ValidationError
        If ``h`` is not square and symmetric.
    NumericalError
        If the eigensolver exhausts its budget or the result misses the
        residual/orthonormality contract (1e-10).
    """
    h = np.asarray(h, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError(f"Hamiltonian must be square, got shape {h.shape}")
    if not np.allclose(h, h.T, rtol=0.0, atol=1e-14 * max(1.0, float(np.abs(h).max(initial=0.0)))):
        raise ValidationError("Hamiltonian is not symmetric")

    values, vectors, sweeps = jacobi_eigh(h, max_sweeps=max_sweeps)
    order = np.argsort(values, kind="stable")
    values, vectors = values[order], vectors[:, order]
    for k in range(vectors.shape[1]):
        lead = int(np.argmax(np.abs(vectors[:, k])))
        if vectors[lead, k] < 0:
            vectors[:, k] = -vectors[:, k]

    residual = float(np.abs(h @ vectors - vectors * values).max(initial=0.0))
    if residual > SPECTRUM_TOL:
        raise NumericalError("eigen-decomposition residual exceeds contract", residual=residual)
    ortho = float(np.abs(vectors.T @ vectors - np.eye(len(values))).max(initial=0.0))
    if ortho > SPECTRUM_TOL:
        raise NumericalError("eigenvectors are not orthonormal", residual=ortho)
    return Spectrum(values, vectors, sweeps)


def network_spectrum(network: SpinNetwork) -> Spectrum:
    return diagonalize(single_excitation_hamiltonian(network))


def site_state(n: int, site: int) -> np.ndarray:
    """Excitation localised on ``site``."""
    if not 0 <= site < n:
        raise ValidationError(f"site {site} out of range 0..{n - 1}")
    c = np.zeros(n, dtype=complex)
    c[site] = 1.0
    return c


def check_state(state, n: int | None = None) -> np.ndarray:
    c = np.asarray(state, dtype=complex)
    if c.ndim != 1:
        raise ValidationError(f"state must be a vector, got shape {c.shape}")
    if n is not None and len(c) != n:
        raise ValidationError(f"state has {len(c)} amplitudes, expected {n}")
    norm = float(np.vdot(c, c).real)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"state is not normalised (norm^2 = {norm!r})")
    return c


def evolve_state(spectrum: Spectrum, state0, t: float) -> np.ndarray:
    """Exact propagation ``c(t) = V exp(-i diag(lambda) t) V^T c(0)``."""
    c0 = np.asarray(state0, dtype=complex)
    if c0.shape != (spectrum.dim,):
        raise ValidationError(f"state of shape {c0.shape} does not match spectrum of dim {spectrum.dim}")
    v = spectrum.eigenvectors
    return v @ (np.exp(-1j * spectrum.eigenvalues * t) * (v.T @ c0))


def apply_phase_flip(state, site: int) -> np.ndarray:
    """Negate the amplitude on ``site`` (sigma_z within the one-excitation sector)."""
    c = np.array(state, dtype=complex, copy=True)
    if not 0 <= site < len(c):
        raise ValidationError(f"flip site {site} out of range 0..{len(c) - 1}")
    c[site] = -c[site]
    return c


@dataclass(frozen=True, order=True)
class FlipEvent:
    """Instantaneous phase flip on ``site`` at rescaled time ``time``."""

    time: float
    site: int

    def __post_init__(self):
        if not (np.isfinite(self.time) and self.time >= 0):
            raise ValidationError(f"flip time must be finite and non-negative, got {self.time}")
        if self.site < 0:
            raise ValidationError(f"flip site must be non-negative, got {self.site}")


@dataclass(frozen=True)
class Trajectory:
    sample_times: np.ndarray
    states: np.ndarray  # (len(sample_times), n_sites)
    events: tuple[FlipEvent, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.sample_times)

    def __iter__(self):
        return iter(zip(self.sample_times, self.states))


def run_schedule(
    network: SpinNetwork,
    init,
    events: Iterable[FlipEvent],
    sample_times: Sequence[float],
    spectrum: Spectrum | None = None,
) -> Trajectory:
    """Piecewise-exact evolution with phase flips.

    ``init`` is a site index or an amplitude vector.  Events are sorted by
    (time, site).  A sample taken exactly at an event time records the state
    after the flip.
    """
    spectrum = spectrum or network_spectrum(network)
    n = network.n_sites
    c = site_state(n, int(init)) if np.isscalar(init) else check_state(init, n)
    events = tuple(sorted(events))
    for ev in events:
        if ev.site >= n:
            raise ValidationError(f"flip site {ev.site} out of range 0..{n - 1}")
    times = np.asarray(sample_times, dtype=float)
    if times.ndim != 1 or len(times) == 0:
        raise ValidationError("sample_times must be a non-empty 1D sequence")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("sample_times must be strictly increasing")
    if not np.all(np.isfinite(times)):
        raise ValidationError("sample_times must be finite")

    out = np.empty((len(times), n), dtype=complex)
    now = 0.0
    pending = list(events)
    for k, t in enumerate(times):
        while pending and pending[0].time <= t:
            ev = pending.pop(0)
            c = apply_phase_flip(evolve_state(spectrum, c, ev.time - now), ev.site)
            now = ev.time
        out[k] = evolve_state(spectrum, c, t - now)
    return Trajectory(times, out, events)
