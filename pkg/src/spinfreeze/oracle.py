"""Brute-force validation in the full 2^N Hilbert space.

Everything here is built from Pauli matrices and Kronecker products and
propagated with scipy's truncated-Taylor ``expm_multiply``, independently of
the single-excitation engine and its Jacobi eigensolver.  The two paths only
share the :class:`SpinNetwork` description.

Basis ordering: site 0 is the most significant bit, bit value 1 means the
spin is down (excited).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import BudgetError, ValidationError
from .lattice import SpinNetwork

#: Largest network the dense oracle accepts.
MAX_ORACLE_SITES = 14
MAX_KEEP = 4

_I = sp.identity(2, format="csr")
_X = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_Y = sp.csr_matrix(np.array([[0.0, -1j], [1j, 0.0]]))
_Z = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))


def _check_budget(n: int) -> None:
    if n > MAX_ORACLE_SITES:
        raise BudgetError(f"oracle limited to MAX_ORACLE_SITES={MAX_ORACLE_SITES} sites, got {n}")


def _site_op(op, site: int, n: int):
    out = sp.identity(1, format="csr")
    for k in range(n):
        out = sp.kron(out, op if k == site else _I, format="csr")
    return out


def full_hamiltonian_sparse(network: SpinNetwork) -> sp.csr_matrix:
    """Dense ``sum_ij J_ij/2 (X_i X_j + Y_i Y_j) + sum_i E_i (1 - Z_i)/2``.

    The XX+YY form gives a matrix element of exactly ``J_ij`` between states
    that differ by moving one excitation across the edge.  The field term
    differs from ``-E_i/2 Z_i`` by a constant and charges ``E_i`` per
    excitation, so single-excitation rows reproduce the diagonal of the
    reduced matrix.
    """
    n = network.n_sites
    _check_budget(n)
    xs = [_site_op(_X, k, n) for k in range(n)]
    ys = [_site_op(_Y, k, n) for k in range(n)]
    h = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i, j, coupling in network.edges:
        h = h + 0.5 * coupling * (xs[i] @ xs[j] + ys[i] @ ys[j])
    for k, energy in enumerate(network.energies):
        if energy:
            # (1 - Z)/2 counts the excitation on site k.
            h = h + energy * 0.5 * (sp.identity(2**n) - _site_op(_Z, k, n))
    if h.nnz and np.abs(h.data.imag).max() > 1e-14:
        raise AssertionError("XX + YY Hamiltonian should be real")
    return sp.csr_matrix(h.real)


def full_hamiltonian(network: SpinNetwork) -> np.ndarray:
    """Dense form of :func:`full_hamiltonian_sparse`."""
    return full_hamiltonian_sparse(network).toarray()


def excitation_number(n: int) -> np.ndarray:
    """Diagonal of the total excitation-number operator."""
    _check_budget(n)
    idx = np.arange(2**n)
    return np.array([bin(i).count("1") for i in idx], dtype=float)


def single_excitation_indices(n: int) -> np.ndarray:
    """Full-space index of the basis state with only site ``k`` excited, for each k."""
    return np.array([1 << (n - 1 - k) for k in range(n)])


def embed(state) -> np.ndarray:
    """Lift single-excitation amplitudes into the full 2^N space."""
    c = np.asarray(state, dtype=complex)
    n = len(c)
    _check_budget(n)
    full = np.zeros(2**n, dtype=complex)
    full[single_excitation_indices(n)] = c
    return full


def restrict(full_state, n: int) -> np.ndarray:
    return np.asarray(full_state)[single_excitation_indices(n)]


class FullPropagator:
    """Sparse full Hamiltonian applied as ``exp(-i H t) psi`` on demand."""

    def __init__(self, network: SpinNetwork):
        self.n = network.n_sites
        self.hamiltonian = full_hamiltonian_sparse(network)
        self._generator = sp.csr_matrix(-1j * self.hamiltonian)

    def __call__(self, state, t: float) -> np.ndarray:
        psi = np.asarray(state, dtype=complex)
        if psi.shape != (2**self.n,):
            raise ValidationError(f"full state must have length {2**self.n}")
        if t == 0:
            return psi.copy()
        return expm_multiply(self._generator * t, psi)


def full_evolve(network: SpinNetwork, init, t):
    """Evolve a full-space state to time ``t`` (scalar or sequence of times).

    Returns one state for a scalar ``t``, else an array with one row per time.
    """
    prop = FullPropagator(network)
    if np.isscalar(t):
        return prop(init, float(t))
    return np.array([prop(init, float(x)) for x in t])


def full_phase_flip(full_state, site: int, n: int) -> np.ndarray:
    """Apply ``Z`` on ``site``; spin-down components change sign."""
    psi = np.array(full_state, dtype=complex, copy=True)
    bit = 1 << (n - 1 - site)
    psi[(np.arange(2**n) & bit) != 0] *= -1
    return psi


def full_partial_trace(full_state, keep: Sequence[int]) -> np.ndarray:
    """Density matrix of the ``keep`` sites, in the order given."""
    psi = np.asarray(full_state, dtype=complex)
    n = int(round(np.log2(len(psi))))
    if 2**n != len(psi):
        raise ValidationError("full state length is not a power of two")
    keep = list(keep)
    if len(keep) > MAX_KEEP:
        raise BudgetError(f"partial trace keeps at most {MAX_KEEP} sites, got {len(keep)}")
    if len(set(keep)) != len(keep) or any(not 0 <= k < n for k in keep):
        raise ValidationError(f"invalid keep list {keep}")
    rest = [k for k in range(n) if k not in keep]
    tensor = psi.reshape((2,) * n).transpose(keep + rest).reshape(2 ** len(keep), -1)
    return tensor @ tensor.conj().T


def leakage(full_state, n: int) -> float:
    """Largest amplitude outside the single-excitation sector."""
    psi = np.asarray(full_state)
    mask = np.ones(2**n, dtype=bool)
    mask[single_excitation_indices(n)] = False
    return float(np.abs(psi[mask]).max(initial=0.0))
