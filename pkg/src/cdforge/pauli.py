"""Pauli strings and their action on spin-chain state vectors.

Conventions (fixed once, bit-exactly, so every number downstream is
reproducible):

* sites are numbered ``1..N``;
* computational basis index ``b`` stores the spin of site ``j`` in bit
  ``j-1``, with bit value 0 meaning ``|0>`` and ``sigma^z|0> = +|0>``;
* ``sigma^y|0> = i|1>`` and ``sigma^y|1> = -i|0>`` (standard matrices).

A Pauli string is a tensor product of single-site ``x``/``y``/``z``
operators on distinct sites, implicit identity elsewhere.  Identity
components are never stored: a site carrying the identity is simply
unlisted, so every operator has exactly one representation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ContractViolationError, ResourceLimitError

SIGMA = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

COMPONENTS = ("x", "y", "z")

#: largest chain for which dense 2^N x 2^N matrices are built by default
DENSE_SITE_CAP = 12


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-site Paulis on distinct sites.

    Storage is canonicalized by ascending site index, so two strings are
    equal (and hash equal) iff their (site, component) sets agree.
    """

    sites: tuple
    components: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        comps = tuple(self.components)
        if len(sites) != len(comps):
            raise ConfigurationError(
                f"sites/components length mismatch: {len(sites)} vs {len(comps)}"
            )
        if not sites:
            raise ConfigurationError("a Pauli string needs support on at least one site")
        if len(set(sites)) != len(sites):
            raise ConfigurationError(f"sites must be distinct, got {sites}")
        if min(sites) < 1:
            raise ConfigurationError(f"site indices start at 1, got {sites}")
        bad = [c for c in comps if c not in COMPONENTS]
        if bad:
            raise ConfigurationError(f"components must be in {COMPONENTS}, got {bad}")
        pairs = sorted(zip(sites, comps))
        object.__setattr__(self, "sites", tuple(p[0] for p in pairs))
        object.__setattr__(self, "components", tuple(p[1] for p in pairs))

    @property
    def support_size(self):
        return len(self.sites)

    @property
    def span(self):
        """Largest pairwise site distance within the support."""
        return self.sites[-1] - self.sites[0]

    @cached_property
    def _flip_mask(self):
        # x and y flip the spin of their site
        m = 0
        for s, c in zip(self.sites, self.components):
            if c in ("x", "y"):
                m |= 1 << (s - 1)
        return m

    @cached_property
    def _sign_mask(self):
        # y and z contribute a (-1)^bit phase
        m = 0
        for s, c in zip(self.sites, self.components):
            if c in ("y", "z"):
                m |= 1 << (s - 1)
        return m

    @cached_property
    def _n_y(self):
        return sum(1 for c in self.components if c == "y")

    def label(self):
        return " ".join(f"{c}{s}" for s, c in zip(self.sites, self.components))

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of ``n_sites`` spins in the computational basis."""

    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (2 ** self.n_sites,):
            raise ConfigurationError(
                f"expected {2 ** self.n_sites} amplitudes for n_sites={self.n_sites}, "
                f"got shape {amp.shape}"
            )
        nrm = np.linalg.norm(amp)
        if abs(nrm - 1.0) > 1e-9:
            raise ContractViolationError(f"state norm {nrm!r} deviates from 1 beyond 1e-9")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self):
        return self.amplitudes.size


def _as_array(state):
    if isinstance(state, StateVector):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


def apply_array(pauli: PauliString, amplitudes: np.ndarray, n_sites: int) -> np.ndarray:
    """Action of a Pauli string on a raw amplitude array, O(2^N) bit work."""
    if pauli.sites[-1] > n_sites:
        raise ConfigurationError(
            f"Pauli string touches site {pauli.sites[-1]} but the chain has {n_sites} sites"
        )
    dim = 2 ** n_sites
    idx = np.arange(dim)
    # parity of popcount(b & sign_mask) via xor-folding
    v = idx & pauli._sign_mask
    for shift in (16, 8, 4, 2, 1):
        v ^= v >> shift
    phase = (1j) ** pauli._n_y * (1.0 - 2.0 * (v & 1))
    # out[j] = phase(j^f) * psi[j^f]
    return (phase * amplitudes)[idx ^ pauli._flip_mask]


def apply(pauli: PauliString, psi: StateVector) -> StateVector:
    """Return (tensor-of-sigmas) |psi>; norm preserving since Paulis are unitary."""
    return StateVector(apply_array(pauli, psi.amplitudes, psi.n_sites), psi.n_sites)


def to_dense(pauli: PauliString, n_sites: int, site_cap: int = DENSE_SITE_CAP) -> np.ndarray:
    """Dense 2^N x 2^N matrix of the string (test oracle for :func:`apply`)."""
    if n_sites > site_cap:
        raise ResourceLimitError(f"dense build for n_sites={n_sites} exceeds cap {site_cap}")
    if pauli.sites[-1] > n_sites:
        raise ConfigurationError(
            f"Pauli string touches site {pauli.sites[-1]} but the chain has {n_sites} sites"
        )
    comp = dict(zip(pauli.sites, pauli.components))
    out = np.ones((1, 1), dtype=complex)
    # site 1 occupies the least significant bit, so it is the last kron factor
    for j in range(n_sites, 0, -1):
        factor = SIGMA[comp[j]] if j in comp else np.eye(2, dtype=complex)
        out = np.kron(out, factor)
    return out


def real_pair_overlap(phi1, phi2) -> float:
    """2 Re <phi1|phi2>, the real pairing behind the fast pure-state Gram build."""
    a = _as_array(phi1)
    b = _as_array(phi2)
    if a.shape != b.shape:
        raise ConfigurationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(2.0 * np.real(np.vdot(a, b)))
