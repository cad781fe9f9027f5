"""Restricted operator bases and the least-squares amplitude solve.

The control ansatz is a sum of Pauli strings with K-body support whose
sites sit within a pairwise distance R of each other.  Given the
adiabatic state |Psi_a> and the exact auxiliary term H_aux, the optimal
real amplitudes h minimize

    || (H_aux - sum_I h_I P_I) |Psi_a> ||^2 ,

which reduces to the normal system  Abar h = Cbar  with

    Abar_{I',I} = 2 Re <Phi_I'|Phi_I>,   Cbar_I = 2 Re <Phi_I|Phi_aux>,

|Phi_I> = P_I |Psi_a>, |Phi_aux> = H_aux |Psi_a>.  The Gram matrix is
generically rank deficient (it lives on a single state), so the solve is
a minimum-norm pseudo-inverse with a relative eigenvalue cutoff.  A dense
trace evaluation of the anticommutator form on a density matrix is kept
as a mixed-state-capable oracle for the fast pure-state path.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractViolationError, RankDeficiencyError
from .pauli import COMPONENTS, PauliString, StateVector, apply_array, to_dense
from .spectral import AuxMatrix

_COMP_INDEX = {c: i for i, c in enumerate(COMPONENTS)}


@dataclass(frozen=True)
class AnsatzSpec:
    """Declarative description of the restricted operator set.

    ``patterns`` mode places one fixed component tuple, e.g. ``("y", "z")``,
    on every admissible tuple of distinct sites.  ``canonical_full`` mode
    enumerates all strings of support size 1..max_body (identity
    components handled by support reduction, so no operator appears
    twice).
    """

    mode: str
    max_body: int
    max_range: int
    patterns: tuple = ()

    def __post_init__(self):
        if self.mode not in ("patterns", "canonical_full"):
            raise ConfigurationError(f"unknown ansatz mode {self.mode!r}")
        if self.max_body < 1:
            raise ConfigurationError(f"max_body must be >= 1, got {self.max_body}")
        if self.max_range < self.max_body - 1:
            raise ConfigurationError(
                f"max_range {self.max_range} below the admissible minimum "
                f"{self.max_body - 1}"
            )
        patterns = tuple(tuple(p) for p in self.patterns)
        if self.mode == "patterns":
            if not patterns:
                raise ConfigurationError("patterns mode needs at least one pattern")
            for p in patterns:
                if len(p) != self.max_body:
                    raise ConfigurationError(
                        f"pattern {p} has length {len(p)}, expected max_body={self.max_body}"
                    )
                bad = [c for c in p if c not in COMPONENTS]
                if bad:
                    raise ConfigurationError(f"pattern components must be in {COMPONENTS}: {bad}")
        object.__setattr__(self, "patterns", patterns)


@dataclass(frozen=True)
class OperatorBasis:
    """Concrete, deduplicated, deterministically ordered operator set."""

    strings: tuple
    spec: AnsatzSpec
    n_sites: int

    def __len__(self):
        return len(self.strings)


@dataclass(frozen=True)
class NormalSystem:
    """Assembled least-squares system Abar h = Cbar at one time point.

    ``columns`` stacks the |Phi_I> vectors (pure-state path only); the
    trace oracle leaves it as None.  ``aux_norm_sq`` is the h = 0 cost.
    """

    gram: np.ndarray
    target: np.ndarray
    state_ref: StateVector | None
    aux_norm_sq: float
    columns: np.ndarray | None = None
    aux_vector: np.ndarray | None = None


@dataclass(frozen=True)
class AuxSolution:
    """Optimal amplitudes with residual cost and conditioning diagnostics."""

    amplitudes: np.ndarray
    residual: float
    rank: int
    cutoff: float


def _sort_key(p: PauliString):
    return (p.support_size, p.sites, tuple(_COMP_INDEX[c] for c in p.components))


def enumerate_basis(spec: AnsatzSpec, n_sites: int) -> OperatorBasis:
    """All admissible strings, deduplicated, ordered by (support, sites, components)."""
    if spec.max_body > n_sites:
        raise ConfigurationError(
            f"max_body {spec.max_body} exceeds chain length {n_sites}"
        )
    if spec.max_range > n_sites - 1:
        raise ConfigurationError(
            f"max_range {spec.max_range} exceeds the chain maximum {n_sites - 1}"
        )
    seen = set()
    if spec.mode == "patterns":
        for pattern in spec.patterns:
            for sites in itertools.permutations(range(1, n_sites + 1), spec.max_body):
                if max(sites) - min(sites) > spec.max_range:
                    continue
                seen.add(PauliString(sites, pattern))
    else:
        for k in range(1, spec.max_body + 1):
            for sites in itertools.combinations(range(1, n_sites + 1), k):
                if sites[-1] - sites[0] > spec.max_range:
                    continue
                for comps in itertools.product(COMPONENTS, repeat=k):
                    seen.add(PauliString(sites, comps))
    return OperatorBasis(tuple(sorted(seen, key=_sort_key)), spec, n_sites)


def build_system(basis: OperatorBasis, psi_a: StateVector, H_aux: AuxMatrix) -> NormalSystem:
    """Fast pure-state assembly: each |Phi_I> is computed once via bit application."""
    dim = psi_a.dim
    if H_aux.matrix.shape != (dim, dim):
        raise ConfigurationError(
            f"H_aux shape {H_aux.matrix.shape} does not match state dimension {dim}"
        )
    psi = psi_a.amplitudes
    nb = len(basis)
    cols = np.empty((dim, nb), dtype=complex)
    for i, p in enumerate(basis.strings):
        cols[:, i] = apply_array(p, psi, basis.n_sites)
    phi_aux = H_aux.matrix @ psi
    gram = 2.0 * np.real(cols.conj().T @ cols)
    gram = 0.5 * (gram + gram.T)
    target = 2.0 * np.real(cols.conj().T @ phi_aux)
    return NormalSystem(
        gram=gram,
        target=target,
        state_ref=psi_a,
        aux_norm_sq=float(np.vdot(phi_aux, phi_aux).real),
        columns=cols,
        aux_vector=phi_aux,
    )


def oracle_system(basis: OperatorBasis, rho: np.ndarray, H_aux: AuxMatrix) -> NormalSystem:
    """Dense anticommutator-trace evaluation; mixed-state capable, O(4^N) per entry."""
    rho = np.asarray(rho, dtype=complex)
    dim = 2 ** basis.n_sites
    if rho.shape != (dim, dim):
        raise ConfigurationError(f"rho shape {rho.shape} does not match dimension {dim}")
    if np.abs(rho - rho.conj().T).max() > 1e-10:
        raise ContractViolationError("rho is not Hermitian within 1e-10")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ContractViolationError(f"rho trace {np.trace(rho)!r} deviates from 1")
    evals = np.linalg.eigvalsh(rho)
    if evals[0] < -1e-10:
        raise ContractViolationError(f"rho has negative eigenvalue {evals[0]:.3e}")
    dense = [to_dense(p, basis.n_sites) for p in basis.strings]
    prods = [rho @ d for d in dense]
    nb = len(basis)
    gram = np.empty((nb, nb))
    for i in range(nb):
        for j in range(nb):
            gram[i, j] = np.trace(prods[i] @ dense[j] + prods[j] @ dense[i]).real
    H = H_aux.matrix
    target = np.array(
        [np.trace(rho @ (H @ d + d @ H)).real for d in dense]
    )
    gram = 0.5 * (gram + gram.T)
    return NormalSystem(
        gram=gram,
        target=target,
        state_ref=None,
        aux_norm_sq=float(np.trace(rho @ H @ H).real),
    )


def solve(system: NormalSystem, cutoff: float = 1e-10) -> AuxSolution:
    """Minimum-norm least-squares amplitudes via eigendecomposition of the Gram matrix."""
    if not 0.0 < cutoff < 1.0:
        raise ConfigurationError(f"cutoff must lie in (0, 1), got {cutoff}")
    w, U = np.linalg.eigh(system.gram)
    wmax = w[-1] if w.size else 0.0
    keep = w > cutoff * wmax if wmax > 0 else np.zeros_like(w, dtype=bool)
    if not keep.any():
        if np.linalg.norm(system.target) > 0:
            raise RankDeficiencyError(
                "Gram matrix is entirely below the cutoff but the target is nonzero"
            )
        h = np.zeros_like(system.target)
    else:
        Uk = U[:, keep]
        h = Uk @ ((Uk.T @ system.target) / w[keep])
    if system.columns is not None and system.aux_vector is not None:
        diff = system.aux_vector - system.columns @ h
        res = float(np.vdot(diff, diff).real)
    else:
        res = float(system.aux_norm_sq - h @ system.target + 0.5 * h @ system.gram @ h)
        res = max(res, 0.0)
    return AuxSolution(
        amplitudes=h, residual=res, rank=int(np.count_nonzero(keep)), cutoff=float(cutoff)
    )


def residual(basis: OperatorBasis, h, psi_a: StateVector, H_aux: AuxMatrix) -> float:
    """Direct evaluation of the quadratic cost at amplitudes ``h``."""
    h = np.asarray(h, dtype=float)
    if h.shape != (len(basis),):
        raise ConfigurationError(
            f"amplitude vector has shape {h.shape}, expected ({len(basis)},)"
        )
    vec = H_aux.matrix @ psi_a.amplitudes
    for hi, p in zip(h, basis.strings):
        if hi != 0.0:
            vec = vec - hi * apply_array(p, psi_a.amplitudes, basis.n_sites)
    return float(np.vdot(vec, vec).real)


def ansatz_term(basis: OperatorBasis, h) -> np.ndarray:
    """Dense sum_I h_I P_I; each string is a signed permutation, O(2^N) per string."""
    h = np.asarray(h, dtype=float)
    dim = 2 ** basis.n_sites
    out = np.zeros((dim, dim), dtype=complex)
    idx = np.arange(dim)
    for hi, p in zip(h, basis.strings):
        if hi == 0.0:
            continue
        v = idx & p._sign_mask
        for shift in (16, 8, 4, 2, 1):
            v ^= v >> shift
        phase = (1j) ** p._n_y * (1.0 - 2.0 * (v & 1))
        out[idx ^ p._flip_mask, idx] += hi * phase
    return out


def paper_resource_count(n_sites: int, k_body: int) -> int:
    """Experimental-resource tally (1/2) 4^K N!/(N-K)!, exact integer arithmetic.

    This counts site tuples with internal permutations as distinct, as in
    the scaling argument; it intentionally differs from the deduplicated
    basis size of :func:`enumerate_basis`.
    """
    if not 1 <= k_body <= n_sites:
        raise ConfigurationError(
            f"need 1 <= k_body <= n_sites, got k_body={k_body}, n_sites={n_sites}"
        )
    num = 4 ** k_body * math.perm(n_sites, k_body)
    return num // 2
