"""Ising Hamiltonian, exact diagonalization and the exact auxiliary CD term.

The driven model is an open chain of N spins,

    H0(B) = -B sum_j sigma^x_j + J0 sum_j sigma^z_j sigma^z_{j+1},

with the transverse field B playing the role of the drive parameter
(J0 is held constant).  Everything here is dense: 2^N <= 4096 at desk
scale, so one ``eigh`` per requested field value is cheap and there is
no interpolation knob.

The exact auxiliary counterdiabatic term is built in the gauge-invariant
sum-over-states form

    H_aux = i * Bdot * sum_{m != n} |m><m| dH/dB |n><n| / (e_n - e_m),

equivalent to the adiabatic-gauge-potential definition via first-order
perturbation theory but requiring a single diagonalization.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    ContractViolationError,
    DegeneracyError,
    ResourceLimitError,
    TrackingError,
)
from .pauli import DENSE_SITE_CAP, StateVector


@dataclass(frozen=True)
class IsingModel:
    """Open transverse-field Ising chain: N sites, uniform coupling J0."""

    n_sites: int
    coupling: float = 1.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise ConfigurationError(f"n_sites must be >= 1, got {self.n_sites}")
        if not np.isfinite(self.coupling):
            raise ConfigurationError("coupling must be finite")
        if self.n_sites >= 2 and self.coupling == 0.0:
            raise ConfigurationError("coupling must be nonzero for n_sites >= 2")


@dataclass(frozen=True)
class SpectralSnapshot:
    """Full instantaneous eigensystem of H0 at one field value."""

    field: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.size

    @property
    def spectral_width(self):
        return float(self.eigenvalues[-1] - self.eigenvalues[0])


@dataclass(frozen=True)
class AuxMatrix:
    """Exact counterdiabatic term at one (field, field-rate) point."""

    matrix: np.ndarray
    field_rate: float


def _bits(n_sites):
    idx = np.arange(2 ** n_sites)
    return (idx[:, None] >> np.arange(n_sites)) & 1


def build_hamiltonian(model: IsingModel, B: float, site_cap: int = DENSE_SITE_CAP) -> np.ndarray:
    """Dense real-symmetric H0(B) with exactly N-1 open-boundary bonds."""
    n = model.n_sites
    if n > site_cap:
        raise ResourceLimitError(f"dense build for n_sites={n} exceeds cap {site_cap}")
    dim = 2 ** n
    z = 1 - 2 * _bits(n)  # sigma^z eigenvalue of each site, per basis state
    H = np.zeros((dim, dim))
    if n >= 2:
        H[np.diag_indices(dim)] = model.coupling * np.sum(z[:, :-1] * z[:, 1:], axis=1)
    idx = np.arange(dim)
    for j in range(n):
        H[idx, idx ^ (1 << j)] += -B
    return H


def field_derivative(model: IsingModel, site_cap: int = DENSE_SITE_CAP) -> np.ndarray:
    """dH0/dB = -sum_j sigma^x_j (the only field-dependent part of H0)."""
    n = model.n_sites
    if n > site_cap:
        raise ResourceLimitError(f"dense build for n_sites={n} exceeds cap {site_cap}")
    dim = 2 ** n
    dH = np.zeros((dim, dim))
    idx = np.arange(dim)
    for j in range(n):
        dH[idx, idx ^ (1 << j)] += -1.0
    return dH


def diagonalize(H: np.ndarray, field: float = 0.0) -> SpectralSnapshot:
    """Exact diagonalization of a Hermitian matrix into a SpectralSnapshot."""
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractViolationError(f"expected a square matrix, got shape {H.shape}")
    scale = max(np.abs(H).max(), 1.0)
    if np.abs(H - H.conj().T).max() > 1e-10 * scale:
        raise ContractViolationError("matrix is not Hermitian within 1e-10")
    w, V = np.linalg.eigh(H)
    return SpectralSnapshot(field=float(field), eigenvalues=w, eigenvectors=V.astype(complex))


def exact_aux(
    snapshot: SpectralSnapshot,
    dH_dlambda: np.ndarray,
    field_rate: float,
    gap_tol: float | None = None,
    coupling_tol: float | None = None,
) -> AuxMatrix:
    """Exact H_aux from a snapshot; proportional to the field rate.

    Level pairs closer than ``gap_tol`` are a hard error unless their
    dH coupling is negligible (below ``coupling_tol``), in which case the
    pair is skipped: for the open Ising chain such pairs are the
    spin-flip-parity partners whose coupling vanishes identically, and
    their 0/0 ratio would otherwise inject pure rounding noise.
    """
    dim = snapshot.dim
    if dH_dlambda.shape != (dim, dim):
        raise ConfigurationError(
            f"dH shape {dH_dlambda.shape} does not match snapshot dimension {dim}"
        )
    if field_rate == 0.0:
        return AuxMatrix(np.zeros((dim, dim), dtype=complex), 0.0)
    w = snapshot.eigenvalues
    V = snapshot.eigenvectors
    width = max(snapshot.spectral_width, np.finfo(float).tiny)
    if gap_tol is None:
        gap_tol = 1e-8 * width
    M = V.conj().T @ dH_dlambda @ V
    delta = w[None, :] - w[:, None]  # delta[m, n] = e_n - e_m
    offdiag = ~np.eye(dim, dtype=bool)
    close = offdiag & (np.abs(delta) <= gap_tol)
    if close.any():
        if coupling_tol is None:
            coupling_tol = 1e-8 * max(np.abs(M).max(), np.finfo(float).tiny)
        offending = close & (np.abs(M) > coupling_tol)
        if offending.any():
            m, n = np.argwhere(offending)[0]
            raise DegeneracyError(
                f"levels {m} and {n} are separated by {abs(delta[m, n]):.3e} "
                f"(below gap_tol {gap_tol:.3e}) with non-negligible coupling "
                f"{abs(M[m, n]):.3e}",
                levels=(int(m), int(n)),
                gap=float(abs(delta[m, n])),
            )
    K = np.zeros_like(M)
    good = offdiag & ~close
    K[good] = M[good] / delta[good]
    A = 1j * field_rate * (V @ K @ V.conj().T)
    A = 0.5 * (A + A.conj().T)
    return AuxMatrix(A, float(field_rate))


def eigenstate_from_snapshot(
    snapshot: SpectralSnapshot,
    level: int = 0,
    prev=None,
    gap_tol: float | None = None,
    overlap_tol: float = 1e-8,
) -> np.ndarray:
    """Gauge-fixed eigenvector of a snapshot as a raw amplitude array.

    With ``prev`` given, the global phase makes <prev|out> real positive;
    if the requested level sits in a cluster degenerate within ``gap_tol``,
    the output is the normalized projection of ``prev`` onto the cluster
    subspace (the continuation limit).  Without ``prev`` a degenerate
    cluster is an error and the phase makes the largest-magnitude
    amplitude real positive.
    """
    w = snapshot.eigenvalues
    V = snapshot.eigenvectors
    if not 0 <= level < w.size:
        raise ConfigurationError(f"level {level} out of range for dimension {w.size}")
    width = max(snapshot.spectral_width, np.finfo(float).tiny)
    if gap_tol is None:
        gap_tol = 1e-8 * width
    lo = hi = level
    while lo > 0 and w[lo] - w[lo - 1] <= gap_tol:
        lo -= 1
    while hi < w.size - 1 and w[hi + 1] - w[hi] <= gap_tol:
        hi += 1
    prev_arr = None if prev is None else (
        prev.amplitudes if isinstance(prev, StateVector) else np.asarray(prev, dtype=complex)
    )
    if lo == hi:
        v = V[:, level].copy()
        if prev_arr is not None:
            ov = np.vdot(prev_arr, v)
            if abs(ov) < overlap_tol:
                raise TrackingError(
                    f"overlap {abs(ov):.3e} with previous state at level {level}; "
                    "level crossing suspected"
                )
            v *= ov.conjugate() / abs(ov)
        else:
            k = int(np.argmax(np.abs(v)))
            v *= v[k].conjugate() / abs(v[k])
        return v
    if prev_arr is None:
        raise DegeneracyError(
            f"levels {lo}..{hi} are degenerate within gap_tol {gap_tol:.3e} "
            "and no previous state was supplied",
            levels=(lo, hi),
            gap=float(w[hi] - w[lo]),
        )
    Vc = V[:, lo : hi + 1]
    v = Vc @ (Vc.conj().T @ prev_arr)
    nrm = np.linalg.norm(v)
    if nrm < overlap_tol:
        raise TrackingError(
            f"previous state has projection {nrm:.3e} on the degenerate cluster {lo}..{hi}"
        )
    return v / nrm


def adiabatic_state(
    model: IsingModel,
    field_path,
    t: float,
    level: int = 0,
    prev=None,
    gap_tol: float | None = None,
) -> StateVector:
    """Instantaneous eigenstate |e_level(B(t))> with gauge continuity via ``prev``."""
    B = float(field_path(t))
    snap = diagonalize(build_hamiltonian(model, B), field=B)
    v = eigenstate_from_snapshot(snap, level=level, prev=prev, gap_tol=gap_tol)
    return StateVector(v, model.n_sites)


def ground_state(model: IsingModel, B: float) -> StateVector:
    """Ground state of H0(B) with the default (largest-amplitude) phase fix."""
    snap = diagonalize(build_hamiltonian(model, B), field=B)
    return StateVector(eigenstate_from_snapshot(snap, level=0), model.n_sites)
