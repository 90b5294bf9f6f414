"""Dense complex linear algebra for small Hilbert spaces (d <= ~16).

Everything works on plain numpy arrays of complex dtype.  Structural
properties (Hermiticity, unit trace, positivity) are checked against
``STRUCT_TOL``; decomposition residuals get the looser ``DECOMP_TOL``.
Small dimensions keep conditioning benign, so a single pair of module-wide
constants is enough.
"""

from __future__ import annotations

import numpy as np

STRUCT_TOL = 1e-10   # Hermiticity / trace / positivity checks
DECOMP_TOL = 1e-9    # decomposition and reconstruction residuals


class NumericalFailure(RuntimeError):
    """A dense matrix decomposition did not converge."""


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-d complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def dagger(m) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(m).conj().T


def max_abs(m) -> float:
    """Largest entrywise modulus; 0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def hermitize(m) -> np.ndarray:
    """Hermitian part (m + m†)/2."""
    m = np.asarray(m, dtype=complex)
    return (m + m.conj().T) / 2


def is_hermitian(m, tol: float = STRUCT_TOL) -> bool:
    m = as_matrix(m)
    return m.shape[0] == m.shape[1] and max_abs(m - m.conj().T) <= tol


def assert_hermitian(m, tol: float = STRUCT_TOL, name: str = "matrix") -> np.ndarray:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} is not square: shape {m.shape}")
    dev = max_abs(m - m.conj().T)
    if dev > tol:
        raise ValueError(f"{name} deviates from Hermiticity by {dev:.3e} (tol {tol:.1e})")
    return m


def assert_density(rho, tol: float = STRUCT_TOL, name: str = "state") -> np.ndarray:
    """Validate a density matrix: Hermitian, PSD up to tol, unit trace."""
    rho = assert_hermitian(rho, tol=tol, name=name)
    w = np.linalg.eigvalsh(rho)
    if w.min() < -tol:
        raise ValueError(f"{name} has negative eigenvalue {w.min():.3e}")
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > tol:
        raise ValueError(f"{name} has trace {tr!r}, expected 1")
    return rho


def eigh(m, tol: float = STRUCT_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix V) with m = V diag(w) V†.
    Raises NumericalFailure if the underlying iteration does not converge.
    """
    m = assert_hermitian(m, tol=tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigh did not converge: {exc}") from exc
    return w, v


def clip_spectrum(w, tol: float = STRUCT_TOL) -> np.ndarray:
    """Zero out roundoff-negative eigenvalues in (-tol, 0); reject worse ones."""
    w = np.asarray(w, dtype=float)
    if w.min() < -tol:
        raise ValueError(f"eigenvalue {w.min():.3e} below -{tol:.1e}, not a roundoff artifact")
    return np.clip(w, 0.0, None)


def psd_sqrt(m) -> np.ndarray:
    """Matrix square root of a PSD Hermitian matrix via eigh with clipped spectrum."""
    w, v = eigh(m)
    s = np.sqrt(clip_spectrum(w))
    return (v * s) @ v.conj().T


def spectral_norm(m) -> float:
    """Largest singular value."""
    m = as_matrix(m)
    if not m.size or not np.any(m):
        return 0.0
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc
    return float(s[0])


def trace_norm(m) -> float:
    """Sum of singular values (Schatten 1-norm)."""
    m = as_matrix(m)
    if not m.size or not np.any(m):
        return 0.0
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"svd did not converge: {exc}") from exc
    return float(s.sum())


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, dims: tuple[int, int], keep: str) -> np.ndarray:
    """Partial trace of an operator on a bipartite space of dimensions (dA, dB).

    keep="A" traces out the second factor, keep="B" the first.  Linear and
    trace-preserving: Tr(result) == Tr(m).
    """
    da, db = dims
    m = as_matrix(m)
    if m.shape != (da * db, da * db):
        raise ValueError(f"operator shape {m.shape} does not match dims {dims}")
    t = m.reshape(da, db, da, db)
    if keep == "A":
        return np.einsum("abcb->ac", t)
    if keep == "B":
        return np.einsum("abad->bd", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def fidelity(rho, omega) -> float:
    """Fidelity F(rho, omega) = ||sqrt(rho) sqrt(omega)||_1^2, in [0, 1]."""
    rho = as_matrix(rho)
    omega = as_matrix(omega)
    if rho.shape != omega.shape:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {omega.shape}")
    f = trace_norm(psd_sqrt(rho) @ psd_sqrt(omega)) ** 2
    return float(min(max(f, 0.0), 1.0))
