"""Observables, POVMs, channels and instruments as concrete Kraus data.

All objects validate their structural invariants on construction:
projectors must be idempotent, mutually orthogonal and complete; POVM
elements positive and complete; Kraus sets trace-preserving.  Complete
positivity is automatic from the Kraus form.  Sampling takes explicit
seeds so parallel sweeps can partition the seed space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .linalg import DECOMP_TOL, NumericalFailure, as_matrix, dagger, hermitize, max_abs

CLUSTER_TOL = 1e-8      # relative eigenvalue gap separating degenerate clusters
DEGENERACY_TOL = 1e-6   # projector trace must be this close to an integer
ZERO_PROB = 1e-12


class ZeroProbabilityOutcome(ValueError):
    """Requested the post-measurement state of an outcome with p ~ 0."""


# --- observables ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ObservableBranch:
    eigenvalue: float
    projector: np.ndarray
    degeneracy: int


@dataclass(frozen=True, eq=False)
class ProjectiveObservable:
    """Eigenvalue-labelled orthogonal projectors resolving the identity."""

    dim: int
    branches: tuple[ObservableBranch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        seen = set()
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for br in self.branches:
            p = as_matrix(br.projector)
            if p.shape != (self.dim, self.dim):
                raise ValueError(f"projector shape {p.shape} does not match dim {self.dim}")
            if max_abs(p - p.conj().T) > DECOMP_TOL:
                raise ValueError(f"projector for eigenvalue {br.eigenvalue} is not Hermitian")
            if max_abs(p @ p - p) > DECOMP_TOL:
                raise ValueError(f"projector for eigenvalue {br.eigenvalue} is not idempotent")
            tr = float(np.trace(p).real)
            if abs(tr - round(tr)) > DEGENERACY_TOL or round(tr) != br.degeneracy:
                raise ValueError(
                    f"projector trace {tr!r} inconsistent with degeneracy {br.degeneracy}"
                )
            if br.eigenvalue in seen:
                raise ValueError(f"duplicate eigenvalue label {br.eigenvalue!r}")
            seen.add(br.eigenvalue)
            total += p
        for i, a in enumerate(self.branches):
            for b in self.branches[i + 1 :]:
                if max_abs(as_matrix(a.projector) @ as_matrix(b.projector)) > DECOMP_TOL:
                    raise ValueError(
                        f"projectors for {a.eigenvalue} and {b.eigenvalue} are not orthogonal"
                    )
        if max_abs(total - np.eye(self.dim)) > DECOMP_TOL:
            raise ValueError("projectors do not resolve the identity")
        if sum(br.degeneracy for br in self.branches) != self.dim:
            raise ValueError("degeneracies do not sum to the dimension")

    @classmethod
    def from_pairs(cls, dim: int, pairs) -> "ProjectiveObservable":
        """Build from (eigenvalue, projector) pairs, inferring degeneracies."""
        branches = []
        for val, proj in pairs:
            proj = as_matrix(proj)
            deg = int(round(float(np.trace(proj).real)))
            branches.append(ObservableBranch(float(val), proj, deg))
        return cls(dim, tuple(branches))

    @property
    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(br.eigenvalue for br in self.branches)

    @property
    def projectors(self) -> tuple[np.ndarray, ...]:
        return tuple(br.projector for br in self.branches)

    @property
    def degeneracies(self) -> tuple[int, ...]:
        return tuple(br.degeneracy for br in self.branches)

    @property
    def nondegenerate(self) -> bool:
        return all(br.degeneracy == 1 for br in self.branches)


def basis_observable(dim: int) -> ProjectiveObservable:
    """Computational-basis observable with eigenvalue labels 0, 1, ..."""
    eye = np.eye(dim, dtype=complex)
    pairs = [(float(i), np.outer(eye[:, i], eye[:, i].conj())) for i in range(dim)]
    return ProjectiveObservable.from_pairs(dim, pairs)


def observable_from_basis(columns: np.ndarray) -> ProjectiveObservable:
    """Rank-1 observable from the columns of a unitary, labelled 0, 1, ..."""
    u = as_matrix(columns)
    d = u.shape[0]
    pairs = [(float(i), np.outer(u[:, i], u[:, i].conj())) for i in range(d)]
    return ProjectiveObservable.from_pairs(d, pairs)


# --- POVMs, channels, instruments -------------------------------------------


@dataclass(frozen=True, eq=False)
class Povm:
    dim: int
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        total = np.zeros((self.dim, self.dim), dtype=complex)
        for k, e in enumerate(self.elements):
            e = as_matrix(e)
            if e.shape != (self.dim, self.dim):
                raise ValueError(f"element {k} has shape {e.shape}, expected ({self.dim}, {self.dim})")
            if max_abs(e - e.conj().T) > linalg.STRUCT_TOL * 10:
                raise ValueError(f"element {k} is not Hermitian")
            w = np.linalg.eigvalsh(hermitize(e))
            if w.min() < -linalg.STRUCT_TOL:
                raise ValueError(f"element {k} has negative eigenvalue {w.min():.3e}")
            total += e
        if max_abs(total - np.eye(self.dim)) > DECOMP_TOL:
            raise ValueError("POVM elements do not sum to the identity")


@dataclass(frozen=True, eq=False)
class Channel:
    """Trace-preserving completely positive map in Kraus form."""

    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "kraus", tuple(as_matrix(k) for k in self.kraus))
        if not self.kraus:
            raise ValueError("a channel needs at least one Kraus operator")
        acc = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for k in self.kraus:
            if k.shape != (self.dim_out, self.dim_in):
                raise ValueError(
                    f"Kraus shape {k.shape} does not match ({self.dim_out}, {self.dim_in})"
                )
            acc += dagger(k) @ k
        res = max_abs(acc - np.eye(self.dim_in))
        if res > DECOMP_TOL:
            raise ValueError(f"Kraus completeness residual {res:.3e} exceeds {DECOMP_TOL:.0e}")

    def apply(self, rho) -> np.ndarray:
        return apply_cp(self.kraus, rho)


@dataclass(frozen=True, eq=False)
class InstrumentBranch:
    label: str
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "kraus", tuple(as_matrix(k) for k in self.kraus))


@dataclass(frozen=True, eq=False)
class QuantumInstrument:
    """Outcome-indexed Kraus sets that are jointly trace-preserving."""

    dim_in: int
    dim_out: int
    branches: tuple[InstrumentBranch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise ValueError("an instrument needs at least one outcome")
        labels = [br.label for br in self.branches]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate outcome labels in {labels}")
        acc = np.zeros((self.dim_in, self.dim_in), dtype=complex)
        for br in self.branches:
            for k in br.kraus:
                if k.shape != (self.dim_out, self.dim_in):
                    raise ValueError(
                        f"branch {br.label!r}: Kraus shape {k.shape} does not match "
                        f"({self.dim_out}, {self.dim_in})"
                    )
                acc += dagger(k) @ k
        res = max_abs(acc - np.eye(self.dim_in))
        if res > DECOMP_TOL:
            raise ValueError(
                f"instrument completeness residual {res:.3e} exceeds {DECOMP_TOL:.0e}"
            )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(br.label for br in self.branches)

    @property
    def n_outcomes(self) -> int:
        return len(self.branches)

    def branch(self, label: str) -> InstrumentBranch:
        for br in self.branches:
            if br.label == label:
                return br
        raise KeyError(f"unknown outcome label {label!r}")


def luders_instrument(obs: ProjectiveObservable) -> QuantumInstrument:
    """Projective (Lueders) measurement of an observable; labels m0, m1, ..."""
    branches = [
        InstrumentBranch(f"m{i}", (br.projector,)) for i, br in enumerate(obs.branches)
    ]
    return QuantumInstrument(obs.dim, obs.dim, tuple(branches))


def trivial_instrument(dim: int) -> QuantumInstrument:
    """Single-outcome identity instrument: no information, no disturbance."""
    return QuantumInstrument(dim, dim, (InstrumentBranch("m0", (np.eye(dim, dtype=complex),)),))


# --- acting on states --------------------------------------------------------


def apply_cp(kraus, rho) -> np.ndarray:
    """Apply a completely positive map sum_n K(n) rho K(n)† in Kraus form."""
    rho = as_matrix(rho)
    out = None
    for k in kraus:
        k = as_matrix(k)
        if k.shape[1] != rho.shape[0]:
            raise ValueError(f"Kraus shape {k.shape} incompatible with state {rho.shape}")
        term = k @ rho @ dagger(k)
        out = term if out is None else out + term
    if out is None:
        raise ValueError("empty Kraus set")
    return out


def outcome_probability(inst: QuantumInstrument, label: str, rho) -> float:
    """p(m) = Tr(Phi^(m)(rho))."""
    rho = linalg.assert_density(rho)
    p = float(np.trace(apply_cp(inst.branch(label).kraus, rho)).real)
    return min(max(p, 0.0), 1.0)


def post_measurement_state(inst: QuantumInstrument, label: str, rho) -> np.ndarray:
    """Normalised output state for one outcome; rejects p(m) ~ 0."""
    rho = linalg.assert_density(rho)
    raw = apply_cp(inst.branch(label).kraus, rho)
    p = float(np.trace(raw).real)
    if p <= ZERO_PROB:
        raise ZeroProbabilityOutcome(f"outcome {label!r} has probability {p:.3e}")
    return linalg.assert_density(hermitize(raw) / p)


def flag_vector(n: int, idx: int) -> np.ndarray:
    v = np.zeros((n, 1), dtype=complex)
    v[idx, 0] = 1.0
    return v


def flag_map(inst: QuantumInstrument, rho) -> np.ndarray:
    """Flagged evolution sum_m Phi^(m)(rho) ⊗ |m><m| on the output ⊗ flag space.

    Trace-preserving; the trace of flag block m equals the outcome
    probability p(m).
    """
    rho = linalg.assert_density(rho)
    return flag_apply(inst, rho)


def flag_apply(inst: QuantumInstrument, op) -> np.ndarray:
    """flag_map extended by linearity to arbitrary operators."""
    op = as_matrix(op)
    n = inst.n_outcomes
    d = inst.dim_out
    out = np.zeros((d * n, d * n), dtype=complex)
    for i, br in enumerate(inst.branches):
        flag = np.zeros((n, n), dtype=complex)
        flag[i, i] = 1.0
        out += np.kron(apply_cp(br.kraus, op), flag)
    return out


def flag_block(m: np.ndarray, dim_out: int, n_outcomes: int, idx: int) -> np.ndarray:
    """Extract flag block idx from an operator on the output ⊗ flag space."""
    m = as_matrix(m)
    t = m.reshape(dim_out, n_outcomes, dim_out, n_outcomes)
    return np.ascontiguousarray(t[:, idx, :, idx])


# --- spectral decomposition --------------------------------------------------


def spectral_decompose(h, cluster_tol: float = CLUSTER_TOL) -> ProjectiveObservable:
    """Spectral decomposition with eigenvalue clustering for degeneracies.

    Consecutive eigenvalues closer than ``cluster_tol`` (relative to their
    magnitude, floored at 1) are merged into one branch; the branch label
    is the cluster mean.
    """
    h = as_matrix(h)
    w, v = linalg.eigh(h)
    d = h.shape[0]
    clusters: list[list[int]] = [[0]]
    for i in range(1, d):
        scale = max(1.0, abs(w[i]), abs(w[i - 1]))
        if w[i] - w[i - 1] > cluster_tol * scale:
            clusters.append([i])
        else:
            clusters[-1].append(i)
    pairs = []
    for idxs in clusters:
        block = v[:, idxs]
        proj = hermitize(block @ block.conj().T)
        pairs.append((float(np.mean(w[idxs])), proj))
    obs = ProjectiveObservable.from_pairs(d, pairs)
    recon = sum(br.eigenvalue * br.projector for br in obs.branches)
    if max_abs(recon - h) > 1e-8 * max(1.0, max_abs(h)):
        raise NumericalFailure("spectral reconstruction residual too large")
    return obs


# --- sampling -----------------------------------------------------------------


def sample_haar_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError(f"dimension must be positive, got {dim}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r).copy()
    diag /= np.abs(diag)
    return q * diag


def sample_random_observable(dim: int, degeneracies=None, seed=None) -> ProjectiveObservable:
    """Haar-random observable with the given degeneracy profile (default rank-1)."""
    if degeneracies is None:
        degeneracies = (1,) * dim
    degeneracies = tuple(int(g) for g in degeneracies)
    if any(g < 1 for g in degeneracies) or sum(degeneracies) != dim:
        raise ValueError(f"degeneracy profile {degeneracies} does not fit dimension {dim}")
    u = sample_haar_unitary(dim, seed)
    pairs = []
    start = 0
    for i, g in enumerate(degeneracies):
        block = u[:, start : start + g]
        pairs.append((float(i), hermitize(block @ block.conj().T)))
        start += g
    return ProjectiveObservable.from_pairs(dim, pairs)


def sample_random_instrument(
    dim_in: int, dim_out: int, n_outcomes: int, kraus_per_outcome: int, seed=None
) -> QuantumInstrument:
    """Generic random instrument from a Haar-random isometry.

    The isometry maps the input space into output ⊗ environment ⊗ outcome
    register; splitting by outcome and tracing the environment gives
    ``kraus_per_outcome`` Kraus operators per branch, with completeness
    holding exactly up to roundoff.
    """
    if min(dim_in, dim_out, n_outcomes, kraus_per_outcome) < 1:
        raise ValueError("all instrument dimensions must be positive")
    total = dim_out * kraus_per_outcome * n_outcomes
    if total < dim_in:
        raise ValueError(
            f"output ⊗ environment ⊗ register dimension {total} cannot embed input {dim_in}"
        )
    u = sample_haar_unitary(total, seed)
    v = u[:, :dim_in]
    # row index convention: ((b * kraus_per_outcome + e) * n_outcomes + m)
    v = v.reshape(dim_out, kraus_per_outcome, n_outcomes, dim_in)
    branches = []
    for m in range(n_outcomes):
        kraus = tuple(np.ascontiguousarray(v[:, e, m, :]) for e in range(kraus_per_outcome))
        branches.append(InstrumentBranch(f"m{m}", kraus))
    return QuantumInstrument(dim_in, dim_out, tuple(branches))


# --- JSON (de)serialization ---------------------------------------------------
#
# Complex entries are stored as [re, im] pairs; matrices as row-major
# nested lists.  Round trips are lossless at double precision.


def matrix_to_json(m) -> list:
    m = as_matrix(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(rows) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError("matrix JSON must be a nested list of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def observable_to_json(obs: ProjectiveObservable) -> dict:
    return {
        "dim": obs.dim,
        "branches": [
            {"eigenvalue": br.eigenvalue, "projector": matrix_to_json(br.projector)}
            for br in obs.branches
        ],
    }


def observable_from_json(data: dict) -> ProjectiveObservable:
    pairs = [(b["eigenvalue"], matrix_from_json(b["projector"])) for b in data["branches"]]
    return ProjectiveObservable.from_pairs(int(data["dim"]), pairs)


def povm_to_json(p: Povm) -> dict:
    return {"dim": p.dim, "elements": [matrix_to_json(e) for e in p.elements]}


def povm_from_json(data: dict) -> Povm:
    return Povm(int(data["dim"]), tuple(matrix_from_json(e) for e in data["elements"]))


def channel_to_json(ch: Channel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(data: dict) -> Channel:
    return Channel(
        int(data["dim_in"]),
        int(data["dim_out"]),
        tuple(matrix_from_json(k) for k in data["kraus"]),
    )


def instrument_to_json(inst: QuantumInstrument) -> dict:
    return {
        "dim_in": inst.dim_in,
        "dim_out": inst.dim_out,
        "branches": [
            {"label": br.label, "kraus": [matrix_to_json(k) for k in br.kraus]}
            for br in inst.branches
        ],
    }


def instrument_from_json(data: dict) -> QuantumInstrument:
    branches = tuple(
        InstrumentBranch(str(b["label"]), tuple(matrix_from_json(k) for k in b["kraus"]))
        for b in data["branches"]
    )
    return QuantumInstrument(int(data["dim_in"]), int(data["dim_out"]), branches)
