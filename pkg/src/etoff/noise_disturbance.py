"""Information-theoretic noise and disturbance of quantum instruments.

Two correlation experiments drive everything here.  In the first, a
source emits eigenstates of an observable X (the state Pi(x)/d_x with
probability d_x/d); the instrument's classical outcome m is correlated
with the input eigenvalue, and the noise is the conditional entropy of X
given M.  In the second, eigenstates of a second observable Z are fed
through the instrument, a correction channel acting on the quantum
output together with the outcome flag tries to undo the measurement
back-action, Z is measured again, and the disturbance is the conditional
entropy of the input eigenvalue given the final outcome, minimised over
correction channels.

The exact minimum over all correction channels is not computable in
closed form; ``disturbance`` reports the best value found over a family
of candidates (flag-discarding identity, classical repreparation by
outcome, and a continuously parametrised Kraus family refined by
derivative-free search).  The result is an upper bound on the true
disturbance, which is the safe direction for certifying trade-off
relations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import linalg
from .decision import standard_decision
from .entropy import EntropyOrder, JointDistribution, conditional_entropy
from .linalg import as_matrix, dagger, hermitize, max_abs
from .quantum import (
    Channel,
    ProjectiveObservable,
    QuantumInstrument,
    apply_cp,
    flag_apply,
    flag_vector,
)

_RANGE_TOL = 1e-12


class OrderOutOfRange(ValueError):
    """Entropic order outside the admitted interval for this dimension."""


class DegenerateObservable(ValueError):
    """Operation requires a non-degenerate observable."""


@dataclass(frozen=True)
class SearchConfig:
    """Budget for the correction-channel search.

    ``kraus_rank`` is the environment dimension of the parametrised
    isometry; None picks the smallest viable one.  With a seed the whole
    search is deterministic, and restart r depends only on (seed, r), so
    growing the budget can never worsen the reported minimum.
    """

    restarts: int = 8
    iterations: int = 2000
    seed: int | None = None
    kraus_rank: int | None = None


@dataclass(frozen=True, eq=False)
class CorrectionSearchResult:
    best_value: float
    best_channel: Channel
    restarts: int
    iterations: int
    converged: bool
    best_candidate: str


@dataclass(frozen=True, eq=False)
class NoiseExperiment:
    observable: ProjectiveObservable
    instrument: QuantumInstrument
    joint: JointDistribution


@dataclass(frozen=True, eq=False)
class DisturbanceExperiment:
    observable: ProjectiveObservable
    instrument: QuantumInstrument
    correction: Channel
    joint: JointDistribution


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    """Cross-check of the combined-estimation statistics.

    The joint distributions of (estimation outcome, input eigenvalue) are
    computed twice: directly on the input system, and through a maximally
    entangled pair where the observable acts transposed on the mirror
    system.  The report carries the worst absolute discrepancies, the
    completeness residual of the estimation POVM, and the overlap
    characteristic computed from plain and transposed projectors.
    """

    max_joint_x_gap: float
    max_joint_z_gap: float
    max_conditional_gap: float
    povm_residual: float
    overlap_c: float
    overlap_c_transposed: float

    @property
    def max_gap(self) -> float:
        return max(self.max_joint_x_gap, self.max_joint_z_gap, self.max_conditional_gap)


# --- admissible orders -------------------------------------------------------


def check_order(order: EntropyOrder, dim: int) -> None:
    """Reject Renyi orders outside (0, 1], or (0, 2] in dimension 2."""
    if order.family != "renyi":
        return
    limit = 2.0 if dim == 2 else 1.0
    if math.isinf(order.alpha) or order.alpha > limit + _RANGE_TOL:
        raise OrderOutOfRange(
            f"Renyi order {order.alpha} not admitted at dimension {dim} "
            f"(allowed interval (0, {limit:g}])"
        )


# --- the first experiment: noise ---------------------------------------------


def noise_joint(x_obs: ProjectiveObservable, inst: QuantumInstrument) -> JointDistribution:
    """Joint distribution p(x, m) of input eigenvalue and instrument outcome.

    Rows are X eigenvalues, columns instrument outcomes, so conditional
    entropies of this joint are entropies of X given M.
    """
    if x_obs.dim != inst.dim_in:
        raise ValueError(f"observable dim {x_obs.dim} != instrument input dim {inst.dim_in}")
    d = x_obs.dim
    table = np.empty((len(x_obs.branches), inst.n_outcomes))
    for i, br in enumerate(x_obs.branches):
        for k, mbr in enumerate(inst.branches):
            # p(x, m) = (d_x / d) * p(m | x) with input state Pi(x)/d_x
            table[i, k] = float(np.trace(apply_cp(mbr.kraus, br.projector)).real) / d
    return JointDistribution(table, x_obs.eigenvalues, inst.labels)


def noise_experiment(x_obs: ProjectiveObservable, inst: QuantumInstrument) -> NoiseExperiment:
    j = noise_joint(x_obs, inst)
    marg = j.marginal_rows()
    expect = np.array([br.degeneracy / x_obs.dim for br in x_obs.branches])
    if np.max(np.abs(marg - expect)) > 1e-9:
        raise ValueError("noise joint marginal deviates from d_x/d")
    return NoiseExperiment(x_obs, inst, j)


def noise(x_obs: ProjectiveObservable, inst: QuantumInstrument, order: EntropyOrder) -> float:
    """Information-theoretic noise: conditional entropy of X given the outcome.

    No optimisation over guessing functions is applied; the admitted
    Renyi interval is exactly the one for which conditioning on more
    variables cannot increase the entropy.
    """
    check_order(order, x_obs.dim)
    return conditional_entropy(noise_joint(x_obs, inst), order)


# --- the second experiment: disturbance --------------------------------------


def _flagged_projectors(z_obs: ProjectiveObservable, inst: QuantumInstrument):
    """Phi_M(Lambda(z)) for every eigenvalue of Z, on the output ⊗ flag space."""
    return [flag_apply(inst, br.projector) for br in z_obs.branches]


def _correction_joint(z_obs, flagged, kraus) -> JointDistribution:
    d = z_obs.dim
    projectors = z_obs.projectors
    n = len(projectors)
    table = np.empty((n, n))
    for i, g in enumerate(flagged):
        sigma = apply_cp(kraus, g)
        for k, lam in enumerate(projectors):
            # p(z, z') = (1/d) Tr[Lambda(z') Psi(Phi_M(Lambda(z)))]
            table[i, k] = float(np.trace(lam @ sigma).real) / d
    return JointDistribution(table, z_obs.eigenvalues, z_obs.eigenvalues)


def disturbance_joint(
    z_obs: ProjectiveObservable, inst: QuantumInstrument, correction: Channel
) -> JointDistribution:
    """Joint p(z, z') of input eigenvalue and corrected re-measurement outcome."""
    _check_correction_dims(z_obs, inst, correction)
    return _correction_joint(z_obs, _flagged_projectors(z_obs, inst), correction.kraus)


def _check_correction_dims(z_obs, inst, correction) -> None:
    c_in = inst.dim_out * inst.n_outcomes
    if correction.dim_in != c_in:
        raise ValueError(
            f"correction input dim {correction.dim_in} != output ⊗ flag dim {c_in}"
        )
    if correction.dim_out != z_obs.dim:
        raise ValueError(
            f"correction output dim {correction.dim_out} != observable dim {z_obs.dim}"
        )
    if z_obs.dim != inst.dim_in:
        raise ValueError(f"observable dim {z_obs.dim} != instrument input dim {inst.dim_in}")


def disturbance_experiment(
    z_obs: ProjectiveObservable, inst: QuantumInstrument, correction: Channel
) -> DisturbanceExperiment:
    j = disturbance_joint(z_obs, inst, correction)
    marg = j.marginal_rows()
    expect = np.array([br.degeneracy / z_obs.dim for br in z_obs.branches])
    if np.max(np.abs(marg - expect)) > 1e-9:
        raise ValueError("disturbance joint marginal deviates from d_z/d")
    return DisturbanceExperiment(z_obs, inst, correction, j)


def discard_flag_correction(inst: QuantumInstrument, target_dim: int) -> Channel | None:
    """Trace out the outcome flag and return the quantum output unchanged.

    Only available when the instrument's output space matches the target
    system; returns None otherwise.
    """
    if inst.dim_out != target_dim:
        return None
    n = inst.n_outcomes
    d = inst.dim_out
    kraus = tuple(np.kron(np.eye(d, dtype=complex), flag_vector(n, m).conj().T) for m in range(n))
    return Channel(d * n, d, kraus)


def _prepare_states_correction(states, dim_sys: int, n_flags: int, dim_out: int) -> Channel:
    """Measure the flag and reprepare a fixed state per outcome."""
    kraus = []
    for m, sigma in enumerate(states):
        w, v = linalg.eigh(sigma)
        w = linalg.clip_spectrum(w)
        fm = flag_vector(n_flags, m).conj().T
        for i in range(len(w)):
            if w[i] <= 0.0:
                continue
            ket = math.sqrt(w[i]) * v[:, i : i + 1]
            for b in range(dim_sys):
                bra = np.zeros((1, dim_sys), dtype=complex)
                bra[0, b] = 1.0
                kraus.append(ket @ np.kron(bra, fm))
    return Channel(dim_sys * n_flags, dim_out, tuple(kraus))


def reprepare_correction(z_obs: ProjectiveObservable, inst: QuantumInstrument) -> Channel:
    """Classical correction: for each outcome, reprepare the most likely Z eigenstate.

    The most likely eigenvalue per outcome comes from the standard
    decision on the pre-correction joint of (input eigenvalue, outcome).
    """
    j = noise_joint(z_obs, inst)
    rule = standard_decision(j).rule
    by_label = {br.eigenvalue: br for br in z_obs.branches}
    states = []
    for mbr in inst.branches:
        zb = by_label[rule.guess[mbr.label]]
        states.append(np.asarray(zb.projector) / zb.degeneracy)
    return _prepare_states_correction(states, inst.dim_out, inst.n_outcomes, z_obs.dim)


def _params_to_kraus(params: np.ndarray, c_out: int, n_env: int, c_in: int):
    half = params.size // 2
    g = (params[:half] + 1j * params[half:]).reshape(c_out * n_env, c_in)
    q, _ = np.linalg.qr(g)
    v = q.reshape(c_out, n_env, c_in)
    return tuple(np.ascontiguousarray(v[:, e, :]) for e in range(n_env))


def disturbance(
    z_obs: ProjectiveObservable,
    inst: QuantumInstrument,
    order: EntropyOrder,
    search: SearchConfig | None = None,
) -> CorrectionSearchResult:
    """Best-found disturbance: an upper bound on the minimum over corrections.

    The candidate family always contains the classical repreparation and,
    when dimensions permit, the flag-discarding identity; those two are
    exact minimisers in the zero-disturbance regimes.  Additional
    restarts run a Nelder-Mead refinement over a parametrised isometry
    family.
    """
    search = search or SearchConfig()
    check_order(order, z_obs.dim)
    flagged = _flagged_projectors(z_obs, inst)

    def value_of(kraus) -> float:
        return conditional_entropy(_correction_joint(z_obs, flagged, kraus), order)

    candidates: list[tuple[str, Channel]] = []
    ident = discard_flag_correction(inst, z_obs.dim)
    if ident is not None:
        candidates.append(("discard_flag", ident))
    candidates.append(("reprepare", reprepare_correction(z_obs, inst)))

    best_name, best_channel = candidates[0]
    best_value = value_of(best_channel.kraus)
    for name, ch in candidates[1:]:
        val = value_of(ch.kraus)
        if val < best_value:
            best_name, best_channel, best_value = name, ch, val

    c_in = inst.dim_out * inst.n_outcomes
    c_out = z_obs.dim
    n_env = search.kraus_rank or max(2, -(-c_in // c_out))
    if c_out * n_env < c_in:
        raise ValueError(f"kraus_rank {n_env} too small: need c_out * rank >= {c_in}")
    n_params = 2 * c_out * n_env * c_in

    def objective(params: np.ndarray) -> float:
        return value_of(_params_to_kraus(params, c_out, n_env, c_in))

    total_evals = 0
    converged = True
    best_params = None
    for r in range(search.restarts):
        if search.seed is None:
            rng = np.random.default_rng()
        else:
            rng = np.random.default_rng(np.random.SeedSequence([search.seed, r]))
        x0 = rng.standard_normal(n_params)
        res = minimize(
            objective,
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": search.iterations,
                "xatol": 1e-7,
                "fatol": 1e-11,
                "adaptive": True,
            },
        )
        total_evals += int(res.nfev)
        converged = converged and bool(res.success)
        if res.fun < best_value:
            best_value = float(res.fun)
            best_params = np.array(res.x)
            best_name = f"parametrized_restart_{r}"
    if best_params is not None:
        best_channel = Channel(c_in, c_out, _params_to_kraus(best_params, c_out, n_env, c_in))

    return CorrectionSearchResult(
        best_value=max(0.0, best_value),
        best_channel=best_channel,
        restarts=search.restarts,
        iterations=total_evals,
        converged=converged,
        best_candidate=best_name,
    )


# --- error probability and fidelity of correction -----------------------------


def error_and_fidelity(exp: DisturbanceExperiment) -> tuple[float, float]:
    """Final-estimation error probability and average correction fidelity.

    For non-degenerate Z the two are tied together: 1 - q_e equals the
    average fidelity between the corrected eigenstates and the originals.
    """
    q_e = 1.0 - float(np.trace(exp.joint.table))
    q_e = min(max(q_e, 0.0), 1.0)
    if not exp.observable.nondegenerate:
        raise DegenerateObservable("average correction fidelity needs non-degenerate Z")
    d = exp.observable.dim
    total = 0.0
    for br in exp.observable.branches:
        out = apply_cp(exp.correction.kraus, flag_apply(exp.instrument, br.projector))
        total += linalg.fidelity(hermitize(out), br.projector)
    return q_e, total / d


# --- combined-estimation consistency oracle ------------------------------------


def estimation_povm(
    z_obs: ProjectiveObservable,
    inst: QuantumInstrument,
    correction: Channel,
    estimator=None,
) -> dict:
    """POVM on the input system realising (outcome, corrected Z estimate) jointly.

    Element for (m, z') is the Heisenberg-picture pull-back of the final
    projector through the correction and the flagged branch map.  An
    optional estimator maps (m, z') to a coarser label; elements with the
    same image are summed, which preserves completeness.
    """
    _check_correction_dims(z_obs, inst, correction)
    d_in = inst.dim_in
    n = inst.n_outcomes
    elements: dict = {}
    for mi, mbr in enumerate(inst.branches):
        em = flag_vector(n, mi)
        lifted = [l_op @ np.kron(k_op, em) for k_op in mbr.kraus for l_op in correction.kraus]
        for zbr in z_obs.branches:
            e = np.zeros((d_in, d_in), dtype=complex)
            for s in lifted:
                e += dagger(s) @ zbr.projector @ s
            key = (mbr.label, zbr.eigenvalue)
            if estimator is not None:
                key = estimator(*key)
            if key in elements:
                elements[key] = elements[key] + hermitize(e)
            else:
                elements[key] = hermitize(e)
    return elements


def _pair_overlap(p, q) -> float:
    # max of the two orientations, so that swapping arguments is exact
    return max(linalg.spectral_norm(p @ q), linalg.spectral_norm(q @ p))


def ricochet_oracle(
    x_obs: ProjectiveObservable,
    z_obs: ProjectiveObservable,
    inst: QuantumInstrument,
    correction: Channel,
    estimator=None,
) -> ConsistencyReport:
    """Double-compute the combined-estimation statistics and report gaps.

    Route one evaluates p(u, x) = (1/d) Tr(E(u) Pi(x)) with the estimation
    POVM on the input system.  Route two prepares the maximally entangled
    state of the system with a mirror copy and measures transposed
    projectors on the mirror; linearity of the transpose makes the two
    agree exactly, so any gap is numerical.  The report also compares the
    direct conditionals p(x|u) with Tr(Pi(x)^T rho(u)) for the ensemble of
    mirror states induced by the estimation, and the overlap
    characteristic with its transposed variant.
    """
    if x_obs.dim != z_obs.dim or x_obs.dim != inst.dim_in:
        raise ValueError("observables and instrument must share the input dimension")
    d = x_obs.dim
    povm = estimation_povm(z_obs, inst, correction, estimator)

    total = sum(povm.values())
    povm_residual = max_abs(total - np.eye(d))

    phi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        phi[i * d + i] = 1.0 / math.sqrt(d)
    ent = np.outer(phi, phi.conj())

    def direct(proj) -> dict:
        return {u: float(np.trace(e @ proj).real) / d for u, e in povm.items()}

    def mirrored(proj) -> dict:
        pt = np.asarray(proj).T
        return {
            u: float(np.trace(np.kron(e, pt) @ ent).real) for u, e in povm.items()
        }

    gap_x = 0.0
    gap_z = 0.0
    direct_x = {}
    for xbr in x_obs.branches:
        d1 = direct(xbr.projector)
        d2 = mirrored(xbr.projector)
        direct_x[xbr.eigenvalue] = d1
        gap_x = max(gap_x, max(abs(d1[u] - d2[u]) for u in povm))
    for zbr in z_obs.branches:
        d1 = direct(zbr.projector)
        d2 = mirrored(zbr.projector)
        gap_z = max(gap_z, max(abs(d1[u] - d2[u]) for u in povm))

    gap_cond = 0.0
    for u, e in povm.items():
        p_u_direct = sum(direct_x[xv][u] for xv in x_obs.eigenvalues)
        lifted = np.kron(e, np.eye(d, dtype=complex)) @ ent
        p_u = float(np.trace(lifted).real)
        if p_u <= 1e-12 or p_u_direct <= 1e-12:
            continue
        rho_u = linalg.partial_trace(lifted, (d, d), keep="B") / p_u
        for xbr in x_obs.branches:
            lhs = direct_x[xbr.eigenvalue][u] / p_u_direct
            rhs = float(np.trace(np.asarray(xbr.projector).T @ rho_u).real)
            gap_cond = max(gap_cond, abs(lhs - rhs))

    c_plain = max(
        _pair_overlap(px, pz) for px in x_obs.projectors for pz in z_obs.projectors
    )
    c_transposed = max(
        _pair_overlap(np.asarray(px).T, np.asarray(pz).T)
        for px in x_obs.projectors
        for pz in z_obs.projectors
    )

    return ConsistencyReport(
        max_joint_x_gap=gap_x,
        max_joint_z_gap=gap_z,
        max_conditional_gap=gap_cond,
        povm_residual=povm_residual,
        overlap_c=c_plain,
        overlap_c_transposed=c_transposed,
    )
