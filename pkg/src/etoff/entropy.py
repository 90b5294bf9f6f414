"""Classical entropies of the Renyi and Tsallis families and their
conditional forms.

Conventions used throughout:

* terms with p = 0 contribute exactly 0 (continuity extension of 0*log 0
  and 0**alpha);
* orders within ``SHANNON_BRANCH`` of 1 are evaluated with the Shannon
  formulas, which avoids the 1/(1-alpha) cancellation;
* conditioning columns with zero probability are skipped;
* probability vectors may carry roundoff negatives down to -1e-12, which
  are clipped before renormalisation; anything worse is rejected.

Two conditional Tsallis forms exist, differing in the conditioning
weights (p(y)**alpha versus p(y)).  The second form is the one entering
the noise and disturbance measures; the first one satisfies the chain
rule.  The conditional Renyi entropy is the outcome-weighted average of
per-column Renyi entropies and admits alpha = inf (min-entropy).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SHANNON_BRANCH = 1e-7   # |alpha - 1| below this uses Shannon formulas
CLIP_NEG = 1e-12        # tolerated roundoff negativity of probabilities
SUM_TOL = 1e-9          # tolerated deviation of a total probability from 1

FAMILIES = ("renyi", "tsallis", "shannon")


def clean_probs(p) -> np.ndarray:
    """Validate and normalise a probability vector.

    Clips entries in (-1e-12, 0) to zero, rejects larger violations,
    requires the total to be within 1e-9 of 1, and renormalises exactly.
    """
    arr = np.asarray(p, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("empty probability vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("probability vector has non-finite entries")
    if arr.min() < -CLIP_NEG:
        raise ValueError(f"probability {arr.min():.3e} below -{CLIP_NEG:.0e}")
    arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    if total <= 0.0:
        raise ValueError("all-zero probability vector")
    if abs(total - 1.0) > SUM_TOL:
        raise ValueError(f"probabilities sum to {total!r}, expected 1")
    return arr / total


def _check_alpha(alpha: float) -> None:
    if not alpha > 0:
        raise ValueError(f"entropic order must be positive, got {alpha!r}")


def _power_sum(p: np.ndarray, alpha: float) -> float:
    mask = p > 0.0
    return float(np.sum(p[mask] ** alpha))


def alpha_log(xi: float, alpha: float) -> float:
    """Deformed logarithm ln_alpha(xi) = (xi**(1-alpha) - 1)/(1-alpha).

    Continuous in alpha; returns ln(xi) on the Shannon branch.
    """
    if xi <= 0:
        raise ValueError(f"alpha_log needs xi > 0, got {xi!r}")
    _check_alpha(alpha)
    if abs(alpha - 1.0) < SHANNON_BRANCH:
        return math.log(xi)
    return math.expm1((1.0 - alpha) * math.log(xi)) / (1.0 - alpha)


def shannon_entropy(p) -> float:
    """-sum p ln p over the support."""
    p = clean_probs(p)
    p = p[p > 0.0]
    return float(max(0.0, -np.sum(p * np.log(p))))


def renyi_entropy(p, alpha: float) -> float:
    """Renyi entropy of order alpha; Shannon at alpha ~ 1, min-entropy at inf."""
    p = clean_probs(p)
    if math.isinf(alpha):
        return max(0.0, -math.log(float(p.max())))
    _check_alpha(alpha)
    if abs(alpha - 1.0) < SHANNON_BRANCH:
        return shannon_entropy(p)
    return max(0.0, math.log(_power_sum(p, alpha)) / (1.0 - alpha))


def tsallis_entropy(p, alpha: float) -> float:
    """Tsallis entropy of degree alpha; maximal value alpha_log(d) at uniform."""
    p = clean_probs(p)
    _check_alpha(alpha)
    if abs(alpha - 1.0) < SHANNON_BRANCH:
        return shannon_entropy(p)
    return max(0.0, (_power_sum(p, alpha) - 1.0) / (1.0 - alpha))


def binary_tsallis(q: float, alpha: float) -> float:
    """Tsallis entropy of the two-point distribution (q, 1-q)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q!r}")
    return tsallis_entropy(np.array([q, 1.0 - q]), alpha)


# --- generalized single-parameter entropies -------------------------------
#
# E_alpha^f(p) = f(sum p**alpha) / (1 - alpha) for a continuous, strictly
# increasing f with f(1) = 0.  The registry ships the two choices that
# reproduce the Renyi (f = ln) and Tsallis (f = xi - 1) families.  The
# Shannon branch needs f'(1), so registry entries carry it.

_F_REGISTRY: dict[str, tuple] = {
    "renyi": (math.log, 1.0),
    "tsallis": (lambda xi: xi - 1.0, 1.0),
}


def register_f(name: str, func, slope_at_one: float = 1.0) -> None:
    """Add a monotone map to the generalized-entropy registry."""
    _F_REGISTRY[name] = (func, float(slope_at_one))


def generalized_entropy(p, alpha: float, f: str) -> float:
    """Generalized entropy f(sum p**alpha)/(1-alpha) for a registered f."""
    if f not in _F_REGISTRY:
        raise ValueError(f"unknown entropy map {f!r}; registered: {sorted(_F_REGISTRY)}")
    func, slope = _F_REGISTRY[f]
    p = clean_probs(p)
    _check_alpha(alpha)
    if abs(alpha - 1.0) < SHANNON_BRANCH:
        return slope * shannon_entropy(p)
    return func(_power_sum(p, alpha)) / (1.0 - alpha)


# --- joint distributions ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Finite joint probability table p(x, y).

    Rows index the variable X whose uncertainty is measured; columns index
    the conditioning variable Y.  The table is clipped and renormalised on
    construction under the same tolerances as probability vectors.
    """

    table: np.ndarray
    row_labels: tuple
    col_labels: tuple

    def __post_init__(self):
        t = np.asarray(self.table, dtype=float)
        if t.ndim != 2:
            raise ValueError(f"joint table must be 2-d, got shape {t.shape}")
        if t.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(
                f"table shape {t.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})"
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("joint table has non-finite entries")
        if t.min() < -CLIP_NEG:
            raise ValueError(f"joint entry {t.min():.3e} below -{CLIP_NEG:.0e}")
        t = np.clip(t, 0.0, None)
        total = t.sum()
        if total <= 0.0 or abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"joint table sums to {total!r}, expected 1")
        object.__setattr__(self, "table", t / total)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))

    @classmethod
    def from_table(cls, table, row_labels=None, col_labels=None) -> "JointDistribution":
        t = np.asarray(table, dtype=float)
        if row_labels is None:
            row_labels = tuple(range(t.shape[0]))
        if col_labels is None:
            col_labels = tuple(range(t.shape[1]))
        return cls(t, tuple(row_labels), tuple(col_labels))

    def marginal_rows(self) -> np.ndarray:
        """p(x) = sum_y p(x, y)."""
        return self.table.sum(axis=1)

    def marginal_cols(self) -> np.ndarray:
        """p(y) = sum_x p(x, y)."""
        return self.table.sum(axis=0)

    def column_conditionals(self):
        """Yield (weight p(y), conditional vector p(.|y)) for columns with p(y) > 0."""
        weights = self.marginal_cols()
        for k, w in enumerate(weights):
            if w > 0.0:
                yield float(w), self.table[:, k] / w

    def transposed(self) -> "JointDistribution":
        return JointDistribution(self.table.T.copy(), self.col_labels, self.row_labels)


def cond_shannon(j: JointDistribution) -> float:
    """Standard conditional entropy H(X|Y)."""
    total = 0.0
    for w, cond in j.column_conditionals():
        total += w * shannon_entropy(cond)
    return total


def cond_tsallis_first(j: JointDistribution, alpha: float) -> float:
    """Conditional Tsallis entropy with weights p(y)**alpha; obeys the chain rule."""
    _check_alpha(alpha)
    total = 0.0
    for w, cond in j.column_conditionals():
        total += w ** alpha * tsallis_entropy(cond, alpha)
    return total


def cond_tsallis_second(j: JointDistribution, alpha: float) -> float:
    """Conditional Tsallis entropy with weights p(y).

    This is the form for which conditioning on more variables can only
    reduce the entropy, for every alpha > 0.
    """
    _check_alpha(alpha)
    total = 0.0
    for w, cond in j.column_conditionals():
        total += w * tsallis_entropy(cond, alpha)
    return total


def cond_renyi(j: JointDistribution, alpha: float) -> float:
    """Conditional Renyi entropy: average over y of the per-column Renyi entropy.

    alpha = inf gives the conditional min-entropy, built from the largest
    conditional probability in each column.
    """
    if not math.isinf(alpha):
        _check_alpha(alpha)
    total = 0.0
    for w, cond in j.column_conditionals():
        total += w * renyi_entropy(cond, alpha)
    return total


# --- entropic orders --------------------------------------------------------


@dataclass(frozen=True)
class EntropyOrder:
    """An entropic order: the exponent alpha and the family it belongs to."""

    alpha: float
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if math.isinf(self.alpha):
            if self.family != "renyi":
                raise ValueError("alpha = inf is admitted only for the Renyi family")
        elif not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if self.family == "shannon" and abs(self.alpha - 1.0) >= SHANNON_BRANCH:
            raise ValueError("the Shannon family requires alpha = 1")

    @classmethod
    def renyi(cls, alpha: float) -> "EntropyOrder":
        return cls(alpha, "renyi")

    @classmethod
    def tsallis(cls, alpha: float) -> "EntropyOrder":
        return cls(alpha, "tsallis")

    @classmethod
    def shannon(cls) -> "EntropyOrder":
        return cls(1.0, "shannon")


def entropy(p, order: EntropyOrder) -> float:
    """Unconditional entropy of a distribution in the given order."""
    if order.family == "renyi":
        return renyi_entropy(p, order.alpha)
    if order.family == "tsallis":
        return tsallis_entropy(p, order.alpha)
    return shannon_entropy(p)


def conditional_entropy(j: JointDistribution, order: EntropyOrder) -> float:
    """Conditional entropy of the row variable given the column variable.

    Dispatches to the conditional Renyi form, the second conditional
    Tsallis form, or the standard conditional entropy.
    """
    if order.family == "renyi":
        return cond_renyi(j, order.alpha)
    if order.family == "tsallis":
        return cond_tsallis_second(j, order.alpha)
    return cond_shannon(j)
