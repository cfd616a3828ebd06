"""Exact algebra for d-variate Bernoulli edge distributions.

A single prospective edge observed across ``d`` network layers is a vector of
``d`` correlated Bernoulli variables. Its law is a probability table over the
``2^d`` outcomes, equivalently the ``2^d - 1`` uncentred cross-moments
``m_S = E[prod_{k in S} A^(k)]`` over non-empty subsets ``S`` of layers.
This module provides the conversions between the three parameterizations used
throughout the package:

* full probability table (:class:`JointEdgeDistribution`),
* cross-moment vector (:class:`MomentVector`),
* for two layers, marginals plus Pearson correlation
  (:class:`BivariateEdgeSpec`).

Conventions
-----------
* Outcomes are indexed by reading ``(a_1, ..., a_d)`` as a binary number with
  layer 1 as the most significant bit, so for ``d = 2`` the table order is
  ``(p00, p01, p10, p11)``.
* A correlation is only admissible inside the closed interval returned by
  :func:`corr_bounds` (the Frechet constraints expressed on the correlation
  scale).
* Degenerate marginals (``p in {0, 1}``) have zero variance; their
  correlation is fixed to 0 by convention and :func:`corr_bounds` refuses
  them.
* Entries that land within ``1e-12`` below zero after arithmetic are treated
  as round-off and clipped; anything worse is an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, DegenerateMarginalError, ValidityError
from .validation import PROB_TOL, check_probability, ensure_rng

__all__ = [
    "JointEdgeDistribution",
    "BivariateEdgeSpec",
    "MomentVector",
    "binary_correlation",
    "corr_bounds",
    "from_spec",
    "to_spec",
    "probs_to_moments",
    "moments_to_probs",
    "sample_edge",
    "random_table",
]

# 2^d tables stop being a sensible data structure long before this, but the
# transforms stay exact up to here.
MAX_LAYERS = 16


def _check_d(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValidityError(f"d must be a positive integer, got {d!r}")
    if d > MAX_LAYERS:
        raise ValidityError(f"d = {d} exceeds the supported maximum of {MAX_LAYERS} layers")
    return int(d)


def _outcome_index(outcome, d: int) -> int:
    bits = tuple(int(b) for b in outcome)
    if len(bits) != d or any(b not in (0, 1) for b in bits):
        raise ValidityError(f"outcome must be a 0/1 vector of length {d}, got {outcome!r}")
    idx = 0
    for b in bits:
        idx = (idx << 1) | b
    return idx


def _index_outcome(idx: int, d: int) -> tuple[int, ...]:
    return tuple((idx >> (d - 1 - k)) & 1 for k in range(d))


def _subset_mask(subset, d: int) -> int:
    layers = sorted(set(int(k) for k in subset))
    if not layers or layers[0] < 1 or layers[-1] > d:
        raise ValidityError(f"subset must be a non-empty subset of 1..{d}, got {subset!r}")
    mask = 0
    for k in layers:
        mask |= 1 << (d - k)
    return mask


def _mask_subset(mask: int, d: int) -> tuple[int, ...]:
    return tuple(k for k in range(1, d + 1) if mask & (1 << (d - k)))


def _clip_probs(p: np.ndarray, what: str) -> np.ndarray:
    """Clip round-off negatives; reject anything materially invalid."""
    if np.any(p < -PROB_TOL):
        idx = int(np.argmin(p))
        raise ValidityError(f"{what}: entry {idx} is negative ({p[idx]!r})")
    if np.any(p > 1.0 + PROB_TOL):
        idx = int(np.argmax(p))
        raise ValidityError(f"{what}: entry {idx} exceeds 1 ({p[idx]!r})")
    return np.clip(p, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class JointEdgeDistribution:
    """Full probability table of one edge across ``d`` layers.

    `probs[i]` is the probability of the outcome whose bits spell ``i`` with
    layer 1 as the most significant bit. Entries are validated to be
    probabilities summing to one (within ``1e-12``).
    """

    d: int
    probs: np.ndarray

    def __post_init__(self):
        d = _check_d(self.d)
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size != 1 << d:
            raise ValidityError(f"probability table for d={d} needs {1 << d} entries, got {p.size}")
        if not np.all(np.isfinite(p)):
            raise ValidityError("probability table contains non-finite entries")
        p = _clip_probs(p, "probability table")
        total = float(p.sum())
        if abs(total - 1.0) > PROB_TOL * p.size:
            raise ValidityError(f"probability table must sum to 1, got {total!r}")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_dict(cls, d: int, table: dict) -> "JointEdgeDistribution":
        """Build a table from ``{outcome tuple: probability}``."""
        d = _check_d(d)
        p = np.zeros(1 << d)
        for outcome, value in table.items():
            p[_outcome_index(outcome, d)] = value
        return cls(d, p)

    @classmethod
    def from_four(cls, p00: float, p01: float, p10: float, p11: float) -> "JointEdgeDistribution":
        return cls(2, np.array([p00, p01, p10, p11]))

    def prob(self, outcome) -> float:
        return float(self.probs[_outcome_index(outcome, self.d)])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {_index_outcome(i, self.d): float(v) for i, v in enumerate(self.probs)}

    def outcomes(self):
        """All outcomes in table (index) order."""
        return [_index_outcome(i, self.d) for i in range(1 << self.d)]

    # 2-layer convenience accessors
    @property
    def p00(self) -> float:
        return self._cell(0)

    @property
    def p01(self) -> float:
        return self._cell(1)

    @property
    def p10(self) -> float:
        return self._cell(2)

    @property
    def p11(self) -> float:
        return self._cell(3)

    def _cell(self, idx: int) -> float:
        if self.d != 2:
            raise ValidityError("pXY accessors are only defined for d = 2")
        return float(self.probs[idx])


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Uncentred cross-moments ``m_S`` of a d-variate Bernoulli vector.

    Stored as a length ``2^d`` array indexed by the subset mask (layer ``k``
    occupies bit ``d - k``); the empty-set entry is the normalization and is
    pinned to 1. Construction checks dimensions and the [0, 1] range only;
    full compatibility (the induced table being a distribution) is checked by
    :func:`moments_to_probs`.
    """

    d: int
    moments: np.ndarray

    def __post_init__(self):
        d = _check_d(self.d)
        m = np.asarray(self.moments, dtype=float).reshape(-1)
        if m.size == (1 << d) - 1:
            m = np.concatenate(([1.0], m))
        if m.size != 1 << d:
            raise ValidityError(
                f"moment vector for d={d} needs {(1 << d) - 1} entries (or {1 << d} "
                f"including the empty set), got {m.size}"
            )
        if not np.all(np.isfinite(m)):
            raise ValidityError("moment vector contains non-finite entries")
        if abs(m[0] - 1.0) > PROB_TOL:
            raise ValidityError(f"empty-set moment must be 1, got {m[0]!r}")
        rest = _clip_probs(m[1:], "moment vector")
        m = np.concatenate(([1.0], rest))
        m.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "moments", m)

    @classmethod
    def from_dict(cls, d: int, moments: dict) -> "MomentVector":
        """Build from ``{subset of layer indices: moment}`` (all 2^d - 1 needed)."""
        d = _check_d(d)
        m = np.full(1 << d, np.nan)
        m[0] = 1.0
        for subset, value in moments.items():
            m[_subset_mask(subset, d)] = value
        if np.any(np.isnan(m)):
            missing = [_mask_subset(i, d) for i in range(1 << d) if math.isnan(m[i])]
            raise ValidityError(f"moment vector is missing subsets: {missing}")
        return cls(d, m)

    def moment(self, subset) -> float:
        return float(self.moments[_subset_mask(subset, self.d)])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {
            _mask_subset(mask, self.d): float(self.moments[mask])
            for mask in range(1, 1 << self.d)
        }


def binary_correlation(p1, p2, p11):
    """Pearson correlation of two Bernoulli variables from their moments.

    ``r = (p11 - p1*p2) / sqrt(p1*(1-p1)*p2*(1-p2))``. Vectorized; callers
    are responsible for excluding zero-variance marginals.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    p11 = np.asarray(p11, dtype=float)
    denom = np.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))
    return (p11 - p1 * p2) / denom


def corr_bounds(p1: float, p2: float) -> tuple[float, float]:
    """Attainable correlation range for Bernoulli marginals ``(p1, p2)``.

    These are the Frechet constraints on the joint success probability,
    rewritten on the correlation scale::

        lo = max(-sqrt(p1 p2 / (q1 q2)), -sqrt(q1 q2 / (p1 p2)))
        hi = min( sqrt(p1 q2 / (p2 q1)),  sqrt(q1 p2 / (p1 q2)))

    with ``q = 1 - p``. The interval is closed: both endpoints are
    attainable. Raises :class:`DegenerateMarginalError` for ``p in {0, 1}``.
    """
    p1 = check_probability(p1, "p1")
    p2 = check_probability(p2, "p2")
    if p1 in (0.0, 1.0) or p2 in (0.0, 1.0):
        raise DegenerateMarginalError(
            f"correlation bounds need marginals strictly inside (0, 1), got ({p1}, {p2})"
        )
    lo, hi = _corr_bounds_arrays(np.asarray(p1), np.asarray(p2))
    return float(lo), float(hi)


def _corr_bounds_arrays(p1: np.ndarray, p2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized corr_bounds; degenerate entries yield (0, 0)."""
    q1 = 1.0 - p1
    q2 = 1.0 - p2
    with np.errstate(divide="ignore", invalid="ignore"):
        lo = np.maximum(-np.sqrt(p1 * p2 / (q1 * q2)), -np.sqrt(q1 * q2 / (p1 * p2)))
        hi = np.minimum(np.sqrt(p1 * q2 / (p2 * q1)), np.sqrt(q1 * p2 / (p1 * q2)))
    degenerate = (p1 <= 0.0) | (p1 >= 1.0) | (p2 <= 0.0) | (p2 >= 1.0)
    lo = np.where(degenerate, 0.0, lo)
    hi = np.where(degenerate, 0.0, hi)
    return lo, hi


@dataclass(frozen=True)
class BivariateEdgeSpec:
    """Marginals-plus-correlation parameterization of a 2-layer edge.

    Validated on construction: ``r`` must lie inside the closed interval
    returned by :func:`corr_bounds`, and degenerate marginals force
    ``r = 0``.
    """

    p1: float
    p2: float
    r: float

    def __post_init__(self):
        p1 = check_probability(self.p1, "p1")
        p2 = check_probability(self.p2, "p2")
        r = float(self.r)
        if not np.isfinite(r) or abs(r) > 1.0 + PROB_TOL:
            raise ValidityError(f"r must lie in [-1, 1], got {r!r}")
        r = min(max(r, -1.0), 1.0)
        if p1 in (0.0, 1.0) or p2 in (0.0, 1.0):
            if abs(r) > PROB_TOL:
                raise DegenerateMarginalError(
                    f"degenerate marginal ({p1}, {p2}) forces r = 0, got r = {r}"
                )
            r = 0.0
        else:
            lo, hi = corr_bounds(p1, p2)
            if r < lo - PROB_TOL:
                raise AdmissibilityError(
                    f"r = {r} violates the lower correlation bound {lo} "
                    f"for marginals ({p1}, {p2})"
                )
            if r > hi + PROB_TOL:
                raise AdmissibilityError(
                    f"r = {r} violates the upper correlation bound {hi} "
                    f"for marginals ({p1}, {p2})"
                )
            r = min(max(r, lo), hi)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        object.__setattr__(self, "r", r)

    @property
    def bounds(self) -> tuple[float, float]:
        """Correlation bounds of the marginals ((0, 0) when degenerate)."""
        if self.p1 in (0.0, 1.0) or self.p2 in (0.0, 1.0):
            return (0.0, 0.0)
        return corr_bounds(self.p1, self.p2)


def from_spec(spec: BivariateEdgeSpec) -> JointEdgeDistribution:
    """Unique 4-outcome table with marginals ``p1, p2`` and correlation ``r``.

    ``p11 = p1 p2 + r sqrt(p1 q1 p2 q2)`` and the remaining cells follow by
    marginal subtraction. Admissibility was already enforced by the spec, so
    the table is non-negative up to round-off.
    """
    p1, p2, r = spec.p1, spec.p2, spec.r
    p11 = p1 * p2 + r * math.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))
    p10 = p1 - p11
    p01 = p2 - p11
    p00 = 1.0 - p1 - p2 + p11
    return JointEdgeDistribution.from_four(p00, p01, p10, p11)


def to_spec(dist: JointEdgeDistribution) -> BivariateEdgeSpec:
    """Inverse of :func:`from_spec` (degenerate marginals map to ``r = 0``)."""
    if dist.d != 2:
        raise ValidityError(f"to_spec needs a 2-layer table, got d = {dist.d}")
    p11 = dist.p11
    p1 = dist.p10 + p11
    p2 = dist.p01 + p11
    if p1 in (0.0, 1.0) or p2 in (0.0, 1.0):
        return BivariateEdgeSpec(p1, p2, 0.0)
    r = float(binary_correlation(p1, p2, p11))
    return BivariateEdgeSpec(p1, p2, r)


def probs_to_moments(dist: JointEdgeDistribution) -> MomentVector:
    """Cross-moments ``m_S = sum_{a superset of S} p_a`` for all subsets S.

    Computed with the subset-lattice zeta transform (O(d 2^d)); exactly
    inverted by :func:`moments_to_probs`.
    """
    d = dist.d
    m = np.array(dist.probs, dtype=float)
    for k in range(d):
        bit = 1 << k
        for mask in range(1 << d):
            if not mask & bit:
                m[mask] += m[mask | bit]
    return MomentVector(d, m)


def moments_to_probs(mv: MomentVector) -> JointEdgeDistribution:
    """Probability table from cross-moments (Moebius inversion).

    ``p_a = sum_{S superset of a} (-1)^{|S| - |a|} m_S``. Raises
    :class:`ValidityError` naming the offending outcome when the moments are
    not the moments of any distribution (some ``p_a < 0``).
    """
    d = mv.d
    p = np.array(mv.moments, dtype=float)
    for k in range(d):
        bit = 1 << k
        for mask in range(1 << d):
            if not mask & bit:
                p[mask] -= p[mask | bit]
    if np.any(p < -PROB_TOL):
        idx = int(np.argmin(p))
        raise ValidityError(
            f"moments are incompatible: outcome {_index_outcome(idx, d)} "
            f"would have probability {p[idx]!r}"
        )
    return JointEdgeDistribution(d, p)


def sample_edge(dist: JointEdgeDistribution, rng, size: int | None = None) -> np.ndarray:
    """Draw outcome vectors in {0,1}^d from a joint table.

    With ``size=None`` returns a single ``(d,)`` vector, otherwise a
    ``(size, d)`` array. One categorical draw per edge; deterministic given
    the generator state. This direct table sampler covers the full
    admissible range, including negative correlation.
    """
    rng = ensure_rng(rng)
    cum = np.cumsum(dist.probs)
    cum[-1] = 1.0
    n = 1 if size is None else int(size)
    idx = np.searchsorted(cum, rng.random(n), side="right")
    shifts = np.arange(dist.d - 1, -1, -1)
    out = ((idx[:, None] >> shifts) & 1).astype(np.uint8)
    return out[0] if size is None else out


def random_table(d: int, rng) -> JointEdgeDistribution:
    """A random valid table (Dirichlet-flat over the 2^d outcomes)."""
    rng = ensure_rng(rng)
    return JointEdgeDistribution(d, rng.dirichlet(np.ones(1 << _check_d(d))))
