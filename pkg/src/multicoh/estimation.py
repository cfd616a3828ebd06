"""Plug-in estimators for block-conditional edge coherence.

Given two observed layers and known block labels, every moment of the
bivariate edge law is estimated by the corresponding within-block-pair
sample frequency: marginal edge probabilities, the joint (Hadamard) moment,
the conditional correlation through the same closed form used by the exact
algebra, and the coherence after rescaling by the estimated density. Block
pairs with no observations or with degenerate marginal frequencies are
flagged as undefined rather than given a value.

All block accumulation is integer counting, so estimates are exactly
invariant under node relabelling.

:class:`BlockCoherence` wraps the same computation in a scikit-learn style
estimator (``fit(X, y)`` + trailing-underscore attributes, ``get_params``)
so it composes with that ecosystem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .bernoulli import binary_correlation
from .errors import ValidityError
from .graphon import edge_coherence
from .samplers import MultiplexSample, pair_indices
from .validation import check_adjacency, check_labels

__all__ = [
    "CoherenceEstimate",
    "hadamard_moment",
    "density_hat",
    "block_estimates",
    "pairwise_coherence_summary",
    "BlockCoherence",
]

ESTIMATE_CSV_COLUMNS = ("a", "b", "count", "theta1", "theta2", "varrho", "r", "r0")


def _fmt(x: float) -> str:
    return repr(float(x))


def hadamard_moment(a1, a2) -> tuple[np.ndarray, float]:
    """Entrywise product of two adjacency arrays and its off-diagonal mean.

    The mean is the empirical probability that a random node pair carries an
    edge in both layers at once.
    """
    m1 = check_adjacency(a1, name="first layer")
    m2 = check_adjacency(a2, n=m1.shape[0], name="second layer")
    product = m1 * m2
    n = m1.shape[0]
    if n < 2:
        raise ValidityError("need at least 2 nodes to average over node pairs")
    iu = pair_indices(n)
    return product, float(product[iu].mean())


def _as_triu_layers(x) -> tuple[int, list[np.ndarray]]:
    """Normalize a sample / dense stack / matrix list to (n, triu vectors)."""
    if isinstance(x, MultiplexSample):
        return x.n, [x.triu(m) for m in range(1, x.d + 1)]
    mats = list(x)
    if not mats:
        raise ValidityError("need at least one layer")
    first = check_adjacency(mats[0])
    n = first.shape[0]
    iu = pair_indices(n)
    layers = [first[iu]]
    for m in mats[1:]:
        layers.append(check_adjacency(m, n)[iu])
    return n, layers


def density_hat(sample, per_layer: bool = False):
    """Mean off-diagonal edge density, averaged across layers.

    Under a unit-L1 marginal graphon this estimates the sparsity scale rho.
    With ``per_layer=True`` returns one density per layer instead.
    """
    n, layers = _as_triu_layers(sample)
    if n < 2:
        raise ValidityError("density needs at least 2 nodes")
    n_pairs = n * (n - 1) // 2
    densities = [float(int(t.sum()) / n_pairs) for t in layers]
    if per_layer:
        return tuple(densities)
    return float(np.mean(densities))


@dataclass(frozen=True, eq=False)
class CoherenceEstimate:
    """Block-pair moment and coherence estimates for one layer pair.

    All matrices are K x K and symmetric. ``defined[a, b]`` marks block
    pairs where the correlation is estimable (at least one observed pair and
    non-degenerate marginal frequencies); ``r_hat`` / ``r0_hat`` hold NaN
    elsewhere and consumers should consult the mask, not the NaN.
    """

    layer_pair: tuple[int, int]
    n: int
    gamma: int
    rho_hat: float
    rho_per_layer: tuple[float, float]
    counts: np.ndarray
    theta1_hat: np.ndarray
    theta2_hat: np.ndarray
    varrho_hat: np.ndarray
    r_hat: np.ndarray
    r0_hat: np.ndarray
    defined: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    def to_csv(self) -> str:
        """Fixed-order CSV: a,b,count,theta1,theta2,varrho,r,r0 (a <= b rows).

        Empty fields mark unobserved block pairs (moments) and undefined
        correlations.
        """
        lines = [",".join(ESTIMATE_CSV_COLUMNS)]
        for a in range(self.k):
            for b in range(a, self.k):
                count = int(self.counts[a, b])
                if count > 0:
                    fields = [
                        _fmt(self.theta1_hat[a, b]),
                        _fmt(self.theta2_hat[a, b]),
                        _fmt(self.varrho_hat[a, b]),
                    ]
                else:
                    fields = ["", "", ""]
                if self.defined[a, b]:
                    fields += [_fmt(self.r_hat[a, b]), _fmt(self.r0_hat[a, b])]
                else:
                    fields += ["", ""]
                lines.append(",".join([str(a + 1), str(b + 1), str(count)] + fields))
        return "\n".join(lines) + "\n"

    def to_weighted_edgelist(self, which: str = "r0") -> str:
        """Coherence as a weighted graph over blocks (defined entries only)."""
        if which not in ("r", "r0"):
            raise ValidityError(f"which must be 'r' or 'r0', got {which!r}")
        values = self.r0_hat if which == "r0" else self.r_hat
        m1, m2 = self.layer_pair
        lines = [f"# multicoh coherence-graph v1 K={self.k} layers={m1},{m2} stat={which}"]
        for a in range(self.k):
            for b in range(a, self.k):
                if self.defined[a, b]:
                    lines.append(f"{a + 1}\t{b + 1}\t{_fmt(values[a, b])}")
        return "\n".join(lines) + "\n"

    def per_edge(self, labels) -> np.ndarray:
        """Block-constant n x n expansion of the coherence estimate.

        Entry (i, j) is the block-pair coherence of nodes i and j (NaN where
        undefined); the diagonal is 0.
        """
        z, k_seen = check_labels(labels, name="labels")
        if k_seen > self.k:
            raise ValidityError(f"labels mention block {k_seen} but the estimate has {self.k}")
        values = np.where(self.defined, self.r0_hat, np.nan)
        out = values[z[:, None] - 1, z[None, :] - 1]
        np.fill_diagonal(out, 0.0)
        return out


def _mirror(upper: np.ndarray) -> np.ndarray:
    return upper + np.triu(upper, 1).T


def _block_estimates_from_triu(
    t1: np.ndarray,
    t2: np.ndarray,
    labels: np.ndarray,
    k: int,
    n: int,
    layer_pair: tuple[int, int],
    gamma: int,
    rho,
    per_layer_rho: bool,
) -> CoherenceEstimate:
    iu = pair_indices(n)
    za = labels[iu[0]] - 1
    zb = labels[iu[1]] - 1
    a = np.minimum(za, zb)
    b = np.maximum(za, zb)
    idx = a * k + b
    size = k * k
    counts = np.bincount(idx, minlength=size)
    s1 = np.bincount(idx[t1 == 1], minlength=size)
    s2 = np.bincount(idx[t2 == 1], minlength=size)
    s12 = np.bincount(idx[(t1 & t2) == 1], minlength=size)
    counts = _mirror(counts.reshape(k, k))
    s1 = _mirror(s1.reshape(k, k))
    s2 = _mirror(s2.reshape(k, k))
    s12 = _mirror(s12.reshape(k, k))

    observed = counts > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        th1 = np.where(observed, s1 / counts, np.nan)
        th2 = np.where(observed, s2 / counts, np.nan)
        vr = np.where(observed, s12 / counts, np.nan)
    defined = observed & (s1 > 0) & (s1 < counts) & (s2 > 0) & (s2 < counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(defined, binary_correlation(th1, th2, vr), np.nan)

    n_pairs = n * (n - 1) // 2
    if n_pairs == 0:
        raise ValidityError("block estimation needs at least 2 nodes")
    d1 = float(int(t1.sum()) / n_pairs)
    d2 = float(int(t2.sum()) / n_pairs)
    if rho == "auto":
        rho_hat = float(np.sqrt(d1 * d2)) if per_layer_rho else (d1 + d2) / 2.0
    else:
        rho_hat = float(rho)
        if not 0.0 < rho_hat <= 1.0:
            raise ValidityError(f"rho must lie in (0, 1], got {rho_hat}")
    if rho_hat > 0.0:
        r0 = np.where(defined, edge_coherence(np.nan_to_num(r), rho_hat, gamma), np.nan)
    else:
        r0 = np.full((k, k), np.nan)
        defined = np.zeros((k, k), dtype=bool)
        r = np.full((k, k), np.nan)
    return CoherenceEstimate(
        layer_pair=layer_pair,
        n=n,
        gamma=int(gamma),
        rho_hat=rho_hat,
        rho_per_layer=(d1, d2),
        counts=counts,
        theta1_hat=th1,
        theta2_hat=th2,
        varrho_hat=vr,
        r_hat=r,
        r0_hat=r0,
        defined=defined,
    )


def block_estimates(
    a1,
    a2,
    labels,
    gamma: int = 2,
    rho="auto",
    per_layer_rho: bool = False,
    k: int | None = None,
) -> CoherenceEstimate:
    """Block-conditional plug-in estimates for one pair of layers.

    For every unordered block pair: the two marginal edge frequencies, the
    concurrent-edge frequency, the implied conditional correlation, and the
    coherence ``r0`` obtained by rescaling with ``rho`` (estimated from the
    observed density when ``rho="auto"``, under gamma=2 scaling).

    ``k`` fixes the number of blocks (defaults to the largest label seen).
    """
    if gamma not in (1, 2):
        raise ValidityError(f"gamma must be 1 or 2, got {gamma!r}")
    m1 = check_adjacency(a1, name="first layer")
    n = m1.shape[0]
    m2 = check_adjacency(a2, n=n, name="second layer")
    z, k_seen = check_labels(labels, n=n)
    k = k_seen if k is None else int(k)
    if k < k_seen:
        raise ValidityError(f"labels mention block {k_seen} but k = {k}")
    iu = pair_indices(n)
    return _block_estimates_from_triu(
        m1[iu], m2[iu], z, k, n, (1, 2), gamma, rho, per_layer_rho
    )


def pairwise_coherence_summary(
    sample,
    labels=None,
    gamma: int = 2,
    rho="auto",
    per_layer_rho: bool = False,
    k: int | None = None,
) -> dict[tuple[int, int], CoherenceEstimate]:
    """One CoherenceEstimate per unordered layer pair of a d-layer sample.

    Keys are ``(m1, m2)`` with ``m1 < m2`` (1-based layers). When `labels`
    is None they are taken from the sample's latents if those are block
    labels, and default to a single global block otherwise.
    """
    if gamma not in (1, 2):
        raise ValidityError(f"gamma must be 1 or 2, got {gamma!r}")
    n, layers = _as_triu_layers(sample)
    d = len(layers)
    if d < 2:
        raise ValidityError(f"pairwise summaries need at least 2 layers, got {d}")
    if labels is None:
        if isinstance(sample, MultiplexSample) and sample.latents.kind == "labels":
            labels = sample.latents.values
        else:
            labels = np.ones(n, dtype=np.int64)
    z, k_seen = check_labels(labels, n=n)
    k = k_seen if k is None else int(k)
    if k < k_seen:
        raise ValidityError(f"labels mention block {k_seen} but k = {k}")
    out = {}
    for m1 in range(1, d + 1):
        for m2 in range(m1 + 1, d + 1):
            out[(m1, m2)] = _block_estimates_from_triu(
                layers[m1 - 1], layers[m2 - 1], z, k, n, (m1, m2), gamma, rho, per_layer_rho
            )
    return out


class BlockCoherence(BaseEstimator):
    """Scikit-learn style wrapper around the block coherence estimator.

    Parameters
    ----------
    gamma : int, default 2
        Scaling exponent of the joint moment; controls the r -> r0 rescaling.
    rho : "auto" or float, default "auto"
        Density scale used for the rescaling; "auto" estimates it from the
        observed layers.
    per_layer_rho : bool, default False
        Estimate one density per layer and rescale by their geometric mean.

    ``fit(X, y)`` accepts a :class:`MultiplexSample`, a ``(d, n, n)`` stack
    or a sequence of adjacency matrices as ``X`` and the 1-based block label
    vector as ``y``. Fitted attributes: ``pairs_`` (dict keyed by layer
    pair), plus flat ``theta1_``, ``theta2_``, ``varrho_``, ``r_``, ``r0_``,
    ``counts_``, ``defined_`` for the two-layer case.
    """

    def __init__(self, gamma: int = 2, rho="auto", per_layer_rho: bool = False):
        self.gamma = gamma
        self.rho = rho
        self.per_layer_rho = per_layer_rho

    def fit(self, X, y=None):
        pairs = pairwise_coherence_summary(
            X, labels=y, gamma=self.gamma, rho=self.rho, per_layer_rho=self.per_layer_rho
        )
        first = next(iter(pairs.values()))
        self.pairs_ = pairs
        self.n_ = first.n
        self.d_ = max(m2 for _, m2 in pairs)
        self.k_ = first.k
        self.rho_ = first.rho_hat
        if len(pairs) == 1:
            est = pairs[(1, 2)]
            self.estimate_ = est
            self.counts_ = est.counts
            self.theta1_ = est.theta1_hat
            self.theta2_ = est.theta2_hat
            self.varrho_ = est.varrho_hat
            self.r_ = est.r_hat
            self.r0_ = est.r0_hat
            self.defined_ = est.defined
        return self
