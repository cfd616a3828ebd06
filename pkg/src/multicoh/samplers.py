"""Seeded samplers for correlated multiplex graph pairs.

Three mechanisms generate a two-layer sample on shared latent positions:

* ``mixture``: each layer copies a shared Bernoulli draw with probability
  ``vmean`` and an independent draw otherwise, producing conditional
  correlation ``vmean**2``. Equal marginals and non-negative correlation
  only.
* ``joint-table``: one categorical draw per edge from the exact 4-outcome
  table of the model's bivariate law; covers the whole admissible range,
  including negative correlation.
* ``modulation``: layer 1 is sampled first and layer 2 keeps each of its
  edges with probability ``h(x, y)``, forcing layer 2 to be a subgraph of
  layer 1.

All randomness flows through named substreams of one master seed (see
:mod:`multicoh.streams`); identical configurations reproduce samples
bit-for-bit, and different mechanisms under the same seed share latents.
Adjacency layers are stored bit-packed over the canonical upper-triangle
order (lexicographic ``i < j``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import bernoulli
from .errors import AdmissibilityError, MechanismError, ValidityError
from .graphon import (
    CROSS_COHERENCE,
    CROSS_MOMENT,
    BlockCoherenceSpec,
    FunctionGraphon,
    GraphonPairModel,
    StepGraphon,
    as_graphon,
    blockmodel_to_graphons,
)
from .streams import check_seed, substream
from .validation import PROB_TOL, check_adjacency, check_proportions, ensure_rng

__all__ = [
    "Latents",
    "MultiplexSample",
    "ModulationSpec",
    "SamplerConfig",
    "MECHANISMS",
    "sample",
    "sample_latents",
    "sample_mixture_pair",
    "sample_joint_table_pair",
    "sample_modulation_pair",
    "build_negative_pair_model",
    "modulation_conditional_correlation",
    "covariance_decomposition",
    "CovarianceDecomposition",
    "thin_layers",
    "pair_indices",
]

MECHANISM_MIXTURE = "mixture"
MECHANISM_JOINT_TABLE = "joint-table"
MECHANISM_MODULATION = "modulation"
MECHANISMS = (MECHANISM_MIXTURE, MECHANISM_JOINT_TABLE, MECHANISM_MODULATION)

# vmean conventions for the mixture mechanism when derived from the model:
# the copy probability is either the square root of the target conditional
# correlation, or rho times the square root of the coherence function.
VMEAN_SQRT_TARGET = "sqrt-target"
VMEAN_RHO_SQRT = "rho-sqrt-coherence"
VMEAN_CONVENTIONS = (VMEAN_SQRT_TARGET, VMEAN_RHO_SQRT)


def pair_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Canonical (lexicographic) upper-triangle pair order for n nodes."""
    return np.triu_indices(n, k=1)


@dataclass(frozen=True, eq=False)
class Latents:
    """Latent node positions: uniform draws or 1-based block labels."""

    kind: str
    values: np.ndarray
    proportions: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "labels"):
            raise ValidityError(f"latent kind must be 'uniform' or 'labels', got {self.kind!r}")
        if self.kind == "uniform":
            v = np.asarray(self.values, dtype=float)
            if v.ndim != 1:
                raise ValidityError("latent values must be a 1-d vector")
            if v.size and (v.min() < 0.0 or v.max() > 1.0):
                raise ValidityError("uniform latents must lie in [0, 1]")
            pi = None
        else:
            v = np.asarray(self.values)
            if v.ndim != 1:
                raise ValidityError("latent values must be a 1-d vector")
            v = v.astype(np.int64)
            if v.size and v.min() < 1:
                raise ValidityError("labels must be 1-based")
            pi = self.proportions
            if pi is not None:
                pi = check_proportions(pi, name="proportions")
                if v.size and v.max() > pi.size:
                    raise ValidityError(
                        f"label {v.max()} exceeds the {pi.size} blocks of the proportions"
                    )
                pi.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "proportions", pi)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def equals(self, other: "Latents") -> bool:
        return (
            isinstance(other, Latents)
            and self.kind == other.kind
            and np.array_equal(self.values, other.values)
        )

    @property
    def positions(self) -> np.ndarray:
        """Positions in [0, 1]: the values themselves, or block midpoints."""
        if self.kind == "uniform":
            return self.values
        if self.proportions is None:
            raise ValidityError("label latents need block proportions to map to positions")
        bounds = np.concatenate(([0.0], np.cumsum(self.proportions)))
        mids = (bounds[:-1] + bounds[1:]) / 2.0
        return mids[self.values - 1]


def sample_latents(n: int, kind: str = "uniform", proportions=None, rng=None) -> Latents:
    """Draw i.i.d. latent positions (uniform) or labels (multinomial)."""
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValidityError(f"n must be a non-negative integer, got {n!r}")
    rng = ensure_rng(rng)
    if kind == "uniform":
        return Latents("uniform", rng.random(int(n)))
    if kind == "multinomial":
        pi = check_proportions(proportions, name="proportions")
        labels = rng.choice(pi.size, size=int(n), p=pi) + 1
        return Latents("labels", labels, pi)
    raise ValidityError(f"latent kind must be 'uniform' or 'multinomial', got {kind!r}")


@dataclass(frozen=True, eq=False)
class MultiplexSample:
    """d binary layers on n shared nodes, stored bit-packed.

    Layers are numbered 1..d (matching the on-disk naming); each is a
    symmetric simple graph. ``triu(m)`` returns the layer's 0/1 vector over
    the canonical pair order, ``layer(m)`` the dense symmetric matrix.
    """

    n: int
    latents: Latents
    packed: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = int(self.n)
        if n < 0 or self.latents.n != n:
            raise ValidityError(f"latents have length {self.latents.n}, expected {n}")
        if not self.packed:
            raise ValidityError("a sample needs at least one layer")
        n_bytes = (self.n_pairs_of(n) + 7) // 8
        packed = []
        for arr in self.packed:
            a = np.asarray(arr, dtype=np.uint8)
            if a.size != n_bytes:
                raise ValidityError("packed layer has the wrong length for n")
            a.setflags(write=False)
            packed.append(a)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "packed", tuple(packed))

    @staticmethod
    def n_pairs_of(n: int) -> int:
        return n * (n - 1) // 2

    @property
    def n_pairs(self) -> int:
        return self.n_pairs_of(self.n)

    @property
    def d(self) -> int:
        return len(self.packed)

    def _layer_index(self, layer: int) -> int:
        if not 1 <= layer <= self.d:
            raise ValidityError(f"layer must lie in 1..{self.d}, got {layer}")
        return layer - 1

    def triu(self, layer: int) -> np.ndarray:
        """0/1 vector of the layer over canonical pair order."""
        m = self._layer_index(layer)
        return np.unpackbits(self.packed[m], count=self.n_pairs)

    def layer(self, layer: int) -> np.ndarray:
        """Dense symmetric adjacency matrix (uint8) of one layer."""
        bits = self.triu(layer)
        a = np.zeros((self.n, self.n), dtype=np.uint8)
        iu = pair_indices(self.n)
        a[iu] = bits
        return a + a.T

    def edge_count(self, layer: int) -> int:
        return int(self.triu(layer).sum())

    def equals(self, other: "MultiplexSample") -> bool:
        """Exact equality: same n, latent values and edge bits per layer."""
        return (
            isinstance(other, MultiplexSample)
            and self.n == other.n
            and self.d == other.d
            and self.latents.equals(other.latents)
            and all(np.array_equal(a, b) for a, b in zip(self.packed, other.packed))
        )

    @classmethod
    def from_triu(cls, latents: Latents, layers) -> "MultiplexSample":
        """Build from 0/1 vectors in canonical pair order."""
        n = latents.n
        packed = []
        for bits in layers:
            b = np.asarray(bits)
            if b.shape != (cls.n_pairs_of(n),):
                raise ValidityError(
                    f"layer vector must have length {cls.n_pairs_of(n)}, got {b.shape}"
                )
            if not np.isin(b, (0, 1)).all():
                raise ValidityError("layer vector must be binary")
            packed.append(np.packbits(b.astype(np.uint8)))
        return cls(n, latents, tuple(packed))

    @classmethod
    def from_dense(cls, latents: Latents, matrices) -> "MultiplexSample":
        """Build from dense adjacency matrices (validated)."""
        n = latents.n
        iu = pair_indices(n)
        layers = [check_adjacency(m, n)[iu] for m in matrices]
        return cls.from_triu(latents, layers)


@dataclass(frozen=True)
class ModulationSpec:
    """Input-output pair: layer 2 keeps edges of layer 1 with probability h.

    ``f1`` is the marginal graphon of layer 1 (edge probability
    ``rho * f1``); ``h`` maps [0,1]^2 into [0,1]. The resulting law has
    outcome probabilities ``P(1,1) = rho h f1``, ``P(1,0) = rho f1 (1-h)``,
    ``P(0,1) = 0`` and ``P(0,0) = 1 - rho f1``.
    """

    f1: Union[StepGraphon, FunctionGraphon, Callable, float]
    h: Union[StepGraphon, FunctionGraphon, Callable, float]
    rho: float = 1.0

    def __post_init__(self):
        rho = float(self.rho)
        if not 0.0 < rho <= 1.0:
            raise ValidityError(f"rho must lie in (0, 1], got {rho}")
        f1 = as_graphon(self.f1)
        h = as_graphon(self.h)
        if isinstance(f1, StepGraphon) and np.any(rho * f1.values > 1.0 + PROB_TOL):
            raise AdmissibilityError(f"rho * sup f1 = {rho * float(f1.values.max())} exceeds 1")
        if isinstance(h, StepGraphon) and (
            np.any(h.values < -PROB_TOL) or np.any(h.values > 1.0 + PROB_TOL)
        ):
            raise ValidityError("h must take values in [0, 1]")
        object.__setattr__(self, "f1", f1)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "rho", rho)

    def as_pair_model(self) -> GraphonPairModel:
        """The modulation law written as an explicit pair model.

        Layer 2's marginal graphon is ``h * f1`` and the joint-moment graphon
        equals it (a concurrent edge is exactly an edge of layer 2); the
        joint moment scales linearly in rho, i.e. gamma = 1.
        """
        f2 = _product_graphon(self.h, self.f1)
        return GraphonPairModel(self.f1, f2, f2, CROSS_MOMENT, rho=self.rho, gamma=1)


def _product_graphon(f, g):
    """Pointwise product of two graphons (exact step refinement when possible)."""
    if isinstance(f, StepGraphon) and isinstance(g, StepGraphon):
        cuts = np.unique(np.concatenate([f.boundaries, g.boundaries]))
        mids = (cuts[:-1] + cuts[1:]) / 2.0
        xx, yy = np.meshgrid(mids, mids, indexing="ij")
        return StepGraphon(cuts, np.asarray(f(xx, yy) * g(xx, yy), dtype=float))
    return FunctionGraphon(
        lambda x, y: np.asarray(f(x, y), dtype=float) * np.asarray(g(x, y), dtype=float)
    )


def modulation_conditional_correlation(rho: float, f1v, hv):
    """Conditional correlation of the modulation law:
    ``sqrt(h (1 - rho f1) / (1 - rho h f1))``."""
    rho = float(rho)
    f1v = np.asarray(f1v, dtype=float)
    hv = np.asarray(hv, dtype=float)
    return np.sqrt(hv * (1.0 - rho * f1v) / (1.0 - rho * hv * f1v))


# -- per-edge evaluation helpers ------------------------------------------------


def _edge_positions(latents: Latents):
    iu = pair_indices(latents.n)
    pos = latents.positions
    return iu, pos[iu[0]], pos[iu[1]]


def _check_unit(values: np.ndarray, what: str, iu) -> np.ndarray:
    bad = (values < -PROB_TOL) | (values > 1.0 + PROB_TOL)
    if np.any(bad):
        e = int(np.flatnonzero(bad)[0])
        raise AdmissibilityError(
            f"{what} = {values[e]} outside [0, 1] at node pair "
            f"({int(iu[0][e]) + 1}, {int(iu[1][e]) + 1})"
        )
    return np.clip(values, 0.0, 1.0)


def _eval_point_function(v, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate a scalar / graphon / callable pointwise over edge positions."""
    if isinstance(v, (int, float, np.floating, np.integer)):
        return np.full(x.shape, float(v))
    if isinstance(v, (StepGraphon, FunctionGraphon)):
        return np.asarray(v(x, y), dtype=float)
    if callable(v):
        return np.asarray(v(x, y), dtype=float) + np.zeros(x.shape)
    raise ValidityError(f"cannot evaluate {v!r} as a point function")


def _pair_model_laws(model: GraphonPairModel, latents: Latents):
    """Per-edge (p1, p2, p11) with admissibility errors naming the pair."""
    iu, x, y = _edge_positions(latents)
    p1 = _check_unit(model.rho * _eval_point_function(model.f1, x, y), "edge probability (layer 1)", iu)
    p2 = _check_unit(model.rho * _eval_point_function(model.f2, x, y), "edge probability (layer 2)", iu)
    if model.cross_kind == CROSS_COHERENCE:
        r = model.rho ** (model.gamma - 1) * _eval_point_function(model.cross, x, y)
        degenerate = (p1 <= 0.0) | (p1 >= 1.0) | (p2 <= 0.0) | (p2 >= 1.0)
        r = np.where(degenerate, 0.0, r)
        p11 = p1 * p2 + r * np.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))
    else:
        p11 = model.rho**model.gamma * _eval_point_function(model.cross, x, y)
        var = p1 * (1.0 - p1) * p2 * (1.0 - p2)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(var > 0.0, (p11 - p1 * p2) / np.sqrt(var), 0.0)
    lo, hi = bernoulli._corr_bounds_arrays(p1, p2)
    bad = (r < lo - PROB_TOL) | (r > hi + PROB_TOL)
    # degenerate marginals force p11 = p1*p2 exactly
    degenerate = (p1 <= 0.0) | (p1 >= 1.0) | (p2 <= 0.0) | (p2 >= 1.0)
    bad |= degenerate & (np.abs(p11 - p1 * p2) > PROB_TOL)
    if np.any(bad):
        e = int(np.flatnonzero(bad)[0])
        i, j = int(iu[0][e]) + 1, int(iu[1][e]) + 1
        raise AdmissibilityError(
            f"model is not admissible at node pair ({i}, {j}): p1={p1[e]}, "
            f"p2={p2[e]}, r={r[e]}, allowed correlation range [{lo[e]}, {hi[e]}]"
        )
    return iu, p1, p2, np.clip(p11, 0.0, np.minimum(p1, p2)), r


# -- mechanisms -------------------------------------------------------------------


def sample_mixture_pair(
    model: GraphonPairModel,
    latents: Latents,
    vmean=None,
    rng=None,
    convention: str = VMEAN_SQRT_TARGET,
) -> MultiplexSample:
    """Copy-mixture sampler: positively correlated layers with equal marginals.

    Per edge, with marginal probability ``theta`` and copy probability ``v``:
    each layer takes a shared Bernoulli(theta) draw with probability ``v``
    and an independent Bernoulli(theta) draw otherwise, so the layers have
    conditional correlation ``v**2``.

    ``vmean`` may be a scalar, graphon or callable. When None it is derived
    from the model's cross dependence: with ``convention="sqrt-target"``,
    ``v = sqrt(r)`` so the realized conditional correlation is the model's
    target ``r``; with ``convention="rho-sqrt-coherence"``,
    ``v = rho * sqrt(r0)`` (the alternative scaling for sparse regimes, which
    realizes correlation ``rho**2 * r0``).
    """
    rng = ensure_rng(rng)
    iu, x, y = _edge_positions(latents)
    p1 = _check_unit(model.rho * _eval_point_function(model.f1, x, y), "edge probability (layer 1)", iu)
    p2 = _check_unit(model.rho * _eval_point_function(model.f2, x, y), "edge probability (layer 2)", iu)
    if not np.allclose(p1, p2, atol=PROB_TOL, rtol=0.0):
        raise MechanismError("the mixture mechanism requires equal marginals in both layers")
    theta = p1
    if vmean is None:
        if convention not in VMEAN_CONVENTIONS:
            raise ValidityError(f"unknown vmean convention {convention!r}")
        target = model.conditional_corr(x, y)
        if np.any(target < -PROB_TOL):
            e = int(np.flatnonzero(target < -PROB_TOL)[0])
            raise MechanismError(
                "the mixture mechanism cannot realize negative correlation "
                f"(target {target[e]} at node pair ({int(iu[0][e]) + 1}, {int(iu[1][e]) + 1})); "
                "use the joint-table mechanism instead"
            )
        if convention == VMEAN_SQRT_TARGET:
            v = np.sqrt(np.clip(target, 0.0, None))
        else:
            r0 = np.clip(target, 0.0, None) / model.rho ** (model.gamma - 1)
            v = model.rho * np.sqrt(r0)
    else:
        v = _eval_point_function(vmean, x, y)
        if np.any(v < -PROB_TOL):
            e = int(np.flatnonzero(v < -PROB_TOL)[0])
            raise MechanismError(
                f"vmean must be non-negative, got {v[e]} at node pair "
                f"({int(iu[0][e]) + 1}, {int(iu[1][e]) + 1})"
            )
    v = _check_unit(v, "vmean", iu)
    u = rng.random((theta.size, 5))
    u1 = u[:, 0] < theta
    u2 = u[:, 1] < theta
    v1 = u[:, 2] < v
    v2 = u[:, 3] < v
    w = u[:, 4] < theta
    a1 = np.where(v1, w, u1).astype(np.uint8)
    a2 = np.where(v2, w, u2).astype(np.uint8)
    return MultiplexSample.from_triu(latents, (a1, a2))


def sample_joint_table_pair(model: GraphonPairModel, latents: Latents, rng=None) -> MultiplexSample:
    """Exact per-edge sampler from the model's 4-outcome tables.

    One categorical draw per edge; supports the full admissible range of the
    bivariate law, including negative correlation. Raises
    :class:`AdmissibilityError` naming the offending node pair when the model
    is infeasible at some latent pair.
    """
    rng = ensure_rng(rng)
    iu, p1, p2, p11, _ = _pair_model_laws(model, latents)
    p00 = 1.0 - p1 - p2 + p11
    p01 = p2 - p11
    p10 = p1 - p11
    for name, cell in (("p00", p00), ("p01", p01), ("p10", p10)):
        if np.any(cell < -PROB_TOL):
            e = int(np.flatnonzero(cell < -PROB_TOL)[0])
            raise AdmissibilityError(
                f"table cell {name} = {cell[e]} is negative at node pair "
                f"({int(iu[0][e]) + 1}, {int(iu[1][e]) + 1})"
            )
    p00 = np.clip(p00, 0.0, 1.0)
    p01 = np.clip(p01, 0.0, 1.0)
    p10 = np.clip(p10, 0.0, 1.0)
    c1 = p00
    c2 = p00 + p01
    c3 = p00 + p01 + p10
    u = rng.random(p00.size)
    idx = (u >= c1).astype(np.uint8) + (u >= c2) + (u >= c3)
    a1 = (idx >> 1) & 1
    a2 = idx & 1
    return MultiplexSample.from_triu(latents, (a1, a2))


def sample_modulation_pair(spec: ModulationSpec, latents: Latents, rng=None) -> MultiplexSample:
    """Layer 1 from its marginal law, layer 2 by thinning layer 1 with h.

    Guarantees the subgraph relation: every edge of layer 2 is an edge of
    layer 1.
    """
    rng = ensure_rng(rng)
    iu, x, y = _edge_positions(latents)
    p1 = _check_unit(spec.rho * _eval_point_function(spec.f1, x, y), "edge probability (layer 1)", iu)
    h = _check_unit(_eval_point_function(spec.h, x, y), "h", iu)
    u = rng.random((p1.size, 2))
    a1 = (u[:, 0] < p1).astype(np.uint8)
    a2 = a1 & (u[:, 1] < h).astype(np.uint8)
    return MultiplexSample.from_triu(latents, (a1, a2))


def build_negative_pair_model(g, c: float, rho: float = 1.0) -> GraphonPairModel:
    """Pair model with anti-monotone marginals ``f1 = g`` and ``f2 = 1 - c g``.

    Layers are conditionally independent given latents, so all cross-layer
    dependence comes from the latent level; because the marginals move in
    opposite directions, the unconditional edge correlation is non-positive
    (strictly negative whenever g varies).
    """
    c = float(c)
    if c < 0:
        raise ValidityError(f"c must be non-negative, got {c}")
    f1 = as_graphon(g)
    if isinstance(f1, StepGraphon):
        scaled = c * f1.values
        if np.any(scaled < -PROB_TOL) or np.any(scaled > 1.0 + PROB_TOL):
            raise ValidityError("c * g must take values in [0, 1]")
        f2 = StepGraphon(f1.boundaries, np.clip(1.0 - scaled, 0.0, 1.0))
    else:
        t = (np.arange(64) + 0.5) / 64
        xx, yy = np.meshgrid(t, t, indexing="ij")
        scaled = c * f1(xx, yy)
        if np.any(scaled < -PROB_TOL) or np.any(scaled > 1.0 + PROB_TOL):
            raise ValidityError("c * g must take values in [0, 1]")
        base = f1
        f2 = FunctionGraphon(lambda a, b: 1.0 - c * np.asarray(base.fn(a, b), dtype=float))
    return GraphonPairModel(
        f1=f1,
        f2=f2,
        cross=StepGraphon.constant(0.0, allow_negative=True),
        cross_kind=CROSS_COHERENCE,
        rho=rho,
        gamma=2,
    )


@dataclass(frozen=True)
class CovarianceDecomposition:
    """Law-of-total-covariance split of one edge-pair covariance."""

    latent: float
    conditional: float
    sampled: float
    n_mc: int

    @property
    def total(self) -> float:
        return self.latent + self.conditional


def covariance_decomposition(
    model: GraphonPairModel,
    pairs,
    n_mc: int = 100_000,
    rng=None,
    layers: tuple[int, int] = (1, 2),
) -> CovarianceDecomposition:
    """Monte-Carlo split of ``cov(A_ij, A_kl)`` into latent and conditional parts.

    Estimates the covariance of the conditional means over the latent draw,
    the mean of the conditional covariance (non-zero only when the two
    indices name the same node pair), and, for reference, the plain sampled
    covariance of the indicators; the first two sum to the third up to
    Monte-Carlo error.
    """
    (i, j), (k, l) = pairs
    if i == j or k == l:
        raise ValidityError("node pairs must consist of distinct nodes")
    if not (isinstance(n_mc, (int, np.integer)) and n_mc >= 1):
        raise ValidityError(f"n_mc must be a positive integer, got {n_mc!r}")
    if tuple(layers) not in ((1, 1), (1, 2), (2, 1), (2, 2)):
        raise ValidityError(f"layers must name two of the 2 layers, got {layers!r}")
    rng = ensure_rng(rng)
    ids = sorted({i, j, k, l})
    col = {node: c for c, node in enumerate(ids)}
    xi = rng.random((int(n_mc), len(ids)))

    def marginal(layer, xa, xb):
        f = model.f1 if layer == 1 else model.f2
        return np.clip(model.rho * _eval_point_function(f, xa, xb), 0.0, 1.0)

    x1a, x1b = xi[:, col[i]], xi[:, col[j]]
    x2a, x2b = xi[:, col[k]], xi[:, col[l]]
    m1 = marginal(layers[0], x1a, x1b)
    m2 = marginal(layers[1], x2a, x2b)
    latent = float(np.mean(m1 * m2) - np.mean(m1) * np.mean(m2))

    same_pair = {i, j} == {k, l}
    if same_pair and layers[0] == layers[1]:
        conditional = float(np.mean(m1 * (1.0 - m1)))
        draws = rng.random(int(n_mc))
        s1 = (draws < m1).astype(float)
        s2 = s1
    elif same_pair:
        p11 = model.joint_moment(x1a, x1b)
        conditional = float(np.mean(p11 - m1 * m2))
        p00 = 1.0 - m1 - m2 + p11
        p01 = m2 - p11
        u = rng.random(int(n_mc))
        idx = (u >= p00).astype(np.uint8) + (u >= p00 + p01) + (u >= p00 + p01 + (m1 - p11))
        s1 = ((idx >> 1) & 1).astype(float)
        s2 = (idx & 1).astype(float)
        if layers == (2, 1):
            s1, s2 = s2, s1
    else:
        conditional = 0.0
        draws = rng.random((int(n_mc), 2))
        s1 = (draws[:, 0] < m1).astype(float)
        s2 = (draws[:, 1] < m2).astype(float)
    sampled = float(np.mean(s1 * s2) - np.mean(s1) * np.mean(s2))
    return CovarianceDecomposition(latent=latent, conditional=conditional, sampled=sampled, n_mc=int(n_mc))


def thin_layers(sample: MultiplexSample, keep: float, rng=None, shared: bool = False) -> MultiplexSample:
    """Keep each edge independently with probability `keep`.

    Thinning is independent across layers by default; ``shared=True`` uses a
    single thinning mask for all layers (identical marginals, stronger
    co-dependence).
    """
    keep = float(keep)
    if not 0.0 < keep <= 1.0:
        raise ValidityError(f"keep probability must lie in (0, 1], got {keep}")
    rng = ensure_rng(rng)
    masks = rng.random((1 if shared else sample.d, sample.n_pairs)) < keep
    layers = [
        sample.triu(m + 1) & masks[0 if shared else m].astype(np.uint8)
        for m in range(sample.d)
    ]
    return MultiplexSample.from_triu(sample.latents, layers)


@dataclass(frozen=True, eq=False)
class SamplerConfig:
    """Complete description of one sampling run.

    ``model`` may be a :class:`GraphonPairModel`, a
    :class:`BlockCoherenceSpec` (sampled with multinomial labels and its
    dense joint law) or a :class:`ModulationSpec`. The mechanism must be
    compatible with the model kind. ``latent_proportions`` forces
    multinomial block labels as latents (implied for blockmodel specs).
    """

    seed: int
    n: int
    mechanism: str
    model: object
    vmean: object = None
    vmean_convention: str = VMEAN_SQRT_TARGET
    latent_proportions: object = None

    def __post_init__(self):
        check_seed(self.seed)
        if not isinstance(self.n, (int, np.integer)) or self.n < 0:
            raise ValidityError(f"n must be a non-negative integer, got {self.n!r}")
        if self.mechanism not in MECHANISMS:
            raise MechanismError(
                f"unknown mechanism {self.mechanism!r}; expected one of {MECHANISMS}"
            )
        if self.vmean_convention not in VMEAN_CONVENTIONS:
            raise ValidityError(f"unknown vmean convention {self.vmean_convention!r}")
        is_modulation = isinstance(self.model, ModulationSpec)
        if is_modulation != (self.mechanism == MECHANISM_MODULATION):
            raise MechanismError(
                "the modulation mechanism requires a ModulationSpec model (and vice versa)"
            )
        if not isinstance(self.model, (GraphonPairModel, BlockCoherenceSpec, ModulationSpec)):
            raise MechanismError(f"unsupported model type {type(self.model).__name__}")
        if self.latent_proportions is not None:
            object.__setattr__(
                self, "latent_proportions", check_proportions(self.latent_proportions)
            )


def sample(config: SamplerConfig) -> MultiplexSample:
    """Run one seeded sampling pass.

    Latents are drawn from the ``(seed, "latents")`` substream before any
    edge draw, so configurations differing only in mechanism share latents;
    edge draws come from a mechanism-named substream.
    """
    model = config.model
    pair_model = model
    proportions = config.latent_proportions
    if isinstance(model, BlockCoherenceSpec):
        pair_model = blockmodel_to_graphons(model)
        if proportions is None:
            proportions = model.proportions

    lat_rng = substream(config.seed, "latents")
    if proportions is not None:
        latents = sample_latents(config.n, "multinomial", proportions, lat_rng)
    else:
        latents = sample_latents(config.n, "uniform", rng=lat_rng)

    edge_rng = substream(config.seed, "edges", config.mechanism)
    if config.mechanism == MECHANISM_MODULATION:
        return sample_modulation_pair(model, latents, edge_rng)
    if config.mechanism == MECHANISM_JOINT_TABLE:
        return sample_joint_table_pair(pair_model, latents, edge_rng)
    return sample_mixture_pair(
        pair_model, latents, config.vmean, edge_rng, convention=config.vmean_convention
    )
