"""Graph limit models for correlated pairs of network layers.

A pair of exchangeable binary layers on shared latent positions
``xi_i ~ U[0,1]`` is described by two marginal graphons ``f1, f2`` on
``[0,1]^2``, a sparsity scale ``rho`` so that edge probabilities are
``rho * f_l(x, y)``, and one cross-dependence function. The cross dependence
may be stored either as the joint-moment graphon ``f12`` (with
``P(both edges) = rho^gamma * f12``) or as a coherence function ``r0`` (with
conditional correlation ``r = rho^(gamma-1) * r0``); the two forms convert
exactly through :func:`conditional_correlation`.

``gamma`` is the scaling exponent of the joint moment: ``gamma = 2`` makes
concurrent edges product-like (coherence stays order one as the graph gets
sparse after rescaling by ``1/rho``), ``gamma = 1`` keeps concurrent edges at
the marginal rate.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from . import bernoulli
from .errors import AdmissibilityError, DegenerateMarginalError, ValidityError
from .validation import PROB_TOL, check_labels, check_proportions, check_symmetric_matrix

__all__ = [
    "StepGraphon",
    "FunctionGraphon",
    "GraphonPairModel",
    "BlockCoherenceSpec",
    "AdmissibilityReport",
    "AdmissibilityViolation",
    "as_graphon",
    "conditional_correlation",
    "edge_coherence",
    "sparse_limit_coherence",
    "blockmodel_to_graphons",
    "admissibility_report",
    "normalize_l1",
]

CROSS_MOMENT = "moment"
CROSS_COHERENCE = "coherence"


@dataclass(frozen=True, eq=False)
class StepGraphon:
    """Piecewise-constant symmetric function on [0,1]^2.

    Block ``a`` occupies the interval ``(boundaries[a], boundaries[a+1]]``
    (the first block also contains 0), and ``values[a, b]`` is the value on
    block pair ``(a, b)``. Marginal graphons must be non-negative; pass
    ``allow_negative=True`` for step functions used as coherence values.
    """

    boundaries: np.ndarray
    values: np.ndarray
    allow_negative: bool = False

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float).reshape(-1)
        if b.size < 2 or abs(b[0]) > PROB_TOL or abs(b[-1] - 1.0) > PROB_TOL:
            raise ValidityError("boundaries must run from 0 to 1")
        if np.any(np.diff(b) <= 0):
            raise ValidityError("boundaries must be strictly increasing")
        b = b.copy()
        b[0], b[-1] = 0.0, 1.0
        v = check_symmetric_matrix(self.values, "step values", k=b.size - 1)
        if not self.allow_negative and np.any(v < 0):
            raise ValidityError("step graphon values must be non-negative")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "boundaries", b)
        object.__setattr__(self, "values", v)

    @property
    def n_blocks(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, value: float, allow_negative: bool = False) -> "StepGraphon":
        return cls(np.array([0.0, 1.0]), np.array([[float(value)]]), allow_negative)

    @classmethod
    def from_matrix(cls, values, proportions=None, allow_negative: bool = False) -> "StepGraphon":
        """Step graphon with block widths given by `proportions` (equal by default)."""
        v = np.asarray(values, dtype=float)
        k = v.shape[0]
        pi = np.full(k, 1.0 / k) if proportions is None else check_proportions(proportions, k)
        bounds = np.concatenate(([0.0], np.cumsum(pi)))
        bounds[-1] = 1.0
        return cls(bounds, v, allow_negative)

    def block_of(self, x) -> np.ndarray:
        """0-based block index of each coordinate."""
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.boundaries, x, side="left") - 1
        return np.clip(idx, 0, self.n_blocks - 1)

    def __call__(self, x, y):
        a = self.block_of(x)
        b = self.block_of(y)
        return self.values[a, b]

    def midpoints(self) -> np.ndarray:
        return (self.boundaries[:-1] + self.boundaries[1:]) / 2.0

    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    def l1_norm(self, resolution: int | None = None) -> float:
        w = self.widths()
        return float(w @ self.values @ w)

    def scale(self, c: float) -> "StepGraphon":
        return StepGraphon(self.boundaries, self.values * float(c), self.allow_negative)


@dataclass(frozen=True)
class FunctionGraphon:
    """Black-box symmetric function on [0,1]^2.

    The evaluator must be pure and vectorized over numpy arrays; symmetry is
    enforced by evaluating at ``(min(x,y), max(x,y))``.
    """

    fn: Callable

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        lo = np.minimum(x, y)
        hi = np.maximum(x, y)
        return np.asarray(self.fn(lo, hi), dtype=float)

    def l1_norm(self, resolution: int = 256) -> float:
        """Midpoint-rule integral over [0,1]^2 on a resolution^2 grid."""
        t = (np.arange(resolution) + 0.5) / resolution
        xx, yy = np.meshgrid(t, t, indexing="ij")
        return float(np.mean(self(xx, yy)))

    def scale(self, c: float) -> "FunctionGraphon":
        base = self.fn
        c = float(c)
        return FunctionGraphon(lambda x, y: np.asarray(base(x, y), dtype=float) * c)


GraphonLike = Union[StepGraphon, FunctionGraphon]


def as_graphon(obj, allow_negative: bool = False) -> GraphonLike:
    """Coerce a step graphon, callable or constant to a graphon object."""
    if isinstance(obj, (StepGraphon, FunctionGraphon)):
        return obj
    if callable(obj):
        return FunctionGraphon(obj)
    if isinstance(obj, (int, float, np.floating, np.integer)):
        return StepGraphon.constant(float(obj), allow_negative)
    raise ValidityError(f"cannot interpret {obj!r} as a graphon")


def conditional_correlation(rho: float, f1v, f2v, f12v):
    """Conditional edge correlation at one point of a gamma=2 pair model.

    With edge probabilities ``rho*f1`` and ``rho*f2`` and joint moment
    ``rho^2*f12``::

        r = rho * (f12 - f1 f2) / sqrt(f1 (1 - rho f1) f2 (1 - rho f2))

    Vectorizes over the function values; zero conditional variance raises.
    """
    rho = float(rho)
    f1v = np.asarray(f1v, dtype=float)
    f2v = np.asarray(f2v, dtype=float)
    f12v = np.asarray(f12v, dtype=float)
    var = f1v * (1.0 - rho * f1v) * f2v * (1.0 - rho * f2v)
    if np.any(var <= 0):
        raise DegenerateMarginalError(
            "conditional correlation is undefined where an edge probability is 0 or 1"
        )
    return rho * (f12v - f1v * f2v) / np.sqrt(var)


def edge_coherence(r, rho: float, gamma: int):
    """Rescale a conditional correlation to its order-one coherence value.

    Returns ``r / rho`` under gamma=2 scaling and ``r`` itself under gamma=1.
    """
    rho = float(rho)
    if not 0.0 < rho <= 1.0:
        raise ValidityError(f"rho must lie in (0, 1], got {rho}")
    if gamma == 2:
        return np.asarray(r, dtype=float) / rho if np.ndim(r) else float(r) / rho
    if gamma == 1:
        return np.asarray(r, dtype=float) if np.ndim(r) else float(r)
    raise ValidityError(f"gamma must be 1 or 2, got {gamma!r}")


def sparse_limit_coherence(f1v, f2v, f12v):
    """Limiting coherence as rho -> 0: ``(f12 - f1 f2) / sqrt(f1 f2)``."""
    f1v = np.asarray(f1v, dtype=float)
    f2v = np.asarray(f2v, dtype=float)
    f12v = np.asarray(f12v, dtype=float)
    if np.any(f1v <= 0) or np.any(f2v <= 0):
        raise DegenerateMarginalError("sparse-limit coherence needs strictly positive marginals")
    return (f12v - f1v * f2v) / np.sqrt(f1v * f2v)


@dataclass(frozen=True)
class GraphonPairModel:
    """Two marginal graphons plus one cross-dependence function.

    `cross_kind` records whether `cross` holds the joint-moment graphon
    (``"moment"``) or the coherence function (``"coherence"``). All stored
    functions must be symmetric; raw callables are wrapped accordingly.
    """

    f1: GraphonLike
    f2: GraphonLike
    cross: GraphonLike
    cross_kind: str = CROSS_MOMENT
    rho: float = 1.0
    gamma: int = 2
    normalized: bool = False

    def __post_init__(self):
        if self.cross_kind not in (CROSS_MOMENT, CROSS_COHERENCE):
            raise ValidityError(f"cross_kind must be 'moment' or 'coherence', got {self.cross_kind!r}")
        rho = float(self.rho)
        if not 0.0 < rho <= 1.0:
            raise ValidityError(f"rho must lie in (0, 1], got {rho}")
        if self.gamma not in (1, 2):
            raise ValidityError(f"gamma must be 1 or 2, got {self.gamma!r}")
        object.__setattr__(self, "f1", as_graphon(self.f1))
        object.__setattr__(self, "f2", as_graphon(self.f2))
        object.__setattr__(self, "cross", as_graphon(self.cross, allow_negative=True))
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "gamma", int(self.gamma))
        for f in (self.f1, self.f2):
            if isinstance(f, StepGraphon) and np.any(rho * f.values > 1.0 + PROB_TOL):
                raise AdmissibilityError(
                    f"rho * sup f = {rho * float(f.values.max())} exceeds 1"
                )

    # -- vectorized evaluation ------------------------------------------------

    def marginal_probs(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        """Edge probabilities ``(rho f1, rho f2)`` at latent positions."""
        p1 = self.rho * np.asarray(self.f1(x, y), dtype=float)
        p2 = self.rho * np.asarray(self.f2(x, y), dtype=float)
        for name, p in (("layer 1", p1), ("layer 2", p2)):
            if np.any(p < -PROB_TOL) or np.any(p > 1.0 + PROB_TOL):
                bad = p[(p < -PROB_TOL) | (p > 1.0 + PROB_TOL)].flat[0]
                raise AdmissibilityError(
                    f"edge probability for {name} falls outside [0, 1]: {bad}"
                )
        return np.clip(p1, 0.0, 1.0), np.clip(p2, 0.0, 1.0)

    def conditional_corr(self, x, y) -> np.ndarray:
        """Conditional correlation at latent positions (0 where degenerate)."""
        p1, p2 = self.marginal_probs(x, y)
        if self.cross_kind == CROSS_COHERENCE:
            r = self.rho ** (self.gamma - 1) * np.asarray(self.cross(x, y), dtype=float)
            degenerate = (p1 <= 0.0) | (p1 >= 1.0) | (p2 <= 0.0) | (p2 >= 1.0)
            return np.where(degenerate, 0.0, r)
        p11 = self.joint_moment(x, y)
        var = p1 * (1.0 - p1) * p2 * (1.0 - p2)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (p11 - p1 * p2) / np.sqrt(var)
        return np.where(var <= 0.0, 0.0, r)

    def joint_moment(self, x, y) -> np.ndarray:
        """Probability of a concurrent edge at latent positions."""
        p1, p2 = self.marginal_probs(x, y)
        if self.cross_kind == CROSS_MOMENT:
            return self.rho**self.gamma * np.asarray(self.cross(x, y), dtype=float)
        r = self.conditional_corr(x, y)
        return p1 * p2 + r * np.sqrt(p1 * (1.0 - p1) * p2 * (1.0 - p2))

    def coherence_at(self, x, y) -> np.ndarray:
        """Edge coherence at latent positions (`conditional_corr` rescaled)."""
        return edge_coherence(self.conditional_corr(x, y), self.rho, self.gamma)

    def edge_probs_at(self, x: float, y: float) -> bernoulli.BivariateEdgeSpec:
        """Validated bivariate edge law at one point.

        Raises :class:`AdmissibilityError` carrying the violated bound when
        the stored cross dependence is not realizable at ``(x, y)``.
        """
        p1, p2 = self.marginal_probs(np.asarray(x), np.asarray(y))
        r = self.conditional_corr(np.asarray(x), np.asarray(y))
        degenerate = float(p1) in (0.0, 1.0) or float(p2) in (0.0, 1.0)
        if degenerate and self.cross_kind == CROSS_MOMENT:
            p11 = float(self.joint_moment(np.asarray(x), np.asarray(y)))
            if abs(p11 - float(p1) * float(p2)) > PROB_TOL:
                raise AdmissibilityError(
                    f"degenerate marginal at ({x}, {y}) forces joint moment "
                    f"{float(p1) * float(p2)}, model stores {p11}"
                )
        return bernoulli.BivariateEdgeSpec(float(p1), float(p2), float(r))


def blockmodel_to_graphons(
    spec: "BlockCoherenceSpec", rho: float = 1.0, gamma: int = 2
) -> GraphonPairModel:
    """Step-graphon pair model of a correlated stochastic blockmodel.

    The marginal graphons carry the block edge-probability matrices, the
    cross graphon carries the joint-moment matrix, and block boundaries are
    the cumulative block proportions. With the default ``rho = 1`` the model
    reproduces the blockmodel exactly; ``rho < 1`` applies layer-independent
    thinning (joint moments scale by ``rho**gamma``).
    """
    pi = spec.proportions
    f1 = StepGraphon.from_matrix(spec.theta1, pi)
    f2 = StepGraphon.from_matrix(spec.theta2, pi)
    cross = StepGraphon.from_matrix(spec.varrho, pi)
    return GraphonPairModel(f1, f2, cross, CROSS_MOMENT, rho=rho, gamma=gamma)


@dataclass(frozen=True, eq=False)
class BlockCoherenceSpec:
    """Correlated stochastic blockmodel over K blocks.

    Parameterized by two K x K edge-probability matrices and the K x K joint
    moment ``varrho[a, b] = P(edge in both layers | blocks a, b)``. Each
    ``varrho`` entry must lie inside its Frechet interval
    ``[max(0, t1 + t2 - 1), min(t1, t2)]``. Block sizes may be supplied as
    proportions or implied by a 1-based label vector; they default to equal.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    varrho: np.ndarray
    block_proportions: np.ndarray | None = None
    labels: np.ndarray | None = None

    def __post_init__(self):
        t1 = check_symmetric_matrix(self.theta1, "theta1", unit=True)
        k = t1.shape[0]
        t2 = check_symmetric_matrix(self.theta2, "theta2", k=k, unit=True)
        v = check_symmetric_matrix(self.varrho, "varrho", k=k, unit=True)
        lo = np.maximum(0.0, t1 + t2 - 1.0)
        hi = np.minimum(t1, t2)
        bad = (v < lo - PROB_TOL) | (v > hi + PROB_TOL)
        if np.any(bad):
            a, b = map(int, np.argwhere(bad)[0])
            raise AdmissibilityError(
                f"varrho[{a + 1},{b + 1}] = {v[a, b]} is outside the Frechet interval "
                f"[{lo[a, b]}, {hi[a, b]}] for theta1 = {t1[a, b]}, theta2 = {t2[a, b]}"
            )
        v = np.clip(v, lo, hi)
        pi = None
        if self.block_proportions is not None:
            pi = check_proportions(self.block_proportions, k, "block_proportions")
        labels = None
        if self.labels is not None:
            labels, k_seen = check_labels(self.labels, name="labels")
            if k_seen > k:
                raise ValidityError(f"labels mention block {k_seen} but the model has {k} blocks")
            labels.setflags(write=False)
        for arr in (t1, t2, v):
            arr.setflags(write=False)
        if pi is not None:
            pi.setflags(write=False)
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)
        object.__setattr__(self, "varrho", v)
        object.__setattr__(self, "block_proportions", pi)
        object.__setattr__(self, "labels", labels)

    @property
    def n_blocks(self) -> int:
        return self.theta1.shape[0]

    @property
    def proportions(self) -> np.ndarray:
        """Block proportions: explicit, else label frequencies, else equal."""
        if self.block_proportions is not None:
            return self.block_proportions
        if self.labels is not None and self.labels.size:
            counts = np.bincount(self.labels, minlength=self.n_blocks + 1)[1:]
            return counts / counts.sum()
        return np.full(self.n_blocks, 1.0 / self.n_blocks)

    def coherence(self) -> np.ndarray:
        """Per-block conditional correlation matrix (0 where degenerate)."""
        var = self.theta1 * (1.0 - self.theta1) * self.theta2 * (1.0 - self.theta2)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (self.varrho - self.theta1 * self.theta2) / np.sqrt(var)
        return np.where(var <= 0.0, 0.0, r)


@dataclass(frozen=True)
class AdmissibilityViolation:
    x: float
    y: float
    p1: float
    p2: float
    r: float
    lo: float
    hi: float
    message: str

    def as_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "p1": self.p1,
            "p2": self.p2,
            "r": self.r,
            "lo": self.lo,
            "hi": self.hi,
            "message": self.message,
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    """Outcome of checking a pair model over a finite evaluation set."""

    n_points: int
    exact: bool
    violations: tuple[AdmissibilityViolation, ...]

    @property
    def admissible(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "admissible": self.admissible,
            "n_points": self.n_points,
            "exact": self.exact,
            "violations": [v.as_dict() for v in self.violations],
        }

    def summary(self) -> str:
        if self.admissible:
            kind = "exactly per block" if self.exact else f"on {self.n_points} grid points"
            return f"admissible ({kind})"
        lines = [f"{len(self.violations)} violation(s) over {self.n_points} points:"]
        for v in self.violations[:20]:
            lines.append(
                f"  at (x={v.x:.6g}, y={v.y:.6g}): p1={v.p1:.6g} p2={v.p2:.6g} "
                f"r={v.r:.6g} allowed=[{v.lo:.6g}, {v.hi:.6g}] ({v.message})"
            )
        if len(self.violations) > 20:
            lines.append(f"  ... and {len(self.violations) - 20} more")
        return "\n".join(lines)


def _evaluation_points(model: GraphonPairModel, grid_resolution: int):
    """Midpoints to check: exact refined blocks for step models, else a grid."""
    parts = (model.f1, model.f2, model.cross)
    if all(isinstance(f, StepGraphon) for f in parts):
        cuts = np.unique(np.concatenate([f.boundaries for f in parts]))
        mids = (cuts[:-1] + cuts[1:]) / 2.0
        exact = True
    else:
        if grid_resolution < 2:
            raise ValidityError("grid_resolution must be at least 2")
        mids = (np.arange(grid_resolution) + 0.5) / grid_resolution
        exact = False
    xx, yy = np.meshgrid(mids, mids, indexing="ij")
    keep = xx <= yy  # symmetric functions: upper triangle suffices
    return xx[keep], yy[keep], exact


def admissibility_report(model: GraphonPairModel, grid_resolution: int = 256) -> AdmissibilityReport:
    """Check the correlation bounds everywhere on an evaluation set.

    For models built purely from step graphons the check runs once per
    refined block pair and is exact; for black-box evaluators it runs on the
    midpoints of a uniform ``grid_resolution**2`` grid. Violations are
    returned in the report, not raised.
    """
    xs, ys, exact = _evaluation_points(model, grid_resolution)
    violations = []
    try:
        p1, p2 = model.marginal_probs(xs, ys)
    except AdmissibilityError:
        # locate offending points one at a time for the report
        p1 = model.rho * np.asarray(model.f1(xs, ys), dtype=float)
        p2 = model.rho * np.asarray(model.f2(xs, ys), dtype=float)
        bad = (
            (p1 < -PROB_TOL) | (p1 > 1.0 + PROB_TOL) | (p2 < -PROB_TOL) | (p2 > 1.0 + PROB_TOL)
        )
        for i in np.flatnonzero(bad):
            violations.append(
                AdmissibilityViolation(
                    float(xs[i]), float(ys[i]), float(p1[i]), float(p2[i]),
                    float("nan"), float("nan"), float("nan"),
                    "edge probability outside [0, 1]",
                )
            )
        keep = ~bad
        xs, ys, p1, p2 = xs[keep], ys[keep], np.clip(p1[keep], 0, 1), np.clip(p2[keep], 0, 1)

    if model.cross_kind == CROSS_COHERENCE:
        r = model.rho ** (model.gamma - 1) * np.asarray(model.cross(xs, ys), dtype=float)
    else:
        p11 = model.rho**model.gamma * np.asarray(model.cross(xs, ys), dtype=float)
        var = p1 * (1.0 - p1) * p2 * (1.0 - p2)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(var > 0.0, (p11 - p1 * p2) / np.sqrt(var), 0.0)
        # degenerate marginals admit only the forced joint moment p1*p2
        degenerate = var <= 0.0
        forced = np.abs(p11 - p1 * p2) > PROB_TOL
        for i in np.flatnonzero(degenerate & forced):
            violations.append(
                AdmissibilityViolation(
                    float(xs[i]), float(ys[i]), float(p1[i]), float(p2[i]),
                    float("nan"), 0.0, 0.0,
                    "degenerate marginal forces joint moment p1*p2",
                )
            )

    lo, hi = bernoulli._corr_bounds_arrays(p1, p2)
    below = r < lo - PROB_TOL
    above = r > hi + PROB_TOL
    for i in np.flatnonzero(below | above):
        side = "below lower bound" if below[i] else "above upper bound"
        violations.append(
            AdmissibilityViolation(
                float(xs[i]), float(ys[i]), float(p1[i]), float(p2[i]),
                float(r[i]), float(lo[i]), float(hi[i]), side,
            )
        )
    violations.sort(key=lambda v: (v.x, v.y))
    return AdmissibilityReport(n_points=int(xs.size), exact=exact, violations=tuple(violations))


def normalize_l1(model: GraphonPairModel, resolution: int = 256) -> GraphonPairModel:
    """Rescale marginal graphons to unit L1 norm, folding the scale into rho.

    Every pointwise edge probability ``rho * f_l`` (and the full joint law)
    is unchanged; afterwards ``rho`` is directly the mean edge density.
    Because the model carries a single shared ``rho``, this requires the two
    layers to have equal L1 norms; distinct norms raise
    :class:`ValidityError`.
    """
    c1 = model.f1.l1_norm(resolution)
    c2 = model.f2.l1_norm(resolution)
    if c1 <= 0 or c2 <= 0:
        raise ValidityError("cannot normalize a graphon with zero L1 norm")
    if abs(c1 - c2) > 1e-9 * max(c1, c2):
        raise ValidityError(
            f"layers have different L1 norms ({c1} vs {c2}); a single shared "
            "rho cannot absorb both scales"
        )
    c = c1
    if abs(c - 1.0) <= 1e-12:
        return replace(model, normalized=True)
    new_rho = model.rho * c
    if new_rho > 1.0:
        raise ValidityError(f"normalization would need rho = {new_rho} > 1")
    cross_scale = c ** (-model.gamma) if model.cross_kind == CROSS_MOMENT else c ** (1 - model.gamma)
    return GraphonPairModel(
        f1=model.f1.scale(1.0 / c),
        f2=model.f2.scale(1.0 / c),
        cross=model.cross.scale(cross_scale),
        cross_kind=model.cross_kind,
        rho=new_rho,
        gamma=model.gamma,
        normalized=True,
    )
