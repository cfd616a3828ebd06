"""JSON model configuration documents.

Three config kinds are supported (key ``"kind"``):

``blockmodel``
    ``theta1`` (K x K), optional ``theta2`` (defaults to ``theta1``), and
    either ``varrho`` (joint-moment matrix, thinning semantics under
    ``rho``) or ``r0`` (per-block coherence matrix). Block sizes via
    ``block_proportions`` or integer ``block_sizes`` (default equal); nodes
    receive multinomial labels.

``graphon``
    ``f1`` / optional ``f2`` as named smooth graphons or inline step
    matrices, and either ``f12`` or ``r0`` as the cross dependence (default:
    independence). Nodes receive uniform latent positions.

``modulation``
    ``f1`` plus the edge-copy probability function ``h``; layer 2 is a
    subgraph of layer 1.

Common optional keys: ``rho`` (default 1), ``gamma`` (1 or 2, default 2),
``n``, ``mechanism``, and for the mixture mechanism ``vmean`` /
``target_corr`` and ``vmean_convention``.

Named smooth graphons: ``constant`` (value), ``gravity`` (c * x * y),
``expdist`` (exp(-rate * |x - y|)), ``step`` (values + proportions). A bare
number is shorthand for a constant.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, MechanismError, ValidityError
from .graphon import (
    CROSS_COHERENCE,
    CROSS_MOMENT,
    BlockCoherenceSpec,
    FunctionGraphon,
    GraphonPairModel,
    StepGraphon,
)
from .samplers import (
    MECHANISM_MODULATION,
    MECHANISM_JOINT_TABLE,
    MECHANISMS,
    VMEAN_CONVENTIONS,
    VMEAN_SQRT_TARGET,
    ModulationSpec,
    SamplerConfig,
)

__all__ = ["LoadedConfig", "load_config", "loads_config", "named_graphon"]


def named_graphon(spec):
    """Build a graphon from a config fragment (dict, number, or matrix)."""
    if isinstance(spec, (int, float)):
        return StepGraphon.constant(float(spec))
    if isinstance(spec, list):
        return StepGraphon.from_matrix(np.asarray(spec, dtype=float))
    if not isinstance(spec, dict) or "name" not in spec:
        raise FormatError(f"graphon spec must be a number, matrix or named object, got {spec!r}")
    name = spec["name"]
    params = {k: v for k, v in spec.items() if k != "name"}
    if name == "constant":
        return StepGraphon.constant(float(params.pop("value", 1.0)))
    if name == "gravity":
        c = float(params.pop("c", 1.0))
        if params:
            raise FormatError(f"unknown parameters for gravity graphon: {sorted(params)}")
        return FunctionGraphon(lambda x, y: c * x * y)
    if name == "expdist":
        rate = float(params.pop("rate", 1.0))
        if params:
            raise FormatError(f"unknown parameters for expdist graphon: {sorted(params)}")
        return FunctionGraphon(lambda x, y: np.exp(-rate * np.abs(x - y)))
    if name == "step":
        values = np.asarray(params.pop("values"), dtype=float)
        proportions = params.pop("proportions", None)
        if params:
            raise FormatError(f"unknown parameters for step graphon: {sorted(params)}")
        return StepGraphon.from_matrix(values, proportions)
    raise FormatError(f"unknown graphon name {name!r}")


@dataclass(frozen=True, eq=False)
class LoadedConfig:
    """A parsed model configuration, ready to combine with CLI flags."""

    kind: str
    model: object  # GraphonPairModel or ModulationSpec
    latent_proportions: np.ndarray | None
    mechanism: str
    vmean: object
    vmean_convention: str
    n: int | None
    raw_bytes: bytes
    block_spec: BlockCoherenceSpec | None = None

    def sampler_config(self, seed: int, n: int | None = None, mechanism: str | None = None) -> SamplerConfig:
        """Resolve flags against config defaults into a SamplerConfig."""
        n = self.n if n is None else int(n)
        if n is None:
            raise FormatError("node count n must be given in the config or on the command line")
        mechanism = self.mechanism if mechanism is None else mechanism
        if mechanism == MECHANISM_MODULATION and not isinstance(self.model, ModulationSpec):
            raise MechanismError("the modulation mechanism needs a modulation-kind config")
        if mechanism != MECHANISM_MODULATION and isinstance(self.model, ModulationSpec):
            raise MechanismError("a modulation-kind config only supports the modulation mechanism")
        return SamplerConfig(
            seed=seed,
            n=n,
            mechanism=mechanism,
            model=self.model,
            vmean=self.vmean,
            vmean_convention=self.vmean_convention,
            latent_proportions=self.latent_proportions,
        )


def _pop(doc: dict, key: str, default=None):
    return doc.pop(key, default)


def _common_keys(doc: dict):
    rho = float(_pop(doc, "rho", 1.0))
    gamma = int(_pop(doc, "gamma", 2))
    n = _pop(doc, "n", None)
    n = None if n is None else int(n)
    mechanism = _pop(doc, "mechanism", None)
    if mechanism is not None and mechanism not in MECHANISMS:
        raise FormatError(f"unknown mechanism {mechanism!r}; expected one of {MECHANISMS}")
    convention = _pop(doc, "vmean_convention", VMEAN_SQRT_TARGET)
    if convention not in VMEAN_CONVENTIONS:
        raise FormatError(f"unknown vmean_convention {convention!r}")
    return rho, gamma, n, mechanism, convention


def _reject_unknown(doc: dict, kind: str):
    if doc:
        raise FormatError(f"unknown keys in {kind} config: {sorted(doc)}")


def _vmean_from(doc: dict, proportions):
    """Resolve the mixture copy probability from vmean / target_corr keys."""
    vmean = _pop(doc, "vmean", None)
    target = _pop(doc, "target_corr", None)
    if vmean is not None and target is not None:
        raise FormatError("give either vmean or target_corr, not both")
    if target is not None:
        t = np.asarray(target, dtype=float)
        if np.any(t < 0):
            raise MechanismError("target_corr must be non-negative for the mixture mechanism")
        vmean = np.sqrt(t).tolist() if t.ndim else float(np.sqrt(t))
    if vmean is None:
        return None
    v = np.asarray(vmean, dtype=float)
    if v.ndim == 0:
        return float(v)
    if v.ndim == 2:
        return StepGraphon.from_matrix(v, proportions)
    raise FormatError("vmean must be a scalar or a K x K matrix")


def _load_blockmodel(doc: dict) -> LoadedConfig:
    rho, gamma, n, mechanism, convention = _common_keys(doc)
    theta1 = np.asarray(doc.pop("theta1"), dtype=float)
    theta2_raw = _pop(doc, "theta2", None)
    theta2 = theta1 if theta2_raw is None else np.asarray(theta2_raw, dtype=float)
    k = _pop(doc, "K", None)
    if k is not None and int(k) != theta1.shape[0]:
        raise FormatError(f"K = {k} does not match theta1 of shape {theta1.shape}")
    proportions = _pop(doc, "block_proportions", None)
    sizes = _pop(doc, "block_sizes", None)
    if proportions is not None and sizes is not None:
        raise FormatError("give either block_proportions or block_sizes, not both")
    if sizes is not None:
        sizes = np.asarray(sizes, dtype=float)
        proportions = (sizes / sizes.sum()).tolist()
    if proportions is None:
        proportions = np.full(theta1.shape[0], 1.0 / theta1.shape[0])
    proportions = np.asarray(proportions, dtype=float)

    varrho = _pop(doc, "varrho", None)
    r0 = _pop(doc, "r0", None)
    if varrho is not None and r0 is not None:
        raise FormatError("give either varrho or r0, not both")
    vmean = _vmean_from(doc, proportions)
    _reject_unknown(doc, "blockmodel")

    f1 = StepGraphon.from_matrix(theta1, proportions)
    f2 = StepGraphon.from_matrix(theta2, proportions)
    block_spec = None
    if varrho is not None:
        block_spec = BlockCoherenceSpec(theta1, theta2, np.asarray(varrho, dtype=float), proportions)
        cross = StepGraphon.from_matrix(block_spec.varrho, proportions)
        model = GraphonPairModel(f1, f2, cross, CROSS_MOMENT, rho=rho, gamma=gamma)
    elif r0 is not None:
        cross = StepGraphon.from_matrix(np.asarray(r0, dtype=float), proportions, allow_negative=True)
        model = GraphonPairModel(f1, f2, cross, CROSS_COHERENCE, rho=rho, gamma=gamma)
    else:
        cross = StepGraphon.constant(0.0, allow_negative=True)
        model = GraphonPairModel(f1, f2, cross, CROSS_COHERENCE, rho=rho, gamma=gamma)

    return LoadedConfig(
        kind="blockmodel",
        model=model,
        latent_proportions=proportions,
        mechanism=mechanism or MECHANISM_JOINT_TABLE,
        vmean=vmean,
        vmean_convention=convention,
        n=n,
        raw_bytes=b"",
        block_spec=block_spec,
    )


def _load_graphon(doc: dict) -> LoadedConfig:
    rho, gamma, n, mechanism, convention = _common_keys(doc)
    f1 = named_graphon(doc.pop("f1"))
    f2_raw = _pop(doc, "f2", None)
    f2 = f1 if f2_raw is None else named_graphon(f2_raw)
    f12 = _pop(doc, "f12", None)
    r0 = _pop(doc, "r0", None)
    if f12 is not None and r0 is not None:
        raise FormatError("give either f12 or r0, not both")
    vmean = _vmean_from(doc, None)
    _reject_unknown(doc, "graphon")
    if f12 is not None:
        model = GraphonPairModel(f1, f2, named_graphon(f12), CROSS_MOMENT, rho=rho, gamma=gamma)
    else:
        if r0 is None:
            cross = StepGraphon.constant(0.0, allow_negative=True)
        elif isinstance(r0, (int, float)):
            cross = StepGraphon.constant(float(r0), allow_negative=True)
        elif isinstance(r0, list):
            cross = StepGraphon.from_matrix(np.asarray(r0, dtype=float), allow_negative=True)
        else:
            cross = named_graphon(r0)
        model = GraphonPairModel(f1, f2, cross, CROSS_COHERENCE, rho=rho, gamma=gamma)
    return LoadedConfig(
        kind="graphon",
        model=model,
        latent_proportions=None,
        mechanism=mechanism or MECHANISM_JOINT_TABLE,
        vmean=vmean,
        vmean_convention=convention,
        n=n,
        raw_bytes=b"",
    )


def _load_modulation(doc: dict) -> LoadedConfig:
    rho, gamma, n, mechanism, convention = _common_keys(doc)
    if gamma != 2:
        raise FormatError("the modulation law fixes its own scaling; remove the gamma key")
    f1 = named_graphon(doc.pop("f1"))
    h = named_graphon(doc.pop("h"))
    _reject_unknown(doc, "modulation")
    if mechanism not in (None, MECHANISM_MODULATION):
        raise MechanismError("a modulation-kind config only supports the modulation mechanism")
    model = ModulationSpec(f1, h, rho)
    return LoadedConfig(
        kind="modulation",
        model=model,
        latent_proportions=None,
        mechanism=MECHANISM_MODULATION,
        vmean=None,
        vmean_convention=convention,
        n=n,
        raw_bytes=b"",
    )


def loads_config(data: bytes | str) -> LoadedConfig:
    """Parse a configuration document from bytes or text."""
    raw = data.encode() if isinstance(data, str) else bytes(data)
    try:
        doc = json.loads(raw.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError("config must be a JSON object")
    doc = dict(doc)
    kind = doc.pop("kind", None)
    loaders = {"blockmodel": _load_blockmodel, "graphon": _load_graphon, "modulation": _load_modulation}
    if kind not in loaders:
        raise FormatError(f"config kind must be one of {sorted(loaders)}, got {kind!r}")
    try:
        loaded = loaders[kind](doc)
    except KeyError as exc:
        raise FormatError(f"config is missing required key {exc.args[0]!r}") from exc
    object.__setattr__(loaded, "raw_bytes", raw)
    return loaded


def load_config(path) -> LoadedConfig:
    """Load and parse a configuration file."""
    return loads_config(Path(path).read_bytes())
