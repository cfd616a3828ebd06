"""On-disk formats: layer edge lists, latents files, run manifests.

Layer files hold one graph layer as a sorted edge list::

    # multicoh layer v1 n=<n>
    i<TAB>j          (1 <= i < j <= n, lexicographically sorted, no duplicates)

Latents files hold the node-level latent values::

    # multicoh latents v1 n=<n> kind=<uniform|labels>
    i<TAB>value      (i = 1..n in order; float positions or integer labels)

Both formats are strict on read: any deviation raises
:class:`~multicoh.errors.FormatError`. Serialization is byte-deterministic
(floats via shortest round-trip repr), and parse(serialize(x)) recovers x
exactly.
"""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

import numpy as np

from .errors import FormatError
from .samplers import Latents, MultiplexSample, pair_indices

__all__ = [
    "write_layer_file",
    "read_layer_file",
    "write_latents_file",
    "read_latents_file",
    "write_sample",
    "read_sample",
    "write_manifest",
    "sha256_bytes",
]

_LAYER_HEADER = re.compile(r"^# multicoh layer v1 n=(\d+)$")
_LATENTS_HEADER = re.compile(r"^# multicoh latents v1 n=(\d+) kind=(uniform|labels)$")


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_layer_file(path, n: int, triu_bits: np.ndarray) -> None:
    """Write one layer (0/1 vector over canonical pair order) as an edge list."""
    iu = pair_indices(n)
    bits = np.asarray(triu_bits)
    lines = [f"# multicoh layer v1 n={n}"]
    for e in np.flatnonzero(bits):
        lines.append(f"{int(iu[0][e]) + 1}\t{int(iu[1][e]) + 1}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_layer_file(path) -> tuple[int, np.ndarray]:
    """Parse a layer file; returns (n, triu bit vector).

    Enforces the header, index ranges, absence of self-loops and duplicates,
    and lexicographic sorting.
    """
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    m = _LAYER_HEADER.match(lines[0])
    if not m:
        raise FormatError(f"{path}: bad header {lines[0]!r}")
    n = int(m.group(1))
    n_pairs = n * (n - 1) // 2
    bits = np.zeros(n_pairs, dtype=np.uint8)
    prev = (0, 0)
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'i<TAB>j', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: non-integer node index in {line!r}") from exc
        if not 1 <= i < j <= n:
            raise FormatError(f"{path}:{lineno}: edge ({i}, {j}) violates 1 <= i < j <= {n}")
        if (i, j) <= prev:
            kind = "duplicate" if (i, j) == prev else "unsorted"
            raise FormatError(f"{path}:{lineno}: {kind} edge ({i}, {j})")
        prev = (i, j)
        # canonical index of pair (i, j), 1-based inputs
        a, b = i - 1, j - 1
        bits[a * n - a * (a + 1) // 2 + (b - a - 1)] = 1
    return n, bits


def write_latents_file(path, latents: Latents) -> None:
    lines = [f"# multicoh latents v1 n={latents.n} kind={latents.kind}"]
    if latents.kind == "uniform":
        for i, v in enumerate(latents.values, start=1):
            lines.append(f"{i}\t{float(v)!r}")
    else:
        for i, v in enumerate(latents.values, start=1):
            lines.append(f"{i}\t{int(v)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_latents_file(path) -> Latents:
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    m = _LATENTS_HEADER.match(lines[0])
    if not m:
        raise FormatError(f"{path}: bad header {lines[0]!r}")
    n, kind = int(m.group(1)), m.group(2)
    if len(lines) - 1 != n:
        raise FormatError(f"{path}: expected {n} rows, found {len(lines) - 1}")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"{path}:{lineno}: expected 'i<TAB>value', got {line!r}")
        try:
            idx = int(parts[0])
            value = float(parts[1]) if kind == "uniform" else int(parts[1])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad row {line!r}") from exc
        if idx != lineno - 1:
            raise FormatError(f"{path}:{lineno}: node index {idx} out of order")
        values.append(value)
    arr = np.asarray(values, dtype=float if kind == "uniform" else np.int64)
    return Latents(kind, arr)


def write_sample(outdir, sample: MultiplexSample) -> list[str]:
    """Write all layers plus the latents file into a directory.

    Returns the relative file names written (layer1.edges, ...,
    latents.tsv).
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for m in range(1, sample.d + 1):
        name = f"layer{m}.edges"
        write_layer_file(out / name, sample.n, sample.triu(m))
        names.append(name)
    write_latents_file(out / "latents.tsv", sample.latents)
    names.append("latents.tsv")
    return names


def read_sample(layer_paths, latents_path=None) -> MultiplexSample:
    """Rebuild a sample from layer files (plus an optional latents file)."""
    if not layer_paths:
        raise FormatError("need at least one layer file")
    parsed = [read_layer_file(p) for p in layer_paths]
    n = parsed[0][0]
    for path, (n_m, _) in zip(layer_paths, parsed):
        if n_m != n:
            raise FormatError(f"{path}: node count {n_m} does not match {n}")
    if latents_path is not None:
        latents = read_latents_file(latents_path)
        if latents.n != n:
            raise FormatError(f"{latents_path}: {latents.n} latents for {n} nodes")
    else:
        latents = Latents("labels", np.ones(n, dtype=np.int64))
    return MultiplexSample.from_triu(latents, [bits for _, bits in parsed])


def write_manifest(path, payload: dict) -> None:
    """Write a deterministic JSON manifest (sorted keys, no timestamps)."""
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
