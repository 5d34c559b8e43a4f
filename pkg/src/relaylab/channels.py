"""Canonical relay channels and channel-file I/O.

A relay channel is a conditional law p(y2, y3 | x1, x2) over finite
alphabets: x1 is the source input, x2 the relay input, y2 the relay
observation, y3 the sink observation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

KERNEL_TOL = 1e-12
FILE_TOL = 1e-9

RECIPE_KINDS = ("orthogonal_bsc", "primitive", "deterministic", "custom")


@dataclass(frozen=True)
class RelayChannelSpec:
    """Finite relay channel with kernel[x1, x2, y2, y3] = p(y2, y3 | x1, x2)."""

    kernel: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        kernel = np.asarray(self.kernel, dtype=np.float64)
        object.__setattr__(self, "kernel", kernel)
        if kernel.ndim != 4:
            raise ValueError(f"kernel must have 4 axes, got {kernel.ndim}")
        if np.any(kernel < 0):
            raise ValueError("negative kernel entry")
        rows = kernel.sum(axis=(2, 3))
        bad = np.argwhere(np.abs(rows - 1.0) > KERNEL_TOL)
        if bad.size:
            a, b = (int(v) for v in bad[0])
            raise ValueError(
                f"kernel rows must sum to 1: row (x1={a}, x2={b}) sums to {rows[a, b]!r}"
            )
        kernel.setflags(write=False)

    @property
    def nx1(self) -> int:
        return self.kernel.shape[0]

    @property
    def nx2(self) -> int:
        return self.kernel.shape[1]

    @property
    def ny2(self) -> int:
        return self.kernel.shape[2]

    @property
    def ny3(self) -> int:
        return self.kernel.shape[3]


@dataclass(frozen=True)
class ChannelRecipe:
    """Named channel constructor: kind plus scalar parameters.

    Kinds:
      orthogonal_bsc  y2 = BSC(p2) applied to x1; y3 carries an
                      independent BSC(p3) copy of x1 together with x2.
      primitive       y2 = x1 exactly; relay-to-sink link is a clean
                      pipe of r0 bits per use (|X2| = 2**r0); y3 also
                      carries a BSC(p3) copy of x1.
      deterministic   y2 = x1 and y3 = x2, binary and noiseless.
      custom          kernel loaded from params["path"].
    """

    kind: str
    params: Mapping[str, float | int | str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "params", dict(self.params))
        if self.kind not in RECIPE_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}; choose from {RECIPE_KINDS}")
        for key in ("p2", "p3"):
            if key in self.params:
                value = float(self.params[key])
                if not 0.0 <= value <= 0.5:
                    raise ValueError(f"{key} must lie in [0, 0.5], got {value}")
        if self.kind == "primitive":
            r0 = float(self.params.get("r0", 1))
            if r0 < 0:
                raise ValueError(f"r0 must be >= 0, got {r0}")
            if abs(2.0**r0 - round(2.0**r0)) > 1e-9:
                raise ValueError(f"2**r0 must be an integer, got r0={r0}")


def _bsc(p: float) -> np.ndarray:
    return np.array([[1.0 - p, p], [p, 1.0 - p]])


def pair_index(first: int, second: int, second_size: int) -> int:
    """Row-major flattening used for composite sink alphabets."""
    return first * second_size + second


def _bsc_and_x2_kernel(relay_obs: np.ndarray, p3: float, nx2: int) -> np.ndarray:
    """Kernel with y2 ~ relay_obs[x1] and y3 = (BSC(p3) copy of x1, x2) flattened.

    The sink symbol is pair_index(bsc_output, x2, nx2), so y3 // nx2
    recovers the noisy x1 observation and y3 % nx2 recovers x2.
    """
    ny2 = relay_obs.shape[1]
    direct = _bsc(p3)
    kernel = np.zeros((2, nx2, ny2, 2 * nx2))
    for a in range(2):
        for b in range(nx2):
            for noisy in range(2):
                kernel[a, b, :, pair_index(noisy, b, nx2)] = relay_obs[a] * direct[a, noisy]
    return kernel


def make_channel(recipe: ChannelRecipe) -> RelayChannelSpec:
    """Instantiate a RelayChannelSpec from a recipe."""
    params = recipe.params
    if recipe.kind == "orthogonal_bsc":
        p2 = float(params.get("p2", 0.0))
        p3 = float(params.get("p3", 0.0))
        return RelayChannelSpec(_bsc_and_x2_kernel(_bsc(p2), p3, 2))
    if recipe.kind == "primitive":
        r0 = float(params.get("r0", 1))
        p3 = float(params.get("p3", 0.0))
        nx2 = int(round(2.0**r0))
        return RelayChannelSpec(_bsc_and_x2_kernel(np.eye(2), p3, nx2))
    if recipe.kind == "deterministic":
        kernel = np.zeros((2, 2, 2, 2))
        for a in range(2):
            for b in range(2):
                kernel[a, b, a, b] = 1.0
        return RelayChannelSpec(kernel)
    if recipe.kind == "custom":
        path = params.get("path")
        if not path:
            raise ValueError("custom channels need params['path'] pointing at a channel file")
        return load_channel_file(str(path))
    raise ValueError(f"unknown channel kind {recipe.kind!r}")


def xor_sink_channel(p2: float) -> RelayChannelSpec:
    """Channel whose relay index is undecodable without the message.

    y2 = BSC(p2) copy of x1 and y3 = x1 XOR x2, all binary.  Marginally
    y3 is independent of x2, so a sink that tries to identify the relay
    index from y3 alone learns nothing; knowing x1 reveals x2 exactly.
    Used to separate backward from sliding-window decoding.
    """
    if not 0.0 <= p2 <= 0.5:
        raise ValueError(f"p2 must lie in [0, 0.5], got {p2}")
    obs = _bsc(p2)
    kernel = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            kernel[a, b, :, a ^ b] = obs[a]
    return RelayChannelSpec(kernel)


def save_channel_file(ch: RelayChannelSpec, path: str | Path) -> None:
    """Write a channel as JSON: alphabet sizes plus nested kernel rows."""
    payload = {
        "alphabets": {"x1": ch.nx1, "x2": ch.nx2, "y2": ch.ny2, "y3": ch.ny3},
        "kernel": ch.kernel.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_channel_file(path: str | Path) -> RelayChannelSpec:
    """Load a channel JSON file written by save_channel_file.

    Rows may deviate from unit mass by at most FILE_TOL and are rescaled
    exactly on load; larger deviations are rejected with the offending
    (x1, x2) row named.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"channel file not found: {path}")
    payload = json.loads(path.read_text())
    try:
        sizes = payload["alphabets"]
        kernel = np.asarray(payload["kernel"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed channel file {path}: {exc}") from exc
    expected = (int(sizes["x1"]), int(sizes["x2"]), int(sizes["y2"]), int(sizes["y3"]))
    if kernel.shape != expected:
        raise ValueError(
            f"kernel shape {kernel.shape} does not match declared alphabets {expected}"
        )
    if np.any(kernel < 0):
        raise ValueError(f"negative kernel entry in {path}")
    rows = kernel.sum(axis=(2, 3))
    bad = np.argwhere(np.abs(rows - 1.0) > FILE_TOL)
    if bad.size:
        a, b = (int(v) for v in bad[0])
        raise ValueError(
            f"kernel row (x1={a}, x2={b}) sums to {rows[a, b]!r}, outside tolerance {FILE_TOL}"
        )
    return RelayChannelSpec(kernel / rows[:, :, None, None])


def random_channel(
    rng: np.random.Generator,
    nx1: int = 2,
    nx2: int = 2,
    ny2: int = 2,
    ny3: int = 2,
) -> RelayChannelSpec:
    """Random kernel with Dirichlet(1) rows, for seeded property tests."""
    rows = rng.gamma(1.0, 1.0, size=(nx1, nx2, ny2 * ny3))
    rows /= rows.sum(axis=2, keepdims=True)
    return RelayChannelSpec(rows.reshape(nx1, nx2, ny2, ny3))


def implicit_hashing_census(books, block: int) -> tuple[int, int]:
    """Distinct relay codewords vs index count for one block's relay book.

    When the index rate exceeds what the relay alphabet can carry, the
    i.i.d. relay book necessarily repeats sequences, so many indices
    share one codeword (the pigeonhole bound distinct <= |X2|**n).
    Returns (distinct_codewords, index_count).
    """
    book = np.asarray(books.x2_book[block])
    distinct = np.unique(book, axis=0).shape[0]
    return distinct, book.shape[0]
