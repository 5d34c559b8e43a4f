"""Discrete information measures over named joint pmfs.

Everything here works on finite alphabets {0, ..., k-1} and reports
entropies and mutual informations in bits (log base 2).  Joint
distributions are immutable value objects; all operations return new
objects or plain floats and never mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SUM_TOL = 1e-12


def _as_name_tuple(axes: Iterable[str] | str) -> tuple[str, ...]:
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


@dataclass(frozen=True)
class JointPmf:
    """Joint pmf over named axes.

    names: one label per axis, all distinct.
    table: nonnegative array, one dimension per axis, summing to 1
           within SUM_TOL.  Out-of-tolerance input is rejected, not
           renormalized.
    """

    names: tuple[str, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "names", tuple(self.names))
        table = np.asarray(self.table, dtype=np.float64)
        object.__setattr__(self, "table", table)
        if len(self.names) != table.ndim:
            raise ValueError(
                f"{len(self.names)} axis names for a {table.ndim}-dimensional table"
            )
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate axis names in {self.names}")
        if table.ndim == 0:
            raise ValueError("need at least one axis")
        if np.any(table < 0):
            raise ValueError("negative probability entry")
        total = float(table.sum())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"pmf sums to {total!r}, outside tolerance {SUM_TOL}")
        table.setflags(write=False)

    @property
    def sizes(self) -> tuple[int, ...]:
        return self.table.shape

    def axis_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no axis named {name!r}; have {self.names}") from None


@dataclass(frozen=True)
class TypicalityParams:
    """Tolerance for letter-typicality tests, 0 < epsilon < 1."""

    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")


def marginalize(p: JointPmf, keep: Iterable[str] | str) -> JointPmf:
    """Marginal of p onto the kept axes, in their original order."""
    keep_set = set(_as_name_tuple(keep))
    if not keep_set:
        raise ValueError("keep-set must be nonempty")
    for name in keep_set:
        p.axis_of(name)
    kept = tuple(n for n in p.names if n in keep_set)
    drop = tuple(i for i, n in enumerate(p.names) if n not in keep_set)
    return JointPmf(kept, p.table.sum(axis=drop) if drop else p.table)


def _marginal_table(p: JointPmf, axes: tuple[str, ...]) -> np.ndarray:
    for name in axes:
        p.axis_of(name)
    keep = set(axes)
    drop = tuple(i for i, n in enumerate(p.names) if n not in keep)
    return p.table.sum(axis=drop) if drop else p.table


def entropy(p: JointPmf, axes: Iterable[str] | str | None = None) -> float:
    """Entropy in bits of the marginal on the given axes (default: all).

    Zero-probability entries contribute nothing (0 log 0 = 0).  An
    empty axis collection has entropy 0.
    """
    names = tuple(p.names) if axes is None else _as_name_tuple(axes)
    if not names:
        return 0.0
    t = _marginal_table(p, names)
    mass = t[t > 0.0]
    return float(-(mass * np.log2(mass)).sum())


def mutual_information(
    p: JointPmf,
    a: Iterable[str] | str,
    b: Iterable[str] | str,
    given: Iterable[str] | str = (),
) -> float:
    """Conditional mutual information I(A;B|C) in bits.

    Computed as H(A,C) + H(B,C) - H(A,B,C) - H(C).  The three groups
    must be pairwise disjoint.  Tiny negative values from float
    cancellation are clamped to 0.
    """
    ga, gb, gc = _as_name_tuple(a), _as_name_tuple(b), _as_name_tuple(given)
    sa, sb, sc = set(ga), set(gb), set(gc)
    if sa & sb or sa & sc or sb & sc:
        raise ValueError(f"axis groups overlap: {ga}, {gb}, {gc}")
    value = (
        entropy(p, ga + gc)
        + entropy(p, gb + gc)
        - entropy(p, ga + gb + gc)
        - entropy(p, gc)
    )
    return max(0.0, value)


def empirical_distribution(
    seqs: Sequence[Sequence[int]],
    names: Sequence[str] | None = None,
    sizes: Sequence[int] | None = None,
) -> JointPmf:
    """Joint type (empirical pmf) of parallel symbol sequences.

    One sequence per axis, all the same length.  Alphabet sizes default
    to max(symbol) + 1 per axis; pass sizes explicitly to embed the
    type in a larger alphabet.
    """
    arrays = [np.asarray(s, dtype=np.int64) for s in seqs]
    if not arrays:
        raise ValueError("need at least one sequence")
    n = arrays[0].shape[0]
    if n == 0:
        raise ValueError("sequences must be nonempty")
    for arr in arrays:
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ValueError("sequences must be 1-d and of equal length")
        if np.any(arr < 0):
            raise ValueError("negative symbol")
    if sizes is None:
        shape = tuple(int(arr.max()) + 1 for arr in arrays)
    else:
        shape = tuple(int(s) for s in sizes)
        if len(shape) != len(arrays):
            raise ValueError("one size per sequence required")
        for arr, size in zip(arrays, shape):
            if int(arr.max()) >= size:
                raise ValueError("symbol out of range for declared alphabet size")
    if names is None:
        names = tuple(f"x{i}" for i in range(len(arrays)))
    flat = np.ravel_multi_index(arrays, shape)
    counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    return JointPmf(tuple(names), counts / float(n))


def joint_type_table(seqs: Sequence[np.ndarray], shape: tuple[int, ...]) -> np.ndarray:
    """Raw empirical frequency table of parallel sequences, given shape."""
    flat = np.ravel_multi_index(tuple(seqs), shape)
    n = seqs[0].shape[0]
    return np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape) / float(n)


def is_jointly_typical(
    seqs: Sequence[Sequence[int]],
    p: JointPmf,
    params: TypicalityParams,
) -> bool:
    """Letter-typicality of the tuple of sequences against p.

    True when every joint symbol a satisfies |type(a) - p(a)| <= eps * p(a).
    Where p(a) = 0 this forces type(a) = 0, so any sequence tuple hitting
    a zero-probability cell is atypical.  Monotone in eps.
    """
    arrays = [np.asarray(s, dtype=np.int64) for s in seqs]
    if len(arrays) != len(p.names):
        raise ValueError(f"expected {len(p.names)} sequences, got {len(arrays)}")
    n = arrays[0].shape[0]
    for arr in arrays:
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ValueError("sequences must be 1-d and of equal length")
    for arr, size in zip(arrays, p.sizes):
        if np.any(arr < 0) or np.any(arr >= size):
            raise ValueError("symbol out of alphabet range")
    pi = joint_type_table(arrays, p.sizes)
    return bool(np.all(np.abs(pi - p.table) <= params.epsilon * p.table))
