"""Achievable rates for quantize-forward relaying on finite alphabets.

The relay compresses its observation Y2 into a reconstruction symbol Yh
drawn from a random book and forwards the book index at rate R2; the
sink decodes the source message (rate R) from Y3 together with the
recovered reconstruction.  For source law p_x1, relay law p_x2, channel
kernel p(y2, y3 | x1, x2) and quantizer q(yh | x2, y2), the five-way
joint factors as

    p_x1(a) p_x2(b) kernel(c, d | a, b) q(f | b, c)

and everything below is a one-letter information quantity of that
joint (bits per channel use).

Constraints on the index rate R2:

    quantize_rate_min  = I(Yh;Y2|X2)                relay covering floor
    mac_index_max      = I(X2;Y3) + I(Yh;X1,Y3|X2)  pipelined sink ceiling
    mac_sum_max        = I(X1,X2;Y3) + I(Yh;X1,Y3|X2)   ceiling on R + R2

plus the message bound R < mac_message_max = I(X1;Yh,Y3|X2).
Eliminating R2 from that system leaves

    R < min(message_term, flow_term)

with message_term = mac_message_max, flow_term = I(X1,X2;Y3) -
quantize_residual, and quantize_residual = I(Yh;Y2|X1,X2,Y3); the
system admits an R2 at all only when

    quantize_residual < index_support_sliding = I(X2;Y3).

A sink that defers all decoding until the final block replaces the
index ceiling with I(X2;Y3|X1) + I(Yh;X1,Y3|X2) (the message is known
when the index is resolved), which relaxes the support condition to
quantize_residual < index_support_backward = I(X2;Y3|X1) without
changing the eliminated form.  When the support condition fails the
committed scheme supports no rate and the report says 0; the
best-compression rate searches below then fall back on candidates that
quantize less aggressively.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .channels import RelayChannelSpec
from .infotheory import JointPmf, entropy, mutual_information

SIMPLEX_TOL = 1e-12
# Strictness margin for the index-support test; boundary cases count as
# unsupported so the report never relies on a zero-margin index decode.
SUPPORT_MARGIN = 1e-12

JOINT_AXES = ("X1", "X2", "Y2", "Y3", "Yh")


@dataclass(frozen=True)
class CodingDistribution:
    """Input laws and quantizer defining one quantize-forward operating point.

    p_x1: source input pmf, length |X1|.
    p_x2: relay input pmf, length |X2|.
    q: quantizer q[x2, y2, yh], each (x2, y2) row a pmf over Yh.
    """

    p_x1: np.ndarray
    p_x2: np.ndarray
    q: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p1 = np.asarray(self.p_x1, dtype=np.float64)
        p2 = np.asarray(self.p_x2, dtype=np.float64)
        q = np.asarray(self.q, dtype=np.float64)
        object.__setattr__(self, "p_x1", p1)
        object.__setattr__(self, "p_x2", p2)
        object.__setattr__(self, "q", q)
        for label, vec in (("p_x1", p1), ("p_x2", p2)):
            if vec.ndim != 1 or vec.size == 0:
                raise ValueError(f"{label} must be a nonempty vector")
            if np.any(vec < 0) or abs(float(vec.sum()) - 1.0) > SIMPLEX_TOL:
                raise ValueError(f"{label} is not a pmf within tolerance {SIMPLEX_TOL}")
        if q.ndim != 3:
            raise ValueError("q must have shape (|X2|, |Y2|, |Yh|)")
        if q.shape[0] != p2.size:
            raise ValueError("q first axis must match p_x2 length")
        if np.any(q < 0):
            raise ValueError("negative quantizer entry")
        colsums = q.sum(axis=2)
        if np.any(np.abs(colsums - 1.0) > SIMPLEX_TOL):
            b, c = np.unravel_index(int(np.abs(colsums - 1.0).argmax()), colsums.shape)
            raise ValueError(
                f"quantizer row (x2={b}, y2={c}) sums to {colsums[b, c]!r}"
            )
        for arr in (p1, p2, q):
            arr.setflags(write=False)

    @property
    def yhat_size(self) -> int:
        return self.q.shape[2]


@dataclass(frozen=True)
class RegionReport:
    """All single-letter rate bounds for one (channel, distribution) pair.

    Rates in bits per channel use; every field is nonnegative, and
    backward_rate never falls below sliding_rate.
    """

    quantize_rate_min: float
    mac_message_max: float
    mac_index_max: float
    mac_sum_max: float
    message_term: float
    flow_term: float
    quantize_residual: float
    index_support_sliding: float
    direct_rate: float
    mac_index_max_backward: float
    index_support_backward: float
    sliding_rate: float
    backward_rate: float

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if value < 0.0:
                raise ValueError(f"{name} is negative: {value!r}")
        if self.sliding_rate > self.backward_rate + 1e-9:
            raise ValueError(
                f"sliding_rate {self.sliding_rate!r} exceeds backward_rate {self.backward_rate!r}"
            )


@dataclass(frozen=True)
class SearchConfig:
    """Grid settings for distribution search.

    grid_resolution: simplex step is 1/grid_resolution, >= 2.
    yhat_max_size: reconstruction alphabet size; None means |Y2| + 1.
    include_degenerate: keep the constant quantizer in the grid.
    """

    grid_resolution: int = 8
    yhat_max_size: int | None = None
    include_degenerate: bool = True

    def __post_init__(self) -> None:
        if self.grid_resolution < 2:
            raise ValueError(f"grid_resolution must be >= 2, got {self.grid_resolution}")
        if self.yhat_max_size is not None and self.yhat_max_size < 1:
            raise ValueError(f"yhat_max_size must be >= 1, got {self.yhat_max_size}")

    def resolve_yhat(self, ch: RelayChannelSpec) -> int:
        return self.yhat_max_size if self.yhat_max_size is not None else ch.ny2 + 1


def build_joint(ch: RelayChannelSpec, d: CodingDistribution) -> JointPmf:
    """Five-axis joint pmf over (X1, X2, Y2, Y3, Yh)."""
    if d.p_x1.size != ch.nx1 or d.p_x2.size != ch.nx2 or d.q.shape[1] != ch.ny2:
        raise ValueError(
            f"distribution shapes {(d.p_x1.size, d.p_x2.size, d.q.shape)} do not "
            f"match channel alphabets {(ch.nx1, ch.nx2, ch.ny2, ch.ny3)}"
        )
    table = np.einsum("a,b,abcd,bcf->abcdf", d.p_x1, d.p_x2, ch.kernel, d.q)
    return JointPmf(JOINT_AXES, table)


def evaluate_bounds(ch: RelayChannelSpec, d: CodingDistribution) -> RegionReport:
    """Evaluate every single-letter bound at one operating point."""
    p = build_joint(ch, d)
    mi = lambda a, b, given=(): mutual_information(p, a, b, given)  # noqa: E731

    quantize_rate_min = mi("Yh", "Y2", "X2")
    recon_side_info = mi("Yh", ("X1", "Y3"), "X2")
    coop_rate = mi(("X1", "X2"), "Y3")
    mac_message_max = mi("X1", ("Yh", "Y3"), "X2")
    mac_index_max = mi("X2", "Y3") + recon_side_info
    mac_sum_max = coop_rate + recon_side_info
    quantize_residual = mi("Yh", "Y2", ("X1", "X2", "Y3"))
    index_support_sliding = mi("X2", "Y3")
    index_support_backward = mi("X2", "Y3", "X1")
    direct_rate = mi("X1", "Y3", "X2")
    flow_term = max(0.0, coop_rate - quantize_residual)
    message_term = mac_message_max

    sliding_ok = quantize_residual < index_support_sliding - SUPPORT_MARGIN
    # The backward support interval contains the sliding one, so float
    # noise in the two thresholds must not flip only the larger test.
    backward_ok = sliding_ok or quantize_residual < index_support_backward - SUPPORT_MARGIN
    eliminated = min(message_term, flow_term)

    return RegionReport(
        quantize_rate_min=quantize_rate_min,
        mac_message_max=mac_message_max,
        mac_index_max=mac_index_max,
        mac_sum_max=mac_sum_max,
        message_term=message_term,
        flow_term=flow_term,
        quantize_residual=quantize_residual,
        index_support_sliding=index_support_sliding,
        direct_rate=direct_rate,
        mac_index_max_backward=index_support_backward + recon_side_info,
        index_support_backward=index_support_backward,
        sliding_rate=eliminated if sliding_ok else 0.0,
        backward_rate=eliminated if backward_ok else 0.0,
    )


def fme_oracle_check(
    ch: RelayChannelSpec, d: CodingDistribution, r2_grid: int = 10_000
) -> tuple[float, float]:
    """Cross-check the eliminated rate form against a direct index-rate scan.

    Scans R2 over a grid on [quantize_rate_min, mac_index_max] and takes
    the best min(mac_message_max, mac_sum_max - R2); an empty interval
    scans to 0.  Returns (scanned_rate, closed_form_rate); the two agree
    within 2 / r2_grid.
    """
    if r2_grid < 100:
        raise ValueError(f"r2_grid must be >= 100, got {r2_grid}")
    report = evaluate_bounds(ch, d)
    lo, hi = report.quantize_rate_min, report.mac_index_max
    if hi - lo <= SUPPORT_MARGIN:
        scanned = 0.0
    else:
        r2 = np.linspace(lo, hi, r2_grid + 1)
        scanned = float(
            np.maximum(0.0, np.minimum(report.mac_message_max, report.mac_sum_max - r2)).max()
        )
    return scanned, report.sliding_rate


def simplex_grid(parts: int, resolution: int) -> np.ndarray:
    """All pmfs on `parts` symbols with entries multiple of 1/resolution.

    Rows are ordered lexicographically by the integer composition
    (ascending first coordinate), which fixes the tie-break order of
    every grid search built on top.
    """
    if parts < 1:
        raise ValueError("parts must be >= 1")

    def compositions(total: int, k: int) -> Iterator[tuple[int, ...]]:
        if k == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, k - 1):
                yield (head, *tail)

    points = np.array(list(compositions(resolution, parts)), dtype=np.float64)
    return points / float(resolution)


def random_distribution(
    rng: np.random.Generator, ch: RelayChannelSpec, yhat_size: int | None = None
) -> CodingDistribution:
    """Dirichlet(1) operating point, for seeded property tests."""
    k = yhat_size if yhat_size is not None else ch.ny2 + 1

    def simplex(*shape: int) -> np.ndarray:
        raw = rng.gamma(1.0, 1.0, size=shape)
        return raw / raw.sum(axis=-1, keepdims=True)

    return CodingDistribution(
        p_x1=simplex(ch.nx1),
        p_x2=simplex(ch.nx2),
        q=simplex(ch.nx2, ch.ny2, k),
    )


def _neg_sum_xlogx(table: np.ndarray, axis: tuple[int, ...] | int) -> np.ndarray:
    logs = np.log2(table, out=np.zeros_like(table), where=table > 0)
    return -(table * logs).sum(axis=axis)


def _entropy_of(table: np.ndarray) -> float:
    return float(_neg_sum_xlogx(table, axis=tuple(range(table.ndim))))


class _CellTables:
    """Per-input-law lookup tables for the quantizer grid sweep.

    For fixed (p1, p2) the five-way joint is w[a,b,c,d] * q[b,c,f] with
    w = p1 p2 kernel.  A grid quantizer assigns one grid column to each
    (b, c) pair, so the joint splits along the X2 axis into blocks whose
    cells depend only on that block's column combo.  Entropy is a sum
    of -x*log2(x) over cells, hence additive across blocks: every term
    the search ranks is a constant plus one small-table lookup per X2
    value.  Tables are built once per input-law cell; the sweep itself
    is pure gather-and-add.
    """

    def __init__(
        self,
        ch: RelayChannelSpec,
        p1: np.ndarray,
        p2: np.ndarray,
        col_grid: np.ndarray,
    ):
        w = np.einsum("a,b,abcd->abcd", p1, p2, ch.kernel)
        h_x1x2 = _entropy_of(np.outer(p1, p2))
        h_x2 = _entropy_of(p2)
        h_x1x2y3 = _entropy_of(w.sum(axis=2))
        h_x2y3 = _entropy_of(w.sum(axis=(0, 2)))
        h_y3 = _entropy_of(w.sum(axis=(0, 1, 2)))
        coop_rate = h_x1x2 + h_y3 - h_x1x2y3
        self.index_support = h_x2 + h_y3 - h_x2y3
        self.message_base = h_x1x2 - h_x2
        self.flow_base = coop_rate + h_x1x2y3
        self.lhs_cap = self.index_support + h_x2y3

        p_x2y2 = w.sum(axis=(0, 3))
        col_negent = _neg_sum_xlogx(col_grid, axis=1)
        n_points, yhat = col_grid.shape
        ny2 = ch.ny2
        group_size = n_points**ny2
        col_radix = n_points ** np.arange(ny2 - 1, -1, -1, dtype=np.int64)

        # message_lut[b][g] = H(X2=b block of (X2,Yh,Y3)) - H(block of
        # (X1,X2,Yh,Y3)); residual_lut and lhs_lut likewise per block.
        self.message_lut: list[np.ndarray] = []
        self.residual_lut: list[np.ndarray] = []
        self.lhs_lut: list[np.ndarray] = []
        build_chunk = 1 << 14
        for b in range(ch.nx2):
            t_full = np.empty(group_size)
            t_merged = np.empty(group_size)
            mix = np.empty(group_size)
            for start in range(0, group_size, build_chunk):
                stop = min(start + build_chunk, group_size)
                idx = np.arange(start, stop, dtype=np.int64)
                digits = (idx[:, None] // col_radix[None, :]) % n_points
                q_cols = col_grid[digits]  # (g, ny2, yhat)
                block = np.einsum("acd,gcf->gafd", w[:, b], q_cols)
                t_full[start:stop] = _neg_sum_xlogx(block, axis=(1, 2, 3))
                t_merged[start:stop] = _neg_sum_xlogx(block.sum(axis=1), axis=(1, 2))
                mix[start:stop] = col_negent[digits] @ p_x2y2[b]
            self.message_lut.append(t_merged - t_full)
            self.residual_lut.append(t_full - mix)
            self.lhs_lut.append(t_merged - mix)


@dataclass
class _Best:
    value: float = -np.inf
    key: tuple[int, ...] | None = None

    def offer(self, value: float, key: tuple[int, ...]) -> None:
        if value > self.value:
            self.value = value
            self.key = key


def _search_both(
    ch: RelayChannelSpec, cfg: SearchConfig, chunk: int = 1 << 18
) -> dict[str, tuple[float, CodingDistribution]]:
    yhat = cfg.resolve_yhat(ch)
    p1_grid = simplex_grid(ch.nx1, cfg.grid_resolution)
    p2_grid = simplex_grid(ch.nx2, cfg.grid_resolution)
    col_grid = simplex_grid(yhat, cfg.grid_resolution)
    ncols = ch.nx2 * ch.ny2
    n_cols_points = col_grid.shape[0]
    total_q = n_cols_points**ncols

    # Point masses mark the columns a constant quantizer is made of.
    pm_symbol = np.where(
        (col_grid == 1.0).sum(axis=1) == 1, np.argmax(col_grid, axis=1), -1
    )
    radix = n_cols_points ** np.arange(ncols - 1, -1, -1, dtype=np.int64)
    group_size = n_cols_points**ch.ny2
    # Block index b runs most-significant first, matching column order,
    # so the flat block-product index equals the flat column index and
    # argmax keeps the lexicographically first maximizer.
    group_radix = group_size ** np.arange(ch.nx2 - 1, -1, -1, dtype=np.int64)
    col_radix = n_cols_points ** np.arange(ch.ny2 - 1, -1, -1, dtype=np.int64)
    group_ids = np.arange(group_size, dtype=np.int64)
    group_syms = pm_symbol[(group_ids[:, None] // col_radix[None, :]) % n_cols_points]
    group_pm = np.where(
        (group_syms[:, 0] >= 0) & np.all(group_syms == group_syms[:, :1], axis=1),
        group_syms[:, 0],
        -1,
    )

    best_min = _Best()
    best_con = _Best()
    for i1, p1 in enumerate(p1_grid):
        for i2, p2 in enumerate(p2_grid):
            cell = _CellTables(ch, p1, p2, col_grid)
            lhs_cap = cell.lhs_cap + 1e-12
            for start in range(0, total_q, chunk):
                stop = min(start + chunk, total_q)
                idx = np.arange(start, stop, dtype=np.int64)
                message = np.full(stop - start, cell.message_base)
                residual_sum = np.zeros(stop - start)
                lhs_sum = np.zeros(stop - start)
                pm_state: np.ndarray | None = None
                for b in range(ch.nx2):
                    g_b = (idx // group_radix[b]) % group_size
                    message += cell.message_lut[b][g_b]
                    residual_sum += cell.residual_lut[b][g_b]
                    lhs_sum += cell.lhs_lut[b][g_b]
                    if not cfg.include_degenerate:
                        syms = group_pm[g_b]
                        if pm_state is None:
                            pm_state = syms
                        else:
                            pm_state = np.where(pm_state == syms, pm_state, -1)
                flow = np.maximum(0.0, cell.flow_base - residual_sum)
                minform_val = np.minimum(message, flow)
                feasible = lhs_sum <= lhs_cap
                if pm_state is not None:
                    degenerate = pm_state >= 0
                    minform_val = np.where(degenerate, -np.inf, minform_val)
                    feasible &= ~degenerate
                con_val = np.where(feasible, message, -np.inf)
                j = int(np.argmax(minform_val))
                best_min.offer(float(minform_val[j]), (i1, i2, start + j))
                j = int(np.argmax(con_val))
                best_con.offer(float(con_val[j]), (i1, i2, start + j))

    def materialize(key: tuple[int, ...]) -> CodingDistribution:
        i1, i2, qi = key
        digits = [(qi // int(r)) % n_cols_points for r in radix]
        q = col_grid[digits].reshape(ch.nx2, ch.ny2, yhat)
        return CodingDistribution(p_x1=p1_grid[i1], p_x2=p2_grid[i2], q=q)

    def exact_minform(d: CodingDistribution) -> float:
        report = evaluate_bounds(ch, d)
        return min(report.message_term, report.flow_term)

    def exact_constrained(d: CodingDistribution) -> float:
        return evaluate_bounds(ch, d).mac_message_max

    constant_q = np.zeros((ch.nx2, ch.ny2, yhat))
    constant_q[:, :, 0] = 1.0
    fallback = CodingDistribution(
        p_x1=np.full(ch.nx1, 1.0 / ch.nx1),
        p_x2=np.full(ch.nx2, 1.0 / ch.nx2),
        q=constant_q,
    )

    out: dict[str, tuple[float, CodingDistribution]] = {}
    if best_min.key is None or best_min.value == -np.inf:
        out["minform"] = (0.0, fallback)
    else:
        d = materialize(best_min.key)
        out["minform"] = (exact_minform(d), d)
    if best_con.key is None or best_con.value == -np.inf:
        out["constrained"] = (0.0, fallback)
    else:
        d = materialize(best_con.key)
        out["constrained"] = (exact_constrained(d), d)
    return out


def cf_rates(ch: RelayChannelSpec, cfg: SearchConfig) -> dict[str, tuple[float, CodingDistribution]]:
    """Both best-compression rates from a single grid sweep.

    "minform" maximizes min(message_term, flow_term) over the grid;
    "constrained" maximizes I(X1;Yh,Y3|X2) over grid points whose
    quantizer satisfies I(Yh;Y2|X2,Y3) <= I(X2;Y3).  At the optimum the
    two coincide; on a finite grid they agree to within grid error.
    Each entry is (rate, argmax distribution), the argmax being the
    first maximizer in lexicographic grid order.
    """
    return _search_both(ch, cfg)


def cf_rate(
    ch: RelayChannelSpec, cfg: SearchConfig, mode: str = "minform"
) -> tuple[float, CodingDistribution]:
    """Best-compression rate over the distribution grid, one mode.

    mode "minform" or "constrained"; see cf_rates.  An infeasible
    constrained search returns (0.0, constant quantizer) rather than
    raising.
    """
    if mode not in ("minform", "constrained"):
        raise ValueError(f"mode must be 'minform' or 'constrained', got {mode!r}")
    return cf_rates(ch, cfg)[mode]
