"""Block-Markov quantize-forward protocol, executed symbol by symbol.

Transmission spans B+1 blocks with fresh random codebooks per block.
The source splits its message into B sub-messages and sends one per
block (the final block carries the fixed index 0).  The relay quantizes
each received block by searching its reconstruction book for a codeword
that looks jointly typical with what it saw, then transmits the found
index in the next block; index 0 and a failure flag when nothing fits.
The sink runs one of three decoders:

    sliding      windows over block pairs (b-1, b), decoding message
                 b-1 and index b together, feeding indexes forward;
    backward     resolves the final index first (the last block carries
                 a known message), then walks blocks in reverse;
    joint_oracle exhaustive maximization over all index/message tuples,
                 capped in size; the reference the streaming decoders
                 are measured against.

Scoring is either strict letter typicality (a candidate passes or it
does not) or an empirical log-likelihood (max_score); ties always break
toward the smallest index so runs are reproducible.  All indexes are
0-based: "first codeword" means index 0 everywhere, including the
no-candidate fallbacks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channels import RelayChannelSpec
from .infotheory import marginalize
from .region import CodingDistribution, build_joint

DECODERS = ("sliding", "backward", "joint_oracle")
METRICS = ("typicality", "max_score")

# Caps keep accidental big-O explosions from freezing a desk run; the
# protocol is exact, not sampled, in codebook and candidate space.
MAX_CODEBOOK_CELLS = 1 << 24
MAX_ORACLE_TUPLES = 1 << 24

_SEQ_DTYPE = np.int16

# Impossible symbols score a huge finite penalty instead of -inf so the
# matmul scoring path stays NaN-free; anything below the cutoff cannot
# be a real log-likelihood (|log2 p| < 1100 per symbol) and means
# "not a candidate".
_NEG_SCORE = -1.0e30
_SCORE_CUTOFF = -1.0e29


class SizeLimitError(RuntimeError):
    """Requested codebooks or candidate space exceed the desk-scale caps."""


@dataclass(frozen=True)
class SimParams:
    """One protocol configuration.

    n: symbols per block; B: message blocks (B+1 transmitted); R and R2
    in bits per channel use; codebook sizes are ceil(2^(n R)) and
    ceil(2^(n R2)).  last_block_factor stretches only the final block,
    giving the backward decoder a longer look at the last index without
    changing the model.  workers parallelizes Monte Carlo trials.
    """

    n: int
    B: int
    R: float
    R2: float
    epsilon: float = 0.2
    seed: int = 0
    decoder: str = "sliding"
    metric: str = "typicality"
    last_block_factor: int = 1
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n < 1 or self.B < 1:
            raise ValueError(f"n and B must be positive, got n={self.n} B={self.B}")
        if self.R < 0 or self.R2 < 0:
            raise ValueError("rates must be nonnegative")
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        if self.last_block_factor < 1:
            raise ValueError("last_block_factor must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @property
    def message_count(self) -> int:
        return math.ceil(2 ** (self.n * self.R))

    @property
    def index_count(self) -> int:
        return math.ceil(2 ** (self.n * self.R2))

    @property
    def effective_rate(self) -> float:
        return math.log2(self.message_count) / self.n

    @property
    def effective_index_rate(self) -> float:
        return math.log2(self.index_count) / self.n

    def block_length(self, block: int) -> int:
        if not 0 <= block <= self.B:
            raise ValueError(f"block must lie in [0, {self.B}], got {block}")
        return self.n * self.last_block_factor if block == self.B else self.n


@dataclass(frozen=True)
class CodebookSet:
    """Per-block random books; block k of 0..B holds transmission k+1.

    x1_book[k]: (messages, length) source codewords;
    x2_book[k]: (indexes, length) relay codewords;
    yhat_book[k]: (indexes, indexes, length) reconstruction codewords,
    first axis the index being transmitted (conditioning), second the
    candidate quantization index chosen for the next block.
    """

    x1_book: tuple[np.ndarray, ...]
    x2_book: tuple[np.ndarray, ...]
    yhat_book: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if not len(self.x1_book) == len(self.x2_book) == len(self.yhat_book):
            raise ValueError("books must cover the same number of blocks")


@dataclass(frozen=True)
class TransmissionTrace:
    """Everything one end-to-end run produced, before decoding."""

    w_blocks: tuple[int, ...]
    v_indices: tuple[int, ...]
    y2_blocks: tuple[np.ndarray, ...]
    y3_blocks: tuple[np.ndarray, ...]
    relay_failures: tuple[bool, ...]

    def __post_init__(self) -> None:
        if self.v_indices[0] != 0:
            raise ValueError("the first relay index is fixed to 0")
        if self.w_blocks[-1] != 0:
            raise ValueError("the final block carries the fixed message 0")


@dataclass(frozen=True)
class ErrorStats:
    """Monte Carlo aggregates; per_block_error attributes each errored
    trial to the first block its message went wrong in."""

    trials: int
    message_error_rate: float
    per_block_error: tuple[float, ...]
    quantization_failure_rate: float
    index_error_rate: float

    def __post_init__(self) -> None:
        rates = (
            self.message_error_rate,
            self.quantization_failure_rate,
            self.index_error_rate,
            *self.per_block_error,
        )
        if any(not 0.0 <= r <= 1.0 for r in rates):
            raise ValueError("error rates must lie in [0, 1]")


def split_message(w: int, message_count: int, blocks: int) -> tuple[int, ...]:
    """Big-endian base-message_count digits of w, most significant first."""
    if not 0 <= w < message_count**blocks:
        raise ValueError(
            f"message {w} out of range for {blocks} blocks of {message_count} words"
        )
    digits = []
    for _ in range(blocks):
        w, r = divmod(w, message_count)
        digits.append(r)
    return tuple(reversed(digits))


def join_message(digits: tuple[int, ...], message_count: int) -> int:
    w = 0
    for d in digits:
        if not 0 <= d < message_count:
            raise ValueError(f"sub-message {d} out of range")
        w = w * message_count + d
    return w


def _codebook_cells(p: SimParams) -> int:
    m, v = p.message_count, p.index_count
    cells = 0
    for k in range(p.B + 1):
        length = p.block_length(k)
        cells += (m + v + v * v) * length
    return cells


def _check_codebook_size(p: SimParams) -> None:
    cells = _codebook_cells(p)
    if cells > MAX_CODEBOOK_CELLS:
        raise SizeLimitError(
            f"codebooks need {cells} cells "
            f"({p.message_count} messages, {p.index_count} indexes, n={p.n}, "
            f"B={p.B}); cap is {MAX_CODEBOOK_CELLS}"
        )


def _sample_pmf(rng: np.random.Generator, pmf: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    cum = np.cumsum(pmf)
    u = rng.random(shape)
    idx = np.searchsorted(cum, u, side="right")
    return np.minimum(idx, pmf.size - 1).astype(_SEQ_DTYPE)


def _sample_rows(rng: np.random.Generator, cum_rows: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """One draw per entry of `shape`, row cum_rows[..., :] broadcast against it."""
    u = rng.random(shape)
    idx = (cum_rows <= u[..., None]).sum(axis=-1)
    return np.minimum(idx, cum_rows.shape[-1] - 1).astype(_SEQ_DTYPE)


def recon_given_relay_input(ch: RelayChannelSpec, d: CodingDistribution) -> np.ndarray:
    """P(yh | x2) rows: the law reconstruction codewords are drawn from."""
    return np.einsum("a,abcd,bcf->bf", d.p_x1, ch.kernel, d.q)


def generate_codebooks(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    p: SimParams,
    rng: np.random.Generator | None = None,
) -> CodebookSet:
    """Draw all B+1 blocks of random books.

    Deterministic given p.seed (a fresh generator is seeded from it when
    rng is omitted).  Draw order per block: source book, relay book,
    then one uniform tensor of shape (indexes, indexes, length) for the
    reconstruction book.
    """
    _check_codebook_size(p)
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence(p.seed))
    m, v = p.message_count, p.index_count
    recon_cum = np.cumsum(recon_given_relay_input(ch, d), axis=-1)
    x1_books, x2_books, yhat_books = [], [], []
    for k in range(p.B + 1):
        length = p.block_length(k)
        x1_books.append(_sample_pmf(rng, d.p_x1, (m, length)))
        x2 = _sample_pmf(rng, d.p_x2, (v, length))
        x2_books.append(x2)
        # The reconstruction row depends only on the relay symbol, so
        # invert the cdf once per symbol and pick by x2 afterwards.
        u = rng.random((v, v, length)).ravel()
        by_symbol = np.stack(
            [np.searchsorted(recon_cum[s], u, side="right") for s in range(ch.nx2)]
        )
        sym = np.broadcast_to(x2[:, None, :], (v, v, length)).ravel()
        idx = by_symbol[sym.astype(np.int64), np.arange(sym.size)]
        yhat = np.minimum(idx, recon_cum.shape[-1] - 1).astype(_SEQ_DTYPE)
        yhat_books.append(yhat.reshape(v, v, length))
    return CodebookSet(
        x1_book=tuple(x1_books),
        x2_book=tuple(x2_books),
        yhat_book=tuple(yhat_books),
    )


def source_encode(w: int, books: CodebookSet, p: SimParams) -> tuple[np.ndarray, ...]:
    """Transmit sequences for all B+1 blocks; the last carries index 0."""
    subs = split_message(w, p.message_count, p.B)
    out = [books.x1_book[k][subs[k]] for k in range(p.B)]
    out.append(books.x1_book[p.B][0])
    return tuple(out)


class _ModelTables:
    """Marginals of the coding joint, as probability and log2 tables,
    in the axis orders the decoders index them with."""

    def __init__(self, ch: RelayChannelSpec, d: CodingDistribution):
        joint = build_joint(ch, d)

        def tables(*names: str) -> tuple[np.ndarray, np.ndarray]:
            sub = marginalize(joint, names)
            # marginalize keeps the joint's own axis order; put the axes
            # in the order the decoders index them with.
            probs = np.transpose(sub.table, [sub.names.index(nm) for nm in names])
            logs = np.full(probs.shape, _NEG_SCORE)
            np.log2(probs, out=logs, where=probs > 0)
            return probs, logs

        self.relay_triple = tables("Yh", "X2", "Y2")
        self.sink_pair = tables("X2", "Y3")
        self.sink_quad = tables("X1", "Yh", "X2", "Y3")
        self.sink_triple = tables("X1", "X2", "Y3")


def _block_scores(
    metric: str,
    model: tuple[np.ndarray, np.ndarray],
    epsilon: float,
    seqs: tuple[np.ndarray, ...],
) -> np.ndarray:
    """Score every candidate; shape is the broadcast of seqs minus the
    trailing symbol axis.  Typicality scores are 0 or the invalid
    sentinel, max_score is the empirical log2-likelihood; anything
    below _SCORE_CUTOFF means "not a candidate".
    """
    probs, logs = model
    if metric == "max_score":
        return logs[tuple(seqs)].sum(axis=-1)
    full = np.broadcast_arrays(*seqs)
    length = full[0].shape[-1]
    cand_shape = full[0].shape[:-1]
    codes = np.ravel_multi_index(tuple(full), probs.shape).reshape(-1, length)
    cells = probs.size
    offsets = np.arange(codes.shape[0], dtype=np.int64)[:, None] * cells
    counts = np.bincount((codes + offsets).ravel(), minlength=codes.shape[0] * cells)
    freq = counts.reshape(codes.shape[0], cells) / length
    target = probs.ravel()
    ok = np.all(np.abs(freq - target) <= epsilon * target, axis=1)
    return np.where(ok, 0.0, _NEG_SCORE).reshape(cand_shape)


def _message_scores(
    metric: str,
    model: tuple[np.ndarray, np.ndarray],
    epsilon: float,
    msg_book: np.ndarray,
    rest_seqs: tuple[np.ndarray, ...],
) -> np.ndarray:
    """Scores indexed (message, *candidate shape of rest_seqs).

    The model's first axis is the message symbol.  For max_score the
    sum over positions factors through a one-hot expansion of the
    message book, turning the per-candidate gather into one matrix
    product over (position, symbol).
    """
    probs, logs = model
    rest = np.broadcast_arrays(*rest_seqs)
    cand_shape = rest[0].shape[:-1]
    length = rest[0].shape[-1]
    if metric == "max_score":
        by_symbol = np.moveaxis(logs, 0, -1)[tuple(rest)]  # (*cand, length, A)
        alphabet = logs.shape[0]
        onehot = (msg_book[:, :, None] == np.arange(alphabet)).astype(np.float64)
        flat = onehot.reshape(msg_book.shape[0], -1) @ by_symbol.reshape(
            -1, length * alphabet
        ).T
        return flat.reshape(msg_book.shape[0], *cand_shape)
    pad = (None,) * len(cand_shape)
    seqs = (
        msg_book[(slice(None), *pad, slice(None))],
        *(s[None] for s in rest),
    )
    return _block_scores(metric, model, epsilon, seqs)


def relay_step(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    books: CodebookSet,
    block: int,
    v_current: int,
    y2_block: np.ndarray,
    p: SimParams,
) -> tuple[int, bool]:
    """Quantize one received block: the first (typicality) or best
    (max_score) reconstruction index, or (0, True) when none fits."""
    model = _ModelTables(ch, d)
    cands = books.yhat_book[block][v_current]
    x2_row = books.x2_book[block][v_current][None, :]
    y2_row = np.asarray(y2_block)[None, :]
    scores = _block_scores(p.metric, model.relay_triple, p.epsilon, (cands, x2_row, y2_row))
    pick = int(np.argmax(scores))
    if scores[pick] <= _SCORE_CUTOFF:
        return 0, True
    return pick, False


def run_transmission(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    books: CodebookSet,
    w: int,
    p: SimParams,
    rng: np.random.Generator,
) -> TransmissionTrace:
    """Push one message through the channel with the relay in the loop."""
    subs = split_message(w, p.message_count, p.B)
    kernel_cum = np.cumsum(
        ch.kernel.reshape(ch.nx1, ch.nx2, ch.ny2 * ch.ny3), axis=-1
    )
    x1_seqs = source_encode(w, books, p)
    v = [0]
    y2_all, y3_all, failures = [], [], []
    for k in range(p.B + 1):
        x2_seq = books.x2_book[k][v[k]]
        rows = kernel_cum[np.asarray(x1_seqs[k], dtype=np.int64), np.asarray(x2_seq, dtype=np.int64)]
        flat = _sample_rows(rng, rows, (p.block_length(k),))
        y2 = (flat // ch.ny3).astype(_SEQ_DTYPE)
        y3 = (flat % ch.ny3).astype(_SEQ_DTYPE)
        y2_all.append(y2)
        y3_all.append(y3)
        if k < p.B:
            v_next, failed = relay_step(ch, d, books, k, v[k], y2, p)
            v.append(v_next)
            failures.append(failed)
    return TransmissionTrace(
        w_blocks=(*subs, 0),
        v_indices=tuple(v),
        y2_blocks=tuple(y2_all),
        y3_blocks=tuple(y3_all),
        relay_failures=tuple(failures),
    )


def _decode_sliding(
    model: _ModelTables,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    w_hat, v_hat = [], []
    v_prev = 0
    for k in range(1, p.B + 1):
        pair = _block_scores(
            p.metric,
            model.sink_pair,
            p.epsilon,
            (books.x2_book[k], np.asarray(y3_blocks[k])[None, :]),
        )
        quad = _message_scores(
            p.metric,
            model.sink_quad,
            p.epsilon,
            books.x1_book[k - 1],
            (
                books.yhat_book[k - 1][v_prev],
                books.x2_book[k - 1][v_prev][None, :],
                np.asarray(y3_blocks[k - 1])[None, :],
            ),
        )
        total = quad + pair[None, :]
        flat = int(np.argmax(total))
        if total.ravel()[flat] <= _SCORE_CUTOFF:
            wi, vi = 0, 0
        else:
            wi, vi = divmod(flat, total.shape[1])
        w_hat.append(wi)
        v_hat.append(vi)
        v_prev = vi
    return tuple(w_hat), tuple(v_hat)


def _final_block_scores(
    model: _ModelTables,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> np.ndarray:
    """Score the known-message final block against each relay index."""
    return _block_scores(
        p.metric,
        model.sink_triple,
        p.epsilon,
        (
            books.x1_book[p.B][0][None, :],
            books.x2_book[p.B],
            np.asarray(y3_blocks[p.B])[None, :],
        ),
    )


def _decode_backward(
    model: _ModelTables,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    final = _final_block_scores(model, books, y3_blocks, p)
    pick = int(np.argmax(final))
    v_next = 0 if final[pick] <= _SCORE_CUTOFF else pick
    w_rev, v_rev = [], [v_next]
    for k in range(p.B - 1, -1, -1):
        # Block 0 carries the protocol-fixed start index, so only the
        # v=0 row of its books is a legal candidate.
        prev = slice(0, 1) if k == 0 else slice(None)
        quad = _message_scores(
            p.metric,
            model.sink_quad,
            p.epsilon,
            books.x1_book[k],
            (
                books.yhat_book[k][prev, v_next, :],
                books.x2_book[k][prev],
                np.asarray(y3_blocks[k])[None, :],
            ),
        )
        flat = int(np.argmax(quad))
        if quad.ravel()[flat] <= _SCORE_CUTOFF:
            wi, vi = 0, 0
        else:
            wi, vi = divmod(flat, quad.shape[1])
        w_rev.append(wi)
        v_rev.append(vi)
        v_next = vi
    w_hat = tuple(reversed(w_rev))
    v_all = tuple(reversed(v_rev))  # v_1 .. v_{B+1} in protocol numbering
    return w_hat, v_all[1:]


def _oracle_block_tables(
    model: _ModelTables,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> list[np.ndarray]:
    """Per-block score tables S_k[w, v, u]; block 0 is the v=0 slice."""
    tables = []
    for k in range(p.B):
        y3_row = np.asarray(y3_blocks[k])
        if k == 0:
            rest = (
                books.yhat_book[0][0],
                books.x2_book[0][0][None, :],
                y3_row[None, :],
            )
        else:
            rest = (
                books.yhat_book[k],
                books.x2_book[k][:, None, :],
                y3_row[None, None, :],
            )
        tables.append(
            _message_scores(p.metric, model.sink_quad, p.epsilon, books.x1_book[k], rest)
        )
    return tables


def _decode_joint_oracle(
    model: _ModelTables,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Exact maximization over every (message, index) tuple.

    Dynamic programming over the index chain is exhaustive here because
    the total score is a sum of per-block terms linked only through
    consecutive indexes.  Ties resolve to the lexicographically
    smallest tuple in block order (w_1, v_2, w_2, v_3, ...): the
    forward pass argmaxes each (w, v) pair row-major against the
    suffix-optimal continuation values.
    """
    space = (p.message_count * p.index_count) ** p.B
    if space > MAX_ORACLE_TUPLES:
        raise SizeLimitError(
            f"joint_oracle tuple space {space} exceeds cap {MAX_ORACLE_TUPLES}"
        )
    tables = _oracle_block_tables(model, books, y3_blocks, p)
    suffix = [np.zeros(0)] * (p.B + 1)
    suffix[p.B] = _final_block_scores(model, books, y3_blocks, p)
    for k in range(p.B - 1, 0, -1):
        suffix[k] = (tables[k] + suffix[k + 1][None, None, :]).max(axis=(0, 2))
    head = tables[0] + suffix[1][None, :]
    if head.max() <= _SCORE_CUTOFF:
        return (0,) * p.B, (0,) * p.B
    w_hat, v_hat = [], []
    flat = int(np.argmax(head))
    wi, vi = divmod(flat, head.shape[1])
    w_hat.append(wi)
    v_hat.append(vi)
    for k in range(1, p.B):
        step = tables[k][:, v_hat[-1], :] + suffix[k + 1][None, :]
        flat = int(np.argmax(step))
        wi, vi = divmod(flat, step.shape[1])
        w_hat.append(wi)
        v_hat.append(vi)
    return tuple(w_hat), tuple(v_hat)


def sink_decode(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    books: CodebookSet,
    y3_blocks: tuple[np.ndarray, ...],
    p: SimParams,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Decode all messages and relay indexes from the sink's view.

    Returns (w_hat[1..B], v_hat[2..B+1]) in 0-based protocol order; the
    fixed first index v_1 = 0 is never decoded.  No-candidate slots
    come out as index 0.
    """
    if len(y3_blocks) != p.B + 1:
        raise ValueError(f"expected {p.B + 1} received blocks, got {len(y3_blocks)}")
    model = _ModelTables(ch, d)
    if p.decoder == "sliding":
        return _decode_sliding(model, books, y3_blocks, p)
    if p.decoder == "backward":
        return _decode_backward(model, books, y3_blocks, p)
    return _decode_joint_oracle(model, books, y3_blocks, p)


@dataclass
class _TrialCounts:
    message_errors: int = 0
    first_error_block: list[int] = field(default_factory=list)
    quant_failures: int = 0
    index_errors: int = 0

    @classmethod
    def zeros(cls, blocks: int) -> "_TrialCounts":
        return cls(first_error_block=[0] * blocks)

    def merge(self, other: "_TrialCounts") -> None:
        self.message_errors += other.message_errors
        self.quant_failures += other.quant_failures
        self.index_errors += other.index_errors
        for i, c in enumerate(other.first_error_block):
            self.first_error_block[i] += c


def _run_trials(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    p: SimParams,
    trial_indices: range,
) -> _TrialCounts:
    counts = _TrialCounts.zeros(p.B)
    m = p.message_count
    for t in trial_indices:
        rng = np.random.default_rng(np.random.SeedSequence([p.seed, t]))
        books = generate_codebooks(ch, d, p, rng=rng)
        subs = tuple(int(x) for x in rng.integers(0, m, size=p.B))
        w = join_message(subs, m)
        trace = run_transmission(ch, d, books, w, p, rng)
        w_hat, v_hat = sink_decode(ch, d, books, trace.y3_blocks, p)
        wrong = [k for k in range(p.B) if w_hat[k] != subs[k]]
        if wrong:
            counts.message_errors += 1
            counts.first_error_block[wrong[0]] += 1
        counts.quant_failures += sum(trace.relay_failures)
        counts.index_errors += sum(
            1 for k in range(p.B) if v_hat[k] != trace.v_indices[k + 1]
        )
    return counts


def run_monte_carlo(
    ch: RelayChannelSpec,
    d: CodingDistribution,
    p: SimParams,
    trials: int,
) -> ErrorStats:
    """Estimate error statistics over independent trials.

    Trial t draws its entire randomness (books, message, noise) from a
    generator seeded with SeedSequence([p.seed, t]), so results are
    identical for any worker count or trial batching.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    _check_codebook_size(p)
    if p.decoder == "joint_oracle":
        space = (p.message_count * p.index_count) ** p.B
        if space > MAX_ORACLE_TUPLES:
            raise SizeLimitError(
                f"joint_oracle tuple space {space} exceeds cap {MAX_ORACLE_TUPLES}"
            )
    if p.workers == 1:
        counts = _run_trials(ch, d, p, range(trials))
    else:
        bounds = np.linspace(0, trials, p.workers + 1).astype(int)
        ranges = [
            range(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if a < b
        ]
        counts = _TrialCounts.zeros(p.B)
        with ProcessPoolExecutor(max_workers=p.workers) as pool:
            for part in pool.map(_run_trials, *zip(*[(ch, d, p, r) for r in ranges])):
                counts.merge(part)
    steps = trials * p.B
    return ErrorStats(
        trials=trials,
        message_error_rate=counts.message_errors / trials,
        per_block_error=tuple(c / trials for c in counts.first_error_block),
        quantization_failure_rate=counts.quant_failures / steps,
        index_error_rate=counts.index_errors / steps,
    )
