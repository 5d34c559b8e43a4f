"""Channel constructors, file round trips, and the codeword census."""

from __future__ import annotations

import numpy as np
import pytest

import relaylab as rl


def test_kernel_validation_names_offending_row():
    kernel = np.full((2, 2, 2, 2), 0.25)
    kernel[1, 0] *= 0.96
    with pytest.raises(ValueError, match=r"x1=1, x2=0"):
        rl.RelayChannelSpec(kernel)
    with pytest.raises(ValueError, match="4 axes"):
        rl.RelayChannelSpec(np.full((2, 2, 4), 0.25))
    with pytest.raises(ValueError, match="negative"):
        bad = np.full((1, 1, 2, 2), 0.25)
        bad[0, 0, 0, 0] = -0.25
        bad[0, 0, 0, 1] = 0.75
        rl.RelayChannelSpec(bad)


def test_orthogonal_bsc_structure():
    ch = rl.make_channel(rl.ChannelRecipe("orthogonal_bsc", {"p2": 0.05, "p3": 0.2}))
    assert (ch.nx1, ch.nx2, ch.ny2, ch.ny3) == (2, 2, 2, 4)
    # Relay observation: BSC(p2) of x1, independent of everything else.
    p_y2 = ch.kernel.sum(axis=3)
    for a in range(2):
        for b in range(2):
            np.testing.assert_allclose(p_y2[a, b], [0.95, 0.05][:: 1 if a == 0 else -1])
    # Sink observation: pair of (BSC(p3) copy of x1, x2), row-major.
    for a in range(2):
        for b in range(2):
            expect = np.zeros(4)
            expect[rl.pair_index(a, b, 2)] = 0.8
            expect[rl.pair_index(1 - a, b, 2)] = 0.2
            np.testing.assert_allclose(ch.kernel[a, b].sum(axis=0), expect, atol=1e-12)


def test_primitive_structure_and_entropy_oracle():
    ch = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 1, "p3": 0.1}))
    # Observation is exactly x1.
    p_y2 = ch.kernel.sum(axis=3)
    for a in range(2):
        for b in range(2):
            np.testing.assert_allclose(p_y2[a, b], np.eye(2)[a], atol=1e-15)
    np.testing.assert_allclose(ch.kernel.sum(axis=(2, 3)), 1.0, atol=1e-12)
    # Under uniform inputs the sink marginal is uniform on 4 symbols.
    d = rl.CodingDistribution(
        p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=np.full((2, 2, 1), 1.0)
    )
    joint = rl.build_joint(ch, d)
    got = rl.entropy(joint, "Y3")
    p_y3 = rl.marginalize(joint, "Y3").table
    direct = -sum(float(x) * np.log2(float(x)) for x in p_y3 if x > 0)
    assert got == pytest.approx(direct, abs=1e-12)
    assert got == pytest.approx(2.0, abs=1e-12)


def test_primitive_rejects_fractional_alphabet():
    with pytest.raises(ValueError, match="must be an integer"):
        rl.ChannelRecipe("primitive", {"r0": 0.5})
    ch = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 0}))
    assert ch.nx2 == 1


def test_deterministic_and_unknown_kinds():
    ch = rl.make_channel(rl.ChannelRecipe("deterministic"))
    for a in range(2):
        for b in range(2):
            assert ch.kernel[a, b, a, b] == 1.0
    with pytest.raises(ValueError, match="unknown channel kind"):
        rl.ChannelRecipe("gaussian")


def test_xor_sink_structure():
    ch = rl.xor_sink_channel(0.1)
    for a in range(2):
        for b in range(2):
            np.testing.assert_allclose(ch.kernel[a, b].sum(axis=0), np.eye(2)[a ^ b])
    with pytest.raises(ValueError):
        rl.xor_sink_channel(0.7)


def test_pair_index_is_row_major():
    assert [rl.pair_index(i, j, 3) for i in range(2) for j in range(3)] == list(range(6))


def test_channel_file_round_trip(tmp_path):
    ch = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 1, "p3": 0.1}))
    path = tmp_path / "ch.json"
    rl.save_channel_file(ch, path)
    again = rl.load_channel_file(path)
    np.testing.assert_array_equal(ch.kernel, again.kernel)
    custom = rl.make_channel(rl.ChannelRecipe("custom", {"path": str(path)}))
    np.testing.assert_array_equal(ch.kernel, custom.kernel)


def test_channel_file_rejects_bad_rows(tmp_path):
    path = tmp_path / "bad.json"
    kernel = np.full((2, 2, 2, 2), 0.25).tolist()
    kernel[0][1] = (np.full((2, 2), 0.2475)).tolist()
    payload = {"alphabets": {"x1": 2, "x2": 2, "y2": 2, "y3": 2}, "kernel": kernel}
    path.write_text(__import__("json").dumps(payload))
    with pytest.raises(ValueError, match=r"x1=0, x2=1"):
        rl.load_channel_file(path)


def test_channel_file_rejects_shape_and_missing(tmp_path):
    with pytest.raises(FileNotFoundError, match="nowhere.json"):
        rl.load_channel_file(tmp_path / "nowhere.json")
    path = tmp_path / "empty.json"
    payload = {"alphabets": {"x1": 0, "x2": 2, "y2": 2, "y3": 2}, "kernel": []}
    path.write_text(__import__("json").dumps(payload))
    with pytest.raises(ValueError):
        rl.load_channel_file(path)
    path2 = tmp_path / "malformed.json"
    path2.write_text('{"kernel": [[[[1.0]]]]}')
    with pytest.raises(ValueError, match="malformed"):
        rl.load_channel_file(path2)


def test_random_channel_is_valid():
    rng = np.random.default_rng(11)
    for _ in range(5):
        ch = rl.random_channel(rng, nx1=2, nx2=3, ny2=2, ny3=2)
        np.testing.assert_allclose(ch.kernel.sum(axis=(2, 3)), 1.0, atol=1e-9)
        assert (ch.nx1, ch.nx2, ch.ny2, ch.ny3) == (2, 3, 2, 2)


def test_census_forces_collisions_on_narrow_alphabet():
    ch = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 1, "p3": 0.1}))
    d = rl.random_distribution(np.random.default_rng(0), ch, yhat_size=2)
    p = rl.SimParams(n=4, B=1, R=0.25, R2=2.0, seed=0)
    books = rl.generate_codebooks(ch, d, p)
    for block in range(p.B + 1):
        distinct, indices = rl.implicit_hashing_census(books, block)
        assert indices == p.index_count == 256
        assert distinct <= 16


def test_census_no_collisions_on_wide_alphabet():
    ch = rl.random_channel(np.random.default_rng(2), nx2=8)
    d = rl.random_distribution(np.random.default_rng(2), ch)
    p = rl.SimParams(n=8, B=1, R=0.25, R2=0.25, seed=2)
    books = rl.generate_codebooks(ch, d, p)
    distinct, indices = rl.implicit_hashing_census(books, 0)
    assert indices == 4
    assert distinct == indices


def test_index_count_is_ceiling_of_power():
    p = rl.SimParams(n=7, B=1, R=0.3, R2=0.3)
    assert p.index_count == 5
    assert p.message_count == 5
    assert p.effective_index_rate == pytest.approx(np.log2(5) / 7)
