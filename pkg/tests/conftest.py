"""Shared fixtures: small named channels with hand-checkable structure."""

from __future__ import annotations

import numpy as np
import pytest

import relaylab as rl


@pytest.fixture(scope="session")
def perfect_relay():
    """Clean observation, clean 1-bit pipe, identity quantizer."""
    ch = rl.make_channel(rl.ChannelRecipe("primitive", {"r0": 1, "p3": 0.0}))
    q = np.zeros((2, 2, 2))
    q[:, [0, 1], [0, 1]] = 1.0
    d = rl.CodingDistribution(p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=q)
    return ch, d


@pytest.fixture(scope="session")
def xor_fixture():
    """Sink output x1 XOR x2: the forwarded index only decodes jointly
    with the message, so the sliding window gets rate 0 while the
    backward window does not."""
    ch = rl.xor_sink_channel(0.1)
    flip = np.array([[0.9, 0.1], [0.1, 0.9]])
    d = rl.CodingDistribution(
        p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=np.stack([flip, flip])
    )
    return ch, d


@pytest.fixture(scope="session")
def noisy_orthogonal():
    """Mildly noisy relay and sink links with a soft binary quantizer."""
    ch = rl.make_channel(rl.ChannelRecipe("orthogonal_bsc", {"p2": 0.05, "p3": 0.2}))
    mix = np.array([[0.65, 0.35], [0.35, 0.65]])
    d = rl.CodingDistribution(
        p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=np.stack([mix, mix])
    )
    return ch, d


@pytest.fixture(scope="session")
def noiseless_loop():
    """Zero-noise links and a constant quantizer: every decoder must be
    exact, every covering step must succeed."""
    ch = rl.make_channel(rl.ChannelRecipe("orthogonal_bsc", {"p2": 0.0, "p3": 0.0}))
    q = np.zeros((2, 2, 1))
    q[:, :, 0] = 1.0
    d = rl.CodingDistribution(p_x1=np.array([0.5, 0.5]), p_x2=np.array([0.5, 0.5]), q=q)
    return ch, d
