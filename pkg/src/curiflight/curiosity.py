"""Similarity-based curiosity from dynamic time warping over episode traces.

Each finished episode is reduced to three channel series (position, attitude,
velocity, all in normalized units). Novelty against an episode memory is

    r_curiosity = 1 - exp(-min_i sum_channels D_dtw(S_ch, S'_ch,i)),

where D_dtw is the classic dynamic-time-warping distance: the cheapest
monotone alignment of the two sample sequences under the recursion

    D(i, j) = d(s_i, s'_j) + min(D(i-1, j-1), D(i-1, j), D(i, j-1)).

The reward lives in [0, 1): replaying a stored episode scores 0, maximally
novel episodes approach 1. The inner minimum is capped at ``distance_cap``
(which is also the empty-memory value), so the first episode scores
1 - exp(-cap). DTW cost is O(n * m) per pair; series are downsampled to a
bounded length first so the per-episode cost stays flat.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

CHANNELS = ("position", "attitude", "velocity")
CHANNEL_DIMS = {"position": 3, "attitude": 9, "velocity": 3}

# Normalization scale for velocity features, shared with the observation
# encoding: aggressive traversals peak around 10 m/s.
VELOCITY_SCALE = 10.0

DISTANCE_CAP = 5.0
MAX_CHANNEL_SAMPLES = 200

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def _dtw_table_python(cost):
    n, m = cost.shape
    acc = np.empty_like(cost)
    acc[0, 0] = cost[0, 0]
    for j in range(1, m):
        acc[0, j] = cost[0, j] + acc[0, j - 1]
    for i in range(1, n):
        acc[i, 0] = cost[i, 0] + acc[i - 1, 0]
        for j in range(1, m):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost[i, j] + best
    return acc[n - 1, m - 1]


if _HAVE_NUMBA:
    _dtw_table = njit(cache=True)(_dtw_table_python)
else:  # pragma: no cover
    _dtw_table = _dtw_table_python


@dataclass(frozen=True)
class CuriosityParams:
    """Memory size and novelty-shaping knobs."""

    capacity: int = 256
    distance_cap: float = DISTANCE_CAP
    max_samples: int = MAX_CHANNEL_SAMPLES

    def __post_init__(self) -> None:
        if self.capacity < 1 or self.max_samples < 1:
            raise ValueError("capacity and max_samples must be positive")
        if self.distance_cap <= 0.0:
            raise ValueError("distance_cap must be positive")


def dtw_from_samples(a: np.ndarray, b: np.ndarray) -> float:
    """DTW distance between two raw (n, d) sample arrays of any dimension."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError("sample dimensions differ")
    return float(_dtw_table(cdist(a, b)))


def dtw_bruteforce_from_samples(a: np.ndarray, b: np.ndarray) -> float:
    """Path-enumeration DTW reference for raw sample arrays (n, m <= 8)."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError("sample dimensions differ")
    return _bruteforce_over_cost(cdist(a, b))


def _bruteforce_over_cost(cost: np.ndarray) -> float:
    n, m = cost.shape
    if n > 8 or m > 8:
        raise ValueError("brute-force enumeration is limited to series of length <= 8")
    best = np.inf

    def walk(i: int, j: int, path):
        nonlocal best
        path.append((i, j))
        if i == n - 1 and j == m - 1:
            # The table recurrence computes cost[cell] + accumulated-so-far at
            # every cell, walking the path forward; folding in the same order
            # reproduces its floating-point grouping exactly, which makes
            # bit-equality against the dynamic program meaningful.
            total = 0.0
            for ci, cj in path:
                total = cost[ci, cj] + total
            if total < best:
                best = total
        else:
            if i + 1 < n and j + 1 < m:
                walk(i + 1, j + 1, path)
            if i + 1 < n:
                walk(i + 1, j, path)
            if j + 1 < m:
                walk(i, j + 1, path)
        path.pop()

    walk(0, 0, [])
    return float(best)


@dataclass(frozen=True)
class StateChannelSeries:
    """One channel of an episode trace: (n, d) samples in normalized units."""

    channel: str
    samples: np.ndarray

    def __post_init__(self) -> None:
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError("samples must be a non-empty (n, d) array")
        if samples.shape[1] != CHANNEL_DIMS[self.channel]:
            raise ValueError(
                f"channel {self.channel!r} expects dimension {CHANNEL_DIMS[self.channel]}"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.shape[0]


EpisodeChannels = tuple[StateChannelSeries, StateChannelSeries, StateChannelSeries]


def dtw_distance(a: StateChannelSeries, b: StateChannelSeries) -> float:
    """DTW distance between two series of the same channel.

    Symmetric, zero for identical series, and invariant to repeating samples
    (warping absorbs uniform speed changes).
    """
    if a.channel != b.channel:
        raise ValueError(f"channel mismatch: {a.channel!r} vs {b.channel!r}")
    cost = cdist(a.samples, b.samples)
    return float(_dtw_table(cost))


def dtw_distance_bruteforce(a: StateChannelSeries, b: StateChannelSeries) -> float:
    """Exact reference: enumerate every monotone warping path.

    Exponential in the series lengths; restricted to n, m <= 8.
    """
    if a.channel != b.channel:
        raise ValueError(f"channel mismatch: {a.channel!r} vs {b.channel!r}")
    return _bruteforce_over_cost(cdist(a.samples, b.samples))


class EpisodeMemory:
    """FIFO store of recent episode channel tuples."""

    def __init__(self, capacity: int = 256):
        if capacity < 1:
            raise ValueError("capacity must be at least 1")
        self.capacity = capacity
        self._episodes: deque = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._episodes)

    def __iter__(self):
        return iter(self._episodes)


def record_episode(memory: EpisodeMemory, channels: EpisodeChannels) -> EpisodeMemory:
    """Append an episode, evicting the oldest once capacity is reached."""
    if tuple(c.channel for c in channels) != CHANNELS:
        raise ValueError(f"channels must be given in order {CHANNELS}")
    memory._episodes.append(tuple(channels))
    return memory


def normalized_distance(a: StateChannelSeries, b: StateChannelSeries) -> float:
    """Alignment cost per step: the DTW sum divided by the longer length.

    Raw DTW sums grow linearly with series length, so two noisy repeats of
    the same flight would look as distant as two unrelated flights just by
    lasting longer. Dividing by max(len) makes the channel distance an
    average per-aligned-step cost, comparable across episode durations.
    """
    return dtw_distance(a, b) / max(len(a.samples), len(b.samples))


def summed_distance(channels: EpisodeChannels, other: EpisodeChannels) -> float:
    return sum(normalized_distance(a, b) for a, b in zip(channels, other))


def curiosity_reward(
    channels: EpisodeChannels,
    memory: EpisodeMemory,
    distance_cap: float = DISTANCE_CAP,
) -> float:
    """Novelty of an episode against the memory; in [0, 1).

    Strictly increasing in the minimum summed channel distance up to the cap,
    saturating at 1 - exp(-cap) beyond it (that value is also returned for an
    empty memory).
    """
    if tuple(c.channel for c in channels) != CHANNELS:
        raise ValueError(f"channels must be given in order {CHANNELS}")
    if distance_cap <= 0.0:
        raise ValueError("distance_cap must be positive")
    nearest = distance_cap
    for stored in memory:
        total = 0.0
        for ours, theirs in zip(channels, stored):
            total += normalized_distance(ours, theirs)
            if total >= nearest:
                break
        if total < nearest:
            nearest = total
    return float(1.0 - np.exp(-nearest))


def downsample(samples: np.ndarray, max_samples: int = MAX_CHANNEL_SAMPLES) -> np.ndarray:
    """Stride-decimate to at most max_samples rows, keeping the first sample."""
    if max_samples < 1:
        raise ValueError("max_samples must be at least 1")
    n = samples.shape[0]
    if n <= max_samples:
        return samples
    stride = int(np.ceil(n / max_samples))
    return samples[::stride]


def channels_from_states(
    states, region, max_samples: int = MAX_CHANNEL_SAMPLES
) -> EpisodeChannels:
    """Reduce a visited-state sequence to normalized channel series.

    Positions are centred on the flight region and scaled by its half
    extents, attitudes enter as raw rotation-matrix entries, velocities are
    scaled by VELOCITY_SCALE. Using normalized units keeps the three DTW
    channels commensurate.
    """
    center, half = region.center, region.half
    positions = np.array([(s.position - center) / half for s in states])
    attitudes = np.array([s.attitude.reshape(-1) for s in states])
    velocities = np.array([s.linear_velocity / VELOCITY_SCALE for s in states])
    return (
        StateChannelSeries("position", downsample(positions, max_samples)),
        StateChannelSeries("attitude", downsample(attitudes, max_samples)),
        StateChannelSeries("velocity", downsample(velocities, max_samples)),
    )
