"""How the episode-novelty reward reacts to repeats vs new maneuvers.

Builds three synthetic flights as state traces, pushes them through the
same channel extraction the trainer uses, and prints the curiosity reward
each one earns against the growing episode memory. A repeat of a known
flight scores near zero; a genuinely different maneuver scores high.

Run:  python3 demos/03_curiosity_memory.py
"""

import numpy as np

from curiflight.curiosity import (
    EpisodeMemory,
    channels_from_states,
    curiosity_reward,
    record_episode,
    summed_distance,
)
from curiflight.dynamics import QuadState
from curiflight.scenes import make_window_scene


def straight_dash(speed, jitter, rng, steps=60):
    """Constant-velocity run along +x with small positional noise."""
    states = []
    for k in range(steps):
        position = np.array([speed * 0.01 * k, 0.0, 1.5]) + jitter * rng.normal(size=3)
        states.append(QuadState(position=position, attitude=np.eye(3),
                                linear_velocity=np.array([speed, 0.0, 0.0]),
                                angular_velocity=np.zeros(3)))
    return states


def climbing_arc(rng, steps=60):
    """A different maneuver: arcing climb with sideways drift."""
    states = []
    for k in range(steps):
        t = 0.01 * k
        position = np.array([1.5 * t, 1.2 * np.sin(2.0 * t), 1.5 + 1.0 * t])
        position += 0.01 * rng.normal(size=3)
        states.append(QuadState(position=position, attitude=np.eye(3),
                                linear_velocity=np.array([1.5, 2.4 * np.cos(2.0 * t), 1.0]),
                                angular_velocity=np.zeros(3)))
    return states


rng = np.random.default_rng(0)
region = make_window_scene(0.3, 0.0).flight_region
memory = EpisodeMemory(capacity=256)

flights = [
    ("dash at 2 m/s", straight_dash(2.0, 0.01, rng)),
    ("same dash, re-flown", straight_dash(2.0, 0.01, rng)),
    ("climbing arc", climbing_arc(rng)),
    ("dash again, third time", straight_dash(2.0, 0.01, rng)),
]

print(f"{'flight':>24} {'novelty reward':>15} {'nearest memory distance':>24}")
for name, states in flights:
    channels = channels_from_states(states, region)
    reward = curiosity_reward(channels, memory)
    if len(memory):
        nearest = min(summed_distance(channels, stored) for stored in memory)
        nearest_text = f"{nearest:24.3f}"
    else:
        nearest_text = f"{'(memory empty)':>24}"
    print(f"{name:>24} {reward:15.3f} {nearest_text}")
    record_episode(memory, channels)

print("\nfirst flight scores the empty-memory maximum; repeats collapse toward")
print("zero; the arc scores high because no stored episode aligns with it.")
print("this is the exploration pressure: repeating yourself stops paying.")
