"""Small fully-connected networks with hand-written backprop.

Parameters live in one flat float32 array per network; layer weight and bias
views are cut out of it on demand, so optimizers and soft target updates can
treat a network as a single vector. Hidden layers use the rectifier; outputs
are either linear or per-dimension bounded, y = scale * tanh(z). Gradients
are exact (verified against central finite differences in the test suite):
computations follow numpy promotion rules, so float64 inputs give float64
gradients even though storage is float32.

Checkpoint block layout (little-endian), documented here because other tools
parse it:

    magic           4 bytes  b"FNET"
    version         u32      currently 1
    input_dim       u32
    output_dim      u32
    hidden_count    u32
    hidden widths   u32 * hidden_count
    output_act      u8       0 = identity, 1 = bounded
    output_scale    f32 * output_dim
    param_count     u64
    values          f32 * param_count
    step_counter    u64
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

_MAGIC = b"FNET"
_VERSION = 1

ACTIVATIONS = ("identity", "bounded")


@dataclass(frozen=True)
class MlpSpec:
    """Network shape: dims, hidden widths, output activation and scale."""

    input_dim: int
    output_dim: int
    hidden: tuple[int, ...] = (256, 256)
    output_activation: str = "identity"
    output_scale: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be positive")
        if len(self.hidden) < 1:
            raise ValueError("at least one hidden layer is required")
        if any(h < 1 for h in self.hidden):
            raise ValueError("hidden widths must be positive")
        if self.output_activation not in ACTIVATIONS:
            raise ValueError(f"unknown output activation {self.output_activation!r}")
        scale = self.output_scale
        if not scale:
            scale = (1.0,) * self.output_dim
        if len(scale) != self.output_dim:
            raise ValueError("output_scale length must match output_dim")
        if any(s <= 0.0 for s in scale):
            raise ValueError("output_scale entries must be positive")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        object.__setattr__(self, "output_scale", tuple(float(s) for s in scale))

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        widths = (self.input_dim,) + self.hidden + (self.output_dim,)
        return list(zip(widths[:-1], widths[1:]))

    @property
    def param_count(self) -> int:
        return sum(n_in * n_out + n_out for n_in, n_out in self.layer_dims)


@dataclass
class ParameterSet:
    """Flat float32 parameter vector for one network."""

    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.ascontiguousarray(self.values, dtype=np.float32).reshape(-1)

    def copy(self) -> "ParameterSet":
        return ParameterSet(values=self.values.copy())


def layer_views(spec: MlpSpec, values: np.ndarray):
    """Cut (weight, bias) views for each layer out of the flat vector."""
    views = []
    offset = 0
    for n_in, n_out in spec.layer_dims:
        w = values[offset : offset + n_in * n_out].reshape(n_out, n_in)
        offset += n_in * n_out
        b = values[offset : offset + n_out]
        offset += n_out
        views.append((w, b))
    if offset != values.shape[0]:
        raise ValueError("parameter vector length does not match spec")
    return views


def init_params(spec: MlpSpec, rng: np.random.Generator, final_layer_scale: float = 1.0) -> ParameterSet:
    """Uniform fan-in initialization, final layer optionally shrunk.

    Each layer draws weights and biases from U(-1/sqrt(fan_in), +1/sqrt(fan_in));
    final_layer_scale < 1 gives near-zero initial outputs (used for actors so
    the starting policy is gentle).
    """
    values = np.empty(spec.param_count, dtype=np.float32)
    views = layer_views(spec, values)
    last = len(views) - 1
    for i, ((n_in, _), (w, b)) in enumerate(zip(spec.layer_dims, views)):
        bound = 1.0 / np.sqrt(n_in)
        scale = final_layer_scale if i == last else 1.0
        w[...] = rng.uniform(-bound, bound, size=w.shape) * scale
        b[...] = rng.uniform(-bound, bound, size=b.shape) * scale
    return ParameterSet(values=values)


def _promote_input(x: np.ndarray):
    x = np.asarray(x)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ValueError("input must be a vector or a batch of vectors")


def forward_trace(spec: MlpSpec, values: np.ndarray, x: np.ndarray):
    """Forward pass keeping per-layer activations for backprop reuse."""
    xb, squeeze = _promote_input(x)
    if xb.shape[1] != spec.input_dim:
        raise ValueError(f"expected input dimension {spec.input_dim}, got {xb.shape[1]}")
    views = layer_views(spec, values)
    activations = [xb]
    h = xb
    for w, b in views[:-1]:
        h = h @ w.T + b
        np.maximum(h, 0.0, out=h)
        activations.append(h)
    w, b = views[-1]
    z = h @ w.T + b
    if spec.output_activation == "bounded":
        t = np.tanh(z)
        out = t * np.asarray(spec.output_scale, dtype=z.dtype)
    else:
        t = None
        out = z
    trace = (activations, t, squeeze)
    return (out[0] if squeeze else out), trace


def forward(spec: MlpSpec, values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Network output for a single input or a batch."""
    out, _ = forward_trace(spec, values, x)
    return out


def backward_from_trace(spec: MlpSpec, values: np.ndarray, trace, gout: np.ndarray):
    """Backprop using a stored forward trace.

    Returns (parameter gradient flat vector, input gradient), both in the
    computation dtype. The parameter gradient is laid out exactly like the
    parameter vector.
    """
    activations, t, squeeze = trace
    g = np.asarray(gout)
    if squeeze:
        g = g[None, :]
    if g.shape != (activations[0].shape[0], spec.output_dim):
        raise ValueError("output gradient shape does not match the forward pass")
    views = layer_views(spec, values)
    if spec.output_activation == "bounded":
        scale = np.asarray(spec.output_scale, dtype=t.dtype)
        g = g * scale * (1.0 - t * t)

    gparams = np.zeros(spec.param_count, dtype=g.dtype)
    gviews = layer_views(spec, gparams)
    delta = g
    for i in range(len(views) - 1, -1, -1):
        w, _ = views[i]
        gw, gb = gviews[i]
        gw[...] = delta.T @ activations[i]
        gb[...] = delta.sum(axis=0)
        delta = delta @ w
        if i > 0:
            delta = delta * (activations[i] > 0)
    gin = delta[0] if squeeze else delta
    return gparams, gin


def backward(spec: MlpSpec, values: np.ndarray, x: np.ndarray, gout: np.ndarray):
    """Gradient of sum(gout * output) w.r.t. parameters and input."""
    _, trace = forward_trace(spec, values, x)
    return backward_from_trace(spec, values, trace, gout)


def input_gradient_from_trace(spec: MlpSpec, values: np.ndarray, trace, gout: np.ndarray):
    """Input gradient only, skipping the parameter-gradient matmuls."""
    activations, t, squeeze = trace
    g = np.asarray(gout)
    if squeeze:
        g = g[None, :]
    views = layer_views(spec, values)
    if spec.output_activation == "bounded":
        scale = np.asarray(spec.output_scale, dtype=t.dtype)
        g = g * scale * (1.0 - t * t)
    delta = g
    for i in range(len(views) - 1, -1, -1):
        w, _ = views[i]
        delta = delta @ w
        if i > 0:
            delta = delta * (activations[i] > 0)
    return delta[0] if squeeze else delta


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0


def make_adam(param_count: int) -> AdamState:
    return AdamState(
        m=np.zeros(param_count, dtype=np.float32),
        v=np.zeros(param_count, dtype=np.float32),
        t=0,
    )


def adam_step(
    params: ParameterSet,
    grad: np.ndarray,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One adaptive-moment update, in place. Rejects non-finite gradients."""
    if not np.all(np.isfinite(grad)):
        raise ValueError("non-finite gradient")
    g = np.asarray(grad, dtype=np.float32)
    state.t += 1
    state.m += (1.0 - beta1) * (g - state.m)
    state.v += (1.0 - beta2) * (g * g - state.v)
    m_hat = state.m / (1.0 - beta1**state.t)
    v_hat = state.v / (1.0 - beta2**state.t)
    params.values -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(np.float32)
    return params, state


def params_to_bytes(spec: MlpSpec, params: ParameterSet, step: int = 0) -> bytes:
    """Serialize one network to the documented block layout."""
    if params.values.shape[0] != spec.param_count:
        raise ValueError("parameter vector length does not match spec")
    parts = [
        _MAGIC,
        struct.pack("<IIII", _VERSION, spec.input_dim, spec.output_dim, len(spec.hidden)),
        struct.pack(f"<{len(spec.hidden)}I", *spec.hidden) if spec.hidden else b"",
        struct.pack("<B", ACTIVATIONS.index(spec.output_activation)),
        np.asarray(spec.output_scale, dtype="<f4").tobytes(),
        struct.pack("<Q", spec.param_count),
        params.values.astype("<f4", copy=False).tobytes(),
        struct.pack("<Q", int(step)),
    ]
    return b"".join(parts)


def params_from_bytes(buf: bytes, offset: int = 0):
    """Parse one network block; returns (spec, params, step, next_offset)."""
    if buf[offset : offset + 4] != _MAGIC:
        raise ValueError("bad checkpoint block magic")
    offset += 4
    version, input_dim, output_dim, hidden_count = struct.unpack_from("<IIII", buf, offset)
    offset += 16
    if version != _VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    hidden = struct.unpack_from(f"<{hidden_count}I", buf, offset) if hidden_count else ()
    offset += 4 * hidden_count
    (act_code,) = struct.unpack_from("<B", buf, offset)
    offset += 1
    scale = np.frombuffer(buf, dtype="<f4", count=output_dim, offset=offset)
    offset += 4 * output_dim
    (param_count,) = struct.unpack_from("<Q", buf, offset)
    offset += 8
    values = np.frombuffer(buf, dtype="<f4", count=param_count, offset=offset).copy()
    offset += 4 * param_count
    (step,) = struct.unpack_from("<Q", buf, offset)
    offset += 8
    spec = MlpSpec(
        input_dim=input_dim,
        output_dim=output_dim,
        hidden=tuple(int(h) for h in hidden),
        output_activation=ACTIVATIONS[act_code],
        output_scale=tuple(float(s) for s in scale),
    )
    if spec.param_count != param_count:
        raise ValueError("parameter count does not match spec")
    return spec, ParameterSet(values=values), int(step), offset
