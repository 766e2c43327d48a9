"""Dense feed-forward networks with exact reverse-mode gradients.

A DenseNet is an immutable value: training produces new nets. Weights are
stored out x in, inputs are row batches (B x in), all float64.
"""

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..exceptions import ShapeError
from ..utils.seeding import rng_for

ACTIVATIONS = ("tanh", "sigmoid", "relu", "identity")


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        # Split by sign so exp never overflows.
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _derivative(name: str, z: np.ndarray, y: np.ndarray) -> np.ndarray:
    """d activation / d z, from the pre-activation z and output y."""
    if name == "tanh":
        return 1.0 - y * y
    if name == "sigmoid":
        return y * (1.0 - y)
    if name == "relu":
        return (z > 0).astype(np.float64)
    return np.ones_like(z)


@dataclass(frozen=True)
class Layer:
    """Affine map followed by an activation."""

    weight: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self) -> None:
        if self.activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation '{self.activation}'")
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ShapeError(f"bias {self.bias.shape} does not match weight {self.weight.shape}")

    @property
    def in_dim(self) -> int:
        return int(self.weight.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weight.shape[0])


@dataclass(frozen=True)
class DenseNet:
    """Ordered stack of dense layers plus the seed it was initialized with."""

    layers: tuple[Layer, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.layers:
            raise ShapeError("a network needs at least one layer")
        for a, b in zip(self.layers, self.layers[1:]):
            if a.out_dim != b.in_dim:
                raise ShapeError(f"layer widths do not chain: {a.out_dim} -> {b.in_dim}")

    @property
    def dims(self) -> list[int]:
        """Layer widths, input first."""
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]

    @property
    def activations(self) -> list[str]:
        return [layer.activation for layer in self.layers]

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def params(self) -> list[np.ndarray]:
        """Parameters in canonical order: W0, b0, W1, b1, ..."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend((layer.weight, layer.bias))
        return out

    def with_params(self, params: list[np.ndarray]) -> "DenseNet":
        """Same architecture with new parameters (canonical order)."""
        if len(params) != 2 * len(self.layers):
            raise ShapeError(f"expected {2 * len(self.layers)} parameter arrays, got {len(params)}")
        layers = []
        for i, layer in enumerate(self.layers):
            w, b = params[2 * i], params[2 * i + 1]
            if w.shape != layer.weight.shape or b.shape != layer.bias.shape:
                raise ShapeError(f"parameter shapes of layer {i} changed")
            layers.append(Layer(weight=w, bias=b, activation=layer.activation))
        return DenseNet(layers=tuple(layers), seed=self.seed)

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(p))) for p in self.params())


@dataclass(frozen=True)
class Gradients:
    """Parameter gradients (canonical order) and the gradient w.r.t. the input batch."""

    params: list[np.ndarray]
    inputs: np.ndarray


@dataclass
class ForwardCache:
    """Per-layer inputs, pre-activations and outputs of one forward pass."""

    inputs: list[np.ndarray] = field(default_factory=list)
    pre: list[np.ndarray] = field(default_factory=list)
    outputs: list[np.ndarray] = field(default_factory=list)


def init_net(layer_dims: list[int], activations: list[str], seed: int) -> DenseNet:
    """Uniform Glorot initialization, zero biases.

    Args:
        layer_dims: Widths, input first (e.g. [16, 16] is one 16 -> 16 layer)
        activations: One activation per layer
        seed: Initialization seed

    Returns:
        Fresh network, identical for identical arguments

    Raises:
        ShapeError: If dims and activations disagree or a width is not positive
    """
    if len(layer_dims) < 2:
        raise ShapeError("need an input width and at least one layer width")
    if len(activations) != len(layer_dims) - 1:
        raise ShapeError(
            f"{len(layer_dims) - 1} layers but {len(activations)} activations"
        )
    if any(d <= 0 for d in layer_dims):
        raise ShapeError("layer widths must be positive")
    rng = rng_for(seed, "init")
    layers = []
    for fan_in, fan_out, act in zip(layer_dims, layer_dims[1:], activations):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        layers.append(
            Layer(
                weight=rng.uniform(-limit, limit, size=(fan_out, fan_in)),
                bias=np.zeros(fan_out),
                activation=act,
            )
        )
    return DenseNet(layers=tuple(layers), seed=seed)


def _check_batch(net: DenseNet, batch: np.ndarray) -> np.ndarray:
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.input_dim:
        raise ShapeError(f"batch of shape {x.shape} does not fit input width {net.input_dim}")
    return x


def forward_cached(net: DenseNet, batch: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Forward pass that keeps what backward needs."""
    a = _check_batch(net, batch)
    cache = ForwardCache()
    for layer in net.layers:
        cache.inputs.append(a)
        z = a @ layer.weight.T + layer.bias
        a = _activate(layer.activation, z)
        cache.pre.append(z)
        cache.outputs.append(a)
    return a, cache


def forward(net: DenseNet, batch: np.ndarray) -> np.ndarray:
    """Apply the network to a B x d_in batch, rows independently."""
    out, _ = forward_cached(net, batch)
    return out


def backward(
    net: DenseNet,
    batch: np.ndarray,
    upstream_gradient: np.ndarray,
    cache: ForwardCache | None = None,
) -> Gradients:
    """Reverse-mode gradients of sum(upstream * forward(net, batch)).

    Args:
        net: Network
        batch: B x d_in input batch
        upstream_gradient: B x d_out gradient of the loss w.r.t. the output
        cache: Cache of a forward pass on the same batch, recomputed if None

    Returns:
        Parameter gradients and input gradient

    Raises:
        ShapeError: If the upstream gradient does not match the output
    """
    if cache is None:
        out, cache = forward_cached(net, batch)
    else:
        out = cache.outputs[-1]
    g = np.asarray(upstream_gradient, dtype=np.float64)
    if g.shape != out.shape:
        raise ShapeError(f"upstream gradient {g.shape} does not match output {out.shape}")
    grads: list[np.ndarray] = [np.empty(0)] * (2 * len(net.layers))
    for i in range(len(net.layers) - 1, -1, -1):
        layer = net.layers[i]
        dz = g * _derivative(layer.activation, cache.pre[i], cache.outputs[i])
        grads[2 * i] = dz.T @ cache.inputs[i]
        grads[2 * i + 1] = dz.sum(axis=0)
        g = dz @ layer.weight
    return Gradients(params=grads, inputs=g)


def net_to_dict(net: DenseNet) -> dict[str, Any]:
    """Checkpoint body: dims, activations, flat parameter arrays, seed."""
    return {
        "dims": net.dims,
        "activations": net.activations,
        "params": [p.ravel().tolist() for p in net.params()],
        "seed": net.seed,
    }


def net_from_dict(data: dict[str, Any]) -> DenseNet:
    """Rebuild a network from net_to_dict output."""
    dims, acts, flat = data["dims"], data["activations"], data["params"]
    if len(flat) != 2 * len(acts) or len(dims) != len(acts) + 1:
        raise ShapeError("checkpoint dims, activations and parameters disagree")
    layers = []
    for i, act in enumerate(acts):
        w = np.asarray(flat[2 * i], dtype=np.float64)
        b = np.asarray(flat[2 * i + 1], dtype=np.float64)
        if w.size != dims[i + 1] * dims[i] or b.size != dims[i + 1]:
            raise ShapeError(f"checkpoint parameters of layer {i} have the wrong size")
        layers.append(Layer(weight=w.reshape(dims[i + 1], dims[i]), bias=b, activation=act))
    return DenseNet(layers=tuple(layers), seed=int(data.get("seed", 0)))
