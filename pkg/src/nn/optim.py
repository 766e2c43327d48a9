"""Adam optimizer over DenseNet parameters."""

from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from ..exceptions import ShapeError, TrainingDivergenceError
from .network import DenseNet


@dataclass(frozen=True)
class OptimState:
    """Adam moment accumulators mirroring a network's parameters."""

    m: tuple[np.ndarray, ...]
    v: tuple[np.ndarray, ...]
    step: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_state(net: DenseNet, learning_rate: float = 1e-3, **kwargs: float) -> OptimState:
    """Zero moments shaped like the network's parameters."""
    zeros = tuple(np.zeros_like(p) for p in net.params())
    return OptimState(m=zeros, v=tuple(np.zeros_like(p) for p in zeros), learning_rate=learning_rate, **kwargs)


def adam_step(net: DenseNet, grads: list[np.ndarray], state: OptimState) -> tuple[DenseNet, OptimState]:
    """One bias-corrected Adam update.

    Args:
        net: Current network
        grads: Parameter gradients in canonical order
        state: Optimizer state for this network

    Returns:
        Updated network and state (step incremented)

    Raises:
        ShapeError: If gradients do not mirror the parameters
        TrainingDivergenceError: If any gradient entry is not finite
    """
    params = net.params()
    if len(grads) != len(params) or any(g.shape != p.shape for g, p in zip(grads, params)):
        raise ShapeError("gradients do not mirror the network parameters")
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise TrainingDivergenceError("non-finite gradient")

    t = state.step + 1
    b1, b2 = state.beta1, state.beta2
    m = tuple(b1 * mi + (1.0 - b1) * g for mi, g in zip(state.m, grads))
    v = tuple(b2 * vi + (1.0 - b2) * g * g for vi, g in zip(state.v, grads))
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    new_params = [
        p - state.learning_rate * (mi / c1) / (np.sqrt(vi / c2) + state.eps)
        for p, mi, vi in zip(params, m, v)
    ]
    return net.with_params(new_params), replace(state, m=m, v=v, step=t)


def state_to_dict(state: OptimState) -> dict[str, Any]:
    """Checkpoint body of an optimizer state."""
    return {
        "m": [a.ravel().tolist() for a in state.m],
        "v": [a.ravel().tolist() for a in state.v],
        "shapes": [list(a.shape) for a in state.m],
        "step": state.step,
        "learning_rate": state.learning_rate,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "eps": state.eps,
    }


def state_from_dict(data: dict[str, Any]) -> OptimState:
    """Rebuild an optimizer state from state_to_dict output."""
    shapes = [tuple(s) for s in data["shapes"]]
    return OptimState(
        m=tuple(np.asarray(a, dtype=np.float64).reshape(s) for a, s in zip(data["m"], shapes)),
        v=tuple(np.asarray(a, dtype=np.float64).reshape(s) for a, s in zip(data["v"], shapes)),
        step=int(data["step"]),
        learning_rate=float(data["learning_rate"]),
        beta1=float(data["beta1"]),
        beta2=float(data["beta2"]),
        eps=float(data["eps"]),
    )
