"""Minimal dense-network engine: layers, losses, gradients, Adam."""

from .losses import bce, mse
from .network import (
    ACTIVATIONS,
    DenseNet,
    ForwardCache,
    Gradients,
    Layer,
    backward,
    forward,
    forward_cached,
    init_net,
    net_from_dict,
    net_to_dict,
)
from .optim import OptimState, adam_step, init_state, state_from_dict, state_to_dict

__all__ = [
    "ACTIVATIONS",
    "DenseNet",
    "ForwardCache",
    "Gradients",
    "Layer",
    "OptimState",
    "adam_step",
    "backward",
    "bce",
    "forward",
    "forward_cached",
    "init_net",
    "init_state",
    "mse",
    "net_from_dict",
    "net_to_dict",
    "state_from_dict",
    "state_to_dict",
]
