"""CNN + class-token transformer frame classifier, forward and backward in numpy."""

from mp3splice.model.attention import multi_head_self_attention, self_attention, split_heads
from mp3splice.model.config import ModelConfig
from mp3splice.model.network import (ModelParameters, assemble_input, backward, cnn_forward, cross_entropy,
                                     forward, init_params, loss_and_grads, parameter_shapes,
                                     positional_encoding, predict_labels)
from mp3splice.model.weights import load_weights, save_weights

__all__ = [
    "ModelConfig", "ModelParameters", "assemble_input", "backward", "cnn_forward", "cross_entropy",
    "forward", "init_params", "load_weights", "loss_and_grads", "multi_head_self_attention",
    "parameter_shapes", "positional_encoding", "predict_labels", "save_weights", "self_attention",
    "split_heads",
]
