"""Abstract base class for differentiable deepfake detectors."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import ClassVar

import torch
from torch import nn

from afbench.audio.core import WORKING_RATE, fit_length
from afbench.errors import NumericError

__all__ = ["LABELS", "BaseDetector", "label_index"]

# Logit order: index 0 = real (bonafide), index 1 = fake (spoof).
LABELS = ("real", "fake")


def label_index(label: str | int) -> int:
    """Class index of a label name (``"real"``/``"fake"``) or pass-through index."""
    if isinstance(label, str):
        return LABELS.index(label)
    if label not in (0, 1):
        raise ValueError(f"label index must be 0 or 1, got {label}")
    return int(label)


class BaseDetector(nn.Module, ABC):
    """Binary real/fake classifier over fixed-length waveforms.

    Subclasses build ``self.layers`` (applied in order after :meth:`front_end`)
    and report their constructor arguments through :meth:`architecture`.
    Inputs are wrap-padded or truncated to ``input_len`` inside the graph, so
    input gradients always refer to the caller's samples.
    """

    kind: ClassVar[str]
    layers: nn.Sequential

    def __init__(self, input_len: int = WORKING_RATE, sample_rate: int = WORKING_RATE):
        super().__init__()
        self.input_len = int(input_len)
        self.sample_rate = int(sample_rate)

    @abstractmethod
    def front_end(self, x: torch.Tensor) -> torch.Tensor:
        """Map waveforms ``[batch, input_len]`` to the first layer's input."""

    @abstractmethod
    def architecture(self) -> dict:
        """Constructor keyword arguments that rebuild this architecture."""

    def layer_descriptors(self) -> list[dict]:
        """One descriptor per layer, for checkpoints and logs."""
        descriptors = []
        for layer in self.layers:
            entry = {"type": type(layer).__name__}
            for attr in ("in_channels", "out_channels", "kernel_size", "stride", "padding"):
                if hasattr(layer, attr):
                    value = getattr(layer, attr)
                    entry[attr] = list(value) if isinstance(value, tuple) else value
            if isinstance(layer, nn.Linear):
                entry.update(in_features=layer.in_features, out_features=layer.out_features)
            descriptors.append(entry)
        return descriptors

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Logits ``[batch, 2]`` for waveforms ``[batch, samples]`` (or one 1-D waveform)."""
        if x.dim() == 1:
            x = x.unsqueeze(0)
        h = self.front_end(fit_length(x, self.input_len))
        for index, layer in enumerate(self.layers):
            h = layer(h)
            if not torch.isfinite(h).all():
                raise NumericError("non-finite activation", layer=index)
        return h

    def reset_parameters(self, seed: int, zero_head: bool = False) -> None:
        """Uniform fan-in initialization from a generator seeded with ``seed``.

        :param zero_head: Zero the final dense layer (logits are then 0 for any input).
        """
        generator = torch.Generator().manual_seed(seed)
        weighted = [m for m in self.modules() if isinstance(m, (nn.Conv1d, nn.Conv2d, nn.Linear))]
        with torch.no_grad():
            for module in weighted:
                fan_in = module.weight[0].numel()
                bound = 1.0 / math.sqrt(fan_in)
                module.weight.uniform_(-bound, bound, generator=generator)
                module.bias.uniform_(-bound, bound, generator=generator)
            if zero_head:
                weighted[-1].weight.zero_()
                weighted[-1].bias.zero_()

    def flat_parameters(self) -> torch.Tensor:
        """All parameters as one detached vector, in ``named_parameters`` order."""
        return nn.utils.parameters_to_vector(self.parameters()).detach().clone()

    def load_flat_parameters(self, theta: torch.Tensor) -> None:
        with torch.no_grad():
            nn.utils.vector_to_parameters(theta.to(torch.float64), self.parameters())

    def parameter_slices(self) -> dict[str, slice]:
        """Named slices of the flat parameter vector."""
        slices, offset = {}, 0
        for name, param in self.named_parameters():
            slices[name] = slice(offset, offset + param.numel())
            offset += param.numel()
        return slices
