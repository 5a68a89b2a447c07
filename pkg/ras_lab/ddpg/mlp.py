"""Small fully connected networks with analytic gradients."""
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ras_lab.systems.benchmarks import Box
from ras_lab.utils.exceptions import ValidationError

OUTPUTS = ("identity", "bounded")


@dataclass
class ForwardCache:
    inputs: np.ndarray
    activations: List[np.ndarray]
    pre_activations: List[np.ndarray]


class MLP:
    """ReLU hidden layers with an identity or bounded output.

    A bounded output is ``center + half_width * tanh(z)``, which keeps actor
    outputs inside ``bounds`` for every input. Inputs are rescaled by fixed
    ``input_center`` and ``input_scale`` before the first layer.
    """

    def __init__(
        self,
        widths: Sequence[int],
        output: str = "identity",
        bounds: Optional[Box] = None,
        input_center: Optional[Sequence[float]] = None,
        input_scale: Optional[Sequence[float]] = None,
        seed: int = 0,
    ):
        widths = [int(width) for width in widths]
        if len(widths) < 2 or min(widths) < 1:
            raise ValidationError("A network needs an input and an output width.", {"widths": widths})
        if output not in OUTPUTS:
            raise ValidationError(f"Unknown output layer '{output}'.", {"choices": list(OUTPUTS)})
        if output == "bounded" and (bounds is None or bounds.ndim != widths[-1]):
            raise ValidationError("A bounded output needs one interval per output.", {"widths": widths})
        self.widths = widths
        self.output = output
        self.bounds = bounds
        self.input_center = np.zeros(widths[0]) if input_center is None else np.asarray(input_center, dtype=float)
        self.input_scale = np.ones(widths[0]) if input_scale is None else np.asarray(input_scale, dtype=float)

        rng = np.random.default_rng(seed)
        self.weights: List[np.ndarray] = []
        self.biases: List[np.ndarray] = []
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            if layer < len(widths) - 2:
                # He uniform for ReLU
                bound = np.sqrt(6.0 / fan_in)
            else:
                bound = 3e-3
            self.weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> List[np.ndarray]:
        """Weights then biases, layer by layer; the arrays are live views."""
        params = []
        for weight, bias in zip(self.weights, self.biases):
            params.extend([weight, bias])
        return params

    def n_parameters(self) -> int:
        return sum(param.size for param in self.parameters())

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(param)) for param in self.parameters())

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, ForwardCache]:
        x = np.asarray(x, dtype=float)
        activation = (x - self.input_center) / self.input_scale
        cache = ForwardCache(inputs=x, activations=[activation], pre_activations=[])
        for layer, (weight, bias) in enumerate(zip(self.weights, self.biases)):
            z = activation @ weight + bias
            cache.pre_activations.append(z)
            if layer < self.n_layers - 1:
                activation = np.maximum(z, 0.0)
                cache.activations.append(activation)
        return self._squash(z), cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def _squash(self, z: np.ndarray) -> np.ndarray:
        if self.output == "identity":
            return z
        center = (self.bounds.low + self.bounds.high) / 2.0
        return center + self.bounds.width / 2.0 * np.tanh(z)

    def backward(self, cache: ForwardCache, grad_output: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
        """Gradients of ``sum(grad_output * output)`` w.r.t. the parameters and the inputs.

        Parameter gradients come back in :meth:`parameters` order.
        """
        grad = np.asarray(grad_output, dtype=float)
        if self.output == "bounded":
            grad = grad * self.bounds.width / 2.0 * (1.0 - np.tanh(cache.pre_activations[-1]) ** 2)
        grads: List[np.ndarray] = [np.empty(0)] * (2 * self.n_layers)
        for layer in reversed(range(self.n_layers)):
            inputs = cache.activations[layer]
            grads[2 * layer] = inputs.reshape(-1, inputs.shape[-1]).T @ grad.reshape(-1, grad.shape[-1])
            grads[2 * layer + 1] = grad.reshape(-1, grad.shape[-1]).sum(axis=0)
            grad = grad @ self.weights[layer].T
            if layer > 0:
                grad = grad * (cache.pre_activations[layer - 1] > 0)
        return grads, grad / self.input_scale

    def input_gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of a scalar-output network w.r.t. its input, one row per sample."""
        output, cache = self.forward(x)
        return self.backward(cache, np.ones_like(output))[1]

    def copy(self) -> "MLP":
        clone = MLP.__new__(MLP)
        clone.widths = list(self.widths)
        clone.output = self.output
        clone.bounds = self.bounds
        clone.input_center = self.input_center.copy()
        clone.input_scale = self.input_scale.copy()
        clone.weights = [weight.copy() for weight in self.weights]
        clone.biases = [bias.copy() for bias in self.biases]
        return clone

    def soft_update(self, source: "MLP", tau: float):
        """Move every parameter a fraction ``tau`` toward ``source``."""
        for target, online in zip(self.parameters(), source.parameters()):
            target *= 1.0 - tau
            target += tau * online

    def as_document(self) -> Dict[str, Any]:
        return {
            "widths": list(self.widths),
            "output": self.output,
            "bounds": (
                None if self.bounds is None else {"lower": list(self.bounds.lower), "upper": list(self.bounds.upper)}
            ),
            "input_center": self.input_center.tolist(),
            "input_scale": self.input_scale.tolist(),
            "weights": [weight.ravel().tolist() for weight in self.weights],
            "biases": [bias.tolist() for bias in self.biases],
        }

    @classmethod
    def from_document(cls, document: Dict[str, Any]) -> "MLP":
        bounds = document.get("bounds")
        network = cls(
            document["widths"],
            output=document["output"],
            bounds=None if bounds is None else Box(lower=tuple(bounds["lower"]), upper=tuple(bounds["upper"])),
            input_center=document["input_center"],
            input_scale=document["input_scale"],
        )
        widths = network.widths
        for layer, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            network.weights[layer] = np.asarray(document["weights"][layer], dtype=float).reshape(fan_in, fan_out)
            network.biases[layer] = np.asarray(document["biases"][layer], dtype=float).reshape(fan_out)
        return network


class Adam:
    """Adam optimizer updating a list of arrays in place (minimization)."""

    def __init__(
        self, params: List[np.ndarray], rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
    ):
        self.params = params
        self.rate = rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.steps = 0
        self.first = [np.zeros_like(param) for param in params]
        self.second = [np.zeros_like(param) for param in params]

    def step(self, grads: List[np.ndarray]):
        self.steps += 1
        correction1 = 1.0 - self.beta1 ** self.steps
        correction2 = 1.0 - self.beta2 ** self.steps
        for param, grad, first, second in zip(self.params, grads, self.first, self.second):
            first *= self.beta1
            first += (1.0 - self.beta1) * grad
            second *= self.beta2
            second += (1.0 - self.beta2) * grad * grad
            param -= self.rate * (first / correction1) / (np.sqrt(second / correction2) + self.eps)


def _away_from_kinks(network: MLP, points: np.ndarray, margin: float, rng: np.random.Generator) -> np.ndarray:
    points = np.array(points, dtype=float)
    for _ in range(100):
        _, cache = network.forward(points)
        hidden = cache.pre_activations[:-1]
        if not hidden:
            return points
        nearest = np.min(np.concatenate([np.abs(z) for z in hidden], axis=-1), axis=-1)
        close = nearest < margin
        if not close.any():
            return points
        points[close] += rng.normal(scale=10 * margin, size=points[close].shape) * network.input_scale
    return points


def mlp_gradient_check(network: MLP, points: np.ndarray, step: float = 1e-5, seed: int = 0) -> float:
    """Largest relative error between analytic and central-difference parameter gradients.

    The objective is the sum of the outputs over the points. Points whose
    hidden pre-activations come within ``1e-3`` of a ReLU kink are jittered
    away from it first.
    """
    points = _away_from_kinks(network, np.atleast_2d(points), 1e-3, np.random.default_rng(seed))
    output, cache = network.forward(points)
    analytic, _ = network.backward(cache, np.ones_like(output))
    worst = 0.0
    for param, grad in zip(network.parameters(), analytic):
        numeric = np.empty_like(param)
        flat, numeric_flat = param.reshape(-1), numeric.reshape(-1)
        for index in range(flat.size):
            saved = flat[index]
            flat[index] = saved + step
            upper = network(points).sum()
            flat[index] = saved - step
            lower = network(points).sum()
            flat[index] = saved
            numeric_flat[index] = (upper - lower) / (2 * step)
        scale = max(np.linalg.norm(grad) + np.linalg.norm(numeric), 1e-12)
        worst = max(worst, float(np.linalg.norm(grad - numeric) / scale))
    return worst
