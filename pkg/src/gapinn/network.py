"""Dense tanh networks over a flat float64 parameter vector.

Parameters are stored layer by layer, each layer as its weight matrix
(fan_in x fan_out, row-major) followed by its bias. The same numpy kernels
drive the plain forward pass, the Dual2 forward pass and the tape-recorded
pass, so their values agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .autodiff import Dual2Scalar, GradTape, Var, activation_forward, affine_forward, seed_directions

OUTPUT_ACTIVATIONS = ("linear", "sigmoid")
INIT_SCHEMES = ("glorot_uniform", "he_normal")


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    widths: tuple[int, ...]
    output_dim: int
    output_activation: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.input_dim < 1 or self.output_dim < 1 or any(w < 1 for w in self.widths):
            raise ValueError(f"all layer widths must be >= 1: {self}")
        if self.output_activation not in OUTPUT_ACTIVATIONS:
            raise ValueError(f"output_activation must be one of {OUTPUT_ACTIVATIONS}")

    @classmethod
    def from_layers(cls, input_dim: int, layers: int, nodes: int, output_dim: int,
                    output_activation: str = "linear") -> "MlpSpec":
        """Build from the "L hidden layers of N nodes" description."""
        return cls(input_dim, (nodes,) * layers, output_dim, output_activation)

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.widths, self.output_dim)

    @property
    def n_params(self) -> int:
        s = self.sizes
        return sum((a + 1) * b for a, b in zip(s[:-1], s[1:]))

    def layout(self) -> list[tuple[int, int, int]]:
        """(offset, fan_in, fan_out) of every layer; bias follows the weights."""
        out, off = [], 0
        s = self.sizes
        for a, b in zip(s[:-1], s[1:]):
            out.append((off, a, b))
            off += (a + 1) * b
        return out

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "widths": list(self.widths),
            "output_dim": self.output_dim,
            "output_activation": self.output_activation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MlpSpec":
        return cls(d["input_dim"], tuple(d["widths"]), d["output_dim"], d.get("output_activation", "linear"))


def unpack(spec: MlpSpec, theta: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.n_params,):
        raise ValueError(f"parameter vector has shape {theta.shape}, expected ({spec.n_params},)")
    layers = []
    for off, a, b in spec.layout():
        W = theta[off:off + a * b].reshape(a, b)
        layers.append((W, theta[off + a * b:off + a * b + b]))
    return layers


def xavier_init(spec: MlpSpec, seed: int, scheme: str = "glorot_uniform") -> np.ndarray:
    """Initial parameters: Glorot-uniform (default) or He-normal weights, zero biases."""
    if scheme not in INIT_SCHEMES:
        raise ValueError(f"unknown init scheme {scheme!r}; expected one of {INIT_SCHEMES}")
    rng = np.random.default_rng(seed)
    theta = np.zeros(spec.n_params)
    for off, a, b in spec.layout():
        if scheme == "glorot_uniform":
            bound = np.sqrt(6.0 / (a + b))
            w = rng.uniform(-bound, bound, size=(a, b))
        else:
            w = rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b))
        theta[off:off + a * b] = w.ravel()
    return theta


def _check_points(spec: MlpSpec, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ValueError(f"expected points with {spec.input_dim} coordinates, got shape {np.shape(x)}")
    return x, single


def _run(spec: MlpSpec, theta: np.ndarray, h: Dual2Scalar) -> Dual2Scalar:
    layers = unpack(spec, theta)
    last = len(layers) - 1
    for i, (W, b) in enumerate(layers):
        h = affine_forward(h, W, b)
        if i < last:
            h = activation_forward(h, "tanh")
        elif spec.output_activation == "sigmoid":
            h = activation_forward(h, "sigmoid")
    return h


def forward(spec: MlpSpec, theta: np.ndarray, x) -> np.ndarray:
    """Network output for one point (D,) or a batch (N, D)."""
    x, single = _check_points(spec, x)
    out = _run(spec, theta, seed_directions(x, ())).val
    return out[0] if single else out


def forward_jet(spec: MlpSpec, theta: np.ndarray, x, coords: Sequence[int]) -> Dual2Scalar:
    """Outputs at a batch (N, D) with one seeded direction per entry of ``coords``.

    Returns val (N, out) and d1/d2 of shape (len(coords), N, out).
    """
    x, _ = _check_points(spec, x)
    return _run(spec, theta, seed_directions(x, coords))


def forward_dual(spec: MlpSpec, theta: np.ndarray, x, j: int):
    """(u, du/dx_j, d2u/dx_j^2) per output component."""
    x, single = _check_points(spec, x)
    jet = _run(spec, theta, seed_directions(x, (j,)))
    u, d1, d2 = jet.val, jet.d1[0], jet.d2[0]
    if single:
        return u[0], d1[0], d2[0]
    return u, d1, d2


def tape_forward(tape: GradTape, spec: MlpSpec, theta: Var, h: Var) -> Var:
    """Record the network on ``tape``; ``h`` must carry a Dual2 payload."""
    last = len(spec.layout()) - 1
    for i, (off, a, b) in enumerate(spec.layout()):
        W = tape.slice_reshape(theta, off, off + a * b, (a, b))
        bias = tape.slice_reshape(theta, off + a * b, off + a * b + b, (b,))
        h = tape.affine(h, W, bias)
        if i < last:
            h = tape.dual_activation(h, "tanh")
        elif spec.output_activation == "sigmoid":
            h = tape.dual_activation(h, "sigmoid")
    return h


@dataclass(frozen=True)
class Network:
    """A spec bound to a parameter vector; callable on points."""

    spec: MlpSpec
    theta: np.ndarray = field(repr=False)

    def __call__(self, x) -> np.ndarray:
        return forward(self.spec, self.theta, x)

    def jet(self, x, coords: Sequence[int]) -> Dual2Scalar:
        return forward_jet(self.spec, self.theta, x, coords)


def params_to_bytes(theta: np.ndarray) -> bytes:
    return np.asarray(theta, dtype="<f8").tobytes()


def params_from_bytes(payload: bytes, spec: MlpSpec | None = None) -> np.ndarray:
    theta = np.frombuffer(payload, dtype="<f8").astype(float)
    if spec is not None and theta.size != spec.n_params:
        raise ValueError(f"payload holds {theta.size} values, spec needs {spec.n_params}")
    return theta
