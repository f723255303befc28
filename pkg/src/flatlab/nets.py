"""Small dense rectified networks and their calculus.

A network is described by an :class:`Architecture` (layer widths, bias
flag) plus a :class:`ParamVector` (one weight matrix per layer, optional
bias vectors). Inputs are row vectors, so layer ``k`` maps ``a`` to
``phi(a @ W_k + b_k)`` with ``W_k`` of shape ``(n_{k-1}, n_k)``; hidden
layers apply the rectifier ``phi(z) = max(z, 0)``, the output layer is
linear and one unit wide.

Parameter vectors flatten to a single float64 array in a fixed order:
weight matrices in layer order, each row-major, followed by bias vectors
in layer order. All derivative routines and serialized artifacts share
that layout via :class:`FlatIndex`.

The loss everywhere is mean squared error over a dataset. Its gradient is
exact backpropagation with the convention ``phi'(0) = 0``. Second
derivatives come from central finite differences of the analytic
gradient, which is only meaningful away from rectifier kinks; see
:func:`hessian` for the guard.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import KinkProximityError
from .rng import SeededRng
from .serialize import read_json, write_json

HESSIAN_STEP_COEFF = 1e-4
HESSIAN_SYMMETRY_RTOL = 1e-6
# Safety multiplier on the first-order bound of how far one finite
# difference step can move a preactivation.
KINK_GUARD_SAFETY = 4.0


@dataclass(frozen=True)
class Architecture:
    """Layer widths ``(n_0, ..., n_K)`` and whether layers carry biases.

    ``K >= 1`` layers of weights; the output layer is one unit wide.
    """

    layer_widths: tuple[int, ...]
    use_bias: bool = False

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        if len(widths) < 2:
            raise ValueError(f"need at least input and output widths, got {widths}")
        if any(w < 1 for w in widths):
            raise ValueError(f"layer widths must be positive, got {widths}")
        if widths[-1] != 1:
            raise ValueError(f"output width must be 1, got {widths[-1]}")

    @property
    def depth(self) -> int:
        """Number of weight layers K."""
        return len(self.layer_widths) - 1

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    def weight_shape(self, k: int) -> tuple[int, int]:
        """Shape of the weight matrix of layer ``k`` (0-based)."""
        return (self.layer_widths[k], self.layer_widths[k + 1])


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Per-layer weight matrices and optional per-layer bias vectors."""

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        ws = tuple(np.ascontiguousarray(w, dtype=float) for w in self.weights)
        object.__setattr__(self, "weights", ws)
        if self.biases is not None:
            bs = tuple(np.ascontiguousarray(b, dtype=float) for b in self.biases)
            object.__setattr__(self, "biases", bs)


def check_params(arch: Architecture, params: ParamVector) -> None:
    if len(params.weights) != arch.depth:
        raise ValueError(
            f"expected {arch.depth} weight matrices, got {len(params.weights)}"
        )
    for k, w in enumerate(params.weights):
        if w.shape != arch.weight_shape(k):
            raise ValueError(
                f"layer {k} weight shape {w.shape} != {arch.weight_shape(k)}"
            )
    if arch.use_bias:
        if params.biases is None or len(params.biases) != arch.depth:
            raise ValueError("architecture uses biases but params carry none")
        for k, b in enumerate(params.biases):
            if b.shape != (arch.layer_widths[k + 1],):
                raise ValueError(
                    f"layer {k} bias shape {b.shape} != ({arch.layer_widths[k + 1]},)"
                )
    elif params.biases is not None:
        raise ValueError("architecture is bias-free but params carry biases")


class FlatIndex:
    """Slices of the flat parameter vector: weights first, then biases."""

    def __init__(self, arch: Architecture):
        self.arch = arch
        offsets = []
        pos = 0
        for k in range(arch.depth):
            rows, cols = arch.weight_shape(k)
            offsets.append(slice(pos, pos + rows * cols))
            pos += rows * cols
        self._weight_slices = tuple(offsets)
        bias_slices = []
        if arch.use_bias:
            for k in range(arch.depth):
                width = arch.layer_widths[k + 1]
                bias_slices.append(slice(pos, pos + width))
                pos += width
        self._bias_slices = tuple(bias_slices)
        self.total = pos

    def weight_slice(self, k: int) -> slice:
        return self._weight_slices[k]

    def bias_slice(self, k: int) -> slice:
        if not self.arch.use_bias:
            raise ValueError("architecture has no biases")
        return self._bias_slices[k]


def vec(arch: Architecture, params: ParamVector) -> np.ndarray:
    """Flatten to one float64 vector in the canonical order."""
    check_params(arch, params)
    parts = [w.ravel() for w in params.weights]
    if arch.use_bias:
        parts.extend(params.biases)
    return np.concatenate(parts) if parts else np.zeros(0)


def unvec(arch: Architecture, flat: np.ndarray) -> ParamVector:
    """Inverse of :func:`vec`."""
    flat = np.asarray(flat, dtype=float)
    index = FlatIndex(arch)
    if flat.shape != (index.total,):
        raise ValueError(f"flat vector shape {flat.shape} != ({index.total},)")
    weights = tuple(
        flat[index.weight_slice(k)].reshape(arch.weight_shape(k))
        for k in range(arch.depth)
    )
    biases = None
    if arch.use_bias:
        biases = tuple(flat[index.bias_slice(k)].copy() for k in range(arch.depth))
    return ParamVector(weights, biases)


def uniform_params(arch: Architecture, rng: SeededRng,
                   low: float = -1.0, high: float = 1.0) -> ParamVector:
    """Independent uniform draws for every weight and bias."""
    gen = rng.generator()
    weights = tuple(gen.uniform(low, high, size=arch.weight_shape(k))
                    for k in range(arch.depth))
    biases = None
    if arch.use_bias:
        biases = tuple(gen.uniform(low, high, size=arch.layer_widths[k + 1])
                       for k in range(arch.depth))
    return ParamVector(weights, biases)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Fixed regression sample: inputs ``(m, n_0)``, scalar targets ``(m,)``."""

    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        x = np.ascontiguousarray(self.inputs, dtype=float)
        y = np.ascontiguousarray(self.targets, dtype=float)
        if x.ndim != 2:
            raise ValueError(f"inputs must be 2-d, got shape {x.shape}")
        if y.shape != (x.shape[0],):
            raise ValueError(f"targets shape {y.shape} != ({x.shape[0]},)")
        if x.shape[0] < 1:
            raise ValueError("dataset must contain at least one example")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "inputs", x)
        object.__setattr__(self, "targets", y)

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


def _forward_full(arch: Architecture, params: ParamVector,
                  inputs: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Activations per layer (input included) and hidden preactivations."""
    acts = [inputs]
    pre = []
    a = inputs
    for k in range(arch.depth):
        z = a @ params.weights[k]
        if arch.use_bias:
            z = z + params.biases[k]
        if k < arch.depth - 1:
            pre.append(z)
            a = np.maximum(z, 0.0)
        else:
            a = z
        acts.append(a)
    return acts, pre


def forward(arch: Architecture, params: ParamVector,
            inputs: np.ndarray) -> np.ndarray:
    """Network outputs, one scalar per input row."""
    check_params(arch, params)
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    if x.shape[1] != arch.input_width:
        raise ValueError(f"input width {x.shape[1]} != {arch.input_width}")
    acts, _ = _forward_full(arch, params, x)
    return acts[-1][:, 0]


def loss(arch: Architecture, params: ParamVector, data: Dataset) -> float:
    """Mean squared error over the dataset."""
    out = forward(arch, params, data.inputs)
    diff = out - data.targets
    return float(np.mean(diff * diff))


def loss_and_gradient(arch: Architecture, params: ParamVector,
                      data: Dataset) -> tuple[float, np.ndarray]:
    """Loss and its exact gradient as a flat vector.

    Backpropagation with ``phi'(z) = 1`` for ``z > 0`` and ``0`` otherwise;
    in particular the derivative at a kink is taken to be 0.
    """
    check_params(arch, params)
    acts, pre = _forward_full(arch, params, data.inputs)
    out = acts[-1][:, 0]
    diff = out - data.targets
    value = float(np.mean(diff * diff))

    m = data.size
    delta = (2.0 / m) * diff[:, None]
    grad_w: list[np.ndarray] = [None] * arch.depth
    grad_b: list[np.ndarray] = [None] * arch.depth
    for k in range(arch.depth - 1, -1, -1):
        grad_w[k] = acts[k].T @ delta
        if arch.use_bias:
            grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ params.weights[k].T) * (pre[k - 1] > 0.0)

    parts = [g.ravel() for g in grad_w]
    if arch.use_bias:
        parts.extend(grad_b)
    return value, np.concatenate(parts)


def gradient(arch: Architecture, params: ParamVector, data: Dataset) -> np.ndarray:
    return loss_and_gradient(arch, params, data)[1]


def input_gradient(arch: Architecture, params: ParamVector,
                   inputs: np.ndarray) -> np.ndarray:
    """Derivative of the scalar output with respect to each input, rowwise."""
    check_params(arch, params)
    x = np.atleast_2d(np.asarray(inputs, dtype=float))
    _, pre = _forward_full(arch, params, x)
    delta = np.ones((x.shape[0], 1))
    for k in range(arch.depth - 1, 0, -1):
        delta = (delta @ params.weights[k].T) * (pre[k - 1] > 0.0)
    return delta @ params.weights[0].T


def kink_argmin(arch: Architecture, params: ParamVector,
                data: Dataset) -> tuple[float, int, int, int]:
    """Smallest hidden-unit preactivation magnitude and where it occurs.

    Returns ``(distance, example, layer, unit)`` with ``layer`` 1-based to
    match how hidden layers are usually counted. Networks without hidden
    layers have no kinks; the distance is ``+inf`` and the location fields
    are ``-1``.
    """
    check_params(arch, params)
    _, pre = _forward_full(arch, params, data.inputs)
    best = (np.inf, -1, -1, -1)
    for k, z in enumerate(pre):
        mags = np.abs(z)
        i, u = np.unravel_index(np.argmin(mags), mags.shape)
        if mags[i, u] < best[0]:
            best = (float(mags[i, u]), int(i), k + 1, int(u))
    return best


def kink_distance(arch: Architecture, params: ParamVector, data: Dataset) -> float:
    return kink_argmin(arch, params, data)[0]


def _kink_band(arch: Architecture, params: ParamVector,
               acts: list[np.ndarray], step: float) -> float:
    """Half-width of the exclusion band around kinks for one FD step.

    A single parameter moved by ``step`` shifts any hidden preactivation by
    at most ``step`` times (largest activation feeding a layer) times
    (product of downstream operator norms). The product below bounds that
    for every hidden layer at once.
    """
    amax = max(1.0, max(float(np.max(np.abs(a))) for a in acts))
    wprod = 1.0
    for k in range(1, arch.depth - 1):
        row_sums = np.sum(np.abs(params.weights[k]), axis=1)
        wprod *= max(1.0, float(np.max(row_sums)))
    return KINK_GUARD_SAFETY * step * amax * wprod


def hessian_step(arch: Architecture, params: ParamVector) -> float:
    flat = vec(arch, params)
    scale = float(np.max(np.abs(flat))) if flat.size else 0.0
    return HESSIAN_STEP_COEFF * max(1.0, scale)


def hessian(arch: Architecture, params: ParamVector, data: Dataset,
            step: float | None = None) -> np.ndarray:
    """Loss Hessian by central differences of the analytic gradient.

    Refuses to run when any hidden preactivation sits within the kink
    exclusion band, since the loss is not twice differentiable there and
    the stencil would straddle the kink. The result is checked for
    symmetry and then symmetrized.
    """
    check_params(arch, params)
    if step is None:
        step = hessian_step(arch, params)
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")

    if arch.depth > 1:
        acts, _ = _forward_full(arch, params, data.inputs)
        band = _kink_band(arch, params, acts, step)
        dist, example, layer, unit = kink_argmin(arch, params, data)
        if dist <= band:
            raise KinkProximityError(dist, band, example, layer, unit)

    base = vec(arch, params)
    n = base.size
    columns = np.empty((n, n))
    for j in range(n):
        bumped = base.copy()
        bumped[j] = base[j] + step
        g_plus = gradient(arch, unvec(arch, bumped), data)
        bumped[j] = base[j] - step
        g_minus = gradient(arch, unvec(arch, bumped), data)
        columns[:, j] = (g_plus - g_minus) / (2.0 * step)

    defect = float(np.max(np.abs(columns - columns.T))) if n else 0.0
    scale = max(1.0, float(np.sqrt(np.sum(columns * columns))))
    if defect > HESSIAN_SYMMETRY_RTOL * scale:
        raise ValueError(
            f"second-derivative estimate asymmetric: defect {defect:.3e} "
            f"exceeds {HESSIAN_SYMMETRY_RTOL:.0e} x {scale:.3e}; "
            "the point is likely too close to a kink"
        )
    return (columns + columns.T) / 2.0


def checkpoint_payload(arch: Architecture, params: ParamVector) -> dict:
    check_params(arch, params)
    return {
        "layer_widths": list(arch.layer_widths),
        "use_bias": arch.use_bias,
        "weights": [w.ravel().tolist() for w in params.weights],
        "biases": ([b.tolist() for b in params.biases]
                   if arch.use_bias else None),
    }


def save_checkpoint(path: str, arch: Architecture, params: ParamVector) -> None:
    write_json(path, checkpoint_payload(arch, params))


def load_checkpoint(path: str) -> tuple[Architecture, ParamVector]:
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise ValueError(f"checkpoint {path}: expected a JSON object")
    try:
        widths = raw["layer_widths"]
        use_bias = raw["use_bias"]
        weights_raw = raw["weights"]
        biases_raw = raw["biases"]
    except KeyError as exc:
        raise ValueError(f"checkpoint {path}: missing field {exc}") from None
    arch = Architecture(tuple(int(w) for w in widths), bool(use_bias))
    if len(weights_raw) != arch.depth:
        raise ValueError(
            f"checkpoint {path}: {len(weights_raw)} weight layers, "
            f"expected {arch.depth}"
        )
    weights = []
    for k, flat in enumerate(weights_raw):
        shape = arch.weight_shape(k)
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (shape[0] * shape[1],):
            raise ValueError(
                f"checkpoint {path}: layer {k} has {flat.size} weights, "
                f"expected {shape[0] * shape[1]}"
            )
        weights.append(flat.reshape(shape))
    biases = None
    if arch.use_bias:
        if biases_raw is None or len(biases_raw) != arch.depth:
            raise ValueError(f"checkpoint {path}: bias layers missing")
        biases = tuple(np.asarray(b, dtype=float) for b in biases_raw)
    elif biases_raw is not None:
        raise ValueError(f"checkpoint {path}: biases present but use_bias is false")
    params = ParamVector(tuple(weights), biases)
    check_params(arch, params)
    flat_all = vec(arch, params)
    if not np.all(np.isfinite(flat_all)):
        raise ValueError(f"checkpoint {path}: non-finite parameter values")
    return arch, params
