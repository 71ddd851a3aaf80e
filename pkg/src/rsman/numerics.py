"""Hand-written differentiable kernels and a finite-difference gradient checker.

Everything runs in float64 numpy. Each forward op has a matching
``*_backward`` that returns exact analytic gradients; the training code
accumulates them into :class:`Param` grads. There is no autodiff graph:
callers keep whatever forward values the backward pass needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Param",
    "affine",
    "affine_backward",
    "softmax",
    "softmax_backward",
    "sigmoid",
    "sigmoid_backward",
    "logsumexp",
    "logsumexp_backward",
    "grad_check",
    "GradCheckReport",
]


@dataclass
class Param:
    """A trainable tensor paired with its gradient accumulator."""

    value: np.ndarray
    grad: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.value = np.asarray(self.value, dtype=np.float64)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        else:
            self.grad = np.asarray(self.grad, dtype=np.float64)
        if self.grad.shape != self.value.shape:
            raise ValueError(
                f"grad shape {self.grad.shape} != value shape {self.value.shape}"
            )

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad.fill(0.0)


def affine(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W @ x + b."""
    x, W, b = np.asarray(x), np.asarray(W), np.asarray(b)
    if W.ndim != 2 or x.ndim != 1 or b.ndim != 1:
        raise ValueError(f"affine expects (vec, mat, vec), got {x.ndim}/{W.ndim}/{b.ndim}-d")
    if W.shape[1] != x.shape[0] or W.shape[0] != b.shape[0]:
        raise ValueError(f"affine shape mismatch: W {W.shape}, x {x.shape}, b {b.shape}")
    return W @ x + b


def affine_backward(upstream: np.ndarray, x: np.ndarray, W: np.ndarray):
    """Gradients of ``affine`` wrt (x, W, b) for a given upstream vector."""
    upstream = np.asarray(upstream)
    if upstream.shape != (W.shape[0],):
        raise ValueError(f"upstream shape {upstream.shape} != output shape ({W.shape[0]},)")
    dx = W.T @ upstream
    dW = np.outer(upstream, x)
    db = upstream.copy()
    return dx, dW, db


def softmax(s: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over a 1-d vector."""
    s = np.asarray(s, dtype=np.float64)
    if s.size == 0:
        raise ValueError("softmax of an empty vector")
    if not np.all(np.isfinite(s)):
        raise ValueError("softmax input must be finite")
    e = np.exp(s - s.max())
    return e / e.sum()


def softmax_backward(upstream: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Backward of softmax given its output ``out``."""
    upstream = np.asarray(upstream)
    return out * (upstream - np.dot(out, upstream))


def sigmoid(z):
    """Stable elementwise logistic; works on scalars and arrays."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def sigmoid_backward(upstream, out):
    """Backward of sigmoid given its output."""
    return upstream * out * (1.0 - out)


def logsumexp(x: np.ndarray) -> float:
    """max(x) + log sum exp(x - max(x)), overflow-safe."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("logsumexp of an empty vector")
    if not np.all(np.isfinite(x)):
        raise ValueError("logsumexp input must be finite")
    m = x.max()
    return float(m + np.log(np.exp(x - m).sum()))


def logsumexp_backward(upstream: float, x: np.ndarray, out: float) -> np.ndarray:
    """Backward of logsumexp: upstream * softmax(x)."""
    return upstream * np.exp(np.asarray(x, dtype=np.float64) - out)


@dataclass
class GradCheckReport:
    """Result of comparing analytic gradients against central differences."""

    max_error: float
    worst_param: str
    worst_index: tuple
    analytic: float
    numeric: float
    entries: int
    tolerance: float
    per_param: dict

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}: max error {self.max_error:.3e} (tol {self.tolerance:.1e}) "
            f"at {self.worst_param}{list(self.worst_index)} over {self.entries} entries "
            f"(analytic {self.analytic:.6e}, central-diff {self.numeric:.6e})"
        )


def _fd_error(analytic: float, numeric: float) -> float:
    # relative error, falling back to absolute when both are ~0
    scale = max(abs(analytic), abs(numeric))
    if scale < 1e-8:
        return abs(analytic - numeric)
    return abs(analytic - numeric) / scale


def grad_check(f, params: dict, step: float = 1e-5, tolerance: float = 1e-4) -> GradCheckReport:
    """Check analytic gradients of a scalar loss against central differences.

    ``f()`` must recompute the loss from the current ``params`` values and
    leave the analytic gradients in each ``Param.grad`` (zeroing first).
    Every parameter entry is then perturbed by ``+-step`` and the resulting
    difference quotient compared against the recorded analytic gradient.
    Parameter values and grads are restored before returning.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    loss0 = float(f())
    if not np.isfinite(loss0):
        raise ValueError(f"loss is not finite: {loss0}")
    analytic = {name: p.grad.copy() for name, p in params.items()}

    worst = (-1.0, "", (), 0.0, 0.0)
    per_param = {}
    entries = 0
    for name, p in params.items():
        flat = p.value.reshape(-1)
        worst_here = 0.0
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            lp = float(f())
            flat[i] = orig - step
            lm = float(f())
            flat[i] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise ValueError(f"loss not finite while perturbing {name}[{i}]")
            numeric = (lp - lm) / (2.0 * step)
            a = analytic[name].reshape(-1)[i]
            err = _fd_error(a, numeric)
            entries += 1
            worst_here = max(worst_here, err)
            if err > worst[0]:
                idx = np.unravel_index(i, p.value.shape) if p.value.ndim else ()
                worst = (err, name, tuple(int(k) for k in idx), a, numeric)
        per_param[name] = worst_here
    for name, p in params.items():
        np.copyto(p.grad, analytic[name])
    return GradCheckReport(
        max_error=worst[0],
        worst_param=worst[1],
        worst_index=worst[2],
        analytic=worst[3],
        numeric=worst[4],
        entries=entries,
        tolerance=tolerance,
        per_param=per_param,
    )
