"""
Op rules for the gradcore tape.

Each rule is a forward/backward pair over plain numpy arrays. forward() wraps a rule:
it lifts constants onto the tape, runs the rule under suppressed numpy warnings,
rejects non-finite output and records the node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..errors import NumericError, ShapeError, StateError
from .tape import Tape, Tensor

GROUPNORM_EPS = 1e-5

Arrays = list[np.ndarray]
ForwardFn = Callable[[Arrays, dict[str, Any]], tuple[np.ndarray, dict[str, Any]]]
BackwardFn = Callable[[np.ndarray, Arrays, np.ndarray, dict[str, Any]], list[np.ndarray | None]]


@dataclass(frozen=True)
class OpRule:
    arity: int | None  # None = variadic
    forward: ForwardFn
    backward: BackwardFn


RULES: dict[str, OpRule] = {}


def _rule(kind: str, arity: int | None, fwd: ForwardFn, bwd: BackwardFn) -> None:
    RULES[kind] = OpRule(arity, fwd, bwd)


# --- shape helpers ---


def _check_broadcast(kind: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim == 0 or b.ndim == 0:
        return
    if a.ndim != b.ndim:
        raise ShapeError(f"rank mismatch {a.shape} vs {b.shape}", op=kind)
    for da, db in zip(a.shape, b.shape):
        if da != db and da != 1 and db != 1:
            raise ShapeError(f"shapes {a.shape} and {b.shape} do not conform", op=kind)


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if shape == ():
        return np.asarray(g.sum())
    if g.shape == shape:
        return g
    axes = tuple(i for i, (gs, s) in enumerate(zip(g.shape, shape)) if s == 1 and gs != 1)
    return g.sum(axis=axes, keepdims=True)


def _norm_axes(axis: tuple[int, ...] | None, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    out = []
    for a in axis:
        if not -ndim <= a < ndim:
            raise ShapeError(f"axis {a} out of range for rank {ndim}")
        out.append(a % ndim)
    return tuple(sorted(set(out)))


def _expand_reduced(g: np.ndarray, shape: tuple[int, ...], axes: tuple[int, ...], keepdims: bool) -> np.ndarray:
    if not keepdims:
        for a in axes:
            g = np.expand_dims(g, a)
    return np.broadcast_to(g, shape)


def _need_nhwc(kind: str, x: np.ndarray) -> None:
    if x.ndim != 4:
        raise ShapeError(f"expected NHWC input, got shape {x.shape}", op=kind)


# --- elementwise binary ---


def _binary(kind: str, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> ForwardFn:
    def fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
        a, b = xs
        _check_broadcast(kind, a, b)
        return fn(a, b), {}

    return fwd


_rule("add", 2,
    _binary("add", np.add),
    lambda g, xs, out, s: [_unbroadcast(g, xs[0].shape), _unbroadcast(g, xs[1].shape)],
)

_rule("sub", 2,
    _binary("sub", np.subtract),
    lambda g, xs, out, s: [_unbroadcast(g, xs[0].shape), _unbroadcast(-g, xs[1].shape)],
)

_rule("mul", 2,
    _binary("mul", np.multiply),
    lambda g, xs, out, s: [_unbroadcast(g * xs[1], xs[0].shape), _unbroadcast(g * xs[0], xs[1].shape)],
)

_rule("div", 2,
    _binary("div", np.divide),
    lambda g, xs, out, s: [
        _unbroadcast(g / xs[1], xs[0].shape),
        _unbroadcast(-g * xs[0] / (xs[1] * xs[1]), xs[1].shape),
    ],
)


def _matmul_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    a, b = xs
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}", op="matmul")
    return a @ b, {}


_rule("matmul", 2, _matmul_fwd, lambda g, xs, out, s: [g @ xs[1].T, xs[0].T @ g])


# --- convolution and resampling (NHWC) ---


def _conv3x3_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    x, w = xs
    _need_nhwc("conv3x3", x)
    if w.ndim != 4 or w.shape[:2] != (3, 3) or w.shape[2] != x.shape[3]:
        raise ShapeError(f"kernel {w.shape} does not fit input {x.shape}", op="conv3x3")
    n, h, wd, cin = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    # (n, h, w, cin, di, dj) -> (n, h, w, di, dj, cin) so columns match the kernel layout
    cols = sliding_window_view(xp, (3, 3), axis=(1, 2)).transpose(0, 1, 2, 4, 5, 3).reshape(n * h * wd, 9 * cin)
    out = cols @ w.reshape(9 * cin, w.shape[3])
    return out.reshape(n, h, wd, w.shape[3]), {"cols": cols}


def _conv3x3_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    x, w = xs
    n, h, wd, cin = x.shape
    cout = w.shape[3]
    g2 = g.reshape(n * h * wd, cout)
    gw = (saved["cols"].T @ g2).reshape(w.shape)
    gcols = (g2 @ w.reshape(9 * cin, cout).T).reshape(n, h, wd, 3, 3, cin)
    gxp = np.zeros((n, h + 2, wd + 2, cin))
    for di in range(3):
        for dj in range(3):
            gxp[:, di:di + h, dj:dj + wd, :] += gcols[:, :, :, di, dj, :]
    return [gxp[:, 1:-1, 1:-1, :], gw]


_rule("conv3x3", 2, _conv3x3_fwd, _conv3x3_bwd)


def _avgpool2_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    (x,) = xs
    _need_nhwc("avgpool2", x)
    n, h, w, c = x.shape
    if h % 2 or w % 2:
        raise ShapeError(f"avgpool2 needs even spatial size, got {h}x{w}", op="avgpool2")
    return x.reshape(n, h // 2, 2, w // 2, 2, c).mean(axis=(2, 4)), {}


_rule("avgpool2", 1,
    _avgpool2_fwd,
    lambda g, xs, out, s: [np.repeat(np.repeat(g, 2, axis=1), 2, axis=2) / 4.0],
)


def _upsample_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    (x,) = xs
    _need_nhwc("upsample_nearest2", x)
    return np.repeat(np.repeat(x, 2, axis=1), 2, axis=2), {}


def _upsample_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    n, h, w, c = xs[0].shape
    return [g.reshape(n, h, 2, w, 2, c).sum(axis=(2, 4))]


_rule("upsample_nearest2", 1, _upsample_fwd, _upsample_bwd)


# --- elementwise unary ---


def _unary(fn: Callable[..., np.ndarray]) -> ForwardFn:
    return lambda xs, attrs: (fn(xs[0]), {})


def _silu_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    sig = expit(xs[0])
    return xs[0] * sig, {"sig": sig}


_rule("silu", 1,
    _silu_fwd,
    lambda g, xs, out, s: [g * (s["sig"] + xs[0] * s["sig"] * (1.0 - s["sig"]))],
)
_rule("sigmoid", 1, _unary(expit), lambda g, xs, out, s: [g * out * (1.0 - out)])
_rule("exp", 1, _unary(np.exp), lambda g, xs, out, s: [g * out])
_rule("log", 1, _unary(np.log), lambda g, xs, out, s: [g / xs[0]])
_rule("sqrt", 1, _unary(np.sqrt), lambda g, xs, out, s: [g / (2.0 * out)])
_rule("neg", 1, _unary(np.negative), lambda g, xs, out, s: [-g])
_rule("relu", 1, _unary(lambda x: np.maximum(x, 0.0)), lambda g, xs, out, s: [g * (xs[0] > 0.0)])
_rule("power", 1,
    lambda xs, attrs: (np.power(xs[0], attrs["exponent"]), {}),
    lambda g, xs, out, s: [g * s["exponent"] * np.power(xs[0], s["exponent"] - 1.0)],
)
_rule("clip", 1,
    lambda xs, attrs: (np.clip(xs[0], attrs["lo"], attrs["hi"]), {}),
    lambda g, xs, out, s: [g * ((xs[0] > s["lo"]) & (xs[0] < s["hi"]))],
)


# --- reductions and shape ops ---


def _sum_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    axes = _norm_axes(attrs.get("axis"), xs[0].ndim)
    return np.sum(xs[0], axis=axes, keepdims=attrs.get("keepdims", False)), {"axes": axes}


def _mean_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    axes = _norm_axes(attrs.get("axis"), xs[0].ndim)
    if xs[0].size == 0:
        raise ShapeError("mean of an empty tensor", op="mean")
    count = int(np.prod([xs[0].shape[a] for a in axes])) if axes else 1
    return np.mean(xs[0], axis=axes, keepdims=attrs.get("keepdims", False)), {"axes": axes, "count": count}


_rule("sum", 1,
    _sum_fwd,
    lambda g, xs, out, s: [_expand_reduced(g, xs[0].shape, s["axes"], s.get("keepdims", False))],
)
_rule("mean", 1,
    _mean_fwd,
    lambda g, xs, out, s: [_expand_reduced(g, xs[0].shape, s["axes"], s.get("keepdims", False)) / s["count"]],
)


def _reshape_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    try:
        return xs[0].reshape(attrs["shape"]), {}
    except ValueError as exc:
        raise ShapeError(str(exc), op="reshape") from exc


_rule("reshape", 1, _reshape_fwd, lambda g, xs, out, s: [g.reshape(xs[0].shape)])


def _transpose_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    axes = saved.get("axes")
    if axes is None:
        return [g.transpose()]
    return [g.transpose(np.argsort(axes))]


_rule("transpose", 1, lambda xs, attrs: (xs[0].transpose(attrs.get("axes")), {}), _transpose_bwd)


def _concat_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    axis = attrs.get("axis", -1)
    try:
        out = np.concatenate(xs, axis=axis)
    except ValueError as exc:
        raise ShapeError(str(exc), op="concat") from exc
    return out, {"sizes": [x.shape[axis] for x in xs]}


def _concat_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    cuts = np.cumsum(saved["sizes"])[:-1]
    return list(np.split(g, cuts, axis=saved.get("axis", -1)))


_rule("concat", None, _concat_fwd, _concat_bwd)


def _slice_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    try:
        return np.array(xs[0][attrs["index"]], dtype=np.float64), {}
    except IndexError as exc:
        raise ShapeError(str(exc), op="slice") from exc


def _slice_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    gx = np.zeros_like(xs[0])
    index = saved["index"]
    parts = index if isinstance(index, tuple) else (index,)
    if any(isinstance(p, (list, np.ndarray)) for p in parts):
        np.add.at(gx, index, g)
    else:
        gx[index] += g
    return [gx]


_rule("slice", 1, _slice_fwd, _slice_bwd)


# --- normalization and modulation ---


def _groupnorm_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    (x,) = xs
    _need_nhwc("groupnorm", x)
    groups = int(attrs["groups"])
    n, h, w, c = x.shape
    if groups < 1 or c % groups:
        raise ShapeError(f"{c} channels do not split into {groups} groups", op="groupnorm")
    xg = x.reshape(n, h, w, groups, c // groups)
    mu = xg.mean(axis=(1, 2, 4), keepdims=True)
    var = xg.var(axis=(1, 2, 4), keepdims=True)
    inv = 1.0 / np.sqrt(var + GROUPNORM_EPS)
    xhat = (xg - mu) * inv
    return xhat.reshape(x.shape), {"xhat": xhat, "inv": inv}


def _groupnorm_bwd(g: np.ndarray, xs: Arrays, out: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
    xhat, inv = saved["xhat"], saved["inv"]
    gg = g.reshape(xhat.shape)
    m = xhat.shape[1] * xhat.shape[2] * xhat.shape[4]
    g_sum = gg.sum(axis=(1, 2, 4), keepdims=True)
    gx_sum = (gg * xhat).sum(axis=(1, 2, 4), keepdims=True)
    gx = inv / m * (m * gg - g_sum - xhat * gx_sum)
    return [gx.reshape(xs[0].shape)]


_rule("groupnorm", 1, _groupnorm_fwd, _groupnorm_bwd)


def _affine_fwd(xs: Arrays, attrs: dict[str, Any]) -> tuple[np.ndarray, dict[str, Any]]:
    x, scale, shift = xs
    _need_nhwc("affine", x)
    want = (x.shape[0], x.shape[3])
    if scale.shape != want or shift.shape != want:
        raise ShapeError(f"scale {scale.shape} / shift {shift.shape} do not match {want}", op="affine")
    return x * scale[:, None, None, :] + shift[:, None, None, :], {}


_rule("affine", 3,
    _affine_fwd,
    lambda g, xs, out, s: [g * xs[1][:, None, None, :], (g * xs[0]).sum(axis=(1, 2)), g.sum(axis=(1, 2))],
)


# --- recording ---


def forward(kind: str, *inputs: Any, **attrs: Any) -> Tensor:
    """
    Apply an op. Inputs may be Tensors, arrays or Python numbers; non-Tensor inputs are
    lifted to constants on the tape of the first taped input. With no taped input the
    result is computed and returned detached.
    """
    rule = RULES.get(kind)
    if rule is None:
        raise StateError(f"unknown op kind {kind!r}")
    if rule.arity is not None and len(inputs) != rule.arity:
        raise ShapeError(f"expects {rule.arity} inputs, got {len(inputs)}", op=kind)
    if not inputs:
        raise ShapeError("needs at least one input", op=kind)

    tape: Tape | None = None
    for item in inputs:
        if isinstance(item, Tensor) and item.tape is not None:
            if tape is None:
                tape = item.tape
            elif item.tape is not tape:
                raise StateError("inputs belong to different tapes", op=kind)

    tensors = [_lift(item, tape) for item in inputs]
    arrays = [t.data for t in tensors]
    with np.errstate(all="ignore"):
        out, saved = rule.forward(arrays, attrs)
    out = np.asarray(out, dtype=np.float64)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite output", op=kind)

    if tape is None:
        return Tensor(out)
    saved = {**attrs, **saved}
    return tape.record(kind, tensors, out, saved)


def _lift(item: Any, tape: Tape | None) -> Tensor:
    if isinstance(item, Tensor):
        if tape is None or item.tape is tape:
            return item
        return tape.constant(item.data)
    if tape is None:
        return Tensor(item)
    return tape.constant(item)


# --- functional surface ---


def add(a: Any, b: Any) -> Tensor:
    return forward("add", a, b)


def sub(a: Any, b: Any) -> Tensor:
    return forward("sub", a, b)


def mul(a: Any, b: Any) -> Tensor:
    return forward("mul", a, b)


def div(a: Any, b: Any) -> Tensor:
    return forward("div", a, b)


def matmul(a: Any, b: Any) -> Tensor:
    return forward("matmul", a, b)


def conv3x3(x: Any, w: Any) -> Tensor:
    """Stride-1, zero-pad-1 convolution of NHWC x with a (3, 3, Cin, Cout) kernel."""
    return forward("conv3x3", x, w)


def avgpool2(x: Any) -> Tensor:
    return forward("avgpool2", x)


def upsample_nearest2(x: Any) -> Tensor:
    return forward("upsample_nearest2", x)


def silu(x: Any) -> Tensor:
    return forward("silu", x)


def sigmoid(x: Any) -> Tensor:
    return forward("sigmoid", x)


def exp(x: Any) -> Tensor:
    return forward("exp", x)


def log(x: Any) -> Tensor:
    return forward("log", x)


def sqrt(x: Any) -> Tensor:
    return forward("sqrt", x)


def power(x: Any, exponent: float) -> Tensor:
    return forward("power", x, exponent=float(exponent))


def neg(x: Any) -> Tensor:
    return forward("neg", x)


def relu(x: Any) -> Tensor:
    return forward("relu", x)


def clip(x: Any, lo: float, hi: float) -> Tensor:
    return forward("clip", x, lo=float(lo), hi=float(hi))


def sum(x: Any, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
    return forward("sum", x, axis=_axis_attr(axis), keepdims=keepdims)


def mean(x: Any, axis: int | Sequence[int] | None = None, keepdims: bool = False) -> Tensor:
    return forward("mean", x, axis=_axis_attr(axis), keepdims=keepdims)


def reshape(x: Any, shape: Sequence[int]) -> Tensor:
    return forward("reshape", x, shape=tuple(int(s) for s in shape))


def transpose(x: Any, axes: Sequence[int] | None = None) -> Tensor:
    return forward("transpose", x, axes=tuple(axes) if axes is not None else None)


def concat(xs: Sequence[Any], axis: int = -1) -> Tensor:
    return forward("concat", *xs, axis=axis)


def slice(x: Any, index: Any) -> Tensor:
    return forward("slice", x, index=index)


def groupnorm(x: Any, groups: int) -> Tensor:
    """Per-sample, per-group normalization of NHWC x (biased variance, eps inside the root)."""
    return forward("groupnorm", x, groups=int(groups))


def affine(x: Any, scale: Any, shift: Any) -> Tensor:
    """x * scale + shift with (N, C) scale/shift broadcast over the spatial axes."""
    return forward("affine", x, scale, shift)


def square(x: Any) -> Tensor:
    return forward("mul", x, x)


def _axis_attr(axis: int | Sequence[int] | None) -> tuple[int, ...] | None:
    if axis is None:
        return None
    if isinstance(axis, (int, np.integer)):
        return (int(axis),)
    return tuple(int(a) for a in axis)


def as_tensor(x: Any) -> Tensor:
    """Tensors pass through; anything else becomes a detached tensor."""
    return x if isinstance(x, Tensor) else Tensor(x)


def value(x: Any) -> np.ndarray:
    """Raw array behind a tensor or array-like."""
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)
