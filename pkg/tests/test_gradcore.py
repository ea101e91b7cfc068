"""Tests for the gradcore tape: op results, backward rules and gradient checking."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair.errors import NumericError, ShapeError
from band_repair.gradcore import Tape, backward, grad_check, ops


def _weighted(op, weights: np.ndarray, *before, after=(), **attrs):
    """Scalar f(x) = sum(op(*before, x, *after) * weights)."""

    def f(x):
        return ops.sum(ops.forward(op, *before, x, *after, **attrs) * weights)

    return f


def test_add_elementwise() -> None:
    tape = Tape()
    out = ops.add(tape.leaf([1.0, 2.0]), tape.leaf([3.0, 4.0]))
    assert out.data.tolist() == [4.0, 6.0]


def test_matmul_identity() -> None:
    a = np.random.default_rng(0).normal(size=(3, 3))
    tape = Tape()
    out = ops.matmul(tape.constant(np.eye(3)), tape.leaf(a))
    assert np.array_equal(out.data, a)


def test_conv3x3_delta_kernel_is_identity() -> None:
    x = np.random.default_rng(1).normal(size=(2, 5, 6, 3))
    w = np.zeros((3, 3, 3, 3))
    for c in range(3):
        w[1, 1, c, c] = 1.0
    out = ops.conv3x3(Tape().leaf(x), w)
    assert np.allclose(out.data, x, rtol=0, atol=1e-15)


def test_square_gradient() -> None:
    tape = Tape()
    x = tape.leaf(3.0)
    grads = backward(tape, x * x)
    assert grads[x.id].item() == pytest.approx(6.0)


def test_silu_gradient_at_zero() -> None:
    tape = Tape()
    x = tape.leaf(np.zeros(5))
    grads = backward(tape, ops.sum(ops.silu(x)))
    assert np.allclose(grads[x.id].data, 0.5)


def test_unused_leaf_gets_zero_gradient() -> None:
    tape = Tape()
    x = tape.leaf([1.0, 2.0])
    unused = tape.leaf(np.ones((2, 3)))
    grads = backward(tape, ops.sum(x * x))
    assert np.array_equal(grads[unused.id].data, np.zeros((2, 3)))
    assert grads[x.id].data.tolist() == [2.0, 4.0]


def test_non_scalar_loss_rejected() -> None:
    tape = Tape()
    x = tape.leaf([1.0, 2.0])
    with pytest.raises(ShapeError, match="scalar"):
        backward(tape, x * 2.0)


def test_shape_mismatch_raises() -> None:
    tape = Tape()
    with pytest.raises(ShapeError):
        ops.add(tape.leaf(np.ones((2, 3))), tape.leaf(np.ones((3, 2))))
    with pytest.raises(ShapeError):
        ops.matmul(tape.leaf(np.ones((2, 3))), tape.leaf(np.ones((2, 3))))


def test_non_finite_output_raises() -> None:
    tape = Tape()
    with pytest.raises(NumericError, match="log"):
        ops.log(tape.leaf([-1.0, 1.0]))


def test_restricted_broadcasting() -> None:
    tape = Tape()
    a = tape.leaf(np.ones((3, 4)))
    b = tape.leaf(np.arange(4.0).reshape(1, 4))
    out = ops.sum(a * b)
    grads = backward(tape, out)
    assert grads[b.id].shape == (1, 4)
    assert np.allclose(grads[b.id].data, 3.0)
    with pytest.raises(ShapeError, match="rank"):
        ops.add(tape.leaf(np.ones((3, 4))), tape.leaf(np.ones(4)))


def test_grad_check_squared_norm() -> None:
    x = np.random.default_rng(2).normal(size=(4, 5))
    assert grad_check(lambda t: ops.sum(t * t), x) < 1e-7


def test_grad_check_constant_function() -> None:
    x = np.random.default_rng(3).normal(size=6)
    assert grad_check(lambda t: ops.sum(t * 0.0) + 3.0, x) == 0.0


def test_grad_check_rejects_non_finite() -> None:
    with pytest.raises(NumericError):
        grad_check(lambda t: ops.sum(ops.log(t)), np.array([1e-6, 1.0]), step=1e-5)


def _op_cases(rng: np.random.Generator):
    pos = lambda *s: rng.uniform(0.5, 2.0, size=s)  # noqa: E731
    nrm = lambda *s: rng.normal(size=s)  # noqa: E731
    return [
        ("add", nrm(3, 4), _weighted("add", nrm(3, 4), after=(nrm(1, 4),))),
        ("sub", nrm(3, 4), _weighted("sub", nrm(3, 4), nrm(3, 4))),
        ("mul", nrm(3, 4), _weighted("mul", nrm(3, 4), after=(nrm(3, 1),))),
        ("div-num", nrm(3, 4), _weighted("div", nrm(3, 4), after=(pos(3, 4),))),
        ("div-den", pos(3, 4), _weighted("div", nrm(3, 4), nrm(3, 4))),
        ("matmul-a", nrm(3, 4), _weighted("matmul", nrm(3, 2), after=(nrm(4, 2),))),
        ("matmul-b", nrm(4, 2), _weighted("matmul", nrm(3, 2), nrm(3, 4))),
        ("conv-x", nrm(1, 4, 4, 2), _weighted("conv3x3", nrm(1, 4, 4, 3), after=(nrm(3, 3, 2, 3),))),
        ("conv-w", nrm(3, 3, 2, 3), _weighted("conv3x3", nrm(1, 4, 4, 3), nrm(1, 4, 4, 2))),
        ("avgpool2", nrm(2, 4, 4, 3), _weighted("avgpool2", nrm(2, 2, 2, 3))),
        ("upsample", nrm(1, 2, 3, 2), _weighted("upsample_nearest2", nrm(1, 4, 6, 2))),
        ("silu", nrm(3, 5), _weighted("silu", nrm(3, 5))),
        ("sigmoid", nrm(3, 5), _weighted("sigmoid", nrm(3, 5))),
        ("exp", nrm(3, 5), _weighted("exp", nrm(3, 5))),
        ("log", pos(3, 5), _weighted("log", nrm(3, 5))),
        ("sqrt", pos(3, 5), _weighted("sqrt", nrm(3, 5))),
        ("power", pos(3, 5), _weighted("power", nrm(3, 5), exponent=2.5)),
        ("neg", nrm(3, 5), _weighted("neg", nrm(3, 5))),
        ("relu", nrm(3, 5), _weighted("relu", nrm(3, 5))),
        ("clip", nrm(3, 5), _weighted("clip", nrm(3, 5), lo=-0.5, hi=0.5)),
        ("sum-axis", nrm(3, 4, 2), _weighted("sum", nrm(3, 2), axis=(1,), keepdims=False)),
        ("mean-keep", nrm(3, 4, 2), _weighted("mean", nrm(1, 4, 1), axis=(0, 2), keepdims=True)),
        ("reshape", nrm(3, 4), _weighted("reshape", nrm(2, 6), shape=(2, 6))),
        ("transpose", nrm(2, 3, 4), _weighted("transpose", nrm(4, 2, 3), axes=(2, 0, 1))),
        ("concat", nrm(2, 3), _weighted("concat", nrm(2, 5), nrm(2, 2), axis=-1)),
        ("slice", nrm(4, 5), _weighted("slice", nrm(2, 5), index=(slice(1, 3), Ellipsis))),
        ("groupnorm", nrm(2, 3, 3, 4), _weighted("groupnorm", nrm(2, 3, 3, 4), groups=2)),
        ("affine-x", nrm(2, 3, 3, 4), _weighted("affine", nrm(2, 3, 3, 4), after=(nrm(2, 4), nrm(2, 4)))),
        ("affine-scale", nrm(2, 4), _weighted("affine", nrm(2, 3, 3, 4), nrm(2, 3, 3, 4), after=(nrm(2, 4),))),
        ("affine-shift", nrm(2, 4), _weighted("affine", nrm(2, 3, 3, 4), nrm(2, 3, 3, 4), nrm(2, 4))),
    ]


@pytest.mark.parametrize("seed", range(10))
def test_every_op_passes_grad_check(seed: int) -> None:
    for name, x, f in _op_cases(np.random.default_rng(100 + seed)):
        err = grad_check(f, x, floor=1e-4)
        assert err < 1e-5, f"{name}: {err}"


def test_composite_graph_grad_check() -> None:
    rng = np.random.default_rng(7)
    w1 = rng.normal(size=(4, 6)) * 0.5
    w2 = rng.normal(size=(6, 1)) * 0.5

    def f(x):
        h = ops.silu(ops.matmul(x, w1))
        y = ops.sigmoid(ops.matmul(h, w2))
        return ops.mean(ops.square(y - 0.3)) + ops.sum(ops.exp(x * 0.1)) * 0.01

    x = rng.normal(size=(5, 4))
    assert grad_check(f, x, floor=1e-6) < 1e-6


def test_backward_is_linear() -> None:
    rng = np.random.default_rng(11)
    x0 = rng.normal(size=(3, 4))

    def parts(tape):
        x = tape.leaf(x0)
        f = ops.sum(ops.silu(x))
        g = ops.mean(ops.square(x))
        return x, f, g

    t1 = Tape()
    x, f, _ = parts(t1)
    gf = backward(t1, f)[x.id].data
    t2 = Tape()
    x, _, g = parts(t2)
    gg = backward(t2, g)[x.id].data
    t3 = Tape()
    x, f, g = parts(t3)
    combined = backward(t3, f * 2.5 + g * -1.5)[x.id].data
    assert np.allclose(combined, 2.5 * gf - 1.5 * gg, rtol=0, atol=1e-12)


def test_identical_tapes_give_bit_identical_gradients() -> None:
    x0 = np.random.default_rng(5).normal(size=(1, 4, 4, 2))
    w0 = np.random.default_rng(6).normal(size=(3, 3, 2, 4))
    results = []
    for _ in range(2):
        tape = Tape()
        x = tape.leaf(x0)
        y = ops.groupnorm(ops.conv3x3(x, w0), groups=2)
        results.append(backward(tape, ops.mean(ops.silu(y)))[x.id].data)
    assert np.array_equal(results[0], results[1])


def test_odd_spatial_size_rejected_by_avgpool() -> None:
    with pytest.raises(ShapeError, match="even"):
        ops.avgpool2(Tape().leaf(np.ones((1, 3, 4, 1))))
