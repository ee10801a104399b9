import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from stagsrl.autodiff import backward, constant, grad_check, parameter
from stagsrl.autodiff import ops
from stagsrl.errors import ShapeError

STRICT_TOL = 1e-6


def param(rng, *shape, name="x"):
    return parameter(rng.normal(size=shape), name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def check(f, tolerance=1e-4, **params):
    report = grad_check(f, params, tolerance=tolerance)
    assert report.passed, report.failures()
    return report


# ---------- per-op gradient checks (float64) ----------

def test_elementwise_ops(rng):
    a, b = param(rng, 3, 4, name="a"), param(rng, 3, 4, name="b")
    check(lambda: ops.sum_(ops.mul(ops.add(a, b), ops.sub(a, b))), a=a, b=b)
    check(lambda: ops.sum_(ops.scale(ops.one_minus(a), 2.5)), a=a)


def test_bias_broadcast_add(rng):
    x, b = param(rng, 2, 3, 4, name="x"), param(rng, 4, name="b")
    check(lambda: ops.sum_(ops.tanh(ops.add(x, b))), x=x, b=b)


def test_nonlinearities(rng):
    a = param(rng, 5, 3)
    check(lambda: ops.sum_(ops.sigmoid(a)), a=a)
    check(lambda: ops.sum_(ops.tanh(a)), a=a)
    # keep relu away from its kink
    a.value[np.abs(a.value) < 0.1] += 0.5
    check(lambda: ops.sum_(ops.relu(a)), a=a)


def test_matmul_batched(rng):
    a, w = param(rng, 2, 3, 4, name="a"), param(rng, 4, 5, name="w")
    check(lambda: ops.sum_(ops.tanh(ops.matmul(a, w))), a=a, w=w)


def test_concat_slice_reshape(rng):
    a, b = param(rng, 2, 3, name="a"), param(rng, 2, 4, name="b")

    def f():
        joined = ops.concat([a, b], axis=-1)
        part = ops.slice_(joined, (slice(None), slice(1, 5)))
        return ops.sum_(ops.tanh(ops.reshape(part, (4, 2))))

    check(f, a=a, b=b)


def test_embedding_lookup_repeated_rows(rng):
    table = param(rng, 5, 3)
    idx = np.array([[0, 2], [2, 4]])
    check(lambda: ops.sum_(ops.tanh(ops.embedding_lookup(table, idx))), table=table)


def test_max_over_axis(rng):
    a = param(rng, 3, 4, 2)
    check(lambda: ops.sum_(ops.max_over_axis(a, axis=1)), a=a)


def test_softmax_and_mean(rng):
    a = param(rng, 3, 5)
    weights = constant(rng.normal(size=(3, 5)))
    check(lambda: ops.mean(ops.mul(ops.softmax(a, axis=-1), weights)), a=a)


def test_cross_entropy_weighted(rng):
    logits = param(rng, 4, 6)
    targets = np.array([0, 5, 2, 2])
    weights = np.array([1.0, 0.0, 1.0, 1.0])
    check(lambda: ops.cross_entropy(logits, targets, weights), tolerance=STRICT_TOL, logits=logits)


def test_cross_entropy_single_row(rng):
    logits = param(rng, 6)
    check(lambda: ops.cross_entropy(logits, 3), tolerance=STRICT_TOL, logits=logits)


def test_softmax_cross_entropy_layer(rng):
    x = constant(rng.normal(size=(5, 4)))
    w, b = param(rng, 4, 3, name="w"), param(rng, 3, name="b")
    targets = np.array([0, 2, 1, 1, 0])
    check(lambda: ops.cross_entropy(ops.add(ops.matmul(x, w), b), targets), tolerance=STRICT_TOL, w=w, b=b)


def test_conv1d(rng):
    x, filters = param(rng, 2, 6, 3, name="x"), param(rng, 9, 4, name="filters")
    check(lambda: ops.sum_(ops.tanh(ops.conv1d(x, filters, 3))), x=x, filters=filters)


def test_seeded_dropout_passes_grad_check(rng):
    a = param(rng, 4, 4)

    def f():
        return ops.sum_(ops.tanh(ops.dropout(a, 0.5, np.random.default_rng(3))))

    check(f, a=a)


# ---------- forward semantics ----------

def test_sigmoid_at_zero():
    a = parameter(np.zeros(1))
    out = ops.sigmoid(a)
    assert out.value[0] == 0.5
    backward(ops.sum_(out))
    assert a.grad[0] == pytest.approx(0.25)


def test_softmax_is_stable_for_large_logits():
    out = ops.softmax(constant(np.array([[1000.0, 1000.0, -1000.0]])))
    np.testing.assert_allclose(out.value, [[0.5, 0.5, 0.0]])


def test_cross_entropy_value():
    logits = np.log(np.array([[0.25, 0.75]]))
    loss = ops.cross_entropy(constant(logits), np.array([1]))
    assert loss.item() == pytest.approx(-np.log(0.75))


def test_cross_entropy_all_padding_is_zero():
    loss = ops.cross_entropy(constant(np.ones((2, 3))), np.array([0, 1]), np.zeros(2))
    assert loss.item() == 0.0


def test_max_over_axis_ties_go_to_first():
    a = parameter(np.array([[1.0, 1.0]]))
    backward(ops.sum_(ops.max_over_axis(a, axis=1)))
    np.testing.assert_array_equal(a.grad, [[1.0, 0.0]])


def test_dropout_is_identity_at_inference(rng):
    a = param(rng, 3, 3)
    assert ops.dropout(a, 0.5, rng, train=False) is a
    with pytest.raises(ValueError):
        ops.dropout(a, 1.0, rng)


@given(hnp.arrays(np.float64, (3, 4), elements=st.floats(-50, 50)))
def test_softmax_rows_sum_to_one(values):
    out = ops.softmax(constant(values), axis=-1).value
    np.testing.assert_allclose(out.sum(axis=-1), 1.0, atol=1e-9)


# ---------- graph mechanics ----------

def test_leaf_gradients_accumulate_until_cleared():
    a = parameter(np.array([2.0]))
    backward(ops.sum_(ops.mul(a, a)))
    backward(ops.sum_(ops.mul(a, a)))
    np.testing.assert_allclose(a.grad, [8.0])
    a.zero_grad()
    backward(ops.sum_(ops.scale(a, 3.0)))
    np.testing.assert_allclose(a.grad, [3.0])


def test_shared_subexpression_gets_both_paths():
    a = parameter(np.array([1.5]))
    b = ops.tanh(a)
    backward(ops.sum_(ops.add(b, b)))
    np.testing.assert_allclose(a.grad, 2.0 * (1.0 - np.tanh(1.5) ** 2))


def test_constants_record_no_graph():
    out = ops.add(constant(np.ones(2)), constant(np.ones(2)))
    assert not out.requires_grad
    assert out.parents == ()


def test_non_scalar_loss_is_rejected(rng):
    with pytest.raises(ShapeError):
        backward(param(rng, 2))


def test_long_chain_does_not_recurse(rng):
    a = parameter(np.array([0.5]))
    x = a
    for _ in range(5000):
        x = ops.scale(x, 1.0)
    backward(ops.sum_(x))
    np.testing.assert_allclose(a.grad, [1.0])


@pytest.mark.parametrize("op, args", [
    (ops.add, (np.ones((2, 3)), np.ones((3, 2)))),
    (ops.mul, (np.ones(2), np.ones(3))),
    (ops.matmul, (np.ones((2, 3)), np.ones((2, 3)))),
    (ops.embedding_lookup, (np.ones((3, 2)), np.array([3]))),
])
def test_shape_errors_name_the_op(op, args):
    with pytest.raises(ShapeError):
        op(*[constant(a) if a.dtype.kind == "f" else a for a in args])


def test_grad_check_reports_wrong_gradient(rng):
    from stagsrl.autodiff.graph import make_node

    a = param(rng, 3)

    def broken():
        doubled = make_node(a.value * 2.0, "broken", (a,), lambda g: (g,))
        return ops.sum_(doubled)

    report = grad_check(broken, {"a": a})
    assert not report.passed
    assert report.worst == "a"
