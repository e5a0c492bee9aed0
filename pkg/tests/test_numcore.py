import numpy as np
import pytest

from numcore import ops
from numcore.checkpoint import load_checkpoint, save_checkpoint
from numcore.exceptions import GraphDetached, ShapeMismatch
from numcore.params import Adam, ParamStore, adam_step
from numcore.tensor import Tensor, backward, no_grad


def numeric_grad(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + eps
        up = f()
        x[index] = original - eps
        down = f()
        x[index] = original
        grad[index] = (up - down) / (2 * eps)
    return grad


def check_gradient(build, *shapes, seed: int = 0, atol: float = 1e-6):
    rng = np.random.default_rng(seed)
    leaves = [Tensor(rng.normal(size=shape), requires_grad=True) for shape in shapes]
    backward(build(*leaves))
    for leaf in leaves:
        expected = numeric_grad(lambda: build(*leaves).item(), leaf.value)
        np.testing.assert_allclose(leaf.grad, expected, atol=atol)


def test_elementwise_gradients():
    check_gradient(lambda a, b: ops.reduce_sum(ops.mul(ops.add(a, b), ops.sub(a, b))), (3, 2), (3, 2))
    check_gradient(lambda a: ops.reduce_sum(ops.log(ops.add(ops.exp(a), 1.0))), (4,))


def test_broadcast_gradients_sum_back_onto_the_operand():
    check_gradient(lambda a, b: ops.reduce_sum(ops.mul(ops.add(a, b), a)), (3, 4), (4,))


def test_matmul_and_relu_gradients():
    check_gradient(lambda x, w: ops.reduce_sum(ops.relu(ops.matmul(x, w))), (5, 3), (3, 4), seed=1)


def test_shape_op_gradients():
    def build(a, b):
        joined = ops.concat([ops.transpose(a), b], axis=0)          # (3+2, 4)
        picked = ops.gather_rows(joined, [0, 4, 4, 2])
        sliced = ops.slice_axis(ops.reshape(picked, (2, 8)), 1, 6, axis=1)
        return ops.reduce_sum(ops.mul(sliced, sliced))
    check_gradient(build, (4, 3), (2, 4))


def test_maximum_gradient_follows_the_larger_operand():
    a = Tensor(np.array([1.0, 5.0]), requires_grad=True)
    b = Tensor(np.array([3.0, 2.0]), requires_grad=True)
    backward(ops.reduce_sum(ops.maximum(a, b)))
    assert a.grad.tolist() == [0.0, 1.0]
    assert b.grad.tolist() == [1.0, 0.0]


def test_segment_sum_gradient():
    segments = [0, 2, 2, 1, 0]
    check_gradient(lambda v: ops.reduce_sum(ops.mul(ops.segment_sum(v, segments, 3), ops.segment_sum(v, segments, 3))),
                   (5, 2))


def test_masked_segment_softmax_normalizes_each_segment():
    scores = Tensor(np.random.default_rng(0).normal(size=(6, 2)))
    segments = np.array([0, 0, 1, 1, 1, 2])
    probs = ops.masked_segment_softmax(scores, segments, 3).value
    totals = np.zeros((3, 2))
    np.add.at(totals, segments, probs)
    np.testing.assert_allclose(totals, 1.0)
    assert np.all(probs[5] == 1.0)


def test_masked_rows_get_zero_probability():
    scores = Tensor(np.array([[1.0], [2.0], [3.0]]))
    probs = ops.masked_segment_softmax(scores, [0, 0, 0], 1, mask=[True, False, True]).value
    assert probs[1, 0] == 0.0
    np.testing.assert_allclose(probs[:, 0].sum(), 1.0)


def test_masked_segment_softmax_gradient():
    segments = [0, 0, 1, 1, 1]
    weights = np.arange(10, dtype=np.float64).reshape(5, 2)
    check_gradient(lambda s: ops.reduce_sum(ops.mul(ops.masked_segment_softmax(s, segments, 2), weights)), (5, 2))


def test_log_softmax_matches_definition_and_gradient():
    logits = np.array([0.5, -1.0, 3.0, 0.0])
    value = ops.log_softmax(Tensor(logits)).value
    np.testing.assert_allclose(value, logits - np.log(np.exp(logits).sum()))
    np.testing.assert_allclose(np.exp(value).sum(), 1.0)
    check_gradient(lambda a: ops.pick(ops.log_softmax(a), 2), (6,))


def test_log_softmax_is_stable_for_large_logits():
    value = ops.log_softmax(Tensor(np.array([1000.0, 0.0]))).value
    assert np.all(np.isfinite(value))
    assert value[0] == pytest.approx(0.0)


def test_gradients_accumulate_over_reused_tensors():
    a = Tensor(np.array([2.0]), requires_grad=True)
    backward(ops.reduce_sum(ops.add(ops.mul(a, a), a)))
    assert a.grad.tolist() == [5.0]


def test_backward_needs_a_scalar_that_depends_on_parameters():
    with pytest.raises(GraphDetached):
        backward(ops.reduce_sum(Tensor(np.ones(3))))
    with pytest.raises(ShapeMismatch):
        backward(Tensor(np.ones(3), requires_grad=True))


def test_no_grad_records_nothing():
    a = Tensor(np.ones(2), requires_grad=True)
    with no_grad():
        out = ops.reduce_sum(ops.mul(a, a))
    assert not out.requires_grad
    with pytest.raises(GraphDetached):
        backward(out)


def test_incompatible_shapes_raise():
    with pytest.raises(ShapeMismatch):
        ops.add(Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))))
    with pytest.raises(ShapeMismatch):
        ops.log_softmax(Tensor(np.ones((2, 2))))


def test_adam_first_step_moves_each_weight_by_lr():
    store = ParamStore()
    w = store.add("w", np.array([1.0, -2.0, 0.5]))
    optimizer = Adam(store)
    optimizer.step(0.1, {"w": np.array([3.0, -0.2, 0.0])})
    # bias-corrected first step is lr * sign(g) when |g| >> eps
    np.testing.assert_allclose(w.value, [0.9, -1.9, 0.5], atol=1e-7)
    assert optimizer.t == 1


def test_adam_uses_stored_gradients_by_default():
    store = ParamStore()
    w = store.add("w", np.array([1.0]))
    backward(ops.reduce_sum(ops.mul(w, w)))
    adam_step(store, Adam(store), 0.01)
    assert w.value[0] == pytest.approx(0.99)


def test_duplicate_parameter_names_are_rejected():
    store = ParamStore()
    store.add("w", np.zeros(2))
    with pytest.raises(KeyError):
        store.add("w", np.zeros(2))


def test_checkpoint_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    store = ParamStore()
    store.add("a", rng.normal(size=(3, 4)).astype(np.float32))
    store.add("b", rng.normal(size=(5,)))
    optimizer = Adam(store)
    for _ in range(3):
        optimizer.step(1e-3, {name: rng.normal(size=t.shape) for name, t in store})

    path = save_checkpoint(tmp_path / "ckpt.npz", store, optimizer, {'note': 'x'})
    bundle = load_checkpoint(path)
    assert bundle.meta['note'] == 'x'
    assert bundle.adam_t == 3

    restored = store.clone()
    fresh = Adam(restored)
    for _, tensor in restored:
        tensor.value = np.zeros_like(tensor.value)
    bundle.restore(restored, fresh)
    for name, tensor in store:
        assert restored[name].value.dtype == tensor.value.dtype
        assert np.array_equal(restored[name].value, tensor.value)
        assert np.array_equal(fresh.m[name], optimizer.m[name])
        assert np.array_equal(fresh.v[name], optimizer.v[name])
    assert fresh.t == 3
    assert not (tmp_path / "ckpt.npz.tmp").exists()


@pytest.mark.filterwarnings("error")
def test_pick_accepts_a_single_element_upstream_gradient():
    x = Tensor(np.arange(4.0), requires_grad=True)
    picked = ops.pick(x, 1)
    assert picked.shape == ()
    (grad,) = picked.backward_rule(np.ones(1))
    np.testing.assert_array_equal(grad, [0.0, 1.0, 0.0, 0.0])
