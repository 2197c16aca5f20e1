"""
Tensor and reverse-mode autodiff Unit Test Suite.

Test cases can be run with the following:
  pytest -v --cov=inversion --cov-report=term-missing --cov-branch
"""
import numpy as np
import pytest

from inversion.autodiff.tensor import (
    ComputationGraph,
    Tensor,
    backward,
    bias_add,
    elementwise,
    is_grad_enabled,
    matmul,
    mean_all,
    mse,
    no_grad,
    pad,
    record_op,
    relu,
    reshape,
    select,
    stack,
)
from inversion.errors import (
    ContractError,
    EmptyInputError,
    GraphConsumedError,
    NonFiniteError,
    ShapeError,
)


######################################################################
#  TENSOR CONSTRUCTION
######################################################################
class TestTensor:
    """The Tensor Class Tests."""

    def test_default_dtype(self):
        """It should store integer and list data as float32."""
        tensor = Tensor([[1, 2], [3, 4]])
        assert tensor.dtype == np.float32
        assert tensor.shape == (2, 2)
        assert tensor.ndim == 2
        assert tensor.size == 4
        assert tensor.grad is None
        assert tensor.node is None

    def test_float64_kept(self):
        """It should keep float64 arrays in float64."""
        assert Tensor(np.zeros(3)).dtype == np.float64

    def test_detach(self):
        """It should detach into a leaf without graph history."""
        a = Tensor([1.0, 2.0], requires_grad=True)
        b = (a * 2.0).detach()
        assert b.node is None
        assert not b.requires_grad
        np.testing.assert_array_equal(b.numpy(), [2.0, 4.0])

    def test_repr(self):
        """It should describe shape and dtype."""
        assert 'shape=(3,)' in repr(Tensor([1, 2, 3]))


######################################################################
#  OPS
######################################################################
class TestOps:
    """Forward and backward of individual ops."""

    def test_arithmetic_forward(self):
        """It should compute add, sub, mul, neg and scalar operands."""
        a = Tensor([1.0, 2.0])
        b = Tensor([3.0, 5.0])
        np.testing.assert_array_equal((a + b).numpy(), [4.0, 7.0])
        np.testing.assert_array_equal((a - b).numpy(), [-2.0, -3.0])
        np.testing.assert_array_equal((a * b).numpy(), [3.0, 10.0])
        np.testing.assert_array_equal((-a).numpy(), [-1.0, -2.0])
        np.testing.assert_array_equal((1.0 - a).numpy(), [0.0, -1.0])
        np.testing.assert_array_equal((3 * a).numpy(), [3.0, 6.0])

    def test_mul_gradient(self):
        """It should give d(ab)/da = b and d(ab)/db = a."""
        a = Tensor([1.0, 2.0], requires_grad=True)
        b = Tensor([3.0, 5.0], requires_grad=True)
        (a * b).sum().backward()
        np.testing.assert_allclose(a.grad, [3.0, 5.0])
        np.testing.assert_allclose(b.grad, [1.0, 2.0])

    def test_scalar_broadcast_gradient(self):
        """It should reduce the gradient of a 0-d operand to a scalar."""
        a = Tensor([1.0, 2.0, 3.0], requires_grad=True)
        s = Tensor(np.float32(2.0), requires_grad=True)
        (a * s).sum().backward()
        np.testing.assert_allclose(s.grad, 6.0)
        np.testing.assert_allclose(a.grad, [2.0, 2.0, 2.0])

    def test_shape_mismatch(self):
        """It should reject operands of different non-scalar shapes."""
        with pytest.raises(ShapeError):
            _ = Tensor([1.0, 2.0]) + Tensor([1.0, 2.0, 3.0])

    def test_non_tensor_operand(self):
        """It should reject operands that are neither tensors nor numbers."""
        with pytest.raises(ContractError):
            _ = Tensor([1.0]) + 'x'

    def test_relu(self):
        """It should zero negatives and pass gradient only where x > 0."""
        a = Tensor([-1.0, 0.0, 2.0], requires_grad=True)
        out = relu(a)
        np.testing.assert_array_equal(out.numpy(), [0.0, 0.0, 2.0])
        out.sum().backward()
        np.testing.assert_array_equal(a.grad, [0.0, 0.0, 1.0])

    def test_sigmoid_tanh(self):
        """It should match the closed forms."""
        x = np.array([-2.0, 0.0, 3.0])
        np.testing.assert_allclose(Tensor(x).sigmoid().numpy(), 1 / (1 + np.exp(-x)))
        np.testing.assert_allclose(Tensor(x).tanh().numpy(), np.tanh(x))

    def test_elementwise_dispatch(self):
        """It should dispatch each kind and reject unknown ones."""
        a = Tensor([1.0, -1.0])
        np.testing.assert_array_equal(elementwise('add', a, a).numpy(), [2.0, -2.0])
        np.testing.assert_array_equal(elementwise('scale', a, 3.0).numpy(), [3.0, -3.0])
        np.testing.assert_array_equal(elementwise('relu', a).numpy(), [1.0, 0.0])
        with pytest.raises(ContractError):
            elementwise('pow', a, a)
        with pytest.raises(ContractError):
            elementwise('mul', a)

    def test_matmul(self):
        """It should multiply matrices and back-propagate both factors."""
        a = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        b = Tensor(np.ones((3, 2)), requires_grad=True)
        out = matmul(a, b)
        np.testing.assert_allclose(out.numpy(), [[3.0, 3.0], [12.0, 12.0]])
        out.sum().backward()
        np.testing.assert_allclose(a.grad, np.ones((2, 3)))
        np.testing.assert_allclose(b.grad, [[3.0, 3.0], [5.0, 5.0], [7.0, 7.0]])
        with pytest.raises(ShapeError):
            matmul(a, a)

    def test_bias_add(self):
        """It should add along the last axis and sum the bias gradient."""
        a = Tensor(np.zeros((2, 3)), requires_grad=True)
        bias = Tensor(np.array([1.0, 2.0, 3.0]), requires_grad=True)
        out = bias_add(a, bias)
        np.testing.assert_allclose(out.numpy(), [[1, 2, 3], [1, 2, 3]])
        out.sum().backward()
        np.testing.assert_allclose(bias.grad, [2.0, 2.0, 2.0])
        with pytest.raises(ShapeError):
            bias_add(a, Tensor(np.ones(2)))

    def test_mse(self):
        """It should average squared errors and reject bad inputs."""
        pred = Tensor(np.array([1.0, 3.0]), requires_grad=True)
        target = Tensor(np.array([0.0, 0.0]))
        loss = mse(pred, target)
        assert loss.item() == pytest.approx(5.0)
        loss.backward()
        np.testing.assert_allclose(pred.grad, [1.0, 3.0])
        with pytest.raises(ShapeError):
            mse(pred, Tensor(np.zeros(3)))
        with pytest.raises(EmptyInputError):
            mse(Tensor(np.zeros(0)), Tensor(np.zeros(0)))

    def test_mean_empty(self):
        """It should reject the mean of an empty tensor."""
        with pytest.raises(EmptyInputError):
            mean_all(Tensor(np.zeros(0)))

    def test_reshape(self):
        """It should reshape both ways and reject impossible shapes."""
        a = Tensor(np.arange(6.0), requires_grad=True)
        out = a.reshape(2, 3)
        assert out.shape == (2, 3)
        (out * Tensor(np.arange(6.0).reshape(2, 3))).sum().backward()
        np.testing.assert_allclose(a.grad, np.arange(6.0))
        with pytest.raises(ShapeError):
            reshape(a, (4, 2))

    def test_pad(self):
        """It should zero-pad and crop the gradient back."""
        a = Tensor(np.ones((2, 2)), requires_grad=True)
        out = pad(a, [(1, 0), (0, 2)])
        assert out.shape == (3, 4)
        assert out.numpy()[0].sum() == 0
        out.sum().backward()
        np.testing.assert_allclose(a.grad, np.ones((2, 2)))
        with pytest.raises(ShapeError):
            pad(a, [(1, 1)])

    def test_select_and_stack(self):
        """It should select slices and stack them back with gradients."""
        a = Tensor(np.arange(6.0).reshape(2, 3), requires_grad=True)
        cols = [select(a, j, axis=1) for j in range(3)]
        np.testing.assert_array_equal(cols[1].numpy(), [1.0, 4.0])
        out = stack(cols, axis=1)
        np.testing.assert_array_equal(out.numpy(), a.numpy())
        out.sum().backward()
        np.testing.assert_allclose(a.grad, np.ones((2, 3)))
        with pytest.raises(ShapeError):
            select(a, 3, axis=1)
        with pytest.raises(EmptyInputError):
            stack([])
        with pytest.raises(ShapeError):
            stack([Tensor(np.ones(2)), Tensor(np.ones(3))])


######################################################################
#  GRAPH
######################################################################
class TestGraph:
    """Backward pass and graph lifetime."""

    def test_fan_out_accumulates(self):
        """It should sum the gradients of a tensor used twice."""
        x = Tensor(np.array([2.0]), requires_grad=True)
        y = x * x + x
        y.sum().backward()
        np.testing.assert_allclose(x.grad, [5.0])

    def test_leaf_accumulates_across_passes(self):
        """It should accumulate into leaf grads until zero_grad."""
        x = Tensor(np.array([1.0, 1.0]), requires_grad=True)
        (x * 3.0).sum().backward()
        (x * 3.0).sum().backward()
        np.testing.assert_allclose(x.grad, [6.0, 6.0])
        x.zero_grad()
        assert x.grad is None

    def test_graph_consumed(self):
        """It should refuse a second pass over a freed graph."""
        x = Tensor(np.array([1.0]), requires_grad=True)
        loss = (x * 2.0).sum()
        loss.backward()
        with pytest.raises(GraphConsumedError):
            loss.backward()

    def test_retain_graph(self):
        """It should allow a second pass with retain_graph."""
        x = Tensor(np.array([1.0]), requires_grad=True)
        loss = (x * 2.0).sum()
        loss.backward(retain_graph=True)
        loss.backward()
        np.testing.assert_allclose(x.grad, [4.0])

    def test_topological_order(self):
        """It should order nodes so inputs precede their consumers."""
        x = Tensor(np.ones(3), requires_grad=True)
        a = x * 2.0
        b = a.relu()
        loss = (b + a).sum()
        graph = ComputationGraph.trace(loss)
        ids = [t.node.node_id for t in graph.order]
        assert ids == sorted(ids)
        assert graph.order[-1] is loss
        assert len(graph) == 4

    def test_non_scalar_root(self):
        """It should require a one-element root."""
        with pytest.raises(ContractError):
            backward(Tensor(np.ones(2), requires_grad=True) * 2.0)

    def test_leaf_root(self):
        """It should seed a one-element leaf root with ones."""
        x = Tensor(np.array([3.0]), requires_grad=True)
        backward(x)
        np.testing.assert_allclose(x.grad, [1.0])

    def test_no_grad(self):
        """It should not record nodes inside no_grad and restore afterwards."""
        x = Tensor(np.ones(2), requires_grad=True)
        with no_grad():
            assert not is_grad_enabled()
            y = x * 2.0
        assert is_grad_enabled()
        assert y.node is None
        assert not y.requires_grad

    def test_constant_inputs_record_nothing(self):
        """It should not build a graph when no input requires a gradient."""
        assert (Tensor([1.0]) * 2.0).node is None

    def test_debug_checks(self, monkeypatch):
        """It should raise NonFiniteError on NaN from finite inputs in debug mode."""
        monkeypatch.setattr('inversion.autodiff.tensor.app_config',
                            type('Cfg', (), {'debug_checks': True})())
        x = Tensor(np.array([1.0]))
        with pytest.raises(NonFiniteError):
            record_op('boom', np.array([np.nan]), (x,), lambda g: (g,))
        # NaN inputs propagate without raising
        y = Tensor(np.array([np.nan]))
        out = record_op('pass', np.array([np.nan]), (y,), lambda g: (g,))
        assert np.isnan(out.item())
