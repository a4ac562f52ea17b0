import numpy as np
import pytest

from ca2n.core.exceptions import ValidationError
from ca2n.numerics import Tape, Tensor, backward, ops


def direct_conv2d(x, k, b, stride, padding):
    n, c, h, w = x.shape
    kk, _, kh, kw = k.shape
    xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((n, kk, ho, wo))
    for i in range(n):
        for o in range(kk):
            for y in range(ho):
                for z in range(wo):
                    rows = slice(y * stride, y * stride + kh)
                    cols = slice(z * stride, z * stride + kw)
                    patch = xp[i, :, rows, cols]
                    out[i, o, y, z] = (patch * k[o]).sum() + b[o]
    return out


class TestConv2d(object):
    def test_identity_kernel(self):
        x = Tensor(np.arange(9).reshape(1, 1, 3, 3))
        out = ops.conv2d(x, Tensor(np.ones((1, 1, 1, 1))), Tensor([0.0]))
        np.testing.assert_array_equal(out.data, x.data)

    def test_zero_kernel_annihilates(self, rng):
        x = Tensor(rng.standard_normal((2, 3, 5, 5)))
        out = ops.conv2d(x, Tensor(np.zeros((4, 3, 3, 3))), Tensor(np.zeros(4)), 2, 1)
        assert out.shape == (2, 4, 3, 3)
        assert not out.data.any()

    def test_ones_kernel(self):
        x = Tensor(np.arange(1, 10).reshape(1, 1, 3, 3))
        out = ops.conv2d(x, Tensor(np.ones((1, 1, 2, 2))), Tensor([0.0]))
        np.testing.assert_array_equal(out.data[0, 0], [[12, 16], [24, 28]])

    @pytest.mark.parametrize("stride,padding", [(1, 0), (2, 1), (2, 0), (3, 2)])
    def test_matches_direct_convolution(self, rng, stride, padding):
        x = rng.standard_normal((2, 3, 7, 6))
        k = rng.standard_normal((4, 3, 3, 3))
        b = rng.standard_normal(4)
        out = ops.conv2d(Tensor(x), Tensor(k), Tensor(b), stride, padding)
        np.testing.assert_allclose(
            out.data, direct_conv2d(x, k, b, stride, padding), rtol=1e-4, atol=1e-4
        )

    def test_channel_mismatch_names_dimensions(self):
        with pytest.raises(ValidationError) as excinfo:
            ops.conv2d(
                Tensor(np.zeros((1, 3, 4, 4))),
                Tensor(np.zeros((2, 2, 3, 3))),
                Tensor(np.zeros(2)),
            )
        assert "3 channels" in str(excinfo.value)

    def test_kernel_larger_than_input(self):
        with pytest.raises(ValidationError):
            ops.conv2d(
                Tensor(np.zeros((1, 1, 2, 2))),
                Tensor(np.zeros((1, 1, 3, 3))),
                Tensor(np.zeros(1)),
            )


class TestConv2dTranspose(object):
    def test_single_value_broadcast(self):
        out = ops.conv2d_transpose(
            Tensor([[[[2.5]]]]), Tensor(np.ones((1, 1, 2, 2))), Tensor([0.0])
        )
        np.testing.assert_array_equal(out.data, np.full((1, 1, 2, 2), 2.5))

    def test_zero_input_gives_bias(self):
        out = ops.conv2d_transpose(
            Tensor(np.zeros((1, 2, 3, 3))),
            Tensor(np.ones((2, 3, 3, 3))),
            Tensor([1.0, 2.0, 3.0]),
            stride=2,
            padding=1,
        )
        assert out.shape == (1, 3, 5, 5)
        for channel, value in enumerate([1.0, 2.0, 3.0]):
            assert np.all(out.data[0, channel] == value)

    @pytest.mark.parametrize("padding,output_padding", [(0, 0), (1, 1), (1, 0)])
    def test_is_adjoint_of_conv2d(self, rng, padding, output_padding):
        x = Tensor(rng.standard_normal((1, 1, 2, 2)))
        ksize = 2 if padding == 0 else 3
        k = Tensor(rng.standard_normal((1, 1, ksize, ksize)))
        size = (2 - 1) * 2 - 2 * padding + k.shape[2] + output_padding
        z = Tensor(np.zeros((1, 1, size, size)), trainable=True)

        with Tape() as tape:
            y = ops.conv2d(z, k, Tensor([0.0]), 2, padding)
            loss = ops.sum(ops.mul(y, x))
        oracle = backward(loss, tape)[z]

        out = ops.conv2d_transpose(x, k, Tensor([0.0]), 2, padding, output_padding)
        np.testing.assert_allclose(out.data, oracle, rtol=1e-5, atol=1e-6)

    def test_mirrored_geometry_restores_shape(self, rng):
        for size in (32, 33, 17, 8):
            x = Tensor(rng.standard_normal((1, 2, size, size)))
            kernel = Tensor(np.ones((3, 2, 3, 3)))
            down = ops.conv2d(x, kernel, Tensor(np.zeros(3)), 2, 1)
            op = ops.transpose_output_padding(size, down.shape[2], 3, 2, 1)
            up = ops.conv2d_transpose(
                down, Tensor(np.ones((3, 2, 3, 3))), Tensor(np.zeros(2)), 2, 1, op
            )
            assert up.shape == x.shape

    def test_inconsistent_geometry(self):
        with pytest.raises(ValidationError):
            ops.conv2d_transpose(
                Tensor(np.zeros((1, 1, 1, 1))),
                Tensor(np.zeros((1, 1, 1, 1))),
                Tensor(np.zeros(1)),
                stride=1,
                padding=1,
            )

    def test_output_padding_must_be_below_stride(self):
        with pytest.raises(ValidationError):
            ops.conv2d_transpose(
                Tensor(np.zeros((1, 1, 2, 2))),
                Tensor(np.zeros((1, 1, 3, 3))),
                Tensor(np.zeros(1)),
                stride=2,
                padding=1,
                output_padding=2,
            )


class TestLinear(object):
    def test_identity(self):
        x = Tensor([[1.0, -2.0, 3.0]])
        out = ops.linear(x, Tensor(np.eye(3)), Tensor(np.zeros(3)))
        np.testing.assert_array_equal(out.data, x.data)

    def test_zero_weight_gives_bias(self):
        out = ops.linear(
            Tensor(np.ones((4, 2))), Tensor(np.zeros((3, 2))), Tensor([1.0, 2.0, 3.0])
        )
        assert np.all(out.data == [1.0, 2.0, 3.0])

    def test_hand_dot_product(self):
        out = ops.linear(
            Tensor([[1.0, 2.0]]), Tensor([[1.0, 1.0], [2.0, 0.0]]), Tensor([0.0, 0.0])
        )
        np.testing.assert_array_equal(out.data, [[3.0, 2.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            ops.linear(
                Tensor(np.ones((1, 3))), Tensor(np.ones((2, 2))), Tensor(np.zeros(2))
            )


class TestPooling(object):
    def test_global_pools(self):
        x = Tensor([[[[1.0, 2.0], [3.0, 4.0]]]])
        assert ops.global_pool(x, "max").item() == 4.0
        assert ops.global_pool(x, "avg").item() == 2.5
        assert ops.global_pool(x, "avg").shape == (1, 1, 1, 1)

    def test_constant_input(self):
        x = Tensor(np.full((1, 2, 4, 4), 0.75))
        for kind in ("max", "avg"):
            assert np.all(ops.pool(x, kind, 2, 2).data == 0.75)
            assert np.all(ops.global_pool(x, kind).data == 0.75)

    def test_window_scan(self, rng):
        x = rng.standard_normal((1, 1, 4, 4))
        out_max = ops.pool(Tensor(x), "max", 2, 2).data
        out_avg = ops.pool(Tensor(x), "avg", 2, 2).data
        for i in range(2):
            for j in range(2):
                window = x[0, 0, 2 * i:2 * i + 2, 2 * j:2 * j + 2]
                assert out_max[0, 0, i, j] == pytest.approx(window.max(), rel=1e-6)
                assert out_avg[0, 0, i, j] == pytest.approx(window.mean(), rel=1e-5)

    def test_window_larger_than_input(self):
        with pytest.raises(ValidationError):
            ops.pool(Tensor(np.zeros((1, 1, 2, 2))), "max", 3)


class TestActivations(object):
    def test_values(self):
        assert ops.activation(Tensor(0.0), "sigmoid").item() == 0.5
        relu = ops.activation(Tensor([-1.0, 2.0]), "relu")
        np.testing.assert_array_equal(relu.data, [0.0, 2.0])
        assert ops.activation(Tensor(0.0), "tanh").item() == 0.0
        leaky = ops.activation(Tensor([-1.0, 1.0]), "leaky_relu", alpha=0.2)
        np.testing.assert_allclose(leaky.data, [-0.2, 1.0])

    def test_sigmoid_strictly_inside_unit_interval(self):
        out = ops.sigmoid(Tensor([-1e4, -50.0, 50.0, 1e4])).data
        assert np.all(out > 0)
        assert np.all(out < 1)

    def test_unknown_kind(self):
        with pytest.raises(ValidationError):
            ops.activation(Tensor(1.0), "softplus")


class TestElementwise(object):
    def test_clamp_in_range_is_identity(self):
        x = Tensor([0.1, 0.5, 0.9])
        clamped = ops.elementwise(x, kind="clamp", lo=0, hi=1)
        np.testing.assert_array_equal(clamped.data, x.data)

    def test_reduce_mean(self):
        assert ops.reduce_mean(Tensor([1.0, 2.0, 3.0, 6.0])).item() == 3.0

    def test_abs_subgradient(self):
        x = Tensor([2.0, -3.0, 0.0], trainable=True)
        with Tape() as tape:
            loss = ops.sum(ops.absolute(x))
        np.testing.assert_array_equal(backward(loss, tape)[x], [1.0, -1.0, 0.0])

    def test_clamp_gradient(self):
        x = Tensor([-1.0, 0.0, 0.5, 1.0, 2.0], trainable=True)
        with Tape() as tape:
            loss = ops.sum(ops.clamp(x, 0.0, 1.0))
        np.testing.assert_array_equal(backward(loss, tape)[x], [0, 1, 1, 1, 0])

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError) as excinfo:
            ops.elementwise(
                Tensor(np.ones((2, 3))), Tensor(np.ones((3, 2))), kind="add"
            )
        assert "(2, 3)" in str(excinfo.value)

    def test_scalar_operand(self):
        out = ops.elementwise(Tensor([1.0, 2.0]), 0.5, kind="mul")
        np.testing.assert_array_equal(out.data, [0.5, 1.0])
        assert out.dtype == np.float32

    def test_order_invariant_sum(self, rng):
        values = rng.standard_normal(1000).astype(np.float32)
        shuffled = rng.permutation(values)
        a = ops.sum(Tensor(values), order_invariant=True).item()
        b = ops.sum(Tensor(shuffled), order_invariant=True).item()
        assert a == b


class TestRegions(object):
    def test_paste_of_crop(self, rng):
        x = Tensor(rng.standard_normal((2, 3, 8, 8)))
        region = (2, 1, 4, 5)
        out = ops.paste(Tensor(np.zeros((2, 3, 8, 8))), ops.crop(x, region), region)
        np.testing.assert_array_equal(out.data[..., 1:6, 2:6], x.data[..., 1:6, 2:6])
        mask = np.ones((8, 8), dtype=bool)
        mask[1:6, 2:6] = False
        assert not out.data[..., mask].any()

    def test_concat(self):
        out = ops.concat([Tensor(np.ones((3, 1))), Tensor(np.zeros((3, 1)))], axis=1)
        assert out.shape == (3, 2)

    def test_out_of_bounds(self):
        with pytest.raises(ValidationError):
            ops.crop(Tensor(np.zeros((4, 4))), (2, 2, 3, 1))
        with pytest.raises(ValidationError):
            ops.paste(Tensor(np.zeros((4, 4))), Tensor(np.zeros((2, 2))), (3, 0, 2, 2))

    def test_patch_shape_mismatch(self):
        with pytest.raises(ValidationError):
            ops.paste(Tensor(np.zeros((4, 4))), Tensor(np.zeros((2, 3))), (0, 0, 2, 2))

    def test_paste_routes_gradients(self):
        target = Tensor(np.zeros((4, 4)), trainable=True)
        patch = Tensor(np.zeros((2, 2)), trainable=True)
        with Tape() as tape:
            loss = ops.sum(ops.paste(target, patch, (1, 1, 2, 2)))
        grads = backward(loss, tape)
        assert grads[patch].sum() == 4
        assert grads[target].sum() == 12
        assert grads[target][1:3, 1:3].sum() == 0
