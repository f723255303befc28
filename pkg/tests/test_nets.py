import numpy as np
import pytest

from flatlab.errors import KinkProximityError
from flatlab.nets import (Architecture, Dataset, FlatIndex, ParamVector,
                          check_params, forward, gradient, hessian,
                          hessian_step, input_gradient, kink_argmin,
                          kink_distance, load_checkpoint, loss,
                          loss_and_gradient, save_checkpoint, uniform_params,
                          unvec, vec)
from flatlab.rng import SeededRng


def _fd_gradient(arch, params, data, h=1e-6):
    flat = vec(arch, params)
    out = np.zeros_like(flat)
    for i in range(flat.size):
        e = np.zeros_like(flat)
        e[i] = h
        out[i] = (loss(arch, unvec(arch, flat + e), data)
                  - loss(arch, unvec(arch, flat - e), data)) / (2 * h)
    return out


def test_architecture_validation():
    with pytest.raises(ValueError):
        Architecture((2,))
    with pytest.raises(ValueError):
        Architecture((2, 0, 1))
    with pytest.raises(ValueError):
        Architecture((2, 4, 3))  # output width must be 1
    arch = Architecture((3, 5, 1), use_bias=True)
    assert arch.depth == 2
    assert arch.input_width == 3
    assert arch.weight_shape(1) == (5, 1)


def test_forward_by_hand_single_unit():
    # one input, one hidden unit: f(x) = w2 * max(0, w1 * x)
    arch = Architecture((1, 1, 1))
    params = ParamVector([np.array([[2.0]]), np.array([[3.0]])])
    x = np.array([[1.5], [-2.0]])
    expected = np.array([3.0 * 3.0, 0.0])
    assert np.allclose(forward(arch, params, x), expected)


def test_forward_with_bias_by_hand():
    arch = Architecture((1, 1, 1), use_bias=True)
    params = ParamVector([np.array([[1.0]]), np.array([[2.0]])],
                         [np.array([0.5]), np.array([-1.0])])
    # f(x) = 2 * relu(x + 0.5) - 1
    assert np.isclose(forward(arch, params, np.array([[1.0]]))[0], 2.0)
    assert np.isclose(forward(arch, params, np.array([[-2.0]]))[0], -1.0)


def test_loss_is_mean_squared_error():
    arch = Architecture((1, 1, 1))
    params = ParamVector([np.array([[1.0]]), np.array([[1.0]])])
    data = Dataset(np.array([[1.0], [2.0]]), np.array([0.0, 0.0]))
    assert np.isclose(loss(arch, params, data), (1.0 + 4.0) / 2.0)


def test_gradient_matches_finite_differences():
    gen = SeededRng(21).generator()
    for widths, bias in (((2, 3, 1), False), ((2, 4, 1), True),
                         ((3, 4, 4, 1), False)):
        arch = Architecture(widths, use_bias=bias)
        params = uniform_params(arch, SeededRng(22))
        data = Dataset(gen.uniform(-1, 1, (6, arch.input_width)),
                       gen.uniform(-1, 1, 6))
        g = gradient(arch, params, data)
        assert np.allclose(g, _fd_gradient(arch, params, data), atol=1e-7)


def test_gradient_hand_case_linear_chain():
    # f(x) = w2 * relu(w1 x); at w1=1, w2=2, x=1, y=0:
    # loss = (2)^2, dL/dw2 = 2 f relu = 4 * 1? derive: L = f^2, f = 2
    # dL/df = 2f = 4; df/dw2 = relu(w1 x) = 1; df/dw1 = w2 * x = 2
    arch = Architecture((1, 1, 1))
    params = ParamVector([np.array([[1.0]]), np.array([[2.0]])])
    data = Dataset(np.array([[1.0]]), np.array([0.0]))
    _, g = loss_and_gradient(arch, params, data)
    assert np.allclose(g, [4.0 * 2.0, 4.0 * 1.0])


def test_gradient_is_zero_on_inactive_path():
    arch = Architecture((1, 1, 1))
    params = ParamVector([np.array([[1.0]]), np.array([[2.0]])])
    data = Dataset(np.array([[-1.0]]), np.array([1.0]))
    _, g = loss_and_gradient(arch, params, data)
    # hidden unit off: only the (zero) activation reaches w2, and w1 gets
    # no signal through the dead rectifier
    assert np.allclose(g, [0.0, 0.0])


def test_vec_unvec_round_trip():
    arch = Architecture((2, 3, 1), use_bias=True)
    params = uniform_params(arch, SeededRng(23))
    back = unvec(arch, vec(arch, params))
    for a, b in zip(params.weights, back.weights):
        assert np.array_equal(a, b)
    for a, b in zip(params.biases, back.biases):
        assert np.array_equal(a, b)


def test_flat_index_layout():
    arch = Architecture((2, 3, 1), use_bias=True)
    index = FlatIndex(arch)
    assert index.weight_slice(0) == slice(0, 6)
    assert index.weight_slice(1) == slice(6, 9)
    assert index.bias_slice(0) == slice(9, 12)
    assert index.bias_slice(1) == slice(12, 13)
    assert index.total == 13


def test_hessian_matches_fd_of_gradient_oracle():
    arch = Architecture((2, 3, 1))
    params = uniform_params(arch, SeededRng(24))
    gen = SeededRng(25).generator()
    data = Dataset(gen.uniform(-1, 1, (6, 2)), gen.uniform(-1, 1, 6))
    h = hessian(arch, params, data)
    flat = vec(arch, params)
    step = 1e-5
    oracle = np.zeros_like(h)
    for i in range(flat.size):
        e = np.zeros_like(flat)
        e[i] = step
        gp = gradient(arch, unvec(arch, flat + e), data)
        gm = gradient(arch, unvec(arch, flat - e), data)
        oracle[:, i] = (gp - gm) / (2 * step)
    oracle = (oracle + oracle.T) / 2
    assert np.allclose(h, oracle, atol=1e-5)
    assert np.array_equal(h, h.T)


def test_hessian_analytic_single_path():
    # L(w1, w2) = (w2 relu(w1 x) - y)^2 with x=1, y=1, active unit:
    # L = (w2 w1 - 1)^2; Hessian entries are then elementary
    arch = Architecture((1, 1, 1))
    w1, w2 = 1.5, 0.8
    params = ParamVector([np.array([[w1]]), np.array([[w2]])])
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    h = hessian(arch, params, data)
    r = w1 * w2 - 1.0
    expected = 2.0 * np.array([
        [w2 * w2, 2 * w1 * w2 - 1.0],
        [2 * w1 * w2 - 1.0, w1 * w1],
    ])
    assert np.allclose(h, expected, atol=1e-6)


def test_hessian_refuses_kink_proximity():
    arch = Architecture((1, 1, 1))
    # preactivation exactly zero for the only example
    params = ParamVector([np.array([[0.0]]), np.array([[1.0]])])
    data = Dataset(np.array([[1.0]]), np.array([1.0]))
    with pytest.raises(KinkProximityError):
        hessian(arch, params, data)


def test_kink_argmin_matches_enumeration():
    arch = Architecture((2, 4, 1), use_bias=True)
    params = uniform_params(arch, SeededRng(26))
    gen = SeededRng(27).generator()
    data = Dataset(gen.uniform(-1, 1, (5, 2)), np.zeros(5))
    dist, example, layer, unit = kink_argmin(arch, params, data)
    pre = data.inputs @ params.weights[0] + params.biases[0]
    assert layer == 1
    assert np.isclose(dist, np.min(np.abs(pre)))
    assert np.isclose(abs(pre[example, unit]), dist)
    assert kink_distance(arch, params, data) == dist


def test_hessian_step_scales_with_magnitude():
    arch = Architecture((1, 1, 1))
    small = ParamVector([np.array([[0.5]]), np.array([[0.5]])])
    big = ParamVector([np.array([[100.0]]), np.array([[0.5]])])
    assert hessian_step(arch, small) == 1e-4
    assert hessian_step(arch, big) == 1e-2


def test_checkpoint_round_trip_bitwise(tmp_path):
    arch = Architecture((2, 5, 1), use_bias=True)
    params = uniform_params(arch, SeededRng(28))
    path = str(tmp_path / "ckpt.json")
    save_checkpoint(path, arch, params)
    arch2, params2 = load_checkpoint(path)
    assert arch2 == arch
    for a, b in zip(params.weights, params2.weights):
        assert np.array_equal(a, b)
    for a, b in zip(params.biases, params2.biases):
        assert np.array_equal(a, b)


def test_checkpoint_rejects_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"layer_widths": [2, 3, 1], "use_bias": false, '
                    '"weights": [[1.0]], "biases": null}\n')
    with pytest.raises(ValueError):
        load_checkpoint(str(path))


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.array([[1.0, np.nan]]), np.array([0.0]))
    with pytest.raises(ValueError):
        Dataset(np.array([[1.0]]), np.array([0.0, 1.0]))


def test_check_params_shape_mismatch():
    arch = Architecture((2, 3, 1))
    bad = ParamVector([np.zeros((2, 2)), np.zeros((3, 1))])
    with pytest.raises(ValueError):
        check_params(arch, bad)


def test_input_gradient_matches_fd():
    arch = Architecture((3, 4, 1))
    params = uniform_params(arch, SeededRng(29))
    gen = SeededRng(30).generator()
    x = gen.uniform(-1, 1, (4, 3))
    dg = input_gradient(arch, params, x)
    h = 1e-6
    for j in range(3):
        e = np.zeros((1, 3))
        e[0, j] = h
        fd = (forward(arch, params, x + e) - forward(arch, params, x - e)) / (2 * h)
        assert np.allclose(dg[:, j], fd, atol=1e-6)
