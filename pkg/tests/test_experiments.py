import numpy as np
import pytest

from flatlab.errors import TrainingDivergedError
from flatlab.experiments import (CheckSpec, ScenarioSpec, TrainConfig,
                                 alpha_sweep, demo_spec_from_dict,
                                 make_teacher_student, probe_inputs,
                                 reparam_demo_1d, run_scenario, train_sgd)
from flatlab.metrics import CSV_COLUMNS, SharpnessConfig
from flatlab.nets import (Architecture, Dataset, gradient, hessian,
                          kink_distance, loss, vec)
from flatlab.rng import SeededRng
from flatlab.transforms import (AlphaScaleDeep, AlphaScaleTwoLayer,
                                PowerStretch, Radial)


# ---------------------------------------------------------------------------
# teacher-student data


def test_teacher_is_exact_minimum():
    for widths in ((2, 4, 1), (2, 8, 1), (3, 4, 4, 1)):
        arch = Architecture(widths)
        data, teacher = make_teacher_student(arch, 70, 32)
        assert loss(arch, teacher, data) == 0.0
        assert np.linalg.norm(gradient(arch, teacher, data)) <= 1e-10


def test_teacher_hessian_is_psd():
    arch = Architecture((2, 6, 1))
    data, teacher = make_teacher_student(arch, 71, 32)
    evals = np.linalg.eigvalsh(hessian(arch, teacher, data))
    assert evals.min() >= -1e-6 * max(evals.max(), 1.0)


def test_teacher_data_clears_kink_margin():
    arch = Architecture((3, 4, 4, 1))
    data, teacher = make_teacher_student(arch, 72, 32, margin=0.02)
    assert kink_distance(arch, teacher, data) > 0.02


def test_teacher_deterministic():
    arch = Architecture((2, 5, 1), use_bias=True)
    d1, t1 = make_teacher_student(arch, 73, 16)
    d2, t2 = make_teacher_student(arch, 73, 16)
    assert np.array_equal(d1.inputs, d2.inputs)
    assert np.array_equal(d1.targets, d2.targets)
    for a, b in zip(t1.weights, t2.weights):
        assert np.array_equal(a, b)


def test_teacher_rejects_bad_counts():
    with pytest.raises(ValueError):
        make_teacher_student(Architecture((2, 3, 1)), 0, 0)


# ---------------------------------------------------------------------------
# training


def test_train_zero_rate_leaves_parameters():
    arch = Architecture((2, 3, 1))
    data, _ = make_teacher_student(arch, 74, 16)
    cfg = TrainConfig(learning_rate=0.0, epochs=3, seed=74)
    result = train_sgd(arch, data, cfg)
    from flatlab.nets import uniform_params
    init = uniform_params(arch, SeededRng(74, 3), -0.5, 0.5)
    for a, b in zip(result.params.weights, init.weights):
        assert np.array_equal(a, b)


def test_train_reaches_low_gradient():
    arch = Architecture((2, 8, 1))
    data, _ = make_teacher_student(Architecture((2, 4, 1)), 75, 24)
    cfg = TrainConfig(learning_rate=0.1, epochs=30000, seed=75,
                      stop_grad_norm=1e-6)
    result = train_sgd(arch, data, cfg)
    # plain full-batch descent stalls near the floor, not at it
    assert result.trace[-1][0] <= 1e-5
    assert result.trace[-1][1] <= 1e-3


def test_train_divergence_raises_with_epoch():
    arch = Architecture((2, 4, 1))
    data, _ = make_teacher_student(arch, 76, 16)
    cfg = TrainConfig(learning_rate=50.0, epochs=2000, seed=76)
    with pytest.raises(TrainingDivergedError) as info:
        train_sgd(arch, data, cfg)
    assert info.value.epoch >= 0


def test_train_trace_monotone_near_minimum():
    # from a tiny perturbation of an exact minimum, small steps descend
    arch = Architecture((2, 4, 1))
    data, teacher = make_teacher_student(arch, 77, 24)
    flat = vec(arch, teacher)
    from flatlab.nets import unvec
    start = unvec(arch, flat + 1e-3 * SeededRng(77, 5).generator().normal(
        size=flat.size))
    cfg = TrainConfig(learning_rate=0.01, epochs=200, seed=77)
    result = train_sgd(arch, data, cfg, init=start)
    losses = [step[0] for step in result.trace]
    assert all(b <= a + 1e-15 for a, b in zip(losses, losses[1:]))


# ---------------------------------------------------------------------------
# scenarios


def test_scenario_identity_transform_reports_match():
    spec = ScenarioSpec(
        arch=Architecture((2, 4, 1)),
        transform=AlphaScaleDeep((1.0, 1.0)),
        seed=78, m=24,
        sharpness=SharpnessConfig(epsilon=1e-2, restarts=4, seed=78),
        checks=(CheckSpec("reports_identical"), CheckSpec("equivalence")),
    )
    report = run_scenario(spec)
    assert report.equivalence_deviation == 0.0
    assert all(c.passed for c in report.checks)
    payload = report.to_dict()
    assert "runtime" not in payload  # reports must serialize reproducibly


def test_scenario_scale_transform_passes_equivalence():
    spec = ScenarioSpec(
        arch=Architecture((2, 4, 1)),
        transform=AlphaScaleTwoLayer(0.2),
        seed=79, m=24,
        sharpness=SharpnessConfig(epsilon=1e-2, restarts=4, seed=79),
        checks=(CheckSpec("equivalence"), CheckSpec("loss_invariant")),
    )
    report = run_scenario(spec)
    assert report.equivalence_deviation <= 1e-9
    assert all(c.passed for c in report.checks)
    assert report.grad_residual <= 1e-6


def test_scenario_far_radial_is_identity_at_point():
    # ball far from the parameters: transform leaves them untouched
    arch = Architecture((2, 3, 1))
    center = np.full(9, 50.0)
    spec = ScenarioSpec(
        arch=arch,
        transform=Radial(center, delta=0.5, rho=0.2, rhat=0.3),
        seed=80, m=16,
        sharpness=SharpnessConfig(epsilon=1e-2, restarts=4, seed=80),
        checks=(CheckSpec("reports_identical"),),
    )
    report = run_scenario(spec)
    assert report.checks[0].passed


def test_scenario_unknown_check_rejected():
    with pytest.raises(ValueError):
        ScenarioSpec(arch=Architecture((2, 3, 1)),
                     transform=AlphaScaleTwoLayer(2.0),
                     checks=(CheckSpec("not_a_check"),))


def test_scenario_trained_point_source():
    spec = ScenarioSpec(
        arch=Architecture((2, 6, 1)),
        transform=AlphaScaleTwoLayer(0.5),
        seed=81, m=24,
        point_source="train",
        train=TrainConfig(learning_rate=0.1, epochs=4000, seed=81,
                          stop_grad_norm=1e-7),
        sharpness=SharpnessConfig(epsilon=1e-2, restarts=4, seed=81),
        checks=(CheckSpec("equivalence"),),
    )
    report = run_scenario(spec)
    assert report.checks[0].passed
    assert report.before.loss < 1e-3


# ---------------------------------------------------------------------------
# sweep


def test_alpha_sweep_loss_constant_and_header():
    arch = Architecture((2, 4, 1))
    data, teacher = make_teacher_student(arch, 82, 24)
    cfg = SharpnessConfig(epsilon=1e-2, restarts=4, seed=82)
    csv = alpha_sweep(arch, teacher, data, (1.0, 0.5, 0.25), cfg)
    lines = csv.strip().split("\n")
    assert lines[0] == "alpha," + ",".join(CSV_COLUMNS)
    assert len(lines) == 4
    losses = [float(line.split(",")[1]) for line in lines[1:]]
    assert max(losses) <= 1e-9 * (1.0 + max(losses))


def test_alpha_sweep_gradient_slope_at_generic_point():
    arch = Architecture((2, 4, 1))
    from flatlab.nets import uniform_params
    params = uniform_params(arch, SeededRng(83, 6))
    gen = SeededRng(83, 7).generator()
    data = Dataset(gen.uniform(-1, 1, (16, 2)), gen.uniform(-1, 1, 16))
    alphas = tuple(10.0 ** e for e in np.linspace(-1, -3, 5))
    csv = alpha_sweep(arch, params, data, alphas,
                      SharpnessConfig(epsilon=1e-2, restarts=2, seed=83))
    rows = [line.split(",") for line in csv.strip().split("\n")[1:]]
    grads = np.array([float(r[1 + CSV_COLUMNS.index("grad_norm")])
                      for r in rows])
    slope = np.polyfit(np.log(alphas), np.log(grads), 1)[0]
    assert abs(slope + 1.0) < 0.1


def test_alpha_sweep_rejects_bad_inputs():
    arch = Architecture((2, 4, 1))
    data, teacher = make_teacher_student(arch, 84, 16)
    cfg = SharpnessConfig(epsilon=1e-2, seed=84)
    with pytest.raises(ValueError):
        alpha_sweep(arch, teacher, data, (1.0, -2.0), cfg)
    deep = Architecture((2, 3, 3, 1))
    deep_data, deep_teacher = make_teacher_student(deep, 84, 16)
    with pytest.raises(ValueError):
        alpha_sweep(deep, deep_teacher, deep_data, (1.0,), cfg)


# ---------------------------------------------------------------------------
# one-dimensional demo


def test_demo_identity_curvature_unchanged():
    demo = reparam_demo_1d("quadratic", PowerStretch(0.0, 0.0, 1.0),
                           -2.0, 2.0, 401)
    assert len(demo.minima) == 1
    m = demo.minima[0]
    assert abs(m.eta) < 1e-6
    assert np.isclose(m.predicted_curvature, 2.0)
    assert m.rel_err <= 1e-3


def test_demo_stretch_scales_curvature():
    demo = reparam_demo_1d("double_well", PowerStretch(1.0, 1.0, 0.5),
                           -2.0, 2.0, 801)
    assert len(demo.minima) == 2
    for m in demo.minima:
        assert m.rel_err <= 1e-3
        # curvature prediction is (g')^2 L'' with L'' = 8 at both wells
        from flatlab.transforms import power_stretch_derivative
        expected = 8.0 / power_stretch_derivative(
            m.theta, PowerStretch(1.0, 1.0, 0.5)) ** 2
        assert np.isclose(m.predicted_curvature, expected, rtol=1e-9)
    assert len(demo.noncritical) >= 2
    assert all(c.rel_err <= 1e-3 for c in demo.noncritical)


def test_demo_radial_map_piecewise():
    spec = Radial(np.array([0.9]), delta=1.5, rho=0.6, rhat=0.9)
    demo = reparam_demo_1d("double_well", spec, -2.5, 2.5, 801)
    assert len(demo.minima) == 2
    inner = [m for m in demo.minima if abs(m.theta - 1.0) < 1e-6]
    outer = [m for m in demo.minima if abs(m.theta + 1.0) < 1e-6]
    assert np.isclose(inner[0].predicted_curvature, 8.0 * (0.9 / 0.6) ** 2)
    assert np.isclose(outer[0].predicted_curvature, 8.0)  # identity region


def test_demo_notes_when_no_interior_minimum():
    demo = reparam_demo_1d("quadratic", PowerStretch(0.0, 0.0, 1.0),
                           1.0, 2.0, 51)
    assert demo.minima == ()
    assert any("no interior minima" in note for note in demo.notes)


def test_demo_curve_csv_shape():
    demo = reparam_demo_1d("quadratic", PowerStretch(0.0, 0.5, 1.0),
                           -1.0, 1.0, 21)
    lines = demo.curve_csv().strip().split("\n")
    assert lines[0] == "eta,loss"
    assert len(lines) == 22


def test_demo_rejects_unknown_loss():
    with pytest.raises(ValueError):
        reparam_demo_1d("septic_well", PowerStretch(0.0, 1.0, 1.0),
                        -1.0, 1.0, 51)


def test_demo_spec_from_dict():
    raw = {"loss": "double_well",
           "transform": {"kind": "power_stretch", "center": 0.0, "a": 1.0,
                         "b": 0.5},
           "grid": [-2.0, 2.0, 401]}
    name, spec, lo, hi, count = demo_spec_from_dict(raw)
    assert name == "double_well"
    assert isinstance(spec, PowerStretch)
    assert (lo, hi, count) == (-2.0, 2.0, 401)
    with pytest.raises(ValueError):
        demo_spec_from_dict({"loss": "double_well", "grid": [0, 1, 9]})
    with pytest.raises(ValueError):
        demo_spec_from_dict({"loss": "double_well",
                             "transform": {"kind": "alpha_scale_two_layer",
                                           "alpha": 2.0},
                             "grid": [0, 1, 9]})


def test_probe_inputs_deterministic_and_bounded():
    arch = Architecture((3, 4, 1))
    a = probe_inputs(arch, 85)
    b = probe_inputs(arch, 85)
    assert np.array_equal(a, b)
    assert a.shape == (256, 3)
    assert np.max(np.abs(a)) <= 2.0
