import math

import numpy as np
import pytest

from hjdecomp.systems import (
    Interval,
    builtin_model,
    dissipation_bound,
    hamiltonian,
    interval_linear_extrema,
    interval_sin_extrema,
    BUILTIN_MODEL_NAMES,
)

import oracles


def test_interval_validation():
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)
    assert Interval(1, 1).width == 0.0


def test_interval_linear_extrema():
    assert interval_linear_extrema(1.0, Interval(6, 12)) == (6.0, 12.0)
    assert interval_linear_extrema(-2.0, Interval(6, 12)) == (-24.0, -12.0)
    assert interval_linear_extrema(0.0, Interval(-1, 1)) == (0.0, 0.0)


def test_interval_sin_extrema_basic():
    assert interval_sin_extrema(Interval(-math.pi, math.pi)) == (-1.0, 1.0)
    lo, hi = interval_sin_extrema(Interval(math.pi / 6, math.pi / 3))
    assert lo == pytest.approx(0.5, abs=1e-15)
    assert hi == pytest.approx(math.sqrt(3) / 2, abs=1e-15)


def test_interval_sin_extrema_frozen_oracle_value():
    # Dense-sampling oracle with refinement gives (sin(2.9), 1) here.
    smin, smax = interval_sin_extrema(Interval(0.3, 2.9))
    assert smin == pytest.approx(0.23924932921398243, abs=1e-12)
    assert smax == 1.0
    omin, omax = oracles.sin_extrema_oracle(0.3, 2.9)
    assert smin == pytest.approx(omin, abs=1e-12)
    assert smax == pytest.approx(omax, abs=1e-12)


def test_interval_sin_extrema_wide_interval():
    assert interval_sin_extrema(Interval(0.4, 0.4 + 2 * math.pi)) == (-1.0, 1.0)
    assert interval_sin_extrema(Interval(-30.0, 40.0)) == (-1.0, 1.0)


def test_interval_sin_extrema_random_vs_oracle():
    rng = np.random.default_rng(11)
    for _ in range(25):
        lo = float(rng.uniform(-10, 10))
        hi = lo + float(rng.uniform(0.01, 3 * math.pi))
        smin, smax = interval_sin_extrema(Interval(lo, hi))
        omin, omax = oracles.sin_extrema_oracle(lo, hi, coarse=10**5)
        assert smin == pytest.approx(omin, abs=1e-9)
        assert smax == pytest.approx(omax, abs=1e-9)


def _models_with_oracles():
    """(model, oracle dynamics, state sampler) triples for every builtin."""
    rng_box = {
        "plane4d": ([-40, -40, -math.pi, 6], [40, 40, math.pi, 12]),
        "plane_x_sub": ([-40, -math.pi], [40, math.pi]),
        "plane_y_sub": ([-40, 6], [40, 12]),
        "integrator1d": ([-3], [3]),
        "decoupled2d": ([-3, -3], [3, 3]),
        "quad_lateral": ([-5, -5, -1.0, -3], [5, 5, 1.0, 3]),
    }
    quad = dict(d0=10.0, d1=8.0, n0=10.0, gravity=9.81)
    cases = [
        (builtin_model("plane4d", {}), oracles.plane4d_dynamics()),
        (
            builtin_model("plane_x_sub", {"d_v": (6, 12)}),
            oracles.plane_x_sub_dynamics((6, 12)),
        ),
        (
            builtin_model("plane_y_sub", {"d_psi": (-math.pi, math.pi)}),
            oracles.plane_y_sub_dynamics((-math.pi, math.pi)),
        ),
        (builtin_model("integrator1d", {}), oracles.integrator1d_dynamics()),
        (builtin_model("decoupled2d", {}), oracles.decoupled2d_dynamics()),
        (builtin_model("quad_lateral", quad), oracles.quad_lateral_dynamics(**quad)),
    ]
    return [(m, dyn, rng_box[m.label]) for m, dyn in cases]


def test_builtin_model_shapes_and_labels():
    m = builtin_model("plane_x_sub", {"d_v": (6, 12), "omega": (-1, 1)})
    assert m.state_dim == 2
    assert m.disturbance["d_v"].as_tuple() == (6.0, 12.0)
    assert builtin_model("plane4d", {}).state_dim == 4


def test_builtin_model_integrator_hamiltonian_is_neg_abs():
    m = builtin_model("integrator1d", {"u": (-1, 1)})
    for p in (-2.0, -0.5, 0.0, 1.7):
        assert hamiltonian(m, [0.3], [p]) == pytest.approx(-abs(p), abs=1e-15)


def test_builtin_model_quad_pitch_channel():
    m = builtin_model("quad_lateral", {"d0": 10, "d1": 8, "n0": 10, "gravity": 9.81})
    z = np.array([0.2, -1.0, 0.3, 0.05])
    # costate picking out the second state derivative: g * tan(z3)
    assert hamiltonian(m, z, [0, 1, 0, 0]) == pytest.approx(9.81 * math.tan(0.3), abs=1e-12)


def test_builtin_model_errors():
    with pytest.raises(ValueError, match="unknown builtin model"):
        builtin_model("rocket", {})
    with pytest.raises(ValueError, match="missing parameter 'd_v'"):
        builtin_model("plane_x_sub", {})
    with pytest.raises(ValueError, match="missing parameter 'd_psi'"):
        builtin_model("plane_y_sub", {})
    with pytest.raises(ValueError, match="missing parameter 'n0'"):
        builtin_model("quad_lateral", {"d0": 1, "d1": 1, "gravity": 9.81})
    with pytest.raises(ValueError, match="unknown parameters"):
        builtin_model("integrator1d", {"uu": (0, 1)})


def test_hamiltonian_plane_x_sub_worked_example():
    # max over d_v of d_v*cos(0)*1 plus min over omega of -2*omega
    m = builtin_model("plane_x_sub", {"d_v": (6, 12), "omega": (-1, 1)})
    value = hamiltonian(m, [0.0, 0.0], [1.0, -2.0])
    assert value == pytest.approx(10.0, abs=1e-12)
    f, cu, cd = oracles.plane_x_sub_dynamics((6, 12))
    brute = oracles.brute_hamiltonian(f, cu, cd, [0.0, 0.0], [1.0, -2.0], samples=100)
    assert value == pytest.approx(brute, abs=1e-3)
    assert value >= brute - 1e-12


def test_hamiltonian_plane_y_sub_worked_example():
    m = builtin_model("plane_y_sub", {"d_psi": (-math.pi, math.pi), "accel": (-1, 1)})
    value = hamiltonian(m, [0.0, 8.0], [1.0, 0.0])
    assert value == pytest.approx(8.0, abs=1e-12)
    f, cu, cd = oracles.plane_y_sub_dynamics((-math.pi, math.pi))
    brute = oracles.brute_hamiltonian(f, cu, cd, [0.0, 8.0], [1.0, 0.0], samples=200)
    assert value == pytest.approx(brute, abs=1e-3)
    assert value >= brute - 1e-12


def test_hamiltonian_zero_costate_is_zero():
    for model, _, _ in _models_with_oracles():
        z = np.linspace(0.1, 0.4, model.state_dim)
        assert hamiltonian(model, z, np.zeros(model.state_dim)) == 0.0


def test_hamiltonian_dimension_mismatch():
    m = builtin_model("integrator1d", {})
    with pytest.raises(ValueError):
        hamiltonian(m, [0.0, 1.0], [1.0])


def test_hamiltonian_against_brute_force_sampling():
    # Costates are drawn with unit-scale components (the regime the solver
    # produces for signed-distance-like targets); the tolerance covers the
    # sin-channel peak miss of the 60-point sampling.
    rng = np.random.default_rng(2024)
    for model, (f, cu, cd), (lo, hi) in _models_with_oracles():
        for _ in range(100):
            z = rng.uniform(lo, hi)
            p = rng.uniform(-1, 1, size=model.state_dim)
            closed = hamiltonian(model, z, p)
            brute = oracles.brute_hamiltonian(f, cu, cd, z, p, samples=60)
            assert closed >= brute - 1e-12
            assert closed == pytest.approx(brute, abs=5e-3)


def test_hamiltonian_positive_homogeneity():
    rng = np.random.default_rng(5)
    for model, _, (lo, hi) in _models_with_oracles():
        for _ in range(50):
            z = rng.uniform(lo, hi)
            p = rng.normal(size=model.state_dim)
            c = float(rng.uniform(0.1, 10))
            h1 = hamiltonian(model, z, p)
            hc = hamiltonian(model, z, c * np.asarray(p))
            assert hc == pytest.approx(c * h1, rel=1e-12, abs=1e-12)


def test_dissipation_bound_examples():
    box_x = [Interval(-40, 40), Interval(-math.pi, math.pi)]
    mx = builtin_model("plane_x_sub", {"d_v": (6, 12), "omega": (-1, 1)})
    assert dissipation_bound(mx, 0, box_x) == pytest.approx(12.0)
    assert dissipation_bound(mx, 1, box_x) == pytest.approx(1.0)
    m4 = builtin_model("plane4d", {"accel": (-1, 1)})
    box4 = [Interval(-40, 40), Interval(-40, 40), Interval(-math.pi, math.pi), Interval(6, 12)]
    assert dissipation_bound(m4, 3, box4) == pytest.approx(1.0)
    assert dissipation_bound(m4, 0, box4) == pytest.approx(12.0)
    with pytest.raises(ValueError):
        dissipation_bound(m4, 4, box4)


def test_dissipation_bound_dominates_flow_samples():
    rng = np.random.default_rng(99)
    for model, (f, cu, cd), (lo, hi) in _models_with_oracles():
        box = [Interval(a, b) for a, b in zip(lo, hi)]
        alphas = [dissipation_bound(model, k, box) for k in range(model.state_dim)]
        n = 100_000
        z = rng.uniform(lo, hi, size=(n, model.state_dim)).T
        u = [rng.uniform(a, b, size=n) for a, b in cu]
        d = [rng.uniform(a, b, size=n) for a, b in cd]
        derivs = f(z, u, d)
        for k in range(model.state_dim):
            assert np.all(np.abs(derivs[k]) <= alphas[k] + 1e-9)


def test_control_grows_flag_flips_optimization():
    grow = builtin_model("integrator1d", {"u": (-1, 1)})
    inhibit = builtin_model("integrator1d", {"u": (-1, 1), "control_grows": False})
    assert hamiltonian(grow, [0.0], [2.0]) == pytest.approx(-2.0)
    assert hamiltonian(inhibit, [0.0], [2.0]) == pytest.approx(2.0)


def test_paper_literal_sin_flag():
    cos_model = builtin_model("plane_x_sub", {"d_v": (6, 12)})
    sin_model = builtin_model("plane_x_sub", {"d_v": (6, 12), "paper_literal_sin": True})
    # at psi = 0 the literal-sin variant has no px motion at all
    assert hamiltonian(cos_model, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(12.0)
    assert hamiltonian(sin_model, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(0.0)
    f, cu, cd = oracles.plane_x_sub_dynamics((6, 12), literal_sin=True)
    brute = oracles.brute_hamiltonian(f, cu, cd, [0.0, 1.0], [0.7, -0.2], samples=150)
    assert hamiltonian(sin_model, [0.0, 1.0], [0.7, -0.2]) == pytest.approx(brute, abs=1e-3)


def test_all_builtin_names_construct():
    params = {
        "plane_x_sub": {"d_v": (6, 12)},
        "plane_y_sub": {"d_psi": (-1, 1)},
        "quad_lateral": {"d0": 1.0, "d1": 1.0, "n0": 1.0, "gravity": 9.81},
    }
    for name in BUILTIN_MODEL_NAMES:
        m = builtin_model(name, params.get(name, {}))
        assert m.label == name
