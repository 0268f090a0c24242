import math

import numpy as np
import pytest

from hjdecomp.grid import make_grid
from hjdecomp.shapes import ImplicitSurface, combine, sample_on_grid, slab


def test_slab_values():
    s = slab(0, 0.0, 2.0)
    assert s.at([0.0]) == -2.0
    assert s.at([3.0]) == 1.0
    assert s.at([2.0]) == 0.0
    assert s.at([-2.0]) == 0.0


def test_slab_rejects_bad_width():
    with pytest.raises(ValueError):
        slab(0, 0.0, 0.0)
    with pytest.raises(ValueError):
        slab(0, 0.0, -1.0)


def test_combine_intersection_of_position_slabs():
    surface = combine([slab(0, 0, 2), slab(1, 0, 2)], "intersection_max")
    assert surface.at([0.0, 0.0, 1.0, 9.0]) == -2.0
    assert surface.dims == (0, 1)


def test_combine_union_idempotent():
    s = slab(0, 0.5, 1.0)
    u = combine([s, s], "union_min")
    g = make_grid([-2], [2], [33], [False])
    assert np.array_equal(sample_on_grid(u, g).values, sample_on_grid(s, g).values)


def test_combine_complement():
    c = combine([slab(0, 0, 2)], "complement_negate")
    assert c.at([3.0]) == -1.0


def test_combine_errors():
    with pytest.raises(ValueError):
        combine([], "union_min")
    with pytest.raises(ValueError):
        combine([slab(0, 0, 1), slab(0, 0, 2)], "complement_negate")
    with pytest.raises(ValueError):
        combine([slab(0, 0, 1)], "xor")


def test_combine_intersection_membership_property():
    rng = np.random.default_rng(7)
    for _ in range(100):
        members = [
            slab(int(rng.integers(0, 3)), float(rng.normal()), float(rng.uniform(0.1, 2)))
            for _ in range(int(rng.integers(1, 4)))
        ]
        surface = combine(members, "intersection_max")
        z = rng.normal(size=3)
        inside = all(m.at(z) <= 0 for m in members)
        assert (surface.at(z) <= 0) == inside


def test_slab_lipschitz():
    s = slab(0, 0.3, 1.5)
    rng = np.random.default_rng(3)
    pts = rng.uniform(-5, 5, size=(200, 2))
    for a, b in zip(pts[:-1], pts[1:]):
        diff = abs(s.at(a) - s.at(b))
        assert diff <= abs(a[0] - b[0]) + 1e-12
    # constant in other dimensions
    assert s.at([1.0, -4.0]) == s.at([1.0, 4.0])


def test_sample_on_grid_zero_crossing_at_nodes():
    g = make_grid([-40], [40], [41], [False])
    f = sample_on_grid(slab(0, 0, 2), g)
    assert f.values[g.axis(0) == 2.0] == 0.0
    assert f.values[g.axis(0) == -2.0] == 0.0


def test_sample_on_grid_constant_zero():
    surf = ImplicitSurface(lambda coords: np.zeros(()), ())
    g = make_grid([0, 0], [1, 1], [4, 5], [False, False])
    f = sample_on_grid(surf, g)
    assert np.all(f.values == 0.0)


def test_sample_on_grid_4d_target_fraction_matches_enumeration():
    # Count of sub-zero nodes factors over the two position slabs; the
    # oracle enumerates nodes directly.
    n = 21
    g = make_grid(
        [-40, -40, -math.pi, 6], [40, 40, math.pi, 12],
        [n, n, n, n], [False, False, True, False],
    )
    target = combine([slab(0, 0, 2), slab(1, 0, 2)], "intersection_max")
    f = sample_on_grid(target, g)
    count = int(np.count_nonzero(f.values <= 0))

    px_in = int(np.count_nonzero(np.abs(g.axis(0)) <= 2.0))
    py_in = int(np.count_nonzero(np.abs(g.axis(1)) <= 2.0))
    expected = px_in * py_in * n * n
    assert count == expected

    brute = 0
    axes = g.axes()
    for i in range(n):
        for j in range(n):
            if abs(axes[0][i]) <= 2.0 and abs(axes[1][j]) <= 2.0:
                brute += n * n
    assert count == brute


def test_sample_on_grid_dimension_mismatch():
    g = make_grid([0], [1], [5], [False])
    with pytest.raises(ValueError, match="dimension"):
        sample_on_grid(slab(2, 0, 1), g)
