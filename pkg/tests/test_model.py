import io
import math

import numpy as np
import pytest

from ks1d.errors import DivergentTailError, InputDomainError, NumericStateError
from ks1d.model import (GridSpec, Params, PowerLawDiffusion, State,
                        TabulatedDiffusion, as_cell_field, cumulative_integral,
                        load_diffusion_table)


def test_grid_geometry():
    g = GridSpec(8)
    assert g.h == 0.125
    c = g.centers()
    e = g.edges()
    assert c[0] == pytest.approx(0.0625)
    assert c[-1] == pytest.approx(1 - 0.0625)
    assert e[0] == 0.0 and e[-1] == pytest.approx(1.0)
    assert np.allclose(np.diff(e), g.h)


def test_grid_too_small():
    with pytest.raises(InputDomainError):
        GridSpec(1)


@pytest.mark.parametrize("kwargs", [
    dict(chi=-1.0, eps=1.0, mass=1.0),
    dict(chi=1.0, eps=0.0, mass=1.0),
    dict(chi=1.0, eps=1.0, mass=0.0),
    dict(chi=1.0, eps=1.0, mass=1.0, D=0.0),
])
def test_params_rejects_bad_values(kwargs):
    with pytest.raises(InputDomainError):
        Params(**kwargs)


def test_as_cell_field_coercion():
    arr = as_cell_field([1, 2, 3])
    assert arr.dtype == np.float64
    with pytest.raises(NumericStateError):
        as_cell_field([[1.0, 2.0]])
    with pytest.raises(NumericStateError):
        as_cell_field([1.0, np.nan])
    with pytest.raises(NumericStateError):
        as_cell_field([1.0, 2.0], n_cells=3)


def test_state_arrays_frozen():
    s = State(0.0, [1.0, 2.0], [0.5, -0.5])
    assert not s.u.flags.writeable
    with pytest.raises(ValueError):
        s.u[0] = 9.0
    assert s.n_cells == 2


def test_state_validate():
    g = GridSpec(4)
    p = Params(chi=1.0, eps=1.0, mass=1.0)
    good = State(0.0, np.ones(4), np.array([1.0, -1.0, 1.0, -1.0]))
    good.validate(g, p)

    with pytest.raises(NumericStateError):
        State(0.0, np.ones(8), np.zeros(8)).validate(g, p)
    with pytest.raises(NumericStateError):
        State(0.0, [1.0, -0.1, 1.0, 2.1], np.zeros(4)).validate(g, p)
    # mass off by 10%
    with pytest.raises(NumericStateError):
        State(0.0, 1.1 * np.ones(4), np.zeros(4)).validate(g, p)
    # gamma = 0 demands mean-zero v
    with pytest.raises(NumericStateError):
        State(0.0, np.ones(4), np.ones(4)).validate(g, p)


def test_cumulative_integral_matches_prefix_sums():
    g = GridSpec(16)
    rng = np.random.default_rng(3)
    f = rng.normal(size=16)
    c = cumulative_integral(f, g)
    assert c[0] == pytest.approx(f[0] * g.h)
    assert c[-1] == pytest.approx(np.sum(f) * g.h)
    assert np.allclose(np.diff(c), f[1:] * g.h)


def test_power_law_coefficient():
    d = PowerLawDiffusion(2.0)
    assert d.a(0.0) == 1.0
    assert d.a(1.0) == 0.25
    assert np.allclose(d.a([0.0, 3.0]), [1.0, 1.0 / 16.0])
    with pytest.raises(InputDomainError):
        d.a(-0.5)
    with pytest.raises(InputDomainError):
        PowerLawDiffusion(-1.0)


def test_power_law_tail_mass_closed_forms():
    # r * integral_r^inf (1+s)^-alpha ds = r (1+r)^(1-alpha) / (alpha-1)
    assert PowerLawDiffusion(2.0).tail_mass(1.0) == pytest.approx(0.5)
    assert PowerLawDiffusion(1.5).tail_mass(1.0) == pytest.approx(math.sqrt(2.0))
    r = np.array([0.0, 0.5, 4.0])
    g = PowerLawDiffusion(3.0).tail_mass(r)
    assert np.allclose(g, r * (1.0 + r) ** (-2.0) / 2.0)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_power_law_divergent_tail(alpha):
    with pytest.raises(DivergentTailError):
        PowerLawDiffusion(alpha).tail_mass(1.0)


def test_tabulated_matches_piecewise_linear_integral():
    # a(s) = 2 - s on [0, 1], then pure power tail s^-3 with a(1) = 1:
    #   g(r) = r * (3/2 - 2 r + r^2/2 + 1/2)    for r <= 1
    #   g(r) = r * r^-2 / 2 = 1 / (2 r)         for r >= 1
    d = TabulatedDiffusion([0.0, 0.5, 1.0], [2.0, 1.5, 1.0], 3.0)
    assert d.a(0.25) == pytest.approx(1.75)
    assert d.a(2.0) == pytest.approx(2.0 ** -3.0)
    for r in (0.0, 0.25, 0.8, 1.0):
        want = r * (2.0 - 2.0 * r + r * r / 2.0)
        assert d.tail_mass(r) == pytest.approx(want, abs=1e-10), r
    assert d.tail_mass(2.0) == pytest.approx(0.25)
    assert d.tail_mass(np.array([4.0]))[0] == pytest.approx(0.125)


def test_tabulated_validation():
    with pytest.raises(InputDomainError):
        TabulatedDiffusion([0.0, 1.0], [1.0, 0.0], 2.0)   # a must stay positive
    with pytest.raises(InputDomainError):
        TabulatedDiffusion([0.5, 1.0], [1.0, 1.0], 2.0)   # must start at 0
    with pytest.raises(InputDomainError):
        TabulatedDiffusion([0.0, 0.0, 1.0], [1.0, 1.0, 1.0], 2.0)
    with pytest.raises(DivergentTailError):
        TabulatedDiffusion([0.0, 1.0], [1.0, 1.0], 1.0).tail_mass(0.5)


def test_load_diffusion_table_roundtrip():
    text = "r,a\n0,2\n0.5,1.5\n1,1\n# tail_exponent=3\n"
    d = load_diffusion_table(io.StringIO(text))
    assert d.tail_exponent == 3.0
    assert d.tail_mass(2.0) == pytest.approx(0.25)


def test_load_diffusion_table_errors():
    with pytest.raises(InputDomainError):
        load_diffusion_table(io.StringIO("x,y\n0,1\n# tail_exponent=2\n"))
    with pytest.raises(InputDomainError):
        load_diffusion_table(io.StringIO("r,a\n0,1\n1,1\n"))
    with pytest.raises(InputDomainError):
        load_diffusion_table(io.StringIO("r,a\n0,1,9\n# tail_exponent=2\n"))
