import numpy as np
import pytest

from ks1d.discretization import (assemble_u_rhs, assemble_v_rhs,
                                 face_coefficients, implicit_diffusion_solve,
                                 laplacian_neumann)
from ks1d.errors import NumericStateError
from ks1d.model import GridSpec, Params, PowerLawDiffusion, State


def _rhs_oracle(u, v, chi, model, h):
    # independent flux assembly: F = a(face mean) u_x - u_upwind w
    w = chi * (v[1:] - v[:-1]) / h
    upwind = np.where(w >= 0.0, u[:-1], u[1:])
    F = model.a(0.5 * (u[:-1] + u[1:])) * (u[1:] - u[:-1]) / h - upwind * w
    F = np.concatenate([[0.0], F, [0.0]])
    return (F[1:] - F[:-1]) / h


def test_face_coefficients_arithmetic_mean():
    g = GridSpec(3)
    d = PowerLawDiffusion(1.0)
    u = np.array([0.0, 2.0, 6.0])
    assert np.allclose(face_coefficients(u, d, g), [1.0 / 2.0, 1.0 / 5.0])


def test_u_rhs_pure_diffusion_two_cells():
    g = GridSpec(2)
    st = State(0.0, [0.0, 2.0], [0.0, 0.0])
    p = Params(chi=0.0, eps=1.0, mass=1.0)
    rates = assemble_u_rhs(st, p, PowerLawDiffusion(0.0), g)
    # face flux (2-0)/h = 4 spreads mass toward the empty cell
    assert np.allclose(rates, [8.0, -8.0])


def test_u_rhs_pure_drift_two_cells():
    g = GridSpec(2)
    st = State(0.0, [1.0, 1.0], [-0.5, 0.5])
    p = Params(chi=1.0, eps=1.0, mass=1.0)
    rates = assemble_u_rhs(st, p, PowerLawDiffusion(0.0), g)
    assert np.allclose(rates, [-4.0, 4.0])


def test_u_rhs_matches_independent_assembly():
    rng = np.random.default_rng(21)
    p = Params(chi=1.3, eps=0.5, mass=1.0)
    d = PowerLawDiffusion(1.5)
    for _ in range(40):
        n = int(rng.integers(3, 150))
        g = GridSpec(n)
        u = rng.uniform(0.0, 4.0, n)
        v = rng.normal(size=n)
        st = State(0.0, u, v - np.mean(v))
        got = assemble_u_rhs(st, p, d, g)
        want = _rhs_oracle(u, st.v, p.chi, d, g.h)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-9)
        assert abs(np.sum(got)) <= 1e-10 * max(1.0, np.max(np.abs(got)))


def test_u_rhs_rejects_negative_density():
    g = GridSpec(4)
    bad = State(0.0, [1.0, -0.2, 1.0, 1.0], np.zeros(4))
    p = Params(chi=1.0, eps=1.0, mass=1.0)
    with pytest.raises(NumericStateError):
        assemble_u_rhs(bad, p, PowerLawDiffusion(1.0), g)


def test_u_rhs_consistency_with_continuum():
    # u = 2 + cos(pi x), v = cos(pi x), a = 1/(1+u): smooth fields with
    # no-flux traces; the upwind part limits the rate to first order
    d = PowerLawDiffusion(1.0)
    p = Params(chi=1.0, eps=1.0, mass=2.0)

    def continuum_rate(x):
        c, s = np.cos(np.pi * x), np.sin(np.pi * x)
        return (np.pi ** 2 * c * (2.0 + c - 1.0 / (3.0 + c))
                - np.pi ** 2 * s ** 2 * (1.0 + 1.0 / (3.0 + c) ** 2))

    errs = []
    for n in (128, 256, 512):
        g = GridSpec(n)
        x = g.centers()
        st = State(0.0, 2.0 + np.cos(np.pi * x), np.cos(np.pi * x))
        got = assemble_u_rhs(st, p, d, g)
        errs.append(np.max(np.abs(got - continuum_rate(x))))
    assert errs[2] < errs[1] < errs[0]
    order = np.log2(errs[0] / errs[2]) / 2.0
    assert order > 0.85


def test_v_rhs_formula():
    rng = np.random.default_rng(22)
    n = 64
    g = GridSpec(n)
    u = rng.uniform(0.0, 3.0, n)
    v = rng.normal(size=n)
    st = State(0.0, u, v - np.mean(v))
    p = Params(chi=1.0, eps=0.25, mass=2.0, D=1.5, gamma=0.5)
    want = (1.5 * laplacian_neumann(st.v, g) + u - 2.0 + 0.5 * st.v) / 0.25
    assert np.allclose(assemble_v_rhs(st, p, g), want, rtol=1e-14)


def test_implicit_solve_validation():
    g = GridSpec(4)
    f = np.ones(4)
    with pytest.raises(NumericStateError):
        implicit_diffusion_solve(f, np.ones(4), 0.1, g)    # wrong face count
    with pytest.raises(NumericStateError):
        implicit_diffusion_solve(f, [-1.0, 1.0, 1.0], 0.1, g)
    with pytest.raises(NumericStateError):
        implicit_diffusion_solve(f, np.ones(3), -0.1, g)


def test_implicit_solve_smooths_toward_mean():
    g = GridSpec(32)
    x = g.centers()
    f = 1.0 + np.cos(np.pi * x)
    out = implicit_diffusion_solve(f, np.ones(31), 10.0, g)
    # strong implicit diffusion contracts the profile toward its mean
    assert np.max(np.abs(out - 1.0)) < 0.05
    assert np.sum(out) == pytest.approx(np.sum(f), rel=1e-13)
