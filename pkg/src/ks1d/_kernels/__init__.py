"""Hot numerical kernels with a switchable backend.

Two implementations of the same three primitives:

* ``compiled`` -- Cython extension (built at install time when a C
  compiler is present)
* ``python``   -- numpy/scipy fallback

The default is the compiled backend when available.  Override with the
environment variable ``KS1D_BACKEND`` (``auto`` | ``compiled`` |
``python``) or at runtime via :func:`set_backend`.
"""

import os

from . import numpy_backend

_IMPLS = {"python": numpy_backend}
try:
    from . import _corex
    _IMPLS["compiled"] = _corex
except ImportError:
    pass

_active_name = None
_active = None


def available_backends():
    return sorted(_IMPLS)


def set_backend(name: str) -> str:
    """Select a kernel backend; returns the name actually activated."""
    global _active_name, _active
    if name == "auto":
        name = "compiled" if "compiled" in _IMPLS else "python"
    if name not in _IMPLS:
        raise ValueError(
            f"backend {name!r} not available (have {available_backends()})")
    _active_name = name
    _active = _IMPLS[name]
    return name


def get_backend() -> str:
    return _active_name


set_backend(os.environ.get("KS1D_BACKEND", "auto"))


def diffusion_solve(f, coeff_faces, dt, h):
    """Solve (I - dt*L) x = f with L the flux-form diffusion operator
    built from the given interior-face coefficients (no-flux boundaries).
    Conserves sum(x) = sum(f) up to roundoff and maps f >= 0 to x >= 0."""
    return _active.diffusion_solve(f, coeff_faces, dt, h)


def chemotaxis_rates(u, v, chi, h):
    """Upwind divergence rates for the drift term: cell rates of
    -(chi * u * v_x)_x with zero boundary fluxes."""
    return _active.chemotaxis_rates(u, v, chi, h)


def laplacian_neumann(f, h):
    """Second-difference Laplacian with reflecting (no-flux) boundaries."""
    return _active.laplacian_neumann(f, h)
