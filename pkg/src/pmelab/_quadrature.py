"""Fixed-order Gauss-Legendre panels used where many integrals are needed at once.

Adaptive scalar quadrature (``scipy.integrate.quad``) is used to build
reference tables; these helpers evaluate the short, smooth remainders
in a vectorized way.
"""
import warnings

import numpy as np
from scipy import integrate

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)


def gauss_legendre(f, a, b, order=None):
    """Integrate ``f`` over each interval ``[a_k, b_k]`` with one GL panel.

    ``f`` must accept an array of shape ``(..., order)`` and broadcast.
    """
    if order is None:
        x, w = _GL_X, _GL_W
    else:
        x, w = np.polynomial.legendre.leggauss(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[..., None] + half[..., None] * x
    return half * np.sum(w * f(nodes), axis=-1)


def log_gauss_legendre(f, a, b, order=None):
    """Integrate ``f(s) ds`` over ``[a, b]`` (``a, b > 0``) in the variable ``log s``."""
    return gauss_legendre(lambda x: np.exp(x) * f(np.exp(x)), np.log(a), np.log(b), order)


def quiet_quad(*args, **kwargs):
    """:func:`scipy.integrate.quad` without roundoff warnings.

    Callers request tolerances near machine precision; quad's warning that
    it cannot certify them carries no information here.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(*args, **kwargs)
