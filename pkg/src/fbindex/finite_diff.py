"""Central finite differences with one level of Richardson extrapolation.

Fields are callables ``F(t, theta) -> ndarray``; derivatives are taken in
the parameter directions and returned with the same shape as ``F``.
"""
import numpy as np

H1 = 1e-5
H2 = 1e-4


def _shift(F, t, th, axis, d):
    if axis == 0:
        return F(t + d, th)
    return F(t, th + d)


def d1(F, t, th, axis, h=H1):
    """First partial of F along axis 0 (t) or 1 (theta)."""
    def central(s):
        return (_shift(F, t, th, axis, s) - _shift(F, t, th, axis, -s)) / (2.0 * s)
    return (4.0 * central(h / 2) - central(h)) / 3.0


def d2(F, t, th, axis, h=H2):
    """Second partial of F along one axis."""
    f0 = F(t, th)

    def central(s):
        return (_shift(F, t, th, axis, s) - 2.0 * f0 + _shift(F, t, th, axis, -s)) / (s * s)
    return (4.0 * central(h / 2) - central(h)) / 3.0


def partial(F, axis, h=H1):
    """The field dF/d(axis), itself a callable."""
    return lambda t, th: d1(F, t, th, axis, h)


def dz(F, h=H1):
    """d/dz = (d/dt - i d/dtheta)/2 for z = t + i theta."""
    return lambda t, th: 0.5 * (d1(F, t, th, 0, h) - 1j * d1(F, t, th, 1, h))


def dzbar(F, h=H1):
    return lambda t, th: 0.5 * (d1(F, t, th, 0, h) + 1j * d1(F, t, th, 1, h))


def complex_field(F):
    """Wrap a real field so complex arithmetic downstream is uniform."""
    return lambda t, th: np.asarray(F(t, th), dtype=complex)
