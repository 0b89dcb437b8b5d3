"""Small closed-form fields shared by the tests."""

import numpy as np

from axiblow.field import AnalyticField


def poly_field(name, value, grad, support=None, **kw):
    return AnalyticField(name=name, value_fn=value, grad_fn=grad, support_fn=support, **kw)


def x1sq():
    return poly_field("x1^2", lambda a, b: a * a + 0 * b, lambda a, b: (2 * a + 0 * b, 0 * a + 0 * b))


def x1sq_x2():
    return poly_field("x1^2 x2", lambda a, b: a * a * b, lambda a, b: (2 * a * b, a * a))


def x1sq_x2sq():
    return poly_field("x1^2 x2^2", lambda a, b: a * a * b * b, lambda a, b: (2 * a * b * b, 2 * a * a * b))


def linear_x1(c):
    return poly_field("c x1", lambda a, b: c * a + 0 * b, lambda a, b: (c + 0 * a, 0 * b))


def gamma_x1sq(gamma):
    return poly_field("gamma x1^2", lambda a, b: gamma * a * a + 0 * b,
                      lambda a, b: (2 * gamma * a + 0 * b, 0 * a + 0 * b),
                      support=lambda a, b: (np.asarray(a) > 0) & np.isfinite(np.asarray(b)),
                      vertex=(0.0, 0.5))
