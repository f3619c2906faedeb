import numpy as np
import pytest

from levelset import AnalyticField, build_structured, grade_structured


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def unit_square(n, degree=1, continuity=None):
    return build_structured([(0.0, 1.0), (0.0, 1.0)], [n, n], degree, continuity)


def unit_line(n, degree=1):
    return build_structured([(0.0, 1.0)], [n], degree)


def alternating_line_patch(n=10):
    """1D mesh with element widths alternating 0.05/0.15 (for n=10)."""
    pair = 2.0 / n
    widths = np.tile([0.25 * pair, 0.75 * pair], n // 2)
    nodes = np.concatenate([[0.0], np.cumsum(widths)])
    law = lambda s: np.interp(s, np.linspace(0.0, 1.0, n + 1), nodes)
    return grade_structured(unit_line(n), law)


def geometric_line_patch(n=10, ratio=1.04):
    """1D mesh whose element widths grow geometrically by ``ratio``."""
    widths = ratio ** np.arange(n)
    nodes = np.concatenate([[0.0], np.cumsum(widths)])
    nodes /= nodes[-1]
    law = lambda s: np.interp(s, np.linspace(0.0, 1.0, n + 1), nodes)
    return grade_structured(unit_line(n), law)


def graded_square(n=40, degree=2, powers=(2.0, 1.6)):
    """Unit square graded toward both axes (distinct powers keep x-y asymmetry)."""
    base = unit_square(n, degree)
    px, py = powers
    return grade_structured(base, (lambda s: s**px, lambda s: s**py))


def linear_field(patch, a, b=0.0, c=0.0):
    """Analytic a*x + b*y + c with its exact gradient."""
    grad = np.array([a, b][: patch.dim], dtype=np.float64)

    def fn(x):
        return x[..., 0] * a + (x[..., 1] * b if patch.dim > 1 else 0.0) + c

    def grad_fn(x):
        return np.broadcast_to(grad, np.shape(x)).copy()

    return AnalyticField(patch, fn, grad_fn)
