import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from semilinear import Constant, Fourier, LogR, Zero
from semilinear.boundary import eval_boundary
from semilinear.errors import ConfigError, LogAtOrigin


def test_zero():
    assert eval_boundary(Zero(), (1.0, 0.0)) == 0.0


def test_log_r():
    assert eval_boundary(LogR(), (2.0, 0.0)) == pytest.approx(math.log(2.0), abs=1e-15)
    assert eval_boundary(LogR(), (0.0, -2.0)) == pytest.approx(0.693147, abs=1e-6)


def test_fourier_at_north_pole():
    g = Fourier(1.0, (0.0,), (1.0,))
    assert eval_boundary(g, (0.0, 1.0)) == pytest.approx(2.0, abs=1e-15)
    assert not g.radial
    assert Fourier(0.5).radial


def test_log_r_origin():
    with pytest.raises(LogAtOrigin):
        eval_boundary(LogR(), (0.0, 0.0))


def test_constant():
    assert eval_boundary(Constant(-3.5), (7.0, 1.0)) == -3.5


def test_fourier_validation():
    with pytest.raises(ConfigError):
        Fourier(0.0, (float("nan"),))


@given(st.floats(0.1, 5.0), st.floats(-math.pi, math.pi))
def test_log_r_gradient_matches_fd(r, t):
    x, y = r * math.cos(t), r * math.sin(t)
    d = 1e-6
    g = LogR()
    fd = [(g(x + d, y) - g(x - d, y)) / (2 * d), (g(x, y + d) - g(x, y - d)) / (2 * d)]
    np.testing.assert_allclose(np.ravel(g.gradient(x, y)), fd, atol=1e-6 / r ** 2)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=4),
       st.lists(st.floats(-2, 2), min_size=1, max_size=4),
       st.floats(0.2, 3.0), st.floats(-math.pi, math.pi))
def test_fourier_gradient_matches_fd(a, b, r, t):
    g = Fourier(0.3, tuple(a), tuple(b))
    x, y = r * math.cos(t), r * math.sin(t)
    d = 1e-6
    fd = [(g(x + d, y) - g(x - d, y)) / (2 * d), (g(x, y + d) - g(x, y - d)) / (2 * d)]
    np.testing.assert_allclose(np.ravel(g.gradient(x, y)), fd, atol=1e-5 * (1 + 1 / r))
