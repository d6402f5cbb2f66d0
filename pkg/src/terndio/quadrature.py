"""Small quadrature helpers shared by the weight and exponential-sum modules."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=8)
def _gl_rule(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_panels(a: float, b: float, panels: int, order: int = 10):
    """Nodes and weights of a composite Gauss-Legendre rule on [a, b].

    Returns flat arrays (nodes, weights) of length panels*order.
    """
    if panels < 1:
        panels = 1
    x, w = _gl_rule(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def oscillatory_panels(span: float, freq: float, radians_per_panel: float = 2.5,
                       min_panels: int = 2) -> int:
    """Panel count resolving e^{i*freq*x} over an interval of length `span`.

    Total phase is |freq|*span radians; order-10 Gauss panels stay on their
    accuracy plateau up to a few radians per panel.
    """
    return max(min_panels, int(np.ceil(abs(freq) * span / radians_per_panel)))


def trapezoid_weights(n: int):
    """Composite trapezoid weights for n nodes (unit spacing): [1/2,1,..,1,1/2]."""
    w = np.ones(n)
    if n >= 2:
        w[0] = 0.5
        w[-1] = 0.5
    return w
