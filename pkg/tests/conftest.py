import numpy as np


def composite_simpson(f, a, b, panels=4096):
    """Fixed-panel Simpson rule, independent of the adaptive integrator."""
    x = np.linspace(a, b, 2 * panels + 1)
    y = np.asarray(f(x), dtype=float)
    h = (b - a) / (2 * panels)
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-2:2].sum())
