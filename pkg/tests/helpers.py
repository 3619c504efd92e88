import numpy as np


class FunctionModel:
    """Callable model defined by a formula over coordinate columns.

    ``fn`` receives a list of columns (arrays or Dual2 values) and returns a
    tuple of outputs, so the same formula yields values and input derivatives.
    """

    def __init__(self, fn, out_dim=1):
        self.fn = fn
        self.out_dim = out_dim

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cols = [x[:, j] for j in range(x.shape[1])]
        return np.stack([np.broadcast_to(np.asarray(o, dtype=float), (len(x),)) for o in self.fn(cols)], 1)

    def jet(self, x, coords):
        from gapinn.autodiff import Dual2Scalar
        from gapinn.problems import lift_columns

        x = np.atleast_2d(np.asarray(x, dtype=float))
        n, k = len(x), len(coords)
        vals, d1s, d2s = [], [], []
        for o in self.fn(lift_columns(x, coords)):
            if not isinstance(o, Dual2Scalar):
                o = Dual2Scalar(o, 0.0, 0.0)
            vals.append(np.broadcast_to(o.val, (n,)))
            d1s.append(np.broadcast_to(o.d1, (k, n)))
            d2s.append(np.broadcast_to(o.d2, (k, n)))
        return Dual2Scalar(np.stack(vals, -1), np.stack(d1s, -1), np.stack(d2s, -1))


def central_fd(f, theta, h=1e-5):
    g = np.zeros_like(theta)
    for i in range(len(theta)):
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += h
        tm[i] -= h
        g[i] = (f(tp) - f(tm)) / (2 * h)
    return g
