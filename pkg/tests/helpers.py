import numpy as np

from asqp.model import Residual


def rel_err(a, b, r0):
    """Relative direction error; against ||r0|| when the reference is zero."""
    scale = np.linalg.norm(b)
    if scale <= 1e-12 * np.linalg.norm(r0):
        scale = np.linalg.norm(r0)
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / max(scale, 1e-300)


def random_direction_case(seed, n_max=40):
    """Random (A0, r0) with A0 full row rank, 0 <= rows <= n."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(0, n + 1))
    A0 = rng.standard_normal((k, n))
    r0 = rng.standard_normal(n)
    return A0, r0


def white(r0):
    return Residual(np.asarray(r0, dtype=float), "whitened")
