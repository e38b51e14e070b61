"""Reference matrices used throughout the tests and shipped configs."""

import numpy as np

EXAMPLE_A = np.array(
    [
        [0.1795, 0.0861, 0.1860, 0.0924, 0.1661],
        [0.1429, 0.1680, 0.0517, 0.2626, 0.3272],
        [0.3558, 0.0127, 0.2797, 0.0221, 0.3227],
        [0.2766, 0.2654, 0.1611, 0.0408, 0.0745],
        [0.3539, 0.3059, 0.0596, 0.2933, 0.3147],
    ]
)

ILL_CONDITIONED_A = np.array(
    [
        [0.5086, 0.3496, 0.0795, -0.2044, -0.3530],
        [-0.6168, 0.1553, 0.5224, -0.0293, 0.0137],
        [-0.5526, 0.0069, 0.0008, -0.3189, 0.4345],
        [0.4805, 0.8053, -0.5502, 0.6173, -0.3041],
        [-0.4307, 0.8960, 0.0255, 0.1454, 0.6965],
    ]
)

NAMED = {"exA": EXAMPLE_A, "crazyA": ILL_CONDITIONED_A}


def mean_value_matrix(n: int, lam: float) -> np.ndarray:
    """``a G`` with ``a = lam / n``."""
    return np.full((n, n), lam / n)


def permutation_cycle(n: int) -> np.ndarray:
    """Adjacency of the cycle ``0 -> 1 -> ... -> n-1 -> 0``."""
    return np.roll(np.eye(n), 1, axis=1)


def wielandt(n: int) -> np.ndarray:
    """Primitive matrix attaining the largest index of primitivity."""
    W = np.zeros((n, n))
    for i in range(n - 1):
        W[i, i + 1] = 1.0
    W[n - 1, 0] = 1.0
    W[n - 1, 1] = 1.0
    return W


def get(name: str) -> np.ndarray:
    try:
        return NAMED[name].copy()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(NAMED)}") from None
