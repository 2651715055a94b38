"""Synthetic data generators for the five nonlinear pattern classes.

Parabola and W are geometric shapes plus Gaussian noise; the remaining
three are dyadic cell mixtures with uniform margins: cell (cu, cv) gets
probability (1 + strength * sign(cu, cv)) / 16 where sign is the target
interaction's region sign, which loads exactly that interaction and
leaves every other one centred at zero.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "make_parabola",
    "make_w",
    "make_checkerboard",
    "make_fullcross",
    "make_lshape",
    "CLASS_GENERATORS",
    "random_rank_pair",
    "subtype_context_labels",
]


def make_parabola(n: int, rng, noise: float = 0.30):
    x = rng.random(n)
    y = (x - 0.5) ** 2 + rng.normal(0.0, noise * 0.25, n)
    return x, y


def make_w(n: int, rng, noise: float = 0.20):
    x = rng.random(n)
    quarter = np.minimum((x * 4).astype(int), 3)
    base = np.where(quarter % 2 == 1, 0.75, 0.25)
    y = base + rng.normal(0.0, noise, n)
    return x, y


def _axis_signs(mask: int) -> np.ndarray:
    # sign of the selected depth-2 digit product on each quarter cell
    out = np.ones(4, dtype=np.int64)
    for cell in range(4):
        for k in (1, 2):
            if mask >> (k - 1) & 1:
                out[cell] *= 2 * (cell >> (2 - k) & 1) - 1
    return out


def _cell_mixture(n: int, rng, a_mask: int, b_mask: int, strength: float):
    sa = _axis_signs(a_mask)
    sb = _axis_signs(b_mask)
    weights = (1.0 + strength * np.outer(sa, sb).reshape(-1)) / 16.0
    cells = rng.choice(16, size=n, p=weights)
    cu, cv = cells // 4, cells % 4
    x = (cu + rng.random(n)) / 4.0
    y = (cv + rng.random(n)) / 4.0
    return x, y


def make_checkerboard(n: int, rng, strength: float = 0.55):
    return _cell_mixture(n, rng, a_mask=2, b_mask=2, strength=strength)


def make_fullcross(n: int, rng, strength: float = 0.55):
    return _cell_mixture(n, rng, a_mask=3, b_mask=3, strength=strength)


def make_lshape(n: int, rng, strength: float = 0.55):
    return _cell_mixture(n, rng, a_mask=3, b_mask=2, strength=strength)


CLASS_GENERATORS = {
    "Parabolic": make_parabola,
    "W": make_w,
    "Checkerboard": make_checkerboard,
    "FullCross": make_fullcross,
    "LShape": make_lshape,
}


def random_rank_pair(n: int, rng):
    return (
        rng.permutation(n) + 1,
        rng.permutation(n) + 1,
    )


def subtype_context_labels() -> list[str]:
    """817 tumor-subtype labels with the published context sizes.

    LumA 415, LumB 176, Her2 65, Basal 136, Normal 25; the four analysis
    contexts come out at 817 / 656 / 241 / 415 samples.
    """
    counts = {"LumA": 415, "LumB": 176, "Her2": 65, "Basal": 136, "Normal": 25}
    labels: list[str] = []
    for name, count in counts.items():
        labels.extend([name] * count)
    assert len(labels) == 817
    return labels
