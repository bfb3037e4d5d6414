"""Per-sample dexterity and compliance measures."""

import numpy as np

BLOCKS = {"translational": slice(0, 3), "orientational": slice(3, 6)}


def _block(J, block):
    try:
        rows = BLOCKS[block]
    except KeyError:
        raise ValueError(f"block must be one of {tuple(BLOCKS)}, got {block!r}") from None
    return np.asarray(J, dtype=float)[rows]


def block_singular_values(J, block):
    return np.linalg.svd(_block(J, block), compute_uv=False)


def product_of_singular_values(J, block):
    """Product of the singular values of the translational or orientational rows of ``J``."""
    return float(np.prod(block_singular_values(J, block)))
