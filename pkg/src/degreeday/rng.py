"""Counter-based standard normal streams.

Path ``k`` always reads Philox counter block(s) ``k * blocks_per_path ...``,
so any contiguous slice of paths can be generated independently and the
result is bit-identical to generating all paths at once. Normals come from
the inverse CDF, which consumes exactly one 64-bit word per variate.
"""

import numpy as np
from scipy import special

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four uint64 per counter increment


def _blocks_per_path(dim):
    return -(-dim // _WORDS_PER_BLOCK)


def uniforms(seed, n_paths, dim, start=0):
    """Open-interval uniforms, shape ``(n_paths, dim)``, for paths ``start .. start+n_paths-1``."""
    if n_paths < 0 or dim < 1 or start < 0:
        raise ValueError("need n_paths >= 0, dim >= 1, start >= 0")
    bpp = _blocks_per_path(dim)
    bitgen = np.random.Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF)
    if start:
        bitgen.advance(start * bpp)
    raw = bitgen.random_raw(n_paths * bpp * _WORDS_PER_BLOCK)
    raw = raw.reshape(n_paths, bpp * _WORDS_PER_BLOCK)[:, :dim]
    # top 53 bits, shifted to the cell midpoint: never 0, never 1
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normals(seed, n_paths, dim=1, start=0):
    """Standard normal draws, shape ``(n_paths, dim)``; see :func:`uniforms`."""
    return special.ndtri(uniforms(seed, n_paths, dim, start))
