"""Counter-based random number streams for reproducible parallel Monte Carlo.

Every Monte Carlo replicate owns a `Stream` derived from (master seed, path of
integer indices).  Streams built from the same seed and path produce identical
output regardless of worker scheduling, so experiment results depend only on
the master seed and the per-replicate partitioning rule, never on the worker
count.

Normal variates are produced by inverse-CDF transformation of uniforms and
exponentials by -log(uniform), keeping every draw a deterministic function of
the underlying Philox counter sequence.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

# Uniforms are clipped away from 0 before log/ndtri transforms.
_TINY = 1e-300


class Stream:
    """A keyed, counter-based uniform random stream with spawnable children.

    Parameters
    ----------
    seed : int
        Master seed (any nonnegative integer, typically 64-bit).
    path : tuple of int, optional
        Spawn path distinguishing this stream from siblings under the same
        master seed.
    """

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        if seed < 0:
            raise ValueError("seed must be nonnegative")
        self.seed = int(seed)
        self.path = tuple(int(k) for k in path)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))

    def child(self, *indices: int) -> "Stream":
        """Return an independent stream keyed by this stream's path + indices."""
        return Stream(self.seed, self.path + tuple(indices))

    def uniforms(self, size: int) -> np.ndarray:
        """Uniform(0,1) variates, clipped away from exact 0."""
        u = self._gen.random(size)
        return np.maximum(u, _TINY)

    def normals(self, size: int) -> np.ndarray:
        """Standard normal variates via inverse CDF of uniforms."""
        return ndtri(self.uniforms(size))

    def exponentials(self, size: int) -> np.ndarray:
        """Standard exponential variates via -log(uniform)."""
        return -np.log(self.uniforms(size))

    def __repr__(self) -> str:
        return f"Stream(seed={self.seed}, path={self.path})"
