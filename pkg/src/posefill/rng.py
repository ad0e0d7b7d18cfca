"""Deterministic, splittable random streams.

Every random draw in the package flows through an :class:`RngStream`, a thin
wrapper over numpy's PCG64 generator seeded from a ``SeedSequence``. Equal
seeds give bit-identical draw sequences across runs and platforms. Parallel
or independent consumers must use :meth:`RngStream.split` rather than sharing
one stream.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


class RngStream:
    """A seeded random stream with deterministic splitting.

    ``split`` derives child streams via ``SeedSequence.spawn``; each call
    advances the spawn counter, so the n-th split of a given stream is
    reproducible but repeated calls yield fresh, independent children.
    """

    def __init__(self, seed):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            try:
                self._seq = np.random.SeedSequence(int(seed))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"seed must be an integer, got {seed!r}") from exc
        self._gen = np.random.Generator(np.random.PCG64(self._seq))

    @property
    def seed_entropy(self):
        return self._seq.entropy

    def split(self, n: int) -> list["RngStream"]:
        """Derive ``n`` independent child streams."""
        if n < 1:
            raise ConfigError("split count must be >= 1")
        return [RngStream(seq) for seq in self._seq.spawn(n)]

    def uniform(self, shape=None) -> np.ndarray:
        """Uniform float64 draws in [0, 1)."""
        return self._gen.random(shape)

    def uniform_range(self, low, high, shape=None):
        return low + (high - low) * self._gen.random(shape)

    def normal(self, shape=None, scale=1.0):
        return self._gen.normal(0.0, scale, shape)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, low, high, shape=None):
        return self._gen.integers(low, high, shape)
