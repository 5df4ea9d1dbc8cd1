"""Reproducible, splittable random streams.

A stream is identified by ``(seed, stream_id)``. The pair is hashed by
:class:`numpy.random.SeedSequence` so distinct ids give independent PCG64
generators and the same pair always reproduces the same draws.
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

StreamId = Union[int, Iterable[int]]


def _as_key(stream_id: StreamId) -> tuple[int, ...]:
    if isinstance(stream_id, (int, np.integer)):
        return (int(stream_id),)
    return tuple(int(s) for s in stream_id)


class RngStream:
    """A numpy Generator bound to a ``(seed, stream_id)`` pair."""

    def __init__(self, seed: int, stream_id: StreamId = 0):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(seed)
        self.stream_id = _as_key(stream_id)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.stream_id)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream; does not consume draws from ``self``."""
        return RngStream(self.seed, self.stream_id + (int(index),))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    # thin pass-throughs used throughout the samplers
    def random(self, size=None):
        return self.generator.random(size)

    def exponential(self, size=None):
        return self.generator.standard_exponential(size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size)

    def beta(self, a, b, size=None):
        return self.generator.beta(a, b, size)

    def gamma(self, shape, size=None):
        return self.generator.standard_gamma(shape, size)


def as_stream(rng: RngStream | int | None) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        rng = int(np.random.SeedSequence().entropy % (2**63))
    return RngStream(int(rng))
