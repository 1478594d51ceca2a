"""Seeded, splittable random streams.

Every random draw in the package goes through :func:`derive_stream`, so a
trial's randomness depends only on ``(master_seed, stream_index)`` and not on
the order in which trials are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not (0 <= v < _U64):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")

    def generator(self) -> np.random.Generator:
        # SeedSequence hashes (entropy, spawn_key); PCG64 output is platform independent.
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))

    def bytes(self, n: int) -> bytes:
        return self.generator().bytes(n)

    def child(self, index: int) -> "RngStream":
        """Stream for a nested loop, e.g. (trial, snr level)."""
        mixed = np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_index, index)
        ).generate_state(2, dtype=np.uint64)
        return RngStream(int(mixed[0]), int(mixed[1]))


def derive_stream(master: int, index: int) -> RngStream:
    return RngStream(int(master), int(index))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric complex normal entries with E|w|^2 = 1."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def random_unit_signal(rng: np.random.Generator, n: int) -> np.ndarray:
    z = complex_normal(rng, n)
    return z / np.linalg.norm(z)
