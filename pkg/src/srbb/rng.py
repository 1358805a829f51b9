"""Counter-based, chunked random streams.

Every chunk of samples gets its own Philox generator keyed by
``(seed, stream, chunk_index)``.  Sample ``i`` of a stream always lands in
chunk ``i // chunk_size`` and is drawn from the same generator state no matter
how many workers process the chunks, so serial and parallel runs agree
bit for bit.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument

DEFAULT_CHUNK = 512


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream: int = 0
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidArgument(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream < 0:
            raise InvalidArgument("stream index must be non-negative")
        if self.chunk_size < 1:
            raise InvalidArgument("chunk_size must be >= 1")

    def with_stream(self, stream: int) -> "RngSpec":
        return replace(self, stream=int(stream))

    def generator(self, chunk: int) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream), int(chunk)))
        return np.random.Generator(np.random.Philox(ss))

    def chunks(self, n_samples: int):
        """Yield ``(chunk_index, size)`` covering ``n_samples`` samples."""
        n_chunks = -(-n_samples // self.chunk_size)
        for c in range(n_chunks):
            yield c, min(self.chunk_size, n_samples - c * self.chunk_size)


def map_chunks(fn, rng: RngSpec, n_samples: int, workers: int = 1):
    """Apply ``fn(generator, size)`` to every chunk and return results in chunk order."""
    jobs = list(rng.chunks(n_samples))
    if workers <= 1 or len(jobs) <= 1:
        return [fn(rng.generator(c), size) for c, size in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(lambda c=c, size=size: fn(rng.generator(c), size)) for c, size in jobs]
        return [f.result() for f in futures]
