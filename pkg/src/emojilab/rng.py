"""Deterministic random streams shared by every resampling operation.

All randomness in the toolkit flows through one portable scheme so that
independent implementations can reproduce replicate streams bit for bit:

* seed derivation: ``derive_seed(master, index) = splitmix64(master XOR index)``
  where ``splitmix64`` is the Stafford mix13 step of the SplitMix64 generator;
* generation: xoshiro256** seeded with four successive SplitMix64 outputs
  starting from the derived seed;
* uniforms: the top 53 bits of each 64-bit output, scaled by 2**-53;
* bounded draws: ``floor(u * n)``;
* permutations: stable argsort of sequentially drawn uniforms (ties, which
  have probability ~2**-53, resolve by index).

`Xoshiro256` is the scalar generator; `XoshiroStreams` advances many
independently seeded streams in lockstep with vectorized numpy ops, which is
how bootstrap replicates are generated without Python-level loops.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1

_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_M1 = 0xBF58476D1CE4E5B9
_SM64_M2 = 0x94D049BB133111EB


def splitmix64(state: int) -> int:
    """One SplitMix64 step: advance ``state`` by the golden gamma and mix."""
    z = (state + _SM64_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * _SM64_M1) & _MASK64
    z = ((z ^ (z >> 27)) * _SM64_M2) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Replicate/child seed: SplitMix64 of (master XOR index), both mod 2^64."""
    return splitmix64((master_seed ^ index) & _MASK64)


def hash_tag(tag: str) -> int:
    """Stable 64-bit tag for deriving named substreams (corpus ids, emoji)."""
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _seed_state(seed: int) -> list[int]:
    # xoshiro256** seeding recipe: four successive SplitMix64 outputs.
    state = []
    s = seed & _MASK64
    for _ in range(4):
        s = (s + _SM64_GAMMA) & _MASK64
        z = ((s ^ (s >> 30)) * _SM64_M1) & _MASK64
        z = ((z ^ (z >> 27)) * _SM64_M2) & _MASK64
        state.append(z ^ (z >> 31))
    return state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """Scalar xoshiro256** generator."""

    def __init__(self, seed: int):
        self._s = _seed_state(seed)

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def below(self, n: int) -> int:
        """Draw from {0, ..., n-1} as floor(u * n)."""
        return int(self.uniform() * n)

    def permutation(self, n: int) -> np.ndarray:
        """Stable argsort of n sequential uniforms."""
        keys = np.array([self.uniform() for _ in range(n)])
        return np.argsort(keys, kind="stable")

    def shuffled(self, items: list) -> list:
        return [items[i] for i in self.permutation(len(items))]

    def sample(self, items: list, k: int) -> list:
        """First k elements of a full permutation (without replacement)."""
        if k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        return [items[i] for i in self.permutation(len(items))[:k]]


class XoshiroStreams:
    """n_streams xoshiro256** generators advanced in lockstep.

    Stream r is seeded with ``derive_seed(master_seed, r)``, matching the
    scalar path exactly: column r of the outputs equals the sequence produced
    by ``Xoshiro256(derive_seed(master_seed, r))``.
    """

    def __init__(self, master_seed: int, n_streams: int):
        idx = np.arange(n_streams, dtype=np.uint64)
        seeds = self._vec_splitmix(np.uint64(master_seed & _MASK64) ^ idx)
        state = np.empty((4, n_streams), dtype=np.uint64)
        s = seeds
        for i in range(4):
            s = s + np.uint64(_SM64_GAMMA)
            z = (s ^ (s >> np.uint64(30))) * np.uint64(_SM64_M1)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM64_M2)
            state[i] = z ^ (z >> np.uint64(31))
        self._s = state
        self.n_streams = n_streams

    @staticmethod
    def _vec_splitmix(state: np.ndarray) -> np.ndarray:
        z = state + np.uint64(_SM64_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM64_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM64_M2)
        return z ^ (z >> np.uint64(31))

    def next_u64(self) -> np.ndarray:
        s = self._s
        result = self._rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
        t = s[1] << np.uint64(17)
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = self._rotl(s[3], 45)
        return result

    @staticmethod
    def _rotl(x: np.ndarray, k: int) -> np.ndarray:
        return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

    def uniform(self) -> np.ndarray:
        """One uniform per stream, shape (n_streams,)."""
        return (self.next_u64() >> np.uint64(11)) * 2.0**-53

    def uniform_block(self, n_draws: int) -> np.ndarray:
        """n_draws sequential uniforms per stream, shape (n_streams, n_draws)."""
        out = np.empty((n_draws, self.n_streams))
        for t in range(n_draws):
            out[t] = self.uniform()
        return out.T

    def below_block(self, n: int, n_draws: int) -> np.ndarray:
        """Bounded draws floor(u*n), shape (n_streams, n_draws), dtype intp."""
        return (self.uniform_block(n_draws) * n).astype(np.intp)

    def permutations(self, n: int) -> np.ndarray:
        """One length-n permutation per stream via stable argsort of uniforms."""
        keys = self.uniform_block(n)
        return np.argsort(keys, axis=1, kind="stable")
