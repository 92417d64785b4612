"""Shared search machinery: bit-vector solutions, neighbor moves, scheduled
change counts, derived RNG streams, and the memoized cross-validation fitness."""

from __future__ import annotations

import zlib
from dataclasses import dataclass, replace

import numpy as np

from .classifiers import cross_val_accuracy
from .corpus import DocTermMatrix


class HeuristicError(Exception):
    pass


@dataclass(frozen=True)
class FeatureMask:
    """Immutable length-M bit vector; popcount = number of selected features."""

    bits: bytes  # one byte per position, 0 or 1
    universe: int

    @staticmethod
    def from_array(arr) -> "FeatureMask":
        a = np.asarray(arr, dtype=bool)
        return FeatureMask(bits=a.astype(np.uint8).tobytes(), universe=len(a))

    @staticmethod
    def ones(universe: int) -> "FeatureMask":
        return FeatureMask(bits=b"\x01" * universe, universe=universe)

    @staticmethod
    def zeros(universe: int) -> "FeatureMask":
        return FeatureMask(bits=b"\x00" * universe, universe=universe)

    def to_array(self) -> np.ndarray:
        return np.frombuffer(self.bits, dtype=np.uint8).astype(bool)

    @property
    def popcount(self) -> int:
        return sum(self.bits)

    def to_bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @staticmethod
    def from_bitstring(s: str) -> "FeatureMask":
        return FeatureMask(
            bits=bytes(1 if ch == "1" else 0 for ch in s), universe=len(s)
        )


def flip(mask: FeatureMask, position: int) -> FeatureMask:
    if not 0 <= position < mask.universe:
        raise HeuristicError(f"flip position {position} out of range")
    bits = bytearray(mask.bits)
    bits[position] ^= 1
    return FeatureMask(bits=bytes(bits), universe=mask.universe)


@dataclass(frozen=True)
class RngStream:
    """Seeded stream addressed by a path of (tag, index) pairs.

    Equal (master_seed, path) always produce identical draws; distinct paths
    give independent streams, so parallel evaluation order cannot change
    results.
    """

    master_seed: int
    path: tuple[tuple[str, int], ...] = ()

    def child(self, tag: str, index: int = 0) -> "RngStream":
        return replace(self, path=self.path + ((tag, index),))

    def generator(self) -> np.random.Generator:
        entropy = [self.master_seed]
        for tag, index in self.path:
            entropy.append(zlib.crc32(tag.encode()))
            entropy.append(index)
        return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass(frozen=True)
class ChangeSchedule:
    base_fraction: float = 0.02
    floor: int = 1


def change_count(counter: int, m_prime: int, schedule: ChangeSchedule) -> int:
    """Geometric decay per tour: broad moves early, single flips late."""
    return max(schedule.floor, int(schedule.base_fraction * m_prime / 2**counter))


def generate_neighbor(
    mask: FeatureMask, change: int, rng: RngStream, max_redraws: int = 16
) -> FeatureMask:
    """Flip `change` distinct uniformly drawn positions; re-draw if all-zero."""
    if not 1 <= change <= mask.universe:
        raise HeuristicError(f"change {change} out of range for M={mask.universe}")
    gen = rng.generator()
    base = np.frombuffer(mask.bits, dtype=np.uint8)
    for _ in range(max_redraws):
        positions = gen.choice(mask.universe, size=change, replace=False)
        bits = base.copy()
        bits[positions] ^= 1
        if bits.any():
            return FeatureMask(bits=bits.tobytes(), universe=mask.universe)
    raise HeuristicError("degenerate neighbor: all-zero after re-draws")


class FitnessFn:
    """Cross-validated accuracy of the internal classifier on a mask.

    Fold seed is fixed for the whole run so every mask is scored on identical
    folds; values are memoized on the mask's bit pattern. Empty masks score 0.0
    so engine selection logic stays total.
    """

    def __init__(
        self,
        matrix: DocTermMatrix,
        classifier: str = "nb",
        k: int = 5,
        seed: int = 0,
        memoize: bool = True,
    ):
        self.matrix = matrix
        self.classifier = classifier
        self.k = k
        self.seed = seed
        self.memoize = memoize
        self._memo: dict[bytes, float] = {}
        self.evaluations = 0  # distinct CV runs, for trace/diagnostics

    def __call__(self, mask: FeatureMask) -> float:
        if mask.popcount == 0:
            return 0.0
        if self.memoize:
            cached = self._memo.get(mask.bits)
            if cached is not None:
                return cached
        value = cross_val_accuracy(
            self.matrix, mask.to_array(), self.classifier, self.k, self.seed
        ).mean_accuracy
        self.evaluations += 1
        if self.memoize:
            self._memo[mask.bits] = value
        return value
