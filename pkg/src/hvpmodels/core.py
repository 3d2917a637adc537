"""Shared types, exceptions and reproducible randomness.

Symmetric matrices are stored in an "alpha" coefficient layout: the ``n``
diagonal entries come first, followed by the strict upper triangle in
row-major order ``(0, 1), (0, 2), ..., (1, 2), ...``.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class SingularMatrix(np.linalg.LinAlgError):
    """A linear system could not be solved to working accuracy."""


class DegenerateGeometry(ValueError):
    """Sample directions are (numerically) linearly dependent."""


class ZeroGradient(ValueError):
    pass


class AscentDirection(ValueError):
    pass


class EmptyInput(ValueError):
    pass


def make_rng(*seed) -> np.random.Generator:
    """Return a PCG64 generator seeded from integers and/or strings.

    Strings are hashed with CRC32 so the stream does not depend on Python's
    per-process hash randomisation.
    """
    entropy = []
    for s in seed:
        if isinstance(s, str):
            entropy.append(zlib.crc32(s.encode()))
        else:
            entropy.append(int(s))
    return np.random.default_rng(np.random.SeedSequence(entropy or [0]))


def unit_ball_sample(rng, n: int) -> np.ndarray:
    """Draw one point uniformly from the closed unit ball in R^n."""
    if n < 1:
        raise ValueError("dimension must be positive")
    direction = rng.standard_normal(n)
    norm = np.linalg.norm(direction)
    while norm == 0.0:
        direction = rng.standard_normal(n)
        norm = np.linalg.norm(direction)
    radius = rng.random() ** (1.0 / n)
    u = direction * (radius / norm)
    # guard against the last ulp of rounding pushing |u| above one
    unorm = np.linalg.norm(u)
    if unorm > 1.0:
        u /= unorm
    return u


def alpha_length(n: int) -> int:
    return n * (n + 1) // 2


def alpha_pairs(n: int) -> list[tuple[int, int]]:
    """Index pairs ``(i, j)``, ``i <= j``, in alpha order."""
    pairs = [(i, i) for i in range(n)]
    pairs.extend((i, j) for i in range(n) for j in range(i + 1, n))
    return pairs


def sym_from_alpha(alpha, n: int, pairs: Sequence[tuple[int, int]] | None = None) -> np.ndarray:
    """Build the symmetric matrix whose alpha coefficients are ``alpha``.

    When ``pairs`` is given (sparse layout), entries outside it are zero.
    """
    alpha = np.asarray(alpha, dtype=float)
    if pairs is None:
        pairs = alpha_pairs(n)
    if alpha.shape != (len(pairs),):
        raise ValueError(f"expected {len(pairs)} coefficients, got shape {alpha.shape}")
    rows, cols = _pair_arrays(pairs)
    H = np.zeros((n, n))
    H[rows, cols] = alpha
    H[cols, rows] = alpha
    return H


def alpha_from_sym(H, pairs: Sequence[tuple[int, int]] | None = None) -> np.ndarray:
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("expected a square matrix")
    if pairs is None:
        pairs = alpha_pairs(H.shape[0])
    rows, cols = _pair_arrays(pairs)
    return H[rows, cols].copy()


def _pair_arrays(pairs):
    if len(pairs) == 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    arr = np.asarray(pairs, dtype=int)
    return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class SparsityPattern:
    """Structurally nonzero entries of the upper triangle of a Hessian.

    Indices are zero-based. ``pairs`` is kept in alpha order (diagonal
    entries first, then off-diagonal pairs row-major), which is also the
    column order of the sparse recovery system.
    """

    n: int
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "SparsityPattern":
        clean = set()
        for i, j in pairs:
            i, j = int(i), int(j)
            if i > j:
                i, j = j, i
            if not (0 <= i and j < n):
                raise ValueError(f"pair {(i, j)} outside dimension {n}")
            clean.add((i, j))
        diag = sorted(p for p in clean if p[0] == p[1])
        off = sorted(p for p in clean if p[0] != p[1])
        return cls(n, tuple(diag + off))

    @classmethod
    def from_supports(cls, n: int, supports: Iterable[Iterable[int]]) -> "SparsityPattern":
        """Union of all pairs within each element's variable support."""
        pairs = set()
        for support in supports:
            idx = sorted(set(int(k) for k in support))
            for a, i in enumerate(idx):
                for j in idx[a:]:
                    pairs.add((i, j))
        return cls.from_pairs(n, pairs)

    @classmethod
    def dense(cls, n: int) -> "SparsityPattern":
        return cls(n, tuple(alpha_pairs(n)))

    @property
    def nnz(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        i, j = pair
        if i > j:
            i, j = j, i
        return (i, j) in self._lookup

    @property
    def _lookup(self):
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = frozenset(self.pairs)
            object.__setattr__(self, "_cache", cache)
        return cache

    def mask(self) -> np.ndarray:
        """Boolean symmetric ``n x n`` mask of structural nonzeros."""
        m = np.zeros((self.n, self.n), dtype=bool)
        rows, cols = _pair_arrays(self.pairs)
        m[rows, cols] = True
        m[cols, rows] = True
        return m
