"""Reed-Muller codes with majority-logic (Reed) decoding.

RM(r, m) has length 2^m, dimension sum_{i<=r} C(m, i) and minimum distance
2^(m-r), so it corrects 2^(m-r-1) - 1 errors.  Decoding recovers the
coefficients degree by degree from the top: the coefficient of a degree-d
monomial is the majority over the XORs of the received word on the
2^(m-d) disjoint subcubes spanned by the monomial's variables; a voting tie
is a decode failure.

The default protocol code is RM(1, 4): length 16, dimension 5, distance 8,
correcting 3 errors, with test-set parameter sigma = 1/8 (two positions).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import ConfigError


class ReedMullerCode:
    def __init__(self, order: int = 1, m_vars: int = 4):
        if order < 0 or m_vars < 1 or order >= m_vars:
            raise ConfigError("need 0 <= order < m_vars")
        self.order = order
        self.m_vars = m_vars
        self.length = 1 << m_vars
        self.monomials: list[tuple[int, ...]] = [
            mono for degree in range(order + 1)
            for mono in itertools.combinations(range(m_vars), degree)]
        self.dimension = len(self.monomials)
        self.min_distance = 1 << (m_vars - order)
        self.correctable = (self.min_distance // 2) - 1

        points = np.arange(self.length)
        coords = [(points >> j) & 1 for j in range(m_vars)]
        rows = []
        for mono in self.monomials:
            row = np.ones(self.length, dtype=np.uint8)
            for j in mono:
                row &= coords[j].astype(np.uint8)
            rows.append(row)
        self.generator = np.array(rows, dtype=np.uint8)
        self._subcubes = {mono: self._subcube_indices(mono)
                          for mono in self.monomials}

    def _subcube_indices(self, mono: tuple[int, ...]) -> np.ndarray:
        """2^(m-d) x 2^d array: one row of point indices per voting subcube."""
        free = list(mono)
        fixed = [j for j in range(self.m_vars) if j not in mono]
        bases = []
        for assign in itertools.product((0, 1), repeat=len(fixed)):
            bases.append(sum(bit << j for bit, j in zip(assign, fixed)))
        cubes = []
        for base in bases:
            cube = [base + sum(z << j for z, j in zip(zbits, free))
                    for zbits in itertools.product((0, 1), repeat=len(free))]
            cubes.append(cube)
        return np.array(cubes, dtype=np.int64)

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.uint8)
        if info.shape != (self.dimension,):
            raise ConfigError(f"info word must have length {self.dimension}")
        return (info @ self.generator) % 2

    def decode(self, word):
        """Nearest-codeword decode by majority logic.

        Returns ``(info, codeword)`` or ``None`` on a voting tie (failure).
        Guaranteed correct up to ``correctable`` errors; beyond that it may
        fail or return a different codeword.
        """
        word = np.asarray(word, dtype=np.uint8).copy()
        if word.shape != (self.length,):
            raise ConfigError(f"word must have length {self.length}")
        info = np.zeros(self.dimension, dtype=np.uint8)
        for degree in range(self.order, -1, -1):
            layer = [(i, mono) for i, mono in enumerate(self.monomials)
                     if len(mono) == degree]
            for i, mono in layer:
                votes = word[self._subcubes[mono]].sum(axis=1) % 2
                ones = int(votes.sum())
                zeros = len(votes) - ones
                if ones == zeros:
                    return None
                info[i] = 1 if ones > zeros else 0
            for i, mono in layer:
                if info[i]:
                    word ^= self.generator[i]
        return info, self.encode(info)

    @lru_cache(maxsize=None)
    def _all_codewords(self) -> tuple:
        words = []
        for bits in itertools.product((0, 1), repeat=self.dimension):
            words.append(tuple(int(v) for v in self.encode(np.array(bits, dtype=np.uint8))))
        return tuple(words)

    def codewords(self) -> list[tuple[int, ...]]:
        return list(self._all_codewords())

    def parity_checks(self) -> np.ndarray:
        """Rows spanning the dual code RM(m-r-1, m); a word is a codeword iff
        it is orthogonal to every row."""
        dual = ReedMullerCode(self.m_vars - self.order - 1, self.m_vars)
        return dual.generator

    def contains(self, word) -> bool:
        word = np.asarray(word, dtype=np.uint8)
        return not ((self.parity_checks() @ word) % 2).any()


@dataclass
class LinearCode:
    """A Reed-Muller code plus the protocol's test-fraction parameter."""

    code: ReedMullerCode
    sigma: float = 0.125

    def __post_init__(self):
        size = self.sigma * self.code.length
        if abs(size - round(size)) > 1e-9 or round(size) < 1:
            raise ConfigError("sigma * length must be a positive integer")

    @property
    def length(self) -> int:
        return self.code.length

    @property
    def test_count(self) -> int:
        return round(self.sigma * self.code.length)

    @staticmethod
    def from_config(family: str = "rm1", length: int = 16,
                    sigma: float = 0.125) -> "LinearCode":
        if not family.startswith("rm"):
            raise ConfigError(f"unknown code family {family!r}")
        try:
            order = int(family[2:])
        except ValueError:
            raise ConfigError(f"unknown code family {family!r}") from None
        m_vars = int(math.log2(length))
        if 1 << m_vars != length:
            raise ConfigError("code length must be a power of two")
        return LinearCode(ReedMullerCode(order, m_vars), sigma)


def default_code() -> LinearCode:
    return LinearCode(ReedMullerCode(1, 4), sigma=0.125)
