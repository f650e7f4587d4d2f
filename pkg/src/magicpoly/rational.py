"""Exact rational matrices (``fractions.Fraction`` entries) and Gaussian elimination."""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Sequence


class RationalMatrix:
    """Dense rows x cols matrix of Fractions, always in lowest terms."""

    def __init__(self, rows: Sequence[Sequence]):
        self.rows = [[Fraction(x) for x in row] for row in rows]
        widths = {len(r) for r in self.rows}
        if len(widths) > 1:
            raise ValueError("ragged rows")
        self.shape = (len(self.rows), widths.pop() if widths else 0)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMatrix) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"RationalMatrix({[[str(x) for x in r] for r in self.rows]})"

    def __matmul__(self, other):
        if isinstance(other, RationalMatrix):
            cols = list(zip(*other.rows))
            return RationalMatrix([[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self.rows])
        return [sum(a * Fraction(b) for a, b in zip(r, other)) for r in self.rows]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix([list(c) for c in zip(*self.rows)])

    def rref(self) -> tuple["RationalMatrix", list[int]]:
        """Reduced row echelon form and the pivot columns."""
        m = [row[:] for row in self.rows]
        n_rows, n_cols = self.shape
        pivots = []
        r = 0
        for c in range(n_cols):
            if r == n_rows:
                break
            p = next((i for i in range(r, n_rows) if m[i][c] != 0), None)
            if p is None:
                continue
            m[r], m[p] = m[p], m[r]
            inv = 1 / m[r][c]
            m[r] = [x * inv for x in m[r]]
            for i in range(n_rows):
                if i != r and m[i][c] != 0:
                    f = m[i][c]
                    m[i] = [x - f * y for x, y in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
        return RationalMatrix(m), pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> list[list[Fraction]]:
        """Basis of {x : A x = 0}, one vector per free column."""
        reduced, pivots = self.rref()
        n_cols = self.shape[1]
        free = [c for c in range(n_cols) if c not in set(pivots)]
        basis = []
        for f in free:
            x = [Fraction(0)] * n_cols
            x[f] = Fraction(1)
            for row, p in zip(reduced.rows, pivots):
                x[p] = -row[f]
            basis.append(x)
        return basis

    def solve(self, rhs: Sequence) -> list[Fraction] | None:
        """One particular solution of A x = rhs (free variables 0), or None."""
        aug = RationalMatrix([r + [Fraction(b)] for r, b in zip(self.rows, rhs)])
        reduced, pivots = aug.rref()
        n_cols = self.shape[1]
        if n_cols in pivots:
            return None
        x = [Fraction(0)] * n_cols
        for row, p in zip(reduced.rows, pivots):
            x[p] = row[-1]
        return x

    def inverse(self) -> "RationalMatrix":
        n, m = self.shape
        if n != m:
            raise ValueError("inverse of a non-square matrix")
        aug = RationalMatrix([r + e for r, e in zip(self.rows, RationalMatrix.identity(n).rows)])
        reduced, pivots = aug.rref()
        if pivots[:n] != list(range(n)):
            raise ZeroDivisionError("singular matrix")
        return RationalMatrix([r[n:] for r in reduced.rows])


def independent_rows(rows: Sequence[Sequence]) -> list[int]:
    """Positions of a maximal linearly independent subset, greedy in input order."""
    picked: list[int] = []
    basis = RationalMatrix([])
    for i, row in enumerate(rows):
        trial = RationalMatrix(basis.rows + [list(row)])
        if trial.rank() > len(picked):
            picked.append(i)
            basis = trial
    return picked


def integer_scale(vec: Sequence[Fraction]) -> list[int]:
    """Multiply by the lcm of denominators and divide by the gcd of numerators."""
    fr = [Fraction(x) for x in vec]
    den = lcm(*(x.denominator for x in fr)) if fr else 1
    ints = [int(x * den) for x in fr]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    return [v // g for v in ints] if g else ints
