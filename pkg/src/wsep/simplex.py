"""Exact revised simplex for covering LPs, solved through their dual.

Primal (what callers care about)::

    min  c . y    s.t.  a_i . y >= b_i  (i = rows),   y >= 0,   c >= 0

Dual::

    max  b . z    s.t.  sum_i a_i z_i <= c,   z >= 0

Because ``c >= 0`` the dual origin is feasible, so no phase one is needed, and
adding a primal row is adding a dual column: cutting planes on the primal are
column generation on the dual, warm-started from the current basis.  The
primal solution is the dual's vector of simplex multipliers.

Everything is ``fractions.Fraction``; pivoting follows Bland's rule.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class UnboundedDual(ArithmeticError):
    """The dual is unbounded, i.e. the primal rows are infeasible."""


class CoveringLP:
    def __init__(self, cost: Sequence[Fraction | int]):
        self.n = len(cost)
        self.cost = [Fraction(c) for c in cost]
        if any(c < 0 for c in self.cost):
            raise ValueError("covering LP needs a non-negative cost vector")
        # column j < n is the slack of dual row j; column n + k is primal row k
        self.rows: list[tuple[dict[int, Fraction], Fraction]] = []
        self.basis = list(range(self.n))
        self.binv = [[ONE if i == j else ZERO for j in range(self.n)] for i in range(self.n)]
        self.xb = list(self.cost)
        self.pivots = 0

    def add_row(self, coeffs: Mapping[int, Fraction | int], rhs: Fraction | int = 1) -> int:
        self.rows.append(({j: Fraction(a) for j, a in coeffs.items() if a}, Fraction(rhs)))
        return len(self.rows) - 1

    def _column(self, var: int) -> dict[int, Fraction]:
        if var < self.n:
            return {var: ONE}
        return self.rows[var - self.n][0]

    def _profit(self, var: int) -> Fraction:
        return ZERO if var < self.n else self.rows[var - self.n][1]

    def multipliers(self) -> list[Fraction]:
        """Simplex multipliers of the dual basis = current primal solution y."""
        cb = [self._profit(v) for v in self.basis]
        out = []
        for j in range(self.n):
            s = ZERO
            for i in range(self.n):
                if cb[i]:
                    s += cb[i] * self.binv[i][j]
            out.append(s)
        return out

    def objective(self) -> Fraction:
        return sum((self._profit(v) * x for v, x in zip(self.basis, self.xb)), ZERO)

    def _reduced(self, var: int, y: list[Fraction]) -> Fraction:
        col = self._column(var)
        return self._profit(var) - sum((a * y[j] for j, a in col.items()), ZERO)

    def optimize(self) -> None:
        """Pivot until no dual column has positive reduced profit."""
        while True:
            y = self.multipliers()
            in_basis = set(self.basis)
            entering = None
            for var in range(self.n + len(self.rows)):
                if var not in in_basis and self._reduced(var, y) > 0:
                    entering = var
                    break
            if entering is None:
                return
            self._pivot(entering)

    def _pivot(self, entering: int) -> None:
        col = self._column(entering)
        d = [sum((self.binv[i][j] * a for j, a in col.items()), ZERO) for i in range(self.n)]
        leave_row = None
        best = None
        for i in range(self.n):
            if d[i] > 0:
                ratio = self.xb[i] / d[i]
                if (
                    best is None
                    or ratio < best
                    or (ratio == best and self.basis[i] < self.basis[leave_row])
                ):
                    best, leave_row = ratio, i
        if leave_row is None:
            raise UnboundedDual("primal covering rows are infeasible")
        r = leave_row
        piv = d[r]
        row_r = [v / piv for v in self.binv[r]]
        x_r = self.xb[r] / piv
        for i in range(self.n):
            if i == r or not d[i]:
                continue
            f = d[i]
            row_i = self.binv[i]
            for j in range(self.n):
                if row_r[j]:
                    row_i[j] -= f * row_r[j]
            self.xb[i] -= f * x_r
        self.binv[r] = row_r
        self.xb[r] = x_r
        self.basis[r] = entering
        self.pivots += 1

    def dual_values(self) -> list[Fraction]:
        """Value of each primal row's dual variable z_k in the current basis."""
        z = [ZERO] * len(self.rows)
        for v, x in zip(self.basis, self.xb):
            if v >= self.n:
                z[v - self.n] = x
        return z
