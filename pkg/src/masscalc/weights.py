"""Exact weight calculus for irreducible so(n)-representations.

Weights are stored as doubled integers so that half-integral coordinates stay
exact; every derived quantity (Casimir numbers, conformal weights, Weyl
dimensions) is an exact ``Fraction`` or ``int``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "DominantWeight",
    "Summand",
    "Decomposition",
    "is_dominant",
    "parse_weight",
    "casimir",
    "weyl_dimension",
    "decompose",
    "conformal_weight",
    "closed_form_weight",
]


def _doubled(value) -> int:
    frac = Fraction(value)
    twice = 2 * frac
    if twice.denominator != 1:
        raise ValueError(f"{value!r} is not a half-integer")
    return int(twice)


def _doubled_ok(n: int, doubled: Sequence[int]) -> bool:
    m = n // 2
    if len(doubled) != m:
        raise ValueError(f"expected {m} coordinates for n={n}, got {len(doubled)}")
    if m == 0:
        return True
    parities = {d % 2 for d in doubled}
    if len(parities) > 1:
        return False
    if n % 2:
        if doubled[-1] < 0:
            return False
        return all(doubled[i] >= doubled[i + 1] for i in range(m - 1))
    if m > 1 and doubled[m - 2] < abs(doubled[m - 1]):
        return False
    return all(doubled[i] >= doubled[i + 1] for i in range(m - 2))


def is_dominant(n: int, coords: Iterable) -> bool:
    """True iff ``coords`` is the dominant weight of an irreducible so(n)-rep.

    Checks the ordering conditions (whose last entry depends on the parity of
    ``n``) and that the coordinates are all integers or all half-odd.
    """
    if n < 3:
        raise ValueError("n must be at least 3")
    return _doubled_ok(n, [_doubled(c) for c in coords])


@dataclass(frozen=True, order=True)
class DominantWeight:
    n: int
    doubled: tuple[int, ...]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("n must be at least 3")
        object.__setattr__(self, "doubled", tuple(int(d) for d in self.doubled))
        if not _doubled_ok(self.n, self.doubled):
            raise ValueError(f"{self.text()} is not a dominant weight for so({self.n})")

    @classmethod
    def from_coords(cls, n: int, coords: Iterable) -> "DominantWeight":
        return cls(n, tuple(_doubled(c) for c in coords))

    @classmethod
    def zero(cls, n: int) -> "DominantWeight":
        return cls(n, (0,) * (n // 2))

    @classmethod
    def standard(cls, n: int) -> "DominantWeight":
        return cls(n, (2,) + (0,) * (n // 2 - 1))

    @classmethod
    def spin(cls, n: int, chirality: int = 1) -> "DominantWeight":
        """Spin weight (1/2, ..., 1/2); for even ``n`` the sign picks the half-spinor."""
        m = n // 2
        last = 1 if n % 2 or chirality > 0 else -1
        return cls(n, (1,) * (m - 1) + (last,))

    @classmethod
    def forms(cls, n: int, p: int, chirality: int = 1) -> "DominantWeight":
        """Weight of p-forms, (1,..,1,0,..,0); p and n-p give the same weight."""
        if not 0 <= p <= n:
            raise ValueError("need 0 <= p <= n")
        q = min(p, n - p)
        m = n // 2
        doubled = [2] * q + [0] * (m - q)
        if n % 2 == 0 and q == m and m > 0 and chirality < 0:
            doubled[-1] = -2
        return cls(n, tuple(doubled))

    @classmethod
    def symmetric(cls, n: int, k: int) -> "DominantWeight":
        return cls(n, (2 * k,) + (0,) * (n // 2 - 1))

    @property
    def m(self) -> int:
        return len(self.doubled)

    @property
    def coords(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(d, 2) for d in self.doubled)

    @property
    def is_spin_type(self) -> bool:
        return bool(self.doubled) and self.doubled[0] % 2 == 1

    def shifted(self, i: int, sign: int) -> tuple[int, ...]:
        """Doubled coordinates of self + sign * mu_i (0-based i); not validated."""
        out = list(self.doubled)
        out[i] += 2 * sign
        return tuple(out)

    def text(self) -> str:
        return ",".join(_fmt_half(d) for d in self.doubled)

    def __str__(self) -> str:
        return f"({self.text()})"


def _fmt_half(d: int) -> str:
    return str(d // 2) if d % 2 == 0 else f"{d}/2"


def parse_weight(n: int, text: str) -> DominantWeight:
    """Parse ``"3/2,1/2"``-style text into a validated weight."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    try:
        values = [Fraction(p) for p in parts]
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse weight {text!r}") from exc
    return DominantWeight.from_coords(n, values)


def _delta_doubled(n: int) -> list[int]:
    # 2 * delta_k with delta_k = (n - 2k)/2, k = 1..m
    return [n - 2 * k for k in range(1, n // 2 + 1)]


def casimir(rho: DominantWeight) -> Fraction:
    """Casimir number <rho+delta, rho+delta> - <delta, delta>."""
    total = 0
    for d, e in zip(rho.doubled, _delta_doubled(rho.n)):
        total += (d + e) ** 2 - e**2
    return Fraction(total, 4)


def weyl_dimension(rho: DominantWeight) -> int:
    """Dimension of the irreducible representation with dominant weight ``rho``.

    Product over positive roots e_i - e_j, e_i + e_j (i < j) and, for odd n,
    the short roots e_i.
    """
    delta = _delta_doubled(rho.n)
    shifted = [d + e for d, e in zip(rho.doubled, delta)]
    num, den = 1, 1
    m = rho.m
    for i in range(m):
        for j in range(i + 1, m):
            num *= (shifted[i] - shifted[j]) * (shifted[i] + shifted[j])
            den *= (delta[i] - delta[j]) * (delta[i] + delta[j])
        if rho.n % 2:
            num *= shifted[i]
            den *= delta[i]
    dim = Fraction(num, den)
    if dim.denominator != 1 or dim <= 0:
        raise ArithmeticError(f"non-integral Weyl dimension {dim} for {rho}")
    return int(dim)


@dataclass(frozen=True)
class Summand:
    weight: DominantWeight
    conformal_weight: Fraction
    dim: int
    origin: tuple[str, int]  # ("plus", i) / ("minus", i) with 1-based i, or ("equal", 0)

    @property
    def origin_text(self) -> str:
        kind, i = self.origin
        return kind if kind == "equal" else f"{kind}({i})"


@dataclass(frozen=True)
class Decomposition:
    rho: DominantWeight
    summands: tuple[Summand, ...]

    @property
    def n(self) -> int:
        return self.rho.n

    @property
    def N(self) -> int:
        return len(self.summands)

    @property
    def weights(self) -> tuple[Fraction, ...]:
        return tuple(s.conformal_weight for s in self.summands)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.summands)

    @property
    def dim_V(self) -> int:
        return weyl_dimension(self.rho)

    def check_invariants(self) -> dict[str, bool]:
        """Evaluate the exact trace identities; values are plain bools."""
        dim_v = self.dim_V
        ws, ds = self.weights, self.dims
        lambdas = [s.weight for s in self.summands]
        return {
            "dimension_sum": sum(ds) == self.n * dim_v,
            "trace_B": sum(w * d for w, d in zip(ws, ds)) == 0,
            "trace_B_squared": sum(w * w * d for w, d in zip(ws, ds))
            == 2 * dim_v * casimir(self.rho),
            "distinct_weights": len(set(lambdas)) == len(lambdas),
        }

    def index_of(self, weight: DominantWeight) -> int:
        for j, s in enumerate(self.summands):
            if s.weight == weight:
                return j
        raise KeyError(str(weight))

    def to_dict(self) -> dict:
        return {
            "rho": self.rho.text(),
            "n": self.n,
            "summands": [
                {
                    "weight": s.weight.text(),
                    "w": {"num": s.conformal_weight.numerator, "den": s.conformal_weight.denominator},
                    "dim": s.dim,
                    "origin": s.origin_text,
                }
                for s in self.summands
            ],
        }


def closed_form_weight(rho: DominantWeight, origin: tuple[str, int]) -> Fraction:
    """Conformal weight read off the origin of the summand (1-based index)."""
    kind, i = origin
    if kind == "equal":
        return Fraction(1 - rho.n, 2)
    rho_i = Fraction(rho.doubled[i - 1], 2)
    if kind == "plus":
        return 1 + rho_i - i
    if kind == "minus":
        return 1 - rho.n - rho_i + i
    raise ValueError(f"unknown origin {origin!r}")


def _candidates(rho: DominantWeight):
    for i in range(rho.m):
        for sign, kind in ((1, "plus"), (-1, "minus")):
            shifted = rho.shifted(i, sign)
            if _doubled_ok(rho.n, shifted):
                yield DominantWeight(rho.n, shifted), (kind, i + 1)
    if rho.n % 2 and rho.doubled[-1] > 0:
        yield rho, ("equal", 0)


def _origin_of(lam: DominantWeight, rho: DominantWeight) -> tuple[str, int]:
    for cand, origin in _candidates(rho):
        if cand == lam:
            return origin
    raise ValueError(f"{lam} is not a summand of R^{rho.n} (x) V{rho}")


def conformal_weight(lam: DominantWeight, rho: DominantWeight) -> Fraction:
    """Eigenvalue of the conformal weight operator on the summand ``lam``.

    Computed as (c(lam) - c(rho) - c(std)) / 2 and cross-checked against the
    closed form for the summand's origin.
    """
    if lam.n != rho.n:
        raise ValueError("weights belong to different dimensions")
    origin = _origin_of(lam, rho)
    w = (casimir(lam) - casimir(rho) - (rho.n - 1)) / 2
    expected = closed_form_weight(rho, origin)
    if w != expected:
        raise ArithmeticError(f"conformal weight mismatch for {lam} in {rho}: {w} != {expected}")
    return w


def decompose(rho: DominantWeight) -> Decomposition:
    """Split R^n (x) V(rho) into irreducible summands.

    Summands are ordered by decreasing conformal weight; equal weights (which
    occur for the pair rho +/- mu_m when n is even and rho_m = 0) are ordered
    by decreasing dominant weight.
    """
    summands = [
        Summand(lam, conformal_weight(lam, rho), weyl_dimension(lam), origin)
        for lam, origin in _candidates(rho)
    ]
    summands.sort(key=lambda s: (-s.conformal_weight, tuple(-d for d in s.weight.doubled)))
    return Decomposition(rho, tuple(summands))
