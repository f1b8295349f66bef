"""Weitzenboeck coefficient spaces and the mass coefficient mu(a)."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .spectral import ProjectionSet, symbol_matrix
from .weights import Decomposition, casimir

__all__ = [
    "CoefficientVector",
    "WeitzenbockBasis",
    "random_unit_vectors",
    "symbol_residual",
    "weitzenbock_basis",
    "universal_vector",
    "mass_coefficient",
    "universal_mass_coefficient",
    "classify",
]

RATIONAL_MAX_DEN = 1000
RATIONAL_TOL = 1e-9
SPAN_TOL = 1e-9


@dataclass(frozen=True)
class CoefficientVector:
    decomp: Decomposition = field(repr=False)
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != self.decomp.N:
            raise ValueError(
                f"expected {self.decomp.N} coefficients for {self.decomp.rho}, got {len(self.coeffs)}"
            )

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    @property
    def plus_indices(self) -> list[int]:
        return [j for j, a in enumerate(self.coeffs) if a > 0]

    @property
    def minus_indices(self) -> list[int]:
        return [j for j, a in enumerate(self.coeffs) if a < 0]


def _coeffs(decomp: Decomposition, a) -> tuple:
    if isinstance(a, CoefficientVector):
        if a.decomp.rho != decomp.rho:
            raise ValueError("coefficient vector belongs to another decomposition")
        return a.coeffs
    return CoefficientVector(decomp, a).coeffs


def random_unit_vectors(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    xs = rng.standard_normal((count, n))
    return xs / np.linalg.norm(xs, axis=1, keepdims=True)


def _symbol_stack(proj: ProjectionSet, xis: np.ndarray) -> np.ndarray:
    """Array of shape (N, S, d, d) holding q_j(xi_s)."""
    return np.array([[symbol_matrix(proj, j, xi) for xi in xis] for j in range(len(proj))])


def symbol_residual(proj: ProjectionSet, a, xis: np.ndarray) -> float:
    """max_s |sum_j a_j q_j(xi_s)|, entrywise."""
    coeffs = np.array([float(c) for c in a])
    combo = np.tensordot(coeffs, _symbol_stack(proj, xis), axes=1)
    return float(np.max(np.abs(combo), initial=0.0))


def _rref(rows: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    a = rows.astype(float).copy()
    r = 0
    for c in range(a.shape[1]):
        if r == a.shape[0]:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) < tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] /= a[r, c]
        for i in range(a.shape[0]):
            if i != r:
                a[i] -= a[i, c] * a[r]
        r += 1
    return a[:r]


def _rationalize(rows: np.ndarray) -> list[list[Fraction]] | None:
    out = []
    for row in rows:
        fracs = [Fraction(float(x)).limit_denominator(RATIONAL_MAX_DEN) for x in row]
        if any(abs(float(f) - x) > RATIONAL_TOL for f, x in zip(fracs, row)):
            return None
        out.append(fracs)
    return out


@dataclass(frozen=True)
class WeitzenbockBasis:
    """Null space of the second-order symbol condition.

    ``basis`` holds an orthonormal float basis (rows); ``rational`` the same
    span in reduced row echelon form when every entry is a small rational.
    """

    decomp: Decomposition = field(repr=False)
    basis: np.ndarray
    rational: list[list[Fraction]] | None
    residual: float
    universal_residual: float
    singular_values: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    @property
    def expected_dimension(self) -> int:
        return self.decomp.N // 2

    @property
    def anomaly(self) -> bool:
        return self.dimension != self.expected_dimension

    def vectors(self) -> list[CoefficientVector]:
        rows = self.rational if self.rational is not None else self.basis.tolist()
        return [CoefficientVector(self.decomp, row) for row in rows]

    def span_residual(self, a) -> float:
        """Norm of the part of ``a`` orthogonal to the span, relative to |a|."""
        vec = np.array([float(c) for c in _coeffs(self.decomp, a)])
        norm = np.linalg.norm(vec)
        if norm == 0:
            return 0.0
        rest = vec - self.basis.T @ (self.basis @ vec)
        return float(np.linalg.norm(rest) / norm)

    def contains(self, a) -> bool:
        return self.span_residual(a) <= SPAN_TOL


def weitzenbock_basis(
    proj: ProjectionSet,
    decomp: Decomposition,
    samples: int = 8,
    check_samples: int = 50,
    seed: int = 0,
) -> WeitzenbockBasis:
    """Coefficient vectors a with sum_j a_j q_j(xi) = 0 for every unit xi.

    The condition is imposed on ``samples`` random directions and the
    resulting basis is re-checked on ``check_samples`` fresh ones. A dimension
    other than floor(N/2) is reported through ``anomaly`` rather than raised.
    """
    if proj.decomp.rho != decomp.rho:
        raise ValueError("projection set and decomposition disagree")
    rng = np.random.default_rng(seed)
    xis = random_unit_vectors(decomp.n, samples, rng)
    stack = _symbol_stack(proj, xis)
    columns = stack.reshape(decomp.N, -1).T
    system = np.vstack([columns.real, columns.imag]) if np.iscomplexobj(columns) else columns
    _, svals, vt = np.linalg.svd(system, full_matrices=False)
    scale = svals[0] if svals.size else 1.0
    rank = int(np.sum(svals > 1e-8 * scale))
    null = vt[rank:]

    check = random_unit_vectors(decomp.n, check_samples, rng)
    residual = max((symbol_residual(proj, row, check) for row in null), default=0.0)
    rational = _rationalize(_rref(null)) if null.shape[0] else []

    w = np.array([float(x) for x in decomp.weights])
    norm = np.linalg.norm(w)
    univ = 0.0 if norm == 0 else float(np.linalg.norm(w - null.T @ (null @ w)) / norm)
    return WeitzenbockBasis(decomp, null, rational, residual, univ, svals)


def universal_vector(decomp: Decomposition) -> CoefficientVector:
    """a_j = conformal weight of the j-th summand."""
    return CoefficientVector(decomp, decomp.weights)


def mass_coefficient(decomp: Decomposition, a):
    """mu(a) = -sum_j a_j dim(W_j) w_j / (2n(n-1)); exact for rational a."""
    coeffs = _coeffs(decomp, a)
    n = decomp.n
    total = sum(c * s.dim * s.conformal_weight for c, s in zip(coeffs, decomp.summands))
    if all(isinstance(c, (int, Fraction)) for c in coeffs):
        return -Fraction(total) / (2 * n * (n - 1))
    return -float(total) / (2 * n * (n - 1))


def universal_mass_coefficient(decomp: Decomposition) -> Fraction:
    """dim(V) c(rho) / (n(n-1)), the constant for the universal formula with P_+ on the negative weights."""
    n = decomp.n
    value = Fraction(decomp.dim_V) * casimir(decomp.rho) / (n * (n - 1))
    if value != -mass_coefficient(decomp, universal_vector(decomp)):
        raise ArithmeticError("universal mass constant disagrees with mu(universal)")
    return value


def _sign_label(mu) -> str:
    if mu > 0:
        return "positive-mass"
    if mu < 0:
        return "negative-mass"
    return "zero"


def classify(decomp: Decomposition, a, basis: WeitzenbockBasis | None = None) -> dict:
    """mu(a), its sign and the P_+/P_- split (indices with a_j > 0 / a_j < 0).

    When ``basis`` is given, membership of ``a`` in the Weitzenboeck span is
    checked and reported as ``in_span``; it never raises.
    """
    vec = a if isinstance(a, CoefficientVector) else CoefficientVector(decomp, a)
    mu = mass_coefficient(decomp, vec)
    report = {
        "mu": mu,
        "classification": _sign_label(mu),
        "p_plus_indices": vec.plus_indices,
        "p_minus_indices": vec.minus_indices,
    }
    if basis is not None:
        res = basis.span_residual(vec)
        report["span_residual"] = res
        report["in_span"] = res <= SPAN_TOL
    return report
