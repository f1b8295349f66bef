"""Explicit matrix representations of so(n) and the conformal weight operator.

Generators follow the convention that e_i ^ e_j acts on R^n by
X -> <e_i, X> e_j - <e_j, X> e_i, so rho(e_1 ^ e_2) sends e_1 to e_2.
Everything here is dense numpy linear algebra; the exact predictions live in
:mod:`masscalc.weights` and the functions below check the matrices against them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy.linalg import null_space, orth

from .weights import Decomposition, DominantWeight, casimir, weyl_dimension

__all__ = [
    "CapabilityError",
    "ConsistencyError",
    "MatrixRep",
    "BOperator",
    "ProjectionSet",
    "build_rep",
    "build_B",
    "build_projections",
    "symbol_matrix",
    "highest_weight",
    "spectral_report",
]

FAMILIES = ("trivial", "exterior", "spin", "symmetric_traceless")

EIG_MATCH_TOL = 1e-6


class CapabilityError(ValueError):
    """Requested representation family/dimension is not constructible here."""


class ConsistencyError(RuntimeError):
    """Matrix data disagrees with the weight-calculus prediction."""


@dataclass(frozen=True, eq=False)
class MatrixRep:
    """so(n) acting on V by skew-adjoint matrices ``gens[i, j] = rho(e_i ^ e_j)``.

    The basis of V is orthonormal, so the Gram matrix is the identity.
    """

    n: int
    family: str
    params: dict
    rho: DominantWeight
    gens: np.ndarray = field(repr=False)  # shape (n, n, d, d), antisymmetric in (i, j)

    @property
    def dim_V(self) -> int:
        return self.gens.shape[-1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.gens)

    @property
    def metric(self) -> np.ndarray:
        return np.eye(self.dim_V)

    def generator(self, i: int, j: int) -> np.ndarray:
        return self.gens[i, j]

    def casimir_matrix(self) -> np.ndarray:
        """-sum_{i<j} rho(e_i ^ e_j)^2, which is c(rho) times the identity."""
        g = self.gens
        return -0.5 * np.einsum("ijab,ijbc->ac", g, g)

    def skew_residual(self) -> float:
        g = self.gens
        return float(np.max(np.abs(g + np.conj(np.swapaxes(g, -1, -2))), initial=0.0))

    def bracket_residual(self) -> float:
        """Largest deviation from the so(n) structure constants.

        For this convention
        [L_ab, L_cd] = -d_bc L_ad + d_ac L_bd - d_ad L_bc + d_bd L_ac.
        """
        g, n = self.gens, self.n
        worst = 0.0
        eye = np.eye(n)
        for a, b, c, d in itertools.product(range(n), repeat=4):
            if a >= b or c >= d:
                continue
            lhs = g[a, b] @ g[c, d] - g[c, d] @ g[a, b]
            rhs = (
                -eye[b, c] * g[a, d]
                + eye[a, c] * g[b, d]
                - eye[a, d] * g[b, c]
                + eye[b, d] * g[a, c]
            )
            worst = max(worst, float(np.max(np.abs(lhs - rhs), initial=0.0)))
        return worst


def _from_pairs(n: int, mats: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
    d = next(iter(mats.values())).shape[0]
    dtype = np.result_type(*mats.values())
    gens = np.zeros((n, n, d, d), dtype=dtype)
    for (i, j), mat in mats.items():
        gens[i, j] = mat
        gens[j, i] = -mat
    return gens


def _restrict(gens: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return np.conj(basis.T) @ gens @ basis


def _standard_gens(n: int) -> np.ndarray:
    gens = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                gens[i, j, j, i] += 1.0
                gens[i, j, i, j] -= 1.0
    return gens


def _sorted_sign(seq: list[int]) -> tuple[int, tuple[int, ...]]:
    """Sign of the permutation sorting ``seq`` (0 if it has repeats) and the sorted tuple."""
    if len(set(seq)) < len(seq):
        return 0, ()
    inversions = sum(1 for x, y in itertools.combinations(seq, 2) if x > y)
    return (-1) ** inversions, tuple(sorted(seq))


def _exterior_gens(n: int, p: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    basis = list(itertools.combinations(range(n), p))
    index = {b: k for k, b in enumerate(basis)}
    dim = len(basis)
    gens = np.zeros((n, n, dim, dim))
    for i, j in itertools.permutations(range(n), 2):
        mat = gens[i, j]
        for col, subset in enumerate(basis):
            for slot, a in enumerate(subset):
                # e_i -> e_j, e_j -> -e_i in the given slot
                if a == i:
                    image, coeff = j, 1.0
                elif a == j:
                    image, coeff = i, -1.0
                else:
                    continue
                new = list(subset)
                new[slot] = image
                sign, key = _sorted_sign(new)
                if sign:
                    mat[index[key], col] += coeff * sign
    return gens, basis


def _hodge_star(n: int, basis: list[tuple[int, ...]]) -> np.ndarray:
    index = {b: k for k, b in enumerate(basis)}
    star = np.zeros((len(basis), len(basis)))
    for col, subset in enumerate(basis):
        rest = tuple(k for k in range(n) if k not in subset)
        sign, _ = _sorted_sign(list(subset) + list(rest))
        star[index[rest], col] = sign
    return star


def _pauli():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    return x, y, z


def gamma_matrices(n: int) -> list[np.ndarray]:
    """Hermitian gamma matrices of size 2^[n/2] with gamma_i gamma_j + gamma_j gamma_i = 2 delta_ij."""
    x, y, z = _pauli()
    eye = np.eye(2, dtype=complex)
    m = n // 2

    def kron_all(mats):
        return reduce(np.kron, mats, np.eye(1, dtype=complex))

    gammas = []
    for k in range(m):
        for p in (x, y):
            gammas.append(kron_all([z] * k + [p] + [eye] * (m - k - 1)))
    if n % 2:
        gammas.append(kron_all([z] * m))
    return gammas


def _spin_gens(n: int) -> np.ndarray:
    gammas = gamma_matrices(n)
    # Clifford units c_i = i*gamma_i square to -1; rho(e_i ^ e_j) = c_i c_j / 2
    mats = {
        (i, j): -0.5 * gammas[i] @ gammas[j] for i, j in itertools.combinations(range(n), 2)
    }
    return _from_pairs(n, mats)


def _volume_element(n: int) -> np.ndarray:
    gammas = gamma_matrices(n)
    vol = reduce(np.matmul, gammas)
    if np.allclose(vol @ vol, -np.eye(len(vol))):
        vol = 1j * vol
    return vol


def _symmetric_traceless_gens(n: int, k: int) -> np.ndarray:
    size = n**k
    std = _standard_gens(n)
    eye = np.eye(n)
    gens = np.zeros((n, n, size, size))
    for i, j in itertools.permutations(range(n), 2):
        total = np.zeros((size, size))
        for slot in range(k):
            factors = [eye] * k
            factors[slot] = std[i, j]
            total += reduce(np.kron, factors)
        gens[i, j] = total

    cols = []
    for multiset in itertools.combinations_with_replacement(range(n), k):
        vec = np.zeros(size)
        for perm in set(itertools.permutations(multiset)):
            vec[np.ravel_multi_index(perm, (n,) * k)] = 1.0
        cols.append(vec / np.linalg.norm(vec))
    sym = np.array(cols).T
    if k >= 2:
        # contraction of the first two slots
        trace = np.zeros((n ** (k - 2), size))
        for flat in range(size):
            idx = np.unravel_index(flat, (n,) * k)
            if idx[0] == idx[1]:
                rest = np.ravel_multi_index(idx[2:], (n,) * (k - 2)) if k > 2 else 0
                trace[rest, flat] = 1.0
        kernel = null_space(trace @ sym)
        basis = sym @ kernel
    else:
        basis = sym
    return _restrict(gens, basis)


def build_rep(n: int, family: str, p: int | None = None, k: int | None = None) -> MatrixRep:
    """Construct an explicit matrix representation.

    ``family`` is one of ``exterior`` (needs ``p``), ``spin``,
    ``symmetric_traceless`` (needs ``k``) or ``trivial``. For even n the
    middle exterior power and the spinor module are reducible; they are cut
    down to the summand whose dominant weight has positive last coordinate.
    """
    if n < 3:
        raise CapabilityError("so(n) representations need n >= 3")
    if family not in FAMILIES:
        raise CapabilityError(f"unsupported family {family!r}; choose from {FAMILIES}")
    params: dict = {}
    if family == "trivial":
        gens = np.zeros((n, n, 1, 1))
        rho = DominantWeight.zero(n)
    elif family == "exterior":
        if p is None or not 0 <= p <= n:
            raise CapabilityError(f"exterior family needs 0 <= p <= n, got p={p}")
        params["p"] = p
        if p in (0, n):
            gens = np.zeros((n, n, 1, 1))
        else:
            gens, basis = _exterior_gens(n, p)
            if 2 * p == n:
                gens = _chiral_part(n, gens, _hodge_star(n, basis))
        rho = DominantWeight.forms(n, p)
    elif family == "spin":
        gens = _spin_gens(n)
        if n % 2 == 0:
            gens = _chiral_part(n, gens, _volume_element(n))
        rho = DominantWeight.spin(n)
    else:
        if k is None or k < 1:
            raise CapabilityError(f"symmetric_traceless family needs k >= 1, got k={k}")
        if n ** k > 5000:
            raise CapabilityError(f"symmetric_traceless({k}) in dimension {n} is too large")
        params["k"] = k
        gens = _symmetric_traceless_gens(n, k)
        rho = DominantWeight.symmetric(n, k)

    rep = MatrixRep(n, family, params, rho, gens)
    if rep.dim_V != weyl_dimension(rho):
        raise ConsistencyError(
            f"{family} rep has dimension {rep.dim_V}, Weyl formula gives {weyl_dimension(rho)}"
        )
    return rep


def _chiral_part(n: int, gens: np.ndarray, involution: np.ndarray) -> np.ndarray:
    """Restrict to the eigenspace of an equivariant involution with highest weight ending in +."""
    sq = involution @ involution
    if np.allclose(sq, -np.eye(len(sq))):
        involution = 1j * involution
    vals, vecs = np.linalg.eigh(0.5 * (involution + np.conj(involution.T)))
    for target in (1.0, -1.0):
        part = _restrict(gens, vecs[:, np.abs(vals - target) < 1e-8])
        if np.iscomplexobj(part) and np.allclose(part.imag, 0):
            part = part.real
        if _highest_weight_doubled(n, part)[-1] > 0:
            return part
    raise ConsistencyError("no chiral half with positive last weight coordinate")


def _cartan(gens: np.ndarray) -> list[np.ndarray]:
    n = gens.shape[0]
    # weights lambda_k are the eigenvalues of -i rho(e_{2k-1} ^ e_{2k})
    return [-1j * gens[2 * k, 2 * k + 1] for k in range(n // 2)]


def _highest_weight_doubled(n: int, gens: np.ndarray) -> tuple[int, ...]:
    cartan = _cartan(gens)
    m = len(cartan)
    scale = 100.0
    combo = sum(scale ** (-k) * h for k, h in enumerate(cartan))
    combo = 0.5 * (combo + np.conj(combo.T))
    vals, vecs = np.linalg.eigh(combo)
    top = vecs[:, -1]
    out = []
    for h in cartan[:m]:
        value = np.real(np.vdot(top, h @ top))
        out.append(int(round(2 * value)))
    return tuple(out)


def highest_weight(rep: MatrixRep) -> DominantWeight:
    """Dominant weight read off the Cartan action of the explicit matrices."""
    return DominantWeight(rep.n, _highest_weight_doubled(rep.n, rep.gens))


@dataclass(frozen=True, eq=False)
class BOperator:
    rep: MatrixRep
    matrix: np.ndarray = field(repr=False)

    def hermitian_residual(self) -> float:
        b = self.matrix
        return float(np.max(np.abs(b - np.conj(b.T))))

    def partial_trace(self) -> np.ndarray:
        n, d = self.rep.n, self.rep.dim_V
        blocks = self.matrix.reshape(n, d, n, d)
        return np.einsum("iaib->ab", blocks)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def build_B(rep: MatrixRep) -> BOperator:
    """B(alpha (x) v) = sum_i e_i (x) rho(e_i ^ alpha) v, in the basis e_i (x) sigma_a."""
    n, d = rep.n, rep.dim_V
    matrix = rep.gens.transpose(0, 2, 1, 3).reshape(n * d, n * d).copy()
    return BOperator(rep, matrix)


def total_gens(rep: MatrixRep) -> np.ndarray:
    """Generators of so(n) acting on R^n (x) V."""
    n, d = rep.n, rep.dim_V
    std = _standard_gens(n)
    eye_n, eye_d = np.eye(n), np.eye(d)
    dtype = np.result_type(rep.gens, float)
    out = np.zeros((n, n, n * d, n * d), dtype=dtype)
    for i, j in itertools.permutations(range(n), 2):
        out[i, j] = np.kron(std[i, j], eye_d) + np.kron(eye_n, rep.gens[i, j])
    return out


@dataclass(frozen=True, eq=False)
class ProjectionSet:
    decomp: Decomposition
    projections: tuple[np.ndarray, ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.projections)

    def __getitem__(self, j: int) -> np.ndarray:
        return self.projections[j]

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(int(round(np.real(np.trace(p)))) for p in self.projections)

    def residuals(self) -> dict[str, float]:
        ps = self.projections
        size = ps[0].shape[0]
        idem = max(float(np.max(np.abs(p @ p - p))) for p in ps)
        herm = max(float(np.max(np.abs(p - np.conj(p.T)))) for p in ps)
        cross = 0.0
        for a, b in itertools.combinations(ps, 2):
            cross = max(cross, float(np.max(np.abs(a @ b))))
        total = float(np.max(np.abs(sum(ps) - np.eye(size))))
        return {"idempotent": idem, "self_adjoint": herm, "orthogonal": cross, "resolution": total}


def _krylov_closure(start: np.ndarray, ops: list[np.ndarray], tol: float = 1e-9) -> np.ndarray:
    basis = orth(start, rcond=tol)
    while True:
        grown = np.hstack([basis] + [op @ basis for op in ops])
        new = orth(grown, rcond=tol)
        if new.shape[1] == basis.shape[1]:
            return new
        basis = new


def _split_by_highest_weight(
    rep: MatrixRep, space: np.ndarray, lambdas: list[DominantWeight]
) -> list[np.ndarray]:
    """Project a B-eigenspace shared by several summands onto each summand.

    The highest weight vector of each summand is located inside the space and
    the invariant subspace it generates is taken as that summand.
    """
    basis = orth(space, rcond=1e-8)
    gens = total_gens(rep)
    n = rep.n
    ops = [np.conj(basis.T) @ gens[i, j] @ basis for i, j in itertools.combinations(range(n), 2)]
    cartan = [np.conj(basis.T) @ h @ basis for h in _cartan(gens)]
    out = []
    size = basis.shape[1]
    for lam in lambdas:
        stacked = sum(
            (c - (d / 2) * np.eye(size)) @ np.conj((c - (d / 2) * np.eye(size)).T)
            for c, d in zip(cartan, lam.doubled)
        )
        vals, vecs = np.linalg.eigh(stacked)
        top = vecs[:, vals < 1e-8]
        if top.shape[1] != 1:
            raise ConsistencyError(f"highest weight {lam} has multiplicity {top.shape[1]} in B-eigenspace")
        sub = _krylov_closure(top, ops)
        full = basis @ sub
        out.append(full @ np.conj(full.T))
    return out


def build_projections(B: BOperator, decomp: Decomposition) -> ProjectionSet:
    """Orthogonal projections onto the summands, in the order of ``decomp``.

    Each distinct eigenvalue w of B gives the spectral projection
    prod_{w' != w} (B - w')/(w - w'); when two summands share w it is split
    further by highest weight vectors.
    """
    rep = B.rep
    if rep.rho != decomp.rho:
        raise ConsistencyError(f"rep has weight {rep.rho}, decomposition is for {decomp.rho}")
    levels = sorted({float(w) for w in decomp.weights}, reverse=True)
    eigs = B.eigenvalues()
    stray = [e for e in eigs if min(abs(e - w) for w in levels) > EIG_MATCH_TOL]
    if stray:
        raise ConsistencyError(f"B has eigenvalues {stray[:5]} not predicted by {decomp.rho}")

    size = B.matrix.shape[0]
    eye = np.eye(size)
    spectral = {}
    for w in levels:
        proj = eye.astype(B.matrix.dtype)
        for other in levels:
            if other != w:
                proj = proj @ (B.matrix - other * eye) / (w - other)
        spectral[w] = proj

    projections: list[np.ndarray | None] = [None] * decomp.N
    for w in levels:
        members = [j for j, s in enumerate(decomp.summands) if float(s.conformal_weight) == w]
        if len(members) == 1:
            projections[members[0]] = spectral[w]
        else:
            parts = _split_by_highest_weight(
                rep, spectral[w], [decomp.summands[j].weight for j in members]
            )
            for j, part in zip(members, parts):
                projections[j] = part
    return ProjectionSet(decomp, tuple(projections))


def symbol_matrix(proj: ProjectionSet, j: int, xi) -> np.ndarray:
    """Compression q_j(xi)_{ab} = <xi (x) sigma_a, Pi_j (xi (x) sigma_b)>."""
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise ValueError("xi must be a unit vector")
    pi = proj[j]
    d = pi.shape[0] // xi.size
    lift = np.kron(xi[:, None], np.eye(d))
    return lift.T @ pi @ lift


def spectral_report(rep: MatrixRep, decomp: Decomposition, tol: float = 1e-9) -> dict:
    """Compare the explicit matrices with the exact predictions.

    Returns residuals and pass flags: generator skewness and brackets, the B
    spectrum against conformal weights with Weyl-dimension multiplicities,
    the trace identity for B^2 and the projection algebra.
    """
    B = build_B(rep)
    eigs = np.sort(B.eigenvalues())
    predicted = np.sort(
        np.concatenate([np.full(s.dim, float(s.conformal_weight)) for s in decomp.summands])
    )
    if eigs.shape != predicted.shape:
        spectrum_err = float("inf")
    else:
        spectrum_err = float(np.max(np.abs(eigs - predicted)))
    trace_b2 = float(np.real(np.trace(B.matrix @ B.matrix)))
    exact_b2 = float(2 * rep.dim_V * casimir(decomp.rho))
    rel_b2 = abs(trace_b2 - exact_b2) / max(abs(exact_b2), 1.0)
    cas = rep.casimir_matrix()
    cas_err = float(np.max(np.abs(cas - float(casimir(decomp.rho)) * np.eye(rep.dim_V))))
    proj = build_projections(B, decomp)
    proj_res = proj.residuals()
    eigen_res = max(
        float(np.max(np.abs(B.matrix @ p - float(w) * p)))
        for p, w in zip(proj.projections, decomp.weights)
    )
    checks = {
        "skew": rep.skew_residual() <= 1e-12,
        "brackets": rep.bracket_residual() <= 1e-12,
        "highest_weight": highest_weight(rep) == decomp.rho,
        "casimir": cas_err <= tol,
        "B_self_adjoint": B.hermitian_residual() <= 1e-12,
        "B_partial_trace": float(np.max(np.abs(B.partial_trace()), initial=0.0)) <= 1e-12,
        "spectrum": spectrum_err <= tol,
        "trace_B_squared": rel_b2 <= tol,
        "projections": max(proj_res.values()) <= tol and eigen_res <= tol,
        "ranks": proj.ranks == decomp.dims,
    }
    return {
        "family": rep.family,
        "params": dict(rep.params),
        "n": rep.n,
        "rho": rep.rho.text(),
        "dim_V": rep.dim_V,
        "spectrum_error": spectrum_err,
        "trace_B_squared": trace_b2,
        "trace_B_squared_exact": exact_b2,
        "trace_B_squared_rel_error": rel_b2,
        "projection_residuals": proj_res,
        "eigen_residual": eigen_res,
        "ranks": list(proj.ranks),
        "checks": checks,
        "passed": all(checks.values()),
        "_B": B,
        "_projections": proj,
    }
