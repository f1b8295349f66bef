"""Asymptotically flat charts, the H-map and connection forms.

Arrays are batched over a leading point axis. Metric derivatives use the
layout ``dg[..., k, i, j] = d_k g_ij``; connection forms use
``omega[..., x, j, k] = omega_j^k(e_x)``, i.e. g(nabla_{e_x} eps_j, eps_k) for
the frame eps_j = H e_j.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "MetricChart",
    "FrameData",
    "builtin_chart",
    "flat_chart",
    "schwarzschild_chart",
    "perturbation_chart",
    "random_perturbation_chart",
    "h_map",
    "h_derivative",
    "connection_form_exact",
    "connection_form_asymptotic",
    "connection_form_christoffel",
    "embed_one_form",
    "pi_projection",
    "div_minus_dtr",
    "adm_integrand",
    "fit_decay",
]

EvalFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True, eq=False)
class MetricChart:
    """A metric on R^n minus a ball, with analytic first derivatives."""

    n: int
    kind: str
    params: dict
    tau: float
    r_min: float
    eval_fn: EvalFn = field(repr=False)

    def __call__(self, x) -> tuple[np.ndarray, np.ndarray]:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != self.n:
            raise ValueError(f"points must have {self.n} coordinates")
        radii = np.linalg.norm(pts, axis=1)
        if np.any(radii <= self.r_min):
            raise ValueError(f"chart is only defined for |x| > {self.r_min}")
        g, dg = self.eval_fn(pts)
        if single:
            return g[0], dg[0]
        return g, dg

    def describe(self) -> dict:
        return {"kind": self.kind, "n": self.n, "tau": self.tau, "r_min": self.r_min, **self.params}


def _radial(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = np.linalg.norm(x, axis=1)
    return r, x / r[:, None]


def flat_chart(n: int) -> MetricChart:
    def evaluate(x):
        p = len(x)
        return np.broadcast_to(np.eye(n), (p, n, n)).copy(), np.zeros((p, n, n, n))

    return MetricChart(n, "flat", {}, float("inf"), 0.0, evaluate)


def schwarzschild_chart(n: int, M: float) -> MetricChart:
    """Isotropic Schwarzschild: g = (1 + M/(2 r^{n-2}))^{4/(n-2)} delta."""
    if n < 3:
        raise ValueError("n must be at least 3")
    if not M > 0:
        raise ValueError("Schwarzschild mass parameter must be positive")
    power = 4.0 / (n - 2)
    eye = np.eye(n)

    def evaluate(x):
        r, nu = _radial(x)
        u = 1.0 + M / (2.0 * r ** (n - 2))
        phi = u**power
        dphi = -2.0 * M * u ** (power - 1.0) / r ** (n - 1)
        g = phi[:, None, None] * eye
        dg = (dphi[:, None] * nu)[:, :, None, None] * eye
        return g, dg

    r_min = 2.0 * M ** (1.0 / (n - 2))
    return MetricChart(n, "schwarzschild", {"M": M}, float(n - 2), r_min, evaluate)


def perturbation_chart(
    n: int,
    h: Callable[[np.ndarray], np.ndarray],
    dh: Callable[[np.ndarray], np.ndarray],
    tau: float,
    r_min: float = 1.0,
    params: dict | None = None,
) -> MetricChart:
    """g = delta + h for a user-supplied symmetric, decaying h with derivative dh.

    ``h`` maps points (P, n) to (P, n, n); ``dh`` to (P, n, n, n) with the
    derivative index first.
    """
    eye = np.eye(n)

    def evaluate(x):
        return eye + h(x), dh(x)

    return MetricChart(n, "perturbation", dict(params or {}), float(tau), float(r_min), evaluate)


def random_perturbation_chart(
    n: int, tau: float, rng: np.random.Generator, amplitude: float = 0.2
) -> MetricChart:
    """g = delta + amplitude * (A s^-tau + (C.x) s^-tau-1) with s = sqrt(1 + |x|^2).

    A and each C[..., l] are random symmetric matrices normalised so that g
    stays positive definite everywhere.
    """
    A = rng.standard_normal((n, n))
    A = (A + A.T) / 2
    C = rng.standard_normal((n, n, n))
    C = (C + np.swapaxes(C, 0, 1)) / 2
    scale = np.linalg.norm(A, 2) + np.sqrt(np.sum(C**2))
    A, C = amplitude * A / scale, amplitude * C / scale

    def h(x):
        s = np.sqrt(1.0 + np.sum(x**2, axis=1))
        cx = np.einsum("ijl,pl->pij", C, x)
        return A * s[:, None, None] ** -tau + cx * s[:, None, None] ** (-tau - 1)

    def dh(x):
        s = np.sqrt(1.0 + np.sum(x**2, axis=1))[:, None, None, None]
        cx = np.einsum("ijl,pl->pij", C, x)[:, None]
        xk = x[:, :, None, None]
        return (
            -tau * A * s ** (-tau - 2) * xk
            + np.moveaxis(C, -1, 0)[None] * s ** (-tau - 1)
            - (tau + 1) * cx * s ** (-tau - 3) * xk
        )

    return perturbation_chart(n, h, dh, tau, 1.0, {"random": True, "amplitude": amplitude})


def builtin_chart(kind: str, n: int, check: bool = True, **params) -> MetricChart:
    """Construct one of the named charts and spot-check its invariants.

    ``kind`` is ``flat``, ``schwarzschild`` (needs ``M``) or ``perturbation``
    (needs ``h``, ``dh``, ``tau``).
    """
    if kind == "flat":
        chart = flat_chart(n)
    elif kind == "schwarzschild":
        if "M" not in params:
            raise ValueError("schwarzschild chart needs M")
        chart = schwarzschild_chart(n, float(params["M"]))
    elif kind == "perturbation":
        try:
            chart = perturbation_chart(n, params["h"], params["dh"], params["tau"], params.get("r_min", 1.0))
        except KeyError as exc:
            raise ValueError(f"perturbation chart needs {exc.args[0]}") from None
    else:
        raise ValueError(f"unknown chart kind {kind!r}")
    if check and kind != "flat":
        _spot_check(chart)
    return chart


def fit_decay(chart: MetricChart, directions: int = 6, levels: int = 6, seed: int = 0) -> dict:
    """Fitted decay exponents of |g - delta| and |dg| over dyadic radii."""
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((directions, chart.n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r0 = max(4.0 * chart.r_min, 4.0)
    radii = r0 * 2.0 ** np.arange(levels)
    sizes_g, sizes_dg = [], []
    for r in radii:
        g, dg = chart(r * dirs)
        sizes_g.append(np.max(np.abs(g - np.eye(chart.n))))
        sizes_dg.append(np.max(np.abs(dg)))
    logr = np.log(radii)
    return {
        "radii": radii,
        "g": -np.polyfit(logr, np.log(sizes_g), 1)[0],
        "dg": -np.polyfit(logr, np.log(sizes_dg), 1)[0],
    }


def _spot_check(chart: MetricChart) -> None:
    rng = np.random.default_rng(1)
    pts = rng.standard_normal((32, chart.n))
    pts *= ((chart.r_min + 1.0) * (1 + 10 * rng.random(32)) / np.linalg.norm(pts, axis=1))[:, None]
    g, dg = chart(pts)
    if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-12):
        raise ValueError("metric is not symmetric")
    if np.min(np.linalg.eigvalsh(g)) <= 0:
        raise ValueError("metric is not positive definite outside r_min")
    if not np.allclose(dg, np.swapaxes(dg, -1, -2), atol=1e-12):
        raise ValueError("metric derivative is not symmetric")
    decay = fit_decay(chart)
    if decay["g"] < 0.9 * chart.tau or decay["dg"] < 0.9 * (chart.tau + 1):
        raise ValueError(
            f"chart decays like r^-{decay['g']:.3g} (derivative r^-{decay['dg']:.3g}), "
            f"slower than the claimed order {chart.tau}"
        )


@dataclass(frozen=True, eq=False)
class FrameData:
    H: np.ndarray
    omega: np.ndarray

    def antisymmetry_residual(self) -> float:
        return float(np.max(np.abs(self.omega + np.swapaxes(self.omega, -1, -2))))


def _sym_eig(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    g = np.asarray(g, dtype=float)
    if not np.allclose(g, np.swapaxes(g, -1, -2), atol=1e-12):
        raise ValueError("metric must be symmetric")
    vals, vecs = np.linalg.eigh(g)
    if np.any(vals <= 0):
        raise ValueError("metric must be positive definite")
    return vals, vecs


def h_map(g: np.ndarray) -> np.ndarray:
    """Symmetric positive H with H g H = identity, i.e. g^{-1/2}."""
    vals, vecs = _sym_eig(g)
    return (vecs * vals[..., None, :] ** -0.5) @ np.swapaxes(vecs, -1, -2)


def h_derivative(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """d_k H for H = g^{-1/2}, from dH g^{1/2} + g^{1/2} dH = -H dg H.

    Diagonalising g = V diag(s^2) V^T turns this into an entrywise division.
    """
    vals, vecs = _sym_eig(g)
    s = np.sqrt(vals)
    vt = np.swapaxes(vecs, -1, -2)
    rotated = vt[..., None, :, :] @ dg @ vecs[..., None, :, :]
    denom = s[..., :, None] * s[..., None, :] * (s[..., :, None] + s[..., None, :])
    solved = -rotated / denom[..., None, :, :]
    return vecs[..., None, :, :] @ solved @ vt[..., None, :, :]


def connection_form_exact(g: np.ndarray, dg: np.ndarray) -> FrameData:
    """Connection form of the metric in the frame H e_j, via derivatives of H only.

    omega_j^k(X) = 1/2 <(D_X H) e_j - (D_{He_j} H) H^{-1} X, H e_k>
                 - 1/2 <(D_X H) e_k - (D_{He_k} H) H^{-1} X, H e_j>
                 - 1/2 <(D_{He_j} H) e_k - (D_{He_k} H) e_j, X>
    with <,> the metric g and D the flat derivative. This is the Koszul
    formula in the frame; the last pairing is with X itself (pairing with
    H X instead only agrees to leading order).
    """
    H = h_map(g)
    D = h_derivative(g, dg)  # (..., m, a, b)
    Hinv = np.linalg.inv(H)
    gh = g @ H
    # E[j] = D_{H e_j} H = sum_m H_mj D[m]
    E = np.einsum("...mj,...mab->...jab", H, D)
    # term1[x, j, k] = 1/2 (D[x][:, j] - (E[j] Hinv)[:, x]) . gh[:, k]
    first = np.einsum("...xaj,...ak->...xjk", D, gh)
    second = np.einsum("...jab,...bx,...ak->...xjk", E, Hinv, gh)
    term1 = 0.5 * (first - second)
    term2 = -np.swapaxes(term1, -1, -2)
    ejk = np.einsum("...jak,...ax->...xjk", E, g)
    term3 = -0.5 * (ejk - np.swapaxes(ejk, -1, -2))
    return FrameData(H, term1 + term2 + term3)


def connection_form_christoffel(g: np.ndarray, dg: np.ndarray) -> FrameData:
    """Same connection form computed as g(nabla_X (H e_j), H e_k) with Christoffel symbols."""
    H = h_map(g)
    D = h_derivative(g, dg)
    ginv = np.linalg.inv(g)
    # Gamma^l_{ab} = 1/2 g^{lc} (d_a g_bc + d_b g_ac - d_c g_ab)
    lowered = 0.5 * (
        dg + np.swapaxes(dg, -3, -2) - np.moveaxis(dg, -3, -1)
    )  # (..., a, b, c)
    christoffel = np.einsum("...lc,...abc->...lab", ginv, lowered)
    # nabla_{e_x} (H e_j) = (d_x H) e_j + Gamma(e_x, H e_j)
    nabla = np.swapaxes(D, -1, -2) + np.einsum("...lxb,...bj->...xjl", christoffel, H)
    omega = np.einsum("...xjl,...lm,...mk->...xjk", nabla, g, H)
    return FrameData(H, omega)


def connection_form_asymptotic(dg: np.ndarray) -> FrameData:
    """Leading-order connection form 1/2 (d_j g(X, e_k) - d_k g(X, e_j))."""
    dg = np.asarray(dg, dtype=float)
    # dg[..., j, x, k] -> omega[..., x, j, k]
    lead = np.swapaxes(dg, -3, -2)
    omega = 0.5 * (lead - np.swapaxes(lead, -1, -2))
    n = dg.shape[-1]
    return FrameData(np.broadcast_to(np.eye(n), dg.shape[:-3] + (n, n)), omega)


def embed_one_form(alpha: np.ndarray) -> np.ndarray:
    """i(alpha): X -> alpha ^ X, as omega[x, j, k] = alpha_j delta_xk - alpha_k delta_xj."""
    alpha = np.asarray(alpha, dtype=float)
    n = alpha.shape[-1]
    eye = np.eye(n)
    return alpha[..., None, :, None] * eye[:, None, :] - alpha[..., None, None, :] * eye[:, :, None]


def pi_projection(omega) -> np.ndarray:
    """Projection of R^n (x) so(n) onto its R^n summand, normalised so pi(i(alpha)) = alpha."""
    om = omega.omega if isinstance(omega, FrameData) else np.asarray(omega)
    n = om.shape[-1]
    return np.einsum("...jjk->...k", om) / (1 - n)


def div_minus_dtr(dg: np.ndarray) -> np.ndarray:
    """(div_0 g - d tr_0 g)_i = sum_j d_j g_ij - d_i g_jj."""
    return np.einsum("...jij->...i", dg) - np.einsum("...ijj->...i", dg)


def adm_integrand(g: np.ndarray, dg: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(div_0 g - d tr_0 g)(nu) with nu = x/|x| the euclidean outer normal."""
    x = np.asarray(x, dtype=float)
    nu = x / np.linalg.norm(x, axis=-1, keepdims=True)
    return np.einsum("...i,...i->...", div_minus_dtr(dg), nu)
