"""Sphere integrals at finite radius and their limits r -> infinity.

``mass_quadrature`` evaluates the raw (unnormalised) mass flux integral;
``boundary_term`` evaluates the Weitzenboeck boundary contribution summed over
an orthonormal basis of constant sections. Both are extrapolated with the
single-power model value(r) = limit + c * r^-s.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .geometry import MetricChart, adm_integrand, connection_form_exact, h_map
from .quadrature import sphere_quadrature
from .spectral import MatrixRep, ProjectionSet
from .weitzenbock import CoefficientVector, mass_coefficient

__all__ = [
    "MassReport",
    "extrapolate",
    "mass_quadrature",
    "boundary_kernel",
    "boundary_term",
    "boundary_report",
    "theorem_check",
]

S_BOUNDS = (0.05, 12.0)


@dataclass
class MassReport:
    chart: dict
    radii: list[float]
    values: list[float]
    limit: float
    error_estimate: float
    model_exponent: float
    fit_residual: float
    accepted: bool
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _linear_fit(r, v, s):
    design = np.stack([np.ones_like(r), r**-s], axis=1)
    coef, *_ = np.linalg.lstsq(design, v, rcond=None)
    return coef, v - design @ coef


def extrapolate(radii, values) -> dict:
    """Least-squares fit of value(r) = limit + c r^-s with s > 0.

    Needs at least three radii; the exponent is first located by a bounded
    scalar search (limit and c solved linearly for each s) and then polished
    jointly. Returns limit, c, s, rms residual, error estimate and flags.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    flags: list[str] = []
    if len(r) < 3:
        return {
            "limit": float(v[-1]),
            "c": 0.0,
            "s": float("nan"),
            "residual": float("nan"),
            "error_estimate": float(abs(v[-1] - v[0])) if len(v) > 1 else float("inf"),
            "flags": ["too few radii for extrapolation"],
        }
    scale = max(np.max(np.abs(v)), 1e-300)
    if np.max(np.abs(v - v[-1])) <= 1e-14 * scale or np.allclose(v, 0.0, atol=1e-300):
        return {"limit": float(v[-1]), "c": 0.0, "s": float("nan"), "residual": 0.0,
                "error_estimate": float(np.max(np.abs(v - v[-1]))), "flags": []}

    rn = r / r[-1]

    def cost(s):
        return float(np.sum(_linear_fit(rn, v, s)[1] ** 2))

    best = minimize_scalar(cost, bounds=S_BOUNDS, method="bounded", options={"xatol": 1e-10})
    s0 = float(best.x)
    (m0, c0), _ = _linear_fit(rn, v, s0)

    def resid(params):
        m, c, s = params
        return (m + c * rn**-s - v) / scale

    sol = least_squares(
        resid, x0=[m0, c0, s0], bounds=([-np.inf, -np.inf, S_BOUNDS[0]], [np.inf, np.inf, S_BOUNDS[1]]),
        xtol=1e-15, ftol=1e-15, gtol=1e-15,
    )
    m, c, s = (float(x) for x in sol.x)
    res = resid(sol.x) * scale
    rms = float(np.sqrt(np.mean(res**2)))

    diffs = np.diff(v)
    if np.any(diffs[:-1] * diffs[1:] < 0):
        flags.append("non-monotone convergence")
    if min(abs(s - S_BOUNDS[0]), abs(s - S_BOUNDS[1])) < 1e-6:
        flags.append("decay exponent at search bound")
    if rms > 1e-3 * max(abs(v[-1] - m), 1e-300) and len(r) > 3:
        flags.append("fit residual large compared with extrapolation")
    return {
        "limit": m,
        "c": c * r[-1] ** s,
        "s": s,
        "residual": rms,
        "error_estimate": float(abs(v[-1] - m) + rms),
        "flags": flags,
    }


def _report(chart: MetricChart, radii, values) -> MassReport:
    fit = extrapolate(radii, values)
    return MassReport(
        chart=chart.describe(),
        radii=[float(r) for r in radii],
        values=[float(x) for x in values],
        limit=fit["limit"],
        error_estimate=fit["error_estimate"],
        model_exponent=fit["s"],
        fit_residual=fit["residual"],
        accepted=not fit["flags"],
        flags=fit["flags"],
    )


def _check_radii(chart: MetricChart, radii) -> list[float]:
    radii = [float(r) for r in radii]
    if not radii:
        raise ValueError("need at least one radius")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    if radii[0] <= chart.r_min:
        raise ValueError(f"radii must exceed r_min = {chart.r_min}")
    return radii


def adm_flux(chart: MetricChart, radius: float, quad_order: int = 32) -> float:
    quad = sphere_quadrature(chart.n, radius, quad_order)
    g, dg = chart(quad.nodes)
    return float(quad.integrate(adm_integrand(g, dg, quad.nodes)))


def mass_quadrature(chart: MetricChart, radii, quad_order: int = 32) -> MassReport:
    """Raw mass flux on each sphere S_r and its extrapolated limit."""
    radii = _check_radii(chart, radii)
    values = [adm_flux(chart, r, quad_order) for r in radii]
    return _report(chart, radii, values)


def _coefficient_array(proj: ProjectionSet, a) -> np.ndarray:
    coeffs = a.coeffs if isinstance(a, CoefficientVector) else tuple(a)
    if isinstance(a, CoefficientVector) and a.decomp.rho != proj.decomp.rho:
        raise ValueError("coefficients and projections belong to different representations")
    if len(coeffs) != len(proj):
        raise ValueError(f"expected {len(proj)} coefficients, got {len(coeffs)}")
    return np.array([float(c) for c in coeffs])


def boundary_kernel(rep: MatrixRep, proj: ProjectionSet, a, basis: np.ndarray | None = None) -> np.ndarray:
    """K[y, x, j, k] = tr(U^* A_{yx} rho(e_j ^ e_k) U) with A = sum_j a_j Pi_j.

    The boundary integrand is then -1/2 Re sum nu_y omega[x, j, k] K[y, x, j, k].
    """
    if rep.rho != proj.decomp.rho:
        raise ValueError("representation and projections are not aligned")
    coeffs = _coefficient_array(proj, a)
    n, d = rep.n, rep.dim_V
    A = sum(c * p for c, p in zip(coeffs, proj.projections)).reshape(n, d, n, d)
    if basis is None:
        return np.einsum("yaxb,jkba->yxjk", A, rep.gens)
    U = np.asarray(basis)
    if U.shape != (d, d) or not np.allclose(np.conj(U.T) @ U, np.eye(d), atol=1e-12):
        raise ValueError("basis must be an orthonormal basis of V (as matrix columns)")
    return np.einsum("ac,ycxd,jkde,ea->yxjk", np.conj(U.T), A, rep.gens, U, optimize=True)


def boundary_term(
    chart: MetricChart,
    rep: MatrixRep,
    proj: ProjectionSet,
    a,
    radius: float,
    quad_order: int = 32,
    exact_frame: bool = False,
    basis: np.ndarray | None = None,
) -> float:
    """-sum_kappa integral over S_r of <nu (x) sigma_kappa, A(rho(omega) sigma_kappa)>.

    omega is the exact connection form. By default nu is the euclidean unit
    normal and the area element euclidean; ``exact_frame`` uses the g-unit
    normal written in the frame H e_i and the induced area element instead.
    """
    if chart.n != rep.n:
        raise ValueError("chart and representation dimensions differ")
    if radius <= chart.r_min:
        raise ValueError(f"radius must exceed r_min = {chart.r_min}")
    kernel = boundary_kernel(rep, proj, a, basis)
    quad = sphere_quadrature(chart.n, radius, quad_order)
    g, dg = chart(quad.nodes)
    omega = connection_form_exact(g, dg).omega
    nu = quad.normals
    weights = quad.weights
    if exact_frame:
        ginv = np.linalg.inv(g)
        norm_g = np.sqrt(np.einsum("pi,pij,pj->p", nu, ginv, nu))
        nu = np.einsum("pij,pj->pi", h_map(g), nu) / norm_g[:, None]
        weights = weights * np.sqrt(np.linalg.det(g)) * norm_g
    integrand = -0.5 * np.real(np.einsum("py,pxjk,yxjk->p", nu, omega, kernel))
    return float(weights @ integrand)


def boundary_report(
    chart: MetricChart,
    rep: MatrixRep,
    proj: ProjectionSet,
    a,
    radii,
    quad_order: int = 32,
    exact_frame: bool = False,
) -> MassReport:
    radii = _check_radii(chart, radii)
    values = [boundary_term(chart, rep, proj, a, r, quad_order, exact_frame) for r in radii]
    return _report(chart, radii, values)


def theorem_check(
    chart: MetricChart,
    rep: MatrixRep,
    proj: ProjectionSet,
    a,
    radii,
    quad_order: int = 32,
    rel_tol: float = 0.01,
) -> dict:
    """Compare the extrapolated boundary term with mu(a) times the extrapolated mass."""
    mu = mass_coefficient(proj.decomp, a if isinstance(a, CoefficientVector) else tuple(a))
    mass = mass_quadrature(chart, radii, quad_order)
    boundary = boundary_report(chart, rep, proj, a, radii, quad_order)
    exact = boundary_report(chart, rep, proj, a, radii, quad_order, exact_frame=True)
    ratio = boundary.limit / mass.limit if mass.limit != 0 else float("nan")
    ratio_exact = exact.limit / mass.limit if mass.limit != 0 else float("nan")
    mu_f = float(mu)
    if mu_f == 0:
        ok = abs(boundary.limit) <= rel_tol * max(abs(mass.limit), 1.0)
    else:
        ok = abs(ratio - mu_f) <= rel_tol * abs(mu_f) and abs(ratio_exact - mu_f) <= rel_tol * abs(mu_f)
    return {
        "mu": mu,
        "mass": mass,
        "boundary": boundary,
        "boundary_exact_frame": exact,
        "ratio": ratio,
        "ratio_exact_frame": ratio_exact,
        "per_radius_ratio": [b / m for b, m in zip(boundary.values, mass.values)],
        "passed": bool(ok),
    }
