"""Finite-size scaling fits and the cut-off search."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares


class NoCrossingError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    A: float
    B: float
    C: float
    p_th: float
    nu0: float
    stderr: tuple            # standard errors of (A, B, C, p_th, nu0)
    residual_norm: float

    @property
    def p_th_err(self) -> float:
        return self.stderr[3]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def scaling_model(params, d, p):
    A, B, C, p_th, nu0 = params
    g = (p - p_th) * np.power(d, 1.0 / nu0)
    return A + B * g + C * g * g


def crossing_estimate(d, p, p_L) -> float:
    """Where the two largest-distance curves cross, by linear interpolation."""
    d, p, p_L = map(np.asarray, (d, p, p_L))
    big = np.unique(d)[-2:]
    if len(big) < 2:
        raise NoCrossingError("need at least two distances")
    grid = np.intersect1d(p[d == big[0]], p[d == big[1]])
    if len(grid) < 2:
        raise NoCrossingError("the two largest distances share fewer than two p values")

    def curve(dd):
        order = np.argsort(p[d == dd])
        return np.interp(grid, p[d == dd][order], p_L[d == dd][order])

    diff = curve(big[1]) - curve(big[0])
    for k in range(len(grid) - 1):
        a, b = diff[k], diff[k + 1]
        if a == 0 and b == 0:
            continue
        if a == 0:
            return float(grid[k])
        if a * b < 0:
            return float(grid[k] + (grid[k + 1] - grid[k]) * a / (a - b))
    if diff[-1] == 0 and np.any(diff != 0):
        return float(grid[-1])
    raise NoCrossingError("no crossing in range")


def fit_threshold(d, p, p_L, sigma=None) -> FitResult:
    d, p, p_L = (np.asarray(a, dtype=float) for a in (d, p, p_L))
    if len(np.unique(d)) < 3 or len(np.unique(p)) < 4:
        raise ValueError("need at least 3 distances and 4 p values")
    sigma = np.ones_like(p_L) if sigma is None else np.asarray(sigma, dtype=float)
    sigma = np.where(sigma > 0, sigma, np.min(sigma[sigma > 0]) if np.any(sigma > 0) else 1.0)
    p_th0 = crossing_estimate(d, p, p_L)
    g = p - p_th0
    design = np.stack([np.ones_like(g), g * d, (g * d) ** 2], axis=1) / sigma[:, None]
    abc, *_ = np.linalg.lstsq(design, p_L / sigma, rcond=None)
    x0 = np.array([*abc, p_th0, 1.0])
    scale = np.array([1.0, 1.0, 1.0, max(abs(p_th0), 1e-6), 1.0])

    def resid(x):
        return (scaling_model(x, d, p) - p_L) / sigma

    lower = [-np.inf, -np.inf, -np.inf, p.min(), 1e-3]
    upper = [np.inf, np.inf, np.inf, p.max(), 50.0]
    x0[3] = np.clip(x0[3], p.min(), p.max())
    sol = least_squares(resid, x0, bounds=(lower, upper), x_scale=scale, xtol=1e-15,
                        ftol=1e-15, gtol=1e-15, max_nfev=20000)
    J = sol.jac
    dof = max(len(p_L) - 5, 1)
    s2 = 2 * sol.cost / dof
    try:
        cov = np.linalg.inv(J.T @ J) * s2
        stderr = tuple(float(math.sqrt(max(c, 0.0))) for c in np.diag(cov))
    except np.linalg.LinAlgError:
        raise ValueError("degenerate Jacobian") from None
    A, B, C, p_th, nu0 = (float(v) for v in sol.x)
    if not p.min() <= p_th <= p.max() or nu0 <= 0:
        raise NoCrossingError("fitted threshold outside the sampled range")
    return FitResult(A, B, C, p_th, nu0, stderr, float(np.linalg.norm(sol.fun)))


def fit_points(points) -> FitResult:
    """Fit ``PointResult``-like records, weighting by Wilson half-widths."""
    d = [pt.d for pt in points]
    p = [pt.p for pt in points]
    pl = [pt.p_L for pt in points]
    sig = [max((pt.ci[1] - pt.ci[0]) / 2, 1e-6) for pt in points]
    return fit_threshold(d, p, pl, sig)


# ------------------------------------------------------------------ cut-off

GOLDEN = (math.sqrt(5) - 1) / 2


def optimize_cutoff(evaluate, lo: float = 0.5, hi: float = 0.999, probes: int = 12):
    """Golden-section search for the completion fraction with the best threshold.

    ``evaluate(x)`` returns ``(p_th, err)`` or ``None`` when no threshold
    exists. Among probed points within error bars of the best, the smallest
    ``x`` wins. Returns ``(x*, p_th*)`` or ``("NT", None)``.
    """
    cache = {}

    def f(x):
        if x not in cache:
            cache[x] = evaluate(x)
        r = cache[x]
        return -math.inf if r is None else r[0]

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    e = a + GOLDEN * (b - a)
    fc, fe = f(c), f(e)
    for _ in range(max(probes - 2, 0)):
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + GOLDEN * (b - a)
            fe = f(e)
    found = {x: r for x, r in cache.items() if r is not None}
    if not found:
        return "NT", None
    best_x = max(found, key=lambda x: (found[x][0], -x))
    best, best_err = found[best_x]
    ties = [x for x, (v, err) in found.items() if v + err >= best - best_err]
    x_star = min(ties)
    return x_star, found[x_star][0]
