"""Dense BFGS with a strong-Wolfe line search.

Follows the textbook quasi-Newton recipe: inverse-Hessian update
``H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T``, first-step scaling
``H0 = (y^T s / y^T y) I``, and a bracketing/zoom line search.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

log = logging.getLogger(__name__)

C1 = 1e-4
C2 = 0.9


class LineSearchError(RuntimeError):
    pass


@dataclass
class BfgsTrace:
    fvals: list[float] = field(default_factory=list)
    xs: list[np.ndarray] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    nit: int = 0
    nfev: int = 0
    ngev: int = 0
    status: str = ""
    converged: bool = False

    @property
    def fun(self) -> float:
        return self.fvals[-1]


def _cubicmin(a, fa, fpa, b, fb, c, fc):
    """Minimizer of the cubic through (a,fa,fpa), (b,fb), (c,fc); None if undefined."""
    with np.errstate(divide="raise", over="raise", invalid="raise"):
        try:
            C = fpa
            db, dc = b - a, c - a
            denom = (db * dc) ** 2 * (db - dc)
            d1 = np.array([[dc ** 2, -db ** 2], [-dc ** 3, db ** 3]])
            A, B = d1 @ np.array([fb - fa - C * db, fc - fa - C * dc]) / denom
            radical = B * B - 3 * A * C
            xmin = a + (-B + np.sqrt(radical)) / (3 * A)
        except (ArithmeticError, FloatingPointError):
            return None
    return xmin if np.isfinite(xmin) else None


def _quadmin(a, fa, fpa, b, fb):
    with np.errstate(divide="raise", over="raise", invalid="raise"):
        try:
            db = b - a
            B = (fb - fa - fpa * db) / (db * db)
            xmin = a - fpa / (2.0 * B)
        except (ArithmeticError, FloatingPointError):
            return None
    return xmin if np.isfinite(xmin) else None


def wolfe_line_search(phi, dphi, phi0, dphi0, alpha1=1.0, c1=C1, c2=C2, amax=50.0, maxiter=30):
    """Return ``(alpha, phi(alpha), dphi(alpha))`` satisfying the strong Wolfe conditions."""
    if dphi0 >= 0:
        raise LineSearchError("not a descent direction")
    a_prev, f_prev, d_prev = 0.0, phi0, dphi0
    a = alpha1
    for i in range(maxiter):
        fa = phi(a)
        if fa > phi0 + c1 * a * dphi0 or (i > 0 and fa >= f_prev):
            return _zoom(phi, dphi, a_prev, a, f_prev, fa, d_prev, phi0, dphi0, c1, c2)
        da = dphi(a)
        if abs(da) <= -c2 * dphi0:
            return a, fa, da
        if da >= 0:
            return _zoom(phi, dphi, a, a_prev, fa, f_prev, da, phi0, dphi0, c1, c2)
        a_prev, f_prev, d_prev = a, fa, da
        a = min(2.0 * a, amax)
    raise LineSearchError("no acceptable step within the expansion budget")


def _zoom(phi, dphi, a_lo, a_hi, f_lo, f_hi, d_lo, phi0, dphi0, c1, c2, maxiter=30):
    a_rec, f_rec = 0.0, phi0
    for i in range(maxiter):
        gap = a_hi - a_lo
        lo, hi = (a_lo, a_hi) if gap > 0 else (a_hi, a_lo)
        if abs(gap) < 1e-16 * max(1.0, abs(a_lo)):
            break
        cand = None
        if i > 0:
            cand = _cubicmin(a_lo, f_lo, d_lo, a_hi, f_hi, a_rec, f_rec)
        if cand is None or not (lo + 0.2 * abs(gap) < cand < hi - 0.2 * abs(gap)):
            cand = _quadmin(a_lo, f_lo, d_lo, a_hi, f_hi)
            if cand is None or not (lo + 0.1 * abs(gap) < cand < hi - 0.1 * abs(gap)):
                cand = a_lo + 0.5 * gap
        fc = phi(cand)
        if fc > phi0 + c1 * cand * dphi0 or fc >= f_lo:
            a_rec, f_rec = a_hi, f_hi
            a_hi, f_hi = cand, fc
        else:
            dc = dphi(cand)
            if abs(dc) <= -c2 * dphi0:
                return cand, fc, dc
            if dc * (a_hi - a_lo) >= 0:
                a_rec, f_rec = a_hi, f_hi
                a_hi, f_hi = a_lo, f_lo
            else:
                a_rec, f_rec = a_lo, f_lo
            a_lo, f_lo, d_lo = cand, fc, dc
    raise LineSearchError("zoom failed to find a Wolfe point")


def bfgs_minimize(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    cfg=None,
    *,
    gtol: float = 1e-10,
    xtol: float = 1e-8,
    maxiter: int = 1000,
    callback: Optional[Callable[[int, np.ndarray, float], bool]] = None,
) -> tuple[np.ndarray, BfgsTrace]:
    """Minimize ``fun``; stops on ``|grad| <= gtol``, ``|step| <= xtol`` or ``maxiter``.

    ``cfg`` (anything with ``grad_norm_tolerance``, ``step_tolerance`` and
    ``max_iterations``, e.g. a ``VqeConfig``) overrides the keyword tolerances.

    ``callback(iteration, x, f)`` runs after every accepted step and may
    return True to stop early.  Line-search failure returns the best point
    found so far with ``converged=False``.
    """
    if cfg is not None:
        gtol, xtol, maxiter = cfg.grad_norm_tolerance, cfg.step_tolerance, cfg.max_iterations
    x = np.array(x0, dtype=float).reshape(-1)
    trace = BfgsTrace()
    counts = {"f": 0, "g": 0}

    def f(v):
        counts["f"] += 1
        return float(fun(v))

    def g(v):
        counts["g"] += 1
        return np.asarray(grad(v), dtype=float).reshape(-1)

    fx = f(x)
    gx = g(x)
    n = x.size
    eye = np.eye(n)
    hinv = eye.copy()
    trace.fvals.append(fx)
    trace.xs.append(x.copy())
    trace.grad_norms.append(float(np.linalg.norm(gx)))

    def finish(status, converged):
        trace.status, trace.converged = status, converged
        trace.nfev, trace.ngev = counts["f"], counts["g"]
        return x, trace

    if callback is not None and callback(0, x, fx):
        return finish("callback", False)
    k = 0
    while True:
        if n == 0 or np.linalg.norm(gx) <= gtol:
            return finish("gtol", True)
        if k >= maxiter:
            return finish("maxiter", False)
        p = -hinv @ gx
        slope = float(gx @ p)
        if slope >= 0:
            hinv = eye.copy()
            p = -gx
            slope = float(gx @ p)
        cache = {}

        def phi(a):
            xa = x + a * p
            cache[a] = (xa, None)
            return f(xa)

        def dphi(a):
            xa = x + a * p
            ga = g(xa)
            cache[a] = (xa, ga)
            return float(ga @ p)

        try:
            alpha, f_new, _ = wolfe_line_search(phi, dphi, fx, slope)
        except LineSearchError as exc:
            log.debug("line search failed at iteration %d: %s", k, exc)
            return finish("line_search_failed", False)
        x_new, g_new = cache[alpha]
        if g_new is None:
            g_new = g(x_new)
        s = x_new - x
        y = g_new - gx
        ys = float(y @ s)
        if k == 0 and ys > 0:
            hinv = (ys / float(y @ y)) * eye
        if ys > 1e-300:
            rho = 1.0 / ys
            left = eye - rho * np.outer(s, y)
            hinv = left @ hinv @ left.T + rho * np.outer(s, s)
        x, fx, gx = x_new, f_new, g_new
        k += 1
        trace.nit = k
        trace.fvals.append(fx)
        trace.xs.append(x.copy())
        trace.grad_norms.append(float(np.linalg.norm(gx)))
        if callback is not None and callback(k, x, fx):
            return finish("callback", False)
        if np.linalg.norm(s) <= xtol:
            return finish("xtol", True)
