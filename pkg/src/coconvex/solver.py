"""Variational solvers for the coconvex Minkowski problems.

Given a discrete measure ``phi`` on Omega_C with atoms ``(u_i, c_i)``, the
solvers search Wulff offsets ``f`` over the atom directions:

* surface area problem: maximize ``log(sum c_i f_i) - log V(f) / n``;
* cone-volume problem (masses normalized to 1): maximize
  ``sum c_i log f_i - log V(f) / n``.

Both objectives are invariant under ``f -> s f``, so iterates are left
unnormalized and the maximizer is rescaled once at the end. The gradient of
``V`` is the vector of facet areas.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import ConvergenceWarning
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .core import (
    CFullBody,
    DiscreteMeasure,
    _wulff_unchecked,
    coconvex_volume,
    cone_volume_measure,
    facet_areas,
    surface_area_measure,
    validate_measure,
    wulff_shape,
)
from .exceptions import InvalidMeasure, NonConvergence
from .geometry import PolyhedralCone, require_omega, simplicial_volume, truncated_cone

F_FLOOR = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    max_iters: int = 5000
    tol_residual: float = 1e-10
    step0: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    init: Optional[Sequence[float]] = None
    seed: Optional[int] = None
    polish: bool = True
    polish_below: float = 1e-2

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class SolverReport:
    body: CFullBody
    f: np.ndarray
    scale: float
    residual: float
    iterations: int
    newton_steps: int = 0
    objective: list = field(default_factory=list)
    converged: bool = False
    problem: str = ""

    def as_dict(self) -> dict:
        return {
            "problem": self.problem,
            "converged": self.converged,
            "iterations": self.iterations,
            "newton_steps": self.newton_steps,
            "residual": self.residual,
            "scale": self.scale,
            "f": self.f.tolist(),
            "directions": self.body.directions.tolist(),
            "objective_first": self.objective[0] if self.objective else None,
            "objective_last": self.objective[-1] if self.objective else None,
        }


def _areas_and_volume(C: PolyhedralCone, U: np.ndarray, f: np.ndarray):
    body = _wulff_unchecked(C, U, f)
    return coconvex_volume(body), facet_areas(body)


def volume_functional(C: PolyhedralCone, dirs, f) -> float:
    """Coconvex volume of the Wulff shape with offsets ``f``."""
    return coconvex_volume(wulff_shape(C, dirs, f))


def volume_gradient(C: PolyhedralCone, dirs, f) -> np.ndarray:
    """Partial derivatives of :func:`volume_functional`: the facet area at
    each direction, zero where the constraint is slack."""
    return facet_areas(wulff_shape(C, dirs, f))


def unit_volume_height(C: PolyhedralCone, dirs) -> float:
    """A height ``t`` such that every body determined by ``dirs`` with unit
    coconvex volume contains ``C cap H_t``.

    Such a body meets ``C_z`` for any ``z`` with ``V(C_z) > 1``; the point
    found there bounds ``-h_K`` on the directions by ``z / b0`` (``b0`` the
    least height of a unit ray) and the norm bound for ``C \\ K`` then gives
    the height.
    """
    U = require_omega(C, dirs)
    v1 = simplicial_volume(truncated_cone(C, 1.0))
    z = 1.01 * v1 ** (-1.0 / C.dim)
    b0 = float(np.min(C.generators @ C.w))
    return 1.01 * z / (b0 * C.a0(U))


class _Problem:
    def __init__(self, C, U, c):
        self.C, self.U, self.c = C, U, c
        self.n = C.dim

    def evaluate(self, f):
        V, a = _areas_and_volume(self.C, self.U, f)
        return V, a, self.objective(f, V), self.gradient(f, V, a)


class _SurfaceProblem(_Problem):
    name = "surface"

    def objective(self, f, V):
        return math.log(float(self.c @ f)) - math.log(V) / self.n

    def gradient(self, f, V, a):
        return self.c / float(self.c @ f) - a / (self.n * V)

    def rescale(self, f, V):
        n = self.n
        f_unit = f / V ** (1.0 / n)
        lam = float(self.c @ f_unit) / n
        return lam ** (1.0 / (n - 1)) / V ** (1.0 / n)

    def masses(self, f, V, a):
        s = self.rescale(f, V)
        return a * s ** (self.n - 1)

    def equations(self, f):
        V, a = _areas_and_volume(self.C, self.U, f)
        return a - self.c


class _ConeVolumeProblem(_Problem):
    name = "conevolume"

    def __init__(self, C, U, c):
        super().__init__(C, U, c)
        self.total = float(c.sum())
        self.weights = c / self.total

    def objective(self, f, V):
        return float(self.weights @ np.log(f)) - math.log(V) / self.n

    def gradient(self, f, V, a):
        return self.weights / f - a / (self.n * V)

    def rescale(self, f, V):
        return (self.total / V) ** (1.0 / self.n)

    def masses(self, f, V, a):
        return (self.total / V) * f * a / self.n

    def equations(self, f):
        V, a = _areas_and_volume(self.C, self.U, f)
        return f * a / self.n - self.c


def _newton_polish(problem: _Problem, f: np.ndarray, tol: float, max_steps: int = 30):
    """Newton iteration on the rescaled measure equations, with a
    finite-difference Jacobian and residual backtracking.

    Returns the improved offsets and the number of Newton steps taken.
    """
    c = problem.c
    V, a = _areas_and_volume(problem.C, problem.U, f)
    f = problem.rescale(f, V) * f
    F = problem.equations(f)
    steps = 0
    for steps in range(1, max_steps + 1):
        if np.max(np.abs(F) / c) <= tol:
            break
        m = len(f)
        J = np.empty((m, m))
        for j in range(m):
            h = 1e-6 * f[j]
            e = np.zeros(m)
            e[j] = h
            J[:, j] = (problem.equations(f + e) - problem.equations(f - e)) / (2 * h)
        delta = np.linalg.lstsq(J, -F, rcond=None)[0]
        size = 1.0
        norm0 = float(np.max(np.abs(F) / c))
        while size > 1e-4:
            f_try = np.maximum(f + size * delta, F_FLOOR)
            F_try = problem.equations(f_try)
            if np.max(np.abs(F_try) / c) < norm0:
                break
            size *= 0.5
        else:
            break
        f, F = f_try, F_try
    return f, steps


def _initial_offsets(cfg: SolverConfig, m: int) -> np.ndarray:
    if cfg.init is not None:
        f = np.array(cfg.init, dtype=float)
        if f.shape != (m,) or np.any(f <= 0):
            raise ValueError(f"init must be {m} positive offsets")
        return f
    if cfg.seed is not None:
        return check_random_state(cfg.seed).uniform(0.5, 2.0, size=m)
    return np.ones(m)


def _residual(problem: _Problem, f, V, a) -> float:
    return float(np.max(np.abs(problem.masses(f, V, a) - problem.c) / problem.c))


def _try_polish(problem: _Problem, f, residual, tol):
    f_pol, steps = _newton_polish(problem, f, tol)
    V_pol, a_pol = _areas_and_volume(problem.C, problem.U, f_pol)
    res_pol = _residual(problem, f_pol, V_pol, a_pol)
    if res_pol <= tol and res_pol < residual:
        return f_pol, V_pol, res_pol, steps
    return None, None, None, steps


def _ascend(problem: _Problem, cfg: SolverConfig, strict: bool) -> SolverReport:
    f = _initial_offsets(cfg, len(problem.c))
    V, a, obj, g = problem.evaluate(f)
    trace = [obj]
    residual = _residual(problem, f, V, a)
    step = cfg.step0 * 1e-2 * float(np.linalg.norm(f)) / max(float(np.linalg.norm(g)), 1e-300)
    it = newton = 0
    next_polish = cfg.polish_below
    polished = False
    while residual > cfg.tol_residual and it < cfg.max_iters:
        if cfg.polish and residual < next_polish:
            next_polish = residual / 10.0
            f_pol, V_pol, res_pol, steps = _try_polish(problem, f, residual, cfg.tol_residual)
            newton += steps
            if f_pol is not None:
                f, V, residual, polished = f_pol, V_pol, res_pol, True
                break
        it += 1
        accepted = False
        for _ in range(60):
            f_new = np.maximum(f + step * g, F_FLOOR)
            V_new, a_new, obj_new, g_new = problem.evaluate(f_new)
            if obj_new >= obj + cfg.armijo * float(g @ (f_new - f)):
                accepted = True
                break
            step *= cfg.backtrack
        if not accepted:
            break
        s, y = f_new - f, g - g_new
        sy = float(s @ y)
        # Barzilai-Borwein trial step, capped to stay local
        step = float(s @ s) / sy if sy > 0 else step * 2.0
        step = min(step, 1e3 * float(np.linalg.norm(f_new)) / max(float(np.linalg.norm(g_new)), 1e-300))
        f, V, a, obj, g = f_new, V_new, a_new, obj_new, g_new
        trace.append(obj)
        residual = _residual(problem, f, V, a)

    if cfg.polish and not polished and cfg.tol_residual < residual < cfg.polish_below:
        f_pol, V_pol, res_pol, steps = _try_polish(problem, f, residual, cfg.tol_residual)
        newton += steps
        if f_pol is not None:
            f, V, residual = f_pol, V_pol, res_pol

    factor = problem.rescale(f, V)
    report = SolverReport(
        body=_wulff_unchecked(problem.C, problem.U, factor * f),
        f=factor * f,
        scale=factor,
        residual=residual,
        iterations=it,
        newton_steps=newton,
        objective=trace,
        converged=residual <= cfg.tol_residual,
        problem=problem.name,
    )
    if strict and not report.converged:
        raise NonConvergence(
            f"{problem.name} solver stopped at residual {residual:.3g} after {it} iterations", report
        )
    return report


def _prepare(C: PolyhedralCone, phi: DiscreteMeasure):
    validate_measure(C, phi)
    return phi.directions.copy(), phi.masses.astype(float)


def solve_surface(
    C: PolyhedralCone, phi: DiscreteMeasure, cfg: SolverConfig | None = None, strict: bool = False
) -> SolverReport:
    """Find the C-full body whose surface area measure is ``phi``.

    The returned report has ``converged=False`` (or raises ``NonConvergence``
    with ``strict=True``) when the measure residual stays above
    ``cfg.tol_residual``.
    """
    U, c = _prepare(C, phi)
    return _ascend(_SurfaceProblem(C, U, c), cfg or SolverConfig(), strict)


def solve_cone_volume(
    C: PolyhedralCone, phi: DiscreteMeasure, cfg: SolverConfig | None = None, strict: bool = False
) -> SolverReport:
    """Find a C-full body whose cone-volume measure is ``phi``."""
    U, c = _prepare(C, phi)
    return _ascend(_ConeVolumeProblem(C, U, c), cfg or SolverConfig(), strict)


@dataclass
class ExhaustionResult:
    reports: list
    distances: np.ndarray  # [j, k]: max |h_Kj - h_Kk| over stage min(j, k) directions


def exhaustion_experiment(
    C: PolyhedralCone, phi: DiscreteMeasure, stages: Sequence[Sequence[int]], cfg: SolverConfig | None = None
) -> ExhaustionResult:
    """Solve the cone-volume problem for the restrictions of ``phi`` to a
    nested sequence of atom subsets and tabulate support-function distances."""
    validate_measure(C, phi)
    stage_sets = [sorted(set(int(i) for i in s)) for s in stages]
    if not stage_sets or any(not s for s in stage_sets):
        raise InvalidMeasure("every stage must select at least one atom")
    for prev, nxt in zip(stage_sets, stage_sets[1:]):
        if not set(prev) <= set(nxt):
            raise InvalidMeasure(f"stages must be nested: {prev} is not inside {nxt}")
    if set(stage_sets[-1]) != set(range(len(phi))):
        raise InvalidMeasure("the last stage must contain every atom")
    reports = []
    cache: dict = {}
    for s in stage_sets:
        key = tuple(s)
        if key not in cache:
            cache[key] = solve_cone_volume(C, phi.restrict(s), cfg)
        reports.append(cache[key])
    k = len(reports)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            U = phi.directions[stage_sets[i]]
            d = float(np.max(np.abs(reports[i].body.support(U) - reports[j].body.support(U))))
            D[i, j] = D[j, i] = d
    return ExhaustionResult(reports=reports, distances=D)


# ---------------------------------------------------------------------------
# estimator interface


class _MeasureSolver(BaseEstimator):
    """Shared estimator plumbing: ``fit(X, y)`` with atom directions as rows
    of ``X`` and atom masses in ``y``."""

    _solve = None

    def __init__(
        self,
        cone=None,
        max_iter=5000,
        tol=1e-10,
        step0=1.0,
        backtrack=0.5,
        armijo=1e-4,
        init=None,
        random_state=None,
    ):
        self.cone = cone
        self.max_iter = max_iter
        self.tol = tol
        self.step0 = step0
        self.backtrack = backtrack
        self.armijo = armijo
        self.init = init
        self.random_state = random_state

    def _config(self) -> SolverConfig:
        seed = self.random_state
        if seed is not None and not isinstance(seed, (int, np.integer)):
            seed = int(check_random_state(seed).randint(2**31 - 1))
        return SolverConfig(
            max_iters=self.max_iter,
            tol_residual=self.tol,
            step0=self.step0,
            backtrack=self.backtrack,
            armijo=self.armijo,
            init=self.init,
            seed=seed,
        )

    def fit(self, X, y):
        if self.cone is None:
            raise ValueError("the estimator needs a cone")
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if X.shape[1] != self.cone.dim:
            raise ValueError(f"X has {X.shape[1]} columns, the cone lives in R^{self.cone.dim}")
        report = type(self)._solve(self.cone, DiscreteMeasure(X, y), self._config())
        if not report.converged:
            warnings.warn(
                f"solver stopped at residual {report.residual:.3g} after {report.iterations} iterations",
                ConvergenceWarning,
            )
        self.report_ = report
        self.body_ = report.body
        self.offsets_ = report.f
        self.n_iter_ = report.iterations
        self.residual_ = report.residual
        self.converged_ = report.converged
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        """Support function ``-h_K`` of the fitted body at the rows of ``X``."""
        check_is_fitted(self, "body_")
        X = check_array(X, dtype=float)
        return -self.body_.support(X)

    def measure(self) -> DiscreteMeasure:
        raise NotImplementedError

    def score(self, X, y):
        """Negative largest relative error of the fitted measure against ``(X, y)``."""
        check_is_fitted(self, "body_")
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        mu = self.measure()
        got = np.array([mu.mass_at(u) for u in X])
        return -float(np.max(np.abs(got - y) / y))


class SurfaceMeasureSolver(_MeasureSolver):
    """Estimator form of :func:`solve_surface`.

    Examples
    --------
    >>> import numpy as np
    >>> from coconvex import validate_cone
    >>> C = validate_cone(np.eye(2))
    >>> est = SurfaceMeasureSolver(cone=C).fit(-np.ones((1, 2)) / np.sqrt(2), [2.0])
    >>> round(float(est.offsets_[0]), 8)
    1.0
    """

    _solve = staticmethod(solve_surface)

    def measure(self) -> DiscreteMeasure:
        check_is_fitted(self, "body_")
        return surface_area_measure(self.body_)


class ConeVolumeSolver(_MeasureSolver):
    """Estimator form of :func:`solve_cone_volume`."""

    _solve = staticmethod(solve_cone_volume)

    def measure(self) -> DiscreteMeasure:
        check_is_fitted(self, "body_")
        return cone_volume_measure(self.body_)
