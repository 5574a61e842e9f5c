"""Disease-free equilibria and the basic reproduction number."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .dynamics import SarParameters
from .exceptions import NoNonnegativeDFEError, UndefinedR0Error, ValidationError

DEFAULT_TOL = 1e-10


class DfeCase(enum.Enum):
    DET_NONZERO = "DetNonzero"
    DET_ZERO = "DetZero"


class Verdict(enum.Enum):
    GLOBALLY_STABLE = "GloballyStable"
    SUBCRITICAL = "Subcritical"
    SUPERCRITICAL = "Supercritical"


@dataclass(frozen=True)
class DfeMatrix:
    """Row-convention rate matrix: equilibria ``S`` satisfy ``S @ a == 0``."""

    a: np.ndarray
    det: float

    @property
    def m(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class StabilityReport:
    case: DfeCase
    dfe: np.ndarray
    f: np.ndarray
    v: np.ndarray
    k: np.ndarray
    r0: float
    verdict: Verdict
    matrix: DfeMatrix | None = None

    def to_text(self) -> str:
        fmt = lambda x: f"{x:.12g}"  # noqa: E731
        lines = []
        if self.matrix is not None:
            lines.append(f"det(A): {fmt(self.matrix.det)}")
        lines += [
            f"case: {self.case.value}",
            "dfe: " + " ".join(fmt(x) for x in self.dfe),
            f"R0: {fmt(self.r0)}",
            f"verdict: {self.verdict.value}",
        ]
        return "\n".join(lines) + "\n"


def build_dfe_matrix(params: SarParameters) -> DfeMatrix:
    a = params.lam.copy()
    np.fill_diagonal(a, -params.lam.sum(axis=1) - params.b)
    # LAPACK getrf underneath: LU with partial pivoting
    det = float(np.linalg.det(a))
    a.setflags(write=False)
    return DfeMatrix(a, det)


def is_singular(mat: DfeMatrix, tol: float = DEFAULT_TOL) -> bool:
    scale = (1.0 + np.abs(mat.a).sum(axis=1).max()) ** mat.m
    return abs(mat.det) < tol * scale


def _mass_vector(mass, m):
    mass = np.asarray(mass, dtype=float)
    if mass.ndim == 0:
        mass = np.full(m, float(mass) / m)
    if mass.shape != (m,) or np.any(mass < 0) or not np.all(np.isfinite(mass)):
        raise ValidationError("susceptible mass must be a non-negative scalar or length-m vector")
    return mass


def solve_dfe(mat: DfeMatrix, params: SarParameters, tol: float = DEFAULT_TOL, susceptible_mass=None):
    """Return ``(case, S*)`` for the equilibrium system ``S A = 0``.

    For a non-singular matrix the only solution is zero. Otherwise the solution
    family is a subspace, and a canonical non-negative member is chosen: the
    caller's susceptible masses projected onto the null space, rescaled to the
    same total. ``susceptible_mass`` is either the per-set initial S vector or a
    scalar total; it defaults to the population.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    m = mat.m
    if not is_singular(mat, tol):
        return DfeCase.DET_NONZERO, np.zeros(m)
    mass = _mass_vector(params.population if susceptible_mass is None else susceptible_mass, m)
    total = mass.sum()
    basis = null_space(mat.a.T)
    if basis.shape[1] == 0:
        # |det| under tol but numerically full rank: take the weakest direction
        _, _, vt = np.linalg.svd(mat.a.T)
        basis = vt[-1:].T
    direction = basis @ (basis.T @ mass)
    if basis.shape[1] == 1 and not np.any(direction):
        direction = basis[:, 0] * np.sign(basis[:, 0].sum() or 1.0)
    eps = 1e-12 * max(1.0, np.abs(direction).max())
    if direction.sum() > 0 and np.all(direction >= -eps):
        dfe = np.clip(direction, 0.0, None)
    else:
        dfe = _nonnegative_member(basis, total)
    if dfe.sum() > 0:
        dfe = dfe * (total / dfe.sum())
    return DfeCase.DET_ZERO, dfe


def _nonnegative_member(basis, total):
    # x = basis @ y with x >= 0 and sum(x) = 1
    m, k = basis.shape
    res = linprog(
        np.zeros(k),
        A_ub=-basis,
        b_ub=np.zeros(m),
        A_eq=basis.sum(axis=0, keepdims=True),
        b_eq=[1.0],
        bounds=[(None, None)] * k,
        method="highs",
    )
    if res.status != 0:
        raise NoNonnegativeDFEError("singular rate matrix has no non-negative equilibrium direction")
    return np.clip(basis @ res.x, 0.0, None)


def reproduction_number(params: SarParameters, dfe, tol: float = DEFAULT_TOL) -> StabilityReport:
    """Next-generation matrix ``K = F V^-1`` at ``dfe`` and ``R0 = trace(K)``."""
    dfe = np.asarray(dfe, dtype=float)
    if dfe.shape != (params.m,):
        raise ValidationError(f"dfe must have length {params.m}")
    mat = build_dfe_matrix(params)
    case = DfeCase.DET_ZERO if is_singular(mat, tol) else DfeCase.DET_NONZERO
    removal = params.rho.sum(axis=1) + params.c
    stuck = np.flatnonzero(removal == 0)
    if stuck.size:
        raise UndefinedR0Error(
            f"set {stuck[0] + 1} has c = 0 and no attacked migration; R0 is undefined"
        )
    infection = params.beta * params.gamma * params.eta * dfe / params.population
    f = np.diag(infection)
    v = np.diag(removal)
    k = np.diag(infection / removal)
    r0 = float(np.trace(k))
    if not np.any(dfe):
        verdict = Verdict.GLOBALLY_STABLE
    elif r0 < 1:
        verdict = Verdict.SUBCRITICAL
    else:
        verdict = Verdict.SUPERCRITICAL
    return StabilityReport(case, dfe, f, v, k, r0, verdict, mat)


def analyze_stability(params: SarParameters, susceptible_mass=None, tol: float = DEFAULT_TOL) -> StabilityReport:
    mat = build_dfe_matrix(params)
    _, dfe = solve_dfe(mat, params, tol, susceptible_mass)
    return reproduction_number(params, dfe, tol)
