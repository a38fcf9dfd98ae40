"""Parameter recovery in a fixed gauge, and model degrees of freedom."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .checker import CheckReport
from .transforms import (AdmissibilityError, ScalingParams, _transform, default_j_prime,
                         feasible_c_range, psi_measure_terms)
from .tree_model import DataTriple, MeasureMode, SbtopParams, model_products

_ZERO = 1e-12
REPAIR_GRID = 64


class RecoveryError(ValueError):
    pass


@dataclass(frozen=True)
class RecoveredModel:
    """Recovered parameters, the gauge that pins them down, and fit residuals.

    ``fit`` holds the largest absolute difference between the input matrices
    and the predictions of ``params``, per matrix. ``gauge`` describes the
    fitted set before any nonnegativity shift; ``gauge["shift"]`` records the
    admissible scaling applied afterwards (None if none was needed).
    """

    params: SbtopParams
    gauge: dict
    fit: dict[str, float]

    def to_dict(self) -> dict:
        return {"params": self.params.to_dict(), "gauge": dict(self.gauge), "fit": dict(self.fit)}


def minimal_branch_scale(P_h: np.ndarray, k: float) -> float:
    """Smallest ``beta`` in (0, 1] keeping ``(p(h,j) - k)/beta + k`` inside [0, 1].

    At this value at least one recovered ``pF(j)`` sits on 0 or 1.
    """
    dev = np.asarray(P_h, dtype=float) - k
    bounds = [0.0]
    if k < 1.0:
        bounds.extend(dev / (1.0 - k))
    if k > 0.0:
        bounds.extend(-dev / k)
    return float(max(bounds))


def recover_parameters(data: DataTriple, report: CheckReport,
                       mode: MeasureMode = "nonnegative") -> RecoveredModel:
    """Build one parameter set that reproduces ``data``.

    Gauge: ``pD = k``; ``pB(h) = beta``, the smallest value keeping every
    ``pF`` a probability; ``tD = 0``, ``tB(h) = 0``, and ``tF(n) = 0`` when
    the data leave it free (a zero-probability Psi arc can pin it). In
    nonnegative mode, negative measures are then removed by an admissible
    offset (``c = 1``) found by linear programming; predictions are unchanged.

    Raises
    ------
    RecoveryError
        "gauge infeasible" if no ``beta`` in (0, 1] exists, or the report did
        not pass; "nonnegativity unrepairable" if no admissible offset makes
        every measure nonnegative.
    """
    if not report.passed or report.k is None:
        raise RecoveryError("gauge infeasible: the data did not pass the binary-tree check")
    P = data.P
    PT = data.correct_products()
    W = data.incorrect_products()
    I, J = P.shape
    k, r, s, h, n = report.k, report.r, report.s, report.h, report.n

    beta = minimal_branch_scale(P[h], k)
    if not 0.0 < beta <= 1.0 + 1e-9:
        raise RecoveryError(f"gauge infeasible: branch scale beta = {beta:g} is not in (0, 1]")
    beta = min(beta, 1.0)
    pF = np.clip((P[h] - k) / beta + k, 0.0, 1.0)
    pB = r * beta
    if np.any(pB > 1.0 + 1e-9):
        raise RecoveryError("gauge infeasible: some ratio r_i exceeds 1/beta")
    pB = np.clip(pB, 0.0, 1.0)
    pA = 1.0 - pB
    pE = 1.0 - pF
    pD, pC = k, 1.0 - k

    tB = np.where(pB > _ZERO, s, 0.0)
    tA, tC, tE, tF = _solve_measures(PT, W, pA, pB, pC, pD, pE, pF, tB, n)

    params = SbtopParams(pA=pA, pB=pB, pC=pC, pD=pD, pE=pE, pF=pF, tA=tA, tB=tB,
                         tC=tC, tD=0.0, tE=tE, tF=tF, measure_mode="unrestricted")
    gauge = {"beta": beta, "h": h, "n": n, "tD": 0.0, "tF_n": float(tF[n]), "tB_h": 0.0, "shift": None}
    if mode == "nonnegative":
        params, shift = _repair_nonnegative(params)
        gauge["shift"] = shift
    else:
        params = params.replace(measure_mode=mode)
    return RecoveredModel(params=params, gauge=gauge, fit=_fit(params, data))


def _solve_measures(PT, W, pA, pB, pC, pD, pE, pF, tB, n):
    """Least-squares ``tA``, ``tC``, ``tE``, ``tF`` given ``tB`` and ``tD = 0``.

    Unknowns on zero-probability arcs are dropped and set to 0. The system
    has one null direction unless some Psi arc is dead; that direction is
    fixed by ``tF(n) = 0``. With a dead arc the data already pin it, and
    ``tF(n)`` is whatever the fit gives.
    """
    I, J = PT.shape
    cols = {"tA": np.arange(I), "tC": np.array([I]), "tE": I + 1 + np.arange(J), "tF": I + 1 + J + np.arange(J)}
    M = np.zeros((2 * I * J, I + 1 + 2 * J))
    rhs = np.zeros(2 * I * J)
    for i in range(I):
        for j in range(J):
            row = i * J + j
            M[row, cols["tA"][i]] = pA[i] * pD
            M[row, cols["tF"][j]] = pB[i] * pF[j]
            rhs[row] = PT[i, j] - pB[i] * pF[j] * tB[i]
            row += I * J
            M[row, cols["tA"][i]] = pA[i] * pC
            M[row, cols["tC"][0]] = pA[i] * pC
            M[row, cols["tE"][j]] = pB[i] * pE[j]
            rhs[row] = W[i, j] - pB[i] * pE[j] * tB[i]
    live = np.flatnonzero(np.max(np.abs(M), axis=0) > _ZERO)
    A = M[:, live]
    scale = np.max(np.abs(A))
    if np.linalg.matrix_rank(A, tol=1e-9 * scale) < live.size and cols["tF"][n] in live:
        pin = np.zeros((1, live.size))
        pin[0, np.flatnonzero(live == cols["tF"][n])[0]] = scale
        A = np.vstack([A, pin])
        rhs = np.append(rhs, 0.0)
    sol = np.zeros(M.shape[1])
    sol[live] = np.linalg.lstsq(A, rhs, rcond=None)[0]
    return sol[cols["tA"]], float(sol[I]), sol[cols["tE"]], sol[cols["tF"]]


def _fit(params: SbtopParams, data: DataTriple) -> dict[str, float]:
    P, PT, W = model_products(params)
    with np.errstate(divide="ignore", invalid="ignore"):
        T = PT / P
        Tw = W / (1.0 - P)
    return {"P": float(np.max(np.abs(P - data.P))),
            "T": float(np.nanmax(np.abs(T - data.T))),
            "Tw": float(np.nanmax(np.abs(Tw - data.Tw)))}


def _live_measures(params: SbtopParams) -> np.ndarray:
    """Measures on arcs with positive probability, flattened in a fixed order."""
    p = params
    parts = [p.tA[p.pA > _ZERO], p.tB, [p.tC], [p.tD],
             p.tE[p.pE > _ZERO], p.tF[p.pF > _ZERO]]
    return np.concatenate([np.atleast_1d(x) for x in parts])


def _repair_nonnegative(params: SbtopParams) -> tuple[SbtopParams, dict | None]:
    """Move to an equivalent parameter set with nonnegative measures.

    For a fixed scale ``c`` the new measures are affine in ``(e, f, u)``,
    where ``u`` moves ``tF*(j')``. The affine map is read off the transform
    itself and a feasible point of smallest L1 norm is found by linear
    programming. ``c = 1`` is tried first, then a grid up to the largest
    admissible scale.
    """
    target_mode = "nonnegative"
    if np.all(_live_measures(params) >= -_ZERO):
        return params.replace(measure_mode=target_mode), None
    if not 0.0 < params.pD < 1.0:
        raise RecoveryError("nonnegativity unrepairable: offsets need 0 < pD < 1")
    _, c_max = feasible_c_range(params)
    c_max = min(c_max, 1.0 / _ZERO)
    for c in np.concatenate([[1.0], np.linspace(1.0, c_max, REPAIR_GRID + 1)[1:]]):
        found = _offset_lp(params, float(c))
        if found is not None:
            new, shift = found
            return new.replace(measure_mode=target_mode), shift
    raise RecoveryError("nonnegativity unrepairable: no admissible offset makes every measure nonnegative")


def _offset_lp(params: SbtopParams, c: float) -> tuple[SbtopParams, dict] | None:
    try:
        jp = default_j_prime(params, c)
    except AdmissibilityError:
        return None
    base_tF = params.tF[jp]

    def scaling(x):
        e, f, u = x
        return ScalingParams.preserving(params, c, e, f, base_tF + u, j_prime=jp)

    def shifted(x, check_dead=True):
        return _transform(params, scaling(x), _ZERO, strict=False, check_dead=check_dead)

    def dead_numerators(x):
        # Psi arcs with probability 0 must keep a zero weighted measure.
        num_F, den_F, num_E, den_E = psi_measure_terms(params, scaling(x))
        return np.concatenate([num_F[np.abs(den_F) <= _ZERO], num_E[np.abs(den_E) <= _ZERO]])

    origin = np.zeros(3)
    m0 = _live_measures(shifted(origin, False))
    A = np.column_stack([_live_measures(shifted(v, False)) - m0 for v in np.eye(3)])
    z0 = dead_numerators(origin)
    Z = np.column_stack([dead_numerators(v) - z0 for v in np.eye(3)])
    # Variables: x = x_plus - x_minus, minimise the L1 norm, subject to m0 + A x >= 0.
    cost = np.ones(6)
    A_ub = -np.hstack([A, -A])
    eq = {}
    if z0.size:
        eq = {"A_eq": np.hstack([Z, -Z]), "b_eq": -z0}
    res = linprog(cost, A_ub=A_ub, b_ub=m0, bounds=[(0, None)] * 6, method="highs", **eq)
    if res.status != 0:
        return None
    x = res.x[:3] - res.x[3:]
    try:
        new = shifted(x)
    except AdmissibilityError:
        return None
    return new, {"c": c, "e": float(x[0]), "f": float(x[1]), "tF_jprime_shift": float(x[2]), "j_prime": jp}


def degrees_of_freedom(I: int, J: int) -> int:
    """Observations minus free parameters plus free scaling constants: ``3(I-1)(J-1)``."""
    if int(I) != I or int(J) != J or I < 2 or J < 2:
        raise ValueError(f"degrees of freedom need integer I, J >= 2, got I={I}, J={J}")
    return 3 * I * J - 3 * I - 3 * J + 3
