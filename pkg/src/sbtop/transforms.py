"""Admissible reparameterizations of the ordered binary tree.

Every parameter set in an equivalence class predicts the same ``P``, ``T``
and ``Tw``. Members are linked by a scale ``c`` on the B-branch probability,
offsets ``e`` (on ``tD``), ``f`` (on ``tB``) and ``kC`` (on ``tC``), and the
new measures ``tF*(j')``, ``tE*(j')`` at a reference Psi level ``j'``.

The correct-response side (``P`` and ``T``) is preserved for any ``kC`` and
``tE*(j')``. The incorrect side (``Tw``) is preserved only when ``kC = e``
and ``tE*(j')`` takes the value returned by :func:`coupled_incorrect_scaling`;
:meth:`ScalingParams.preserving` builds such a scaling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tree_model import DEFAULT_TOL, FactorDesign, SbtopParams, predict


class AdmissibilityError(ValueError):
    """A scaling is out of bounds, or two parameter sets are not linked by one."""


@dataclass(frozen=True)
class ScalingParams:
    c: float
    e: float
    f: float
    kC: float
    j_prime: int
    tF_star_jprime: float
    tE_star_jprime: float

    _json_keys = {"c": "c", "e": "e", "f": "f", "kC": "kC", "j_prime": "jPrime",
                  "tF_star_jprime": "tFStarJPrime", "tE_star_jprime": "tEStarJPrime"}

    def to_dict(self) -> dict:
        return {key: getattr(self, attr) for attr, key in self._json_keys.items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ScalingParams":
        missing = [key for key in cls._json_keys.values() if key not in data]
        if missing:
            raise ValueError(f"scaling object is missing fields: {', '.join(missing)}")
        kwargs = {attr: data[key] for attr, key in cls._json_keys.items()}
        kwargs["j_prime"] = int(kwargs["j_prime"])
        return cls(**{k: (v if k == "j_prime" else float(v)) for k, v in kwargs.items()})

    @classmethod
    def preserving(cls, params: SbtopParams, c: float, e: float, f: float,
                   tF_star_jprime: float, j_prime: int | None = None) -> "ScalingParams":
        """Scaling whose incorrect-side constants keep ``Tw`` unchanged."""
        if j_prime is None:
            j_prime = default_j_prime(params, c)
        kC, tE_star = coupled_incorrect_scaling(params, c, e, f, j_prime, tF_star_jprime)
        return cls(c=c, e=e, f=f, kC=kC, j_prime=j_prime,
                   tF_star_jprime=tF_star_jprime, tE_star_jprime=tE_star)


def transformed_pF(params: SbtopParams, c: float) -> np.ndarray:
    return params.pF / c + (c - 1.0) * params.pD / c


def default_j_prime(params: SbtopParams, c: float = 1.0, tol: float = DEFAULT_TOL) -> int:
    """First Psi level whose transformed ``pF`` is strictly between 0 and 1."""
    pF_new = transformed_pF(params, c)
    ok = np.flatnonzero((pF_new > tol) & (pF_new < 1.0 - tol))
    if ok.size == 0:
        raise AdmissibilityError("no Psi level has a transformed pF strictly inside (0, 1)")
    return int(ok[0])


def coupled_incorrect_scaling(params: SbtopParams, c: float, e: float, f: float,
                              j_prime: int, tF_star_jprime: float) -> tuple[float, float]:
    """``(kC, tE*(j'))`` that keep the incorrect-response products unchanged.

    ``tA*`` is shared by both response classes, so once the correct side fixes
    it the incorrect side has no freedom left: ``tD* - tC*`` must stay put
    (``kC = e``) and ``tE*(j')`` is determined by the other constants.
    Requires ``0 < pD < 1``.
    """
    p = params
    pD, pC = p.pD, 1.0 - p.pD
    if not 0.0 < pD < 1.0:
        raise AdmissibilityError(f"coupled incorrect-side scaling needs 0 < pD < 1, got pD = {pD:g}")
    pFj, tFj = p.pF[j_prime], p.tF[j_prime]
    pEj, tEj = p.pE[j_prime], p.tE[j_prime]
    q_F = pFj + (c - 1.0) * pD
    q_E = c - pFj - (c - 1.0) * pD
    if abs(q_E) <= DEFAULT_TOL:
        raise AdmissibilityError(f"transformed pE is 0 at reference level j' = {j_prime}")
    g_F = (f * pFj + q_F * tF_star_jprime - pFj * tFj) / pD
    g_E = g_F - (c - 1.0) * (p.tD - p.tC)
    tE_star = (pC * g_E - f * pEj + pEj * tEj) / q_E
    return e, float(tE_star)


def scale_bound_violations(params: SbtopParams, c: float, tol: float = DEFAULT_TOL) -> list[str]:
    """Violated bounds on ``c`` that keep the new probabilities inside [0, 1]."""
    p = params
    out = []
    if not c > 0.0:
        out.append(f"0 < c violated (c = {c:g})")
    max_pB = float(np.max(p.pB))
    if max_pB > 0 and c > 1.0 / max_pB + tol:
        out.append(f"c <= 1/max(pB) violated (c = {c:g}, 1/max(pB) = {1.0 / max_pB:g})")
    if p.pD - np.min(p.pF) > p.pD * c + tol:
        out.append(f"pD - min(pF) <= pD*c violated (c = {c:g})")
    if np.max(p.pF) - p.pD > (1.0 - p.pD) * c + tol:
        out.append(f"max(pF) - pD <= (1-pD)*c violated (c = {c:g})")
    return out


def feasible_c_range(params: SbtopParams) -> tuple[float, float]:
    """Interval ``[c_min, c_max]`` of admissible probability scales.

    ``c_min = 0`` means the lower end is open (``c`` must stay positive).

    Raises
    ------
    AdmissibilityError
        If the bounds are contradictory ("no feasible c").
    """
    p = params
    max_pB = float(np.max(p.pB))
    c_max = np.inf if max_pB == 0 else 1.0 / max_pB
    candidates = [0.0]
    if p.pD > 0:
        candidates.append((p.pD - float(np.min(p.pF))) / p.pD)
    if p.pD < 1:
        candidates.append((float(np.max(p.pF)) - p.pD) / (1.0 - p.pD))
    c_min = max(candidates)
    if c_min > c_max:
        raise AdmissibilityError(f"no feasible c: lower bound {c_min:g} exceeds upper bound {c_max:g}")
    return c_min, c_max


def feasible_offset_ranges(params: SbtopParams) -> dict[str, float]:
    """Lower bounds on ``f``, ``e`` and ``kC`` that keep ``tB``, ``tD``, ``tC`` nonnegative.

    The derived measures ``tA*``, ``tF*``, ``tE*`` have no closed-form bound;
    :func:`apply_transform` checks them after the fact.
    """
    p = params
    return {"f": float(np.max(-p.tB)), "e": -p.tD, "kC": -p.tC}


def psi_measure_terms(p: SbtopParams, s: ScalingParams) -> tuple[np.ndarray, ...]:
    """Numerators and denominators ``(num_F, den_F, num_E, den_E)`` of the ``tF*``, ``tE*`` formulas.

    ``den`` is ``c`` times the new arc probability, and ``num`` is ``c`` times
    the new probability-weighted measure. Where ``den`` is 0, the scaling
    preserves the predictions only if ``num`` is 0 as well.
    """
    c, f, jp = s.c, s.f, s.j_prime
    pFj, tFj = p.pF[jp], p.tF[jp]
    pEj, tEj = p.pE[jp], p.tE[jp]
    den_F = p.pF + (c - 1.0) * p.pD
    num_F = p.pF * p.tF + f * (pFj - p.pF) + s.tF_star_jprime * den_F[jp] - pFj * tFj
    den_E = c - p.pF - (c - 1.0) * p.pD
    num_E = p.pE * p.tE + f * (pEj - p.pE) + den_E[jp] * s.tE_star_jprime - pEj * tEj
    return num_F, den_F, num_E, den_E


def _transform(p: SbtopParams, s: ScalingParams, tol: float, strict: bool,
               check_dead: bool = True) -> SbtopParams:
    c, e, f = s.c, s.e, s.f
    jp = s.j_prime
    if not 0 <= jp < p.J:
        raise AdmissibilityError(f"reference level j' = {jp} out of range 0..{p.J - 1}")
    if p.pD <= 0.0:
        raise AdmissibilityError("zero denominator: the tA* formula divides by pD, which is 0")

    pB_new = c * p.pB
    pA_new = 1.0 - pB_new
    pF_new = transformed_pF(p, c)
    pE_new = 1.0 - pF_new
    if not tol < pF_new[jp] < 1.0 - tol:
        raise AdmissibilityError(
            f"reference level j' = {jp} has transformed pF = {pF_new[jp]:g}; it must be strictly inside (0, 1)")

    pFj, tFj = p.pF[jp], p.tF[jp]
    num_F, den_F, num_E, den_E = psi_measure_terms(p, s)
    for name, num, den in (("tF*", num_F, den_F), ("tE*", num_E, den_E)):
        zero = np.flatnonzero(np.abs(den) <= tol)
        if strict and zero.size:
            raise AdmissibilityError(f"zero denominator in {name} formula at Psi level {int(zero[0])}")
        # A dead arc is harmless only if the product it would have carried is also 0.
        lost = zero[np.abs(num[zero]) > np.sqrt(tol)]
        if check_dead and lost.size:
            raise AdmissibilityError(
                f"zero denominator in {name} formula at Psi level {int(lost[0])} with nonzero "
                f"numerator {num[lost[0]]:.3g}; the scaling does not preserve that cell")
    with np.errstate(divide="ignore", invalid="ignore"):
        tF_new = np.where(np.abs(den_F) > tol, num_F / den_F, 0.0)
        tE_new = np.where(np.abs(den_E) > tol, num_E / den_E, 0.0)
        bracket = ((p.tB - p.tD) * (1.0 - c)
                   + (f + s.tF_star_jprime) * (1.0 - c - pFj / p.pD)
                   + pFj * tFj / p.pD + c * e)
        den_A = 1.0 - c * p.pB
        # An A-branch with zero probability carries no information; its measure is set to 0.
        tA_new = np.where(np.abs(den_A) > tol, (p.pA * p.tA + p.pB * bracket - e) / den_A, 0.0)
    tF_new[jp] = s.tF_star_jprime
    tE_new[jp] = s.tE_star_jprime
    return SbtopParams(pA=pA_new, pB=pB_new, pC=1.0 - p.pD, pD=p.pD, pE=pE_new, pF=pF_new,
                       tA=tA_new, tB=p.tB + f, tC=p.tC + s.kC, tD=p.tD + e,
                       tE=tE_new, tF=tF_new, measure_mode=p.measure_mode)


def apply_transform(params: SbtopParams, scaling: ScalingParams, tol: float = DEFAULT_TOL,
                    strict: bool = True) -> SbtopParams:
    """Map ``params`` to an equivalent parameter set.

    Parameters
    ----------
    params : SbtopParams
    scaling : ScalingParams
    tol : float
        Slack for bound checks and for treating a denominator as zero.
    strict : bool
        If True, a vanishing ``tF*``/``tE*`` denominator (a Psi arc whose new
        probability is 0) raises. If False that measure is set to 0, provided
        the matching numerator also vanishes.

    Raises
    ------
    AdmissibilityError
        On a violated bound on ``c``, a violated lower bound on ``e``, ``f``
        or ``kC`` (nonnegative mode), a zero denominator, or a negative derived
        measure in nonnegative mode. The message names the bound or level.
    """
    problems = scale_bound_violations(params, scaling.c, tol)
    if params.measure_mode == "nonnegative":
        lows = feasible_offset_ranges(params)
        for name in ("f", "e", "kC"):
            if getattr(scaling, name) < lows[name] - tol:
                problems.append(f"{name} >= {lows[name]:g} violated ({name} = {getattr(scaling, name):g})")
    if problems:
        raise AdmissibilityError("; ".join(problems))
    new = _transform(params, scaling, tol, strict)
    if new.measure_mode == "nonnegative":
        negative = []
        for name in ("tA", "tE", "tF"):
            for idx in np.flatnonzero(getattr(new, name) < -tol):
                negative.append(f"{name}*[{idx}] = {getattr(new, name)[idx]:g}")
        if negative:
            raise AdmissibilityError("negative transformed measure: " + ", ".join(negative))
    return new


@dataclass(frozen=True)
class InvarianceReport:
    max_P: float
    max_T: float
    max_Tw: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.max_P, self.max_T, self.max_Tw) <= self.tol


def verify_invariance(old: SbtopParams, new: SbtopParams, design: FactorDesign | None = None,
                      tol: float = DEFAULT_TOL) -> InvarianceReport:
    """Largest cellwise prediction discrepancy on ``P``, ``T`` and ``Tw``."""
    a = predict(old, design)
    b = predict(new, design)
    return InvarianceReport(max_P=float(np.max(np.abs(a.P - b.P))),
                            max_T=float(np.max(np.abs(a.T - b.T))),
                            max_Tw=float(np.max(np.abs(a.Tw - b.Tw))),
                            tol=tol)


def solve_scaling(old: SbtopParams, new: SbtopParams, tol: float = DEFAULT_TOL,
                  j_prime: int | None = None) -> ScalingParams:
    """Recover the scaling that maps ``old`` to ``new``.

    Measures on arcs that have zero probability in ``new`` are ignored, since
    no data constrain them.

    Raises
    ------
    AdmissibilityError
        "not admissible" when the two sets are not related by a scaling.
    """
    if (old.I, old.J) != (new.I, new.J):
        raise AdmissibilityError("not admissible: parameter sets have different dimensions")
    if abs(new.pD - old.pD) > tol:
        raise AdmissibilityError(f"not admissible: pD changed from {old.pD:g} to {new.pD:g}")
    h = int(np.argmax(old.pB))
    if old.pB[h] <= tol:
        raise AdmissibilityError("not admissible: pB is 0 at every level, c is undetermined")
    c = float(new.pB[h] / old.pB[h])
    if np.max(np.abs(new.pB - c * old.pB)) > tol:
        raise AdmissibilityError("not admissible: pB*/pB is not the same at every level")
    if c <= 0 or np.max(np.abs(new.pF - transformed_pF(old, c))) > tol:
        raise AdmissibilityError(f"not admissible: pF* does not follow from c = {c:g}")

    live_B = new.pB > tol
    f = float(new.tB[h] - old.tB[h])
    if np.max(np.abs((new.tB - old.tB)[live_B] - f)) > tol:
        raise AdmissibilityError("not admissible: tB* - tB is not the same at every level")
    e = float(new.tD - old.tD)
    kC = float(new.tC - old.tC)
    if j_prime is None:
        j_prime = default_j_prime(old, c, tol)
    scaling = ScalingParams(c=c, e=e, f=f, kC=kC, j_prime=j_prime,
                            tF_star_jprime=float(new.tF[j_prime]),
                            tE_star_jprime=float(new.tE[j_prime]))

    expected = _transform(old, scaling, tol, strict=False)
    live = {
        "tA": new.pA > tol, "tB": live_B, "tE": new.pE > tol, "tF": new.pF > tol,
        "tC": np.array([new.pC > tol]), "tD": np.array([new.pD > tol]),
    }
    for name, mask in live.items():
        diff = np.abs(np.atleast_1d(getattr(expected, name)) - np.atleast_1d(getattr(new, name)))[mask]
        if diff.size and diff.max() > tol:
            raise AdmissibilityError(
                f"not admissible: {name}* differs from the transformed value by {diff.max():.3g}")
    return scaling
