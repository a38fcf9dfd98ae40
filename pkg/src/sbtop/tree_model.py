"""Standard Binary Tree for Ordered Processes: parameter types and forward model.

Tree layout (Factor Phi acts on the source, Factor Psi on the B-vertex)::

    source --A(i)--> A-vertex --D--> correct
                              --C--> incorrect
           --B(i)--> B-vertex --F(j)--> correct
                              --E(j)--> incorrect

Levels are zero-based array indices throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

MeasureMode = Literal["nonnegative", "unrestricted"]
MEASURE_MODES = ("nonnegative", "unrestricted")

DEFAULT_TOL = 1e-9


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FactorDesign:
    """Numbers of levels of Factor Phi (``I``) and Factor Psi (``J``)."""

    I: int
    J: int

    def __post_init__(self):
        if int(self.I) != self.I or int(self.J) != self.J:
            raise TypeError("level counts must be integers")
        if self.I < 2 or self.J < 2:
            raise ValueError(f"each factor needs at least two levels, got I={self.I}, J={self.J}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.I, self.J)


@dataclass(frozen=True)
class SbtopParams:
    """Arc probabilities and arc measures of the tree.

    ``pA, pB, tA, tB`` are indexed by the Phi level ``i``; ``pE, pF, tE, tF``
    by the Psi level ``j``; ``pC, pD, tC, tD`` are scalars. Arrays are stored
    read-only so instances can be shared freely.
    """

    pA: np.ndarray
    pB: np.ndarray
    pC: float
    pD: float
    pE: np.ndarray
    pF: np.ndarray
    tA: np.ndarray
    tB: np.ndarray
    tC: float
    tD: float
    tE: np.ndarray
    tF: np.ndarray
    measure_mode: MeasureMode = "nonnegative"

    def __post_init__(self):
        for name in ("pA", "pB", "pE", "pF", "tA", "tB", "tE", "tF"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        for name in ("pC", "pD", "tC", "tD"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.measure_mode not in MEASURE_MODES:
            raise ValueError(f"measure_mode must be one of {MEASURE_MODES}, got {self.measure_mode!r}")
        I = self.pA.size
        J = self.pF.size
        for name in ("pB", "tA", "tB"):
            if getattr(self, name).size != I:
                raise ValueError(f"{name} has {getattr(self, name).size} entries, expected I={I}")
        for name in ("pE", "tE", "tF"):
            if getattr(self, name).size != J:
                raise ValueError(f"{name} has {getattr(self, name).size} entries, expected J={J}")

    @classmethod
    def from_complements(cls, pB, pD, pF, tA, tB, tC, tD, tE, tF,
                         measure_mode: MeasureMode = "nonnegative") -> "SbtopParams":
        """Build from ``pB, pD, pF``, filling ``pA, pC, pE`` as complements."""
        pB = np.asarray(pB, dtype=float)
        pF = np.asarray(pF, dtype=float)
        return cls(pA=1.0 - pB, pB=pB, pC=1.0 - pD, pD=pD, pE=1.0 - pF, pF=pF,
                   tA=tA, tB=tB, tC=tC, tD=tD, tE=tE, tF=tF, measure_mode=measure_mode)

    @property
    def I(self) -> int:
        return self.pA.size

    @property
    def J(self) -> int:
        return self.pF.size

    @property
    def design(self) -> FactorDesign:
        return FactorDesign(self.I, self.J)

    def replace(self, **changes) -> "SbtopParams":
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        values.update(changes)
        return SbtopParams(**values)

    def to_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            out[name] = value.tolist() if isinstance(value, np.ndarray) else value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SbtopParams":
        missing = [k for k in ("pA", "pB", "pC", "pD", "pE", "pF",
                               "tA", "tB", "tC", "tD", "tE", "tF") if k not in data]
        if missing:
            raise ValueError(f"parameter object is missing fields: {', '.join(missing)}")
        kwargs = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**kwargs)


@dataclass(frozen=True)
class DataTriple:
    """Observable ``I x J`` matrices: correct-response probability ``P``,
    correct-response measure ``T`` and incorrect-response measure ``Tw``."""

    P: np.ndarray
    T: np.ndarray
    Tw: np.ndarray

    def __post_init__(self):
        for name in ("P", "T", "Tw"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.P.shape == self.T.shape == self.Tw.shape):
            raise ValueError(
                f"matrix shapes differ: P{self.P.shape}, T{self.T.shape}, Tw{self.Tw.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.P.shape

    def correct_products(self) -> np.ndarray:
        """``p(i,j) t(i,j)`` for every cell."""
        return self.P * self.T

    def incorrect_products(self) -> np.ndarray:
        """``[1 - p(i,j)] t_w(i,j)`` for every cell."""
        return (1.0 - self.P) * self.Tw

    def to_dict(self) -> dict:
        return {"P": self.P.tolist(), "T": self.T.tolist(), "Tw": self.Tw.tolist()}


def _check_level(params: SbtopParams, i: int, j: int) -> None:
    if not 0 <= i < params.I:
        raise IndexError(f"Phi level {i} out of range 0..{params.I - 1}")
    if not 0 <= j < params.J:
        raise IndexError(f"Psi level {j} out of range 0..{params.J - 1}")


def response_probability(params: SbtopParams, i: int, j: int) -> float:
    """Probability of a correct response in cell ``(i, j)``."""
    _check_level(params, i, j)
    return params.pA[i] * params.pD + params.pB[i] * params.pF[j]


def correct_measure_product(params: SbtopParams, i: int, j: int) -> float:
    """``p(i,j) t(i,j)``: probability-weighted measure of the correct paths."""
    _check_level(params, i, j)
    p = params
    return (p.pA[i] * p.pD * (p.tA[i] + p.tD)
            + p.pB[i] * p.pF[j] * (p.tB[i] + p.tF[j]))


def incorrect_measure_product(params: SbtopParams, i: int, j: int) -> float:
    """``[1 - p(i,j)] t_w(i,j)``: probability-weighted measure of the incorrect paths."""
    _check_level(params, i, j)
    p = params
    return (p.pA[i] * (1.0 - p.pD) * (p.tA[i] + p.tC)
            + p.pB[i] * p.pE[j] * (p.tB[i] + p.tE[j]))


def model_products(params: SbtopParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All-cell ``(p, p*t, (1-p)*t_w)`` matrices, computed by broadcasting."""
    p = params
    pA, pB, tA, tB = (x[:, None] for x in (p.pA, p.pB, p.tA, p.tB))
    pE, pF, tE, tF = (x[None, :] for x in (p.pE, p.pF, p.tE, p.tF))
    P = pA * p.pD + pB * pF
    PT = pA * p.pD * (tA + p.tD) + pB * pF * (tB + tF)
    W = pA * (1.0 - p.pD) * (tA + p.tC) + pB * pE * (tB + tE)
    return P, PT, W


def predict(params: SbtopParams, design: FactorDesign | None = None) -> DataTriple:
    """Predicted ``P``, ``T`` and ``Tw`` for every cell of the design.

    Conditional measures are products divided by the class probability, so
    every cell must satisfy ``0 < p(i,j) < 1``.

    Raises
    ------
    ValueError
        If the design does not match the parameter dimensions, or some cell
        has ``p(i,j)`` equal to 0 or 1 (a conditional measure is undefined).
    """
    if design is not None and design.shape != (params.I, params.J):
        raise ValueError(f"design {design.shape} does not match parameters ({params.I}, {params.J})")
    P, PT, W = model_products(params)
    bad = np.argwhere((P <= 0.0) | (P >= 1.0))
    if bad.size:
        i, j = bad[0]
        raise ValueError(
            f"conditional measure undefined: p({i},{j}) = {P[i, j]:g} is not strictly inside (0, 1)")
    return DataTriple(P=P, T=PT / P, Tw=W / (1.0 - P))


def validate_params(params: SbtopParams, tol: float = DEFAULT_TOL) -> list[str]:
    """List every violated parameter constraint; an empty list means valid."""
    p = params
    problems = []

    def check_prob(name, values):
        for idx, v in enumerate(np.atleast_1d(values)):
            if not -tol <= v <= 1.0 + tol:
                label = name if np.ndim(values) == 0 else f"{name}[{idx}]"
                problems.append(f"{label} = {v:g} outside [0, 1]")

    for name in ("pA", "pB", "pC", "pD", "pE", "pF"):
        check_prob(name, getattr(p, name))

    for idx in range(p.I):
        if abs(p.pA[idx] + p.pB[idx] - 1.0) > tol:
            problems.append(f"pA[{idx}] + pB[{idx}] != 1 (sum {p.pA[idx] + p.pB[idx]:g})")
    if abs(p.pC + p.pD - 1.0) > tol:
        problems.append(f"pC + pD != 1 (sum {p.pC + p.pD:g})")
    for idx in range(p.J):
        if abs(p.pE[idx] + p.pF[idx] - 1.0) > tol:
            problems.append(f"pE[{idx}] + pF[{idx}] != 1 (sum {p.pE[idx] + p.pF[idx]:g})")

    if p.measure_mode == "nonnegative":
        for name in ("tA", "tB", "tC", "tD", "tE", "tF"):
            values = getattr(p, name)
            for idx, v in enumerate(np.atleast_1d(values)):
                if v < -tol:
                    label = name if np.ndim(values) == 0 else f"{name}[{idx}]"
                    problems.append(f"{label} < 0 ({v:g})")
    return problems


@dataclass(frozen=True)
class EffectivenessReport:
    """Pairs of levels that leave every observable unchanged.

    ``phi_pairs`` holds pairs ``(i1, i2)`` of Factor Phi levels and
    ``psi_pairs`` pairs ``(j1, j2)`` of Factor Psi levels.
    """

    phi_pairs: list[tuple[int, int]] = field(default_factory=list)
    psi_pairs: list[tuple[int, int]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def phi_effective(self) -> bool:
        return not self.phi_pairs and not any(n.startswith("Phi") for n in self.notes)

    @property
    def psi_effective(self) -> bool:
        return not self.psi_pairs and not any(n.startswith("Psi") for n in self.notes)

    @property
    def effective(self) -> bool:
        return self.phi_effective and self.psi_effective


def validate_effectiveness(params: SbtopParams, design: FactorDesign | None = None,
                           tol: float = DEFAULT_TOL) -> EffectivenessReport:
    """Flag level pairs of either factor that change no observable.

    Two levels are indistinguishable when, at every level of the other factor,
    both response classes have the same probability and the same
    probability-weighted measure (within ``tol``). Products are compared
    instead of conditional measures so cells with ``p`` at 0 or 1 are handled.
    """
    if design is not None and design.shape != (params.I, params.J):
        raise ValueError(f"design {design.shape} does not match parameters ({params.I}, {params.J})")
    P, PT, W = model_products(params)
    stacked = np.stack([P, PT, W])  # (3, I, J)

    def same(a, b):
        return bool(np.all(np.abs(a - b) <= tol))

    phi_pairs = [(a, b) for a in range(params.I) for b in range(a + 1, params.I)
                 if same(stacked[:, a, :], stacked[:, b, :])]
    psi_pairs = [(a, b) for a in range(params.J) for b in range(a + 1, params.J)
                 if same(stacked[:, :, a], stacked[:, :, b])]
    notes = []
    if np.all(params.pB <= tol):
        notes.append("Phi: pB is 0 at every level, so the Psi vertex is never reached "
                     "and Phi cannot act on it")
    return EffectivenessReport(phi_pairs=phi_pairs, psi_pairs=psi_pairs, notes=notes)
