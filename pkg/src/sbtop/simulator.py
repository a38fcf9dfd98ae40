"""Trial-level Monte Carlo for the ordered binary tree.

Each cell ``(i, j)`` and each partition of its trials draws from its own
stream, ``SeedSequence(seed, spawn_key=(i, j, part))``, so the output depends
only on ``(seed, n_trials_per_cell, n_partitions)`` and not on how many
worker threads run the partitions.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .tree_model import DataTriple, FactorDesign, SbtopParams

MeasureNoise = Callable[[np.random.Generator, int], np.ndarray]


@dataclass(frozen=True)
class TrialRecord:
    i: int
    j: int
    response: Literal["correct", "incorrect"]
    measure: float
    path: str


def simulate_trial(params: SbtopParams, i: int, j: int, rng: np.random.Generator) -> TrialRecord:
    """Follow one path from the source to a terminal vertex.

    The recorded measure is the sum of the two arc measures on the path.
    """
    p = params
    if rng.random() < p.pA[i]:
        if rng.random() < p.pD:
            return TrialRecord(i, j, "correct", p.tA[i] + p.tD, "AD")
        return TrialRecord(i, j, "incorrect", p.tA[i] + p.tC, "AC")
    if rng.random() < p.pF[j]:
        return TrialRecord(i, j, "correct", p.tB[i] + p.tF[j], "BF")
    return TrialRecord(i, j, "incorrect", p.tB[i] + p.tE[j], "BE")


@dataclass(frozen=True)
class EmpiricalTriple:
    """Cell means from simulated trials.

    ``T_hat``/``Tw_hat`` are NaN where a cell has no correct/incorrect trials.
    ``sum_*`` and ``sumsq_*`` are per-cell sums of measures (and of their
    squares) over correct and incorrect trials.
    """

    P_hat: np.ndarray
    T_hat: np.ndarray
    Tw_hat: np.ndarray
    n_correct: np.ndarray
    n_incorrect: np.ndarray
    n_trials: int
    seed: int
    n_partitions: int
    sum_correct: np.ndarray
    sumsq_correct: np.ndarray
    sum_incorrect: np.ndarray
    sumsq_incorrect: np.ndarray

    def to_data_triple(self) -> DataTriple:
        return DataTriple(P=self.P_hat, T=self.T_hat, Tw=self.Tw_hat)

    def standard_errors(self) -> dict[str, np.ndarray]:
        """Per-cell standard errors of the estimated means.

        Keys: ``P``, ``T``, ``Tw`` (conditional means), ``PT`` and ``W`` (the
        per-trial means of ``measure * [correct]`` and ``measure * [incorrect]``).
        """
        n = self.n_trials
        p = self.P_hat
        with np.errstate(divide="ignore", invalid="ignore"):
            var_T = self.sumsq_correct / self.n_correct - self.T_hat ** 2
            var_Tw = self.sumsq_incorrect / self.n_incorrect - self.Tw_hat ** 2
            se_T = np.sqrt(np.maximum(var_T, 0.0) / self.n_correct)
            se_Tw = np.sqrt(np.maximum(var_Tw, 0.0) / self.n_incorrect)
        mean_PT = self.sum_correct / n
        mean_W = self.sum_incorrect / n
        se_PT = np.sqrt(np.maximum(self.sumsq_correct / n - mean_PT ** 2, 0.0) / n)
        se_W = np.sqrt(np.maximum(self.sumsq_incorrect / n - mean_W ** 2, 0.0) / n)
        return {"P": np.sqrt(p * (1.0 - p) / n), "T": se_T, "Tw": se_Tw, "PT": se_PT, "W": se_W}

    def to_dict(self) -> dict:
        def clean(a):
            return [[None if np.isnan(v) else float(v) for v in row] for row in a]

        return {
            "P": self.P_hat.tolist(),
            "T": clean(self.T_hat),
            "Tw": clean(self.Tw_hat),
            "counts": {
                "n_correct": self.n_correct.tolist(),
                "n_incorrect": self.n_incorrect.tolist(),
                "n_trials": self.n_trials,
            },
            "seed": self.seed,
            "n_partitions": self.n_partitions,
        }


def _run_block(params: SbtopParams, i: int, j: int, size: int, seed: int, part: int,
               measure_noise: MeasureNoise | None):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, j, part)))
    p = params
    u = rng.random((2, size))
    on_a = u[0] < p.pA[i]
    correct = np.where(on_a, u[1] < p.pD, u[1] < p.pF[j])
    measure = np.where(
        on_a,
        np.where(correct, p.tA[i] + p.tD, p.tA[i] + p.tC),
        np.where(correct, p.tB[i] + p.tF[j], p.tB[i] + p.tE[j]),
    )
    if measure_noise is not None:
        measure = measure + measure_noise(rng, size)
    mc = measure[correct]
    mw = measure[~correct]
    return (mc.size, mc.sum(), np.dot(mc, mc), mw.size, mw.sum(), np.dot(mw, mw))


def simulate_design(params: SbtopParams, n_trials_per_cell: int, seed: int,
                    design: FactorDesign | None = None, n_partitions: int = 1,
                    workers: int | None = None,
                    measure_noise: MeasureNoise | None = None) -> EmpiricalTriple:
    """Simulate ``n_trials_per_cell`` trials in every cell.

    Parameters
    ----------
    params : SbtopParams
    n_trials_per_cell : int
    seed : int
    design : FactorDesign, optional
        Must match the parameter dimensions if given.
    n_partitions : int
        Number of independent streams per cell. Part of the reproducibility key.
    workers : int, optional
        Thread count; does not affect the result.
    measure_noise : callable, optional
        ``f(rng, size)`` returning additive per-trial noise on the path
        measure. Off by default; arc measures are constants.
    """
    if n_trials_per_cell < 1:
        raise ValueError("n_trials_per_cell must be at least 1")
    if n_partitions < 1:
        raise ValueError("n_partitions must be at least 1")
    if design is not None and design.shape != (params.I, params.J):
        raise ValueError(f"design {design.shape} does not match parameters ({params.I}, {params.J})")
    I, J = params.I, params.J
    sizes = [len(chunk) for chunk in np.array_split(np.arange(n_trials_per_cell), n_partitions)]
    tasks = [(i, j, part, size) for i in range(I) for j in range(J)
             for part, size in enumerate(sizes) if size > 0]

    def run(task):
        i, j, part, size = task
        return _run_block(params, i, j, size, seed, part, measure_noise)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    acc = np.zeros((6, I, J))
    for (i, j, _, _), res in zip(tasks, results):
        acc[:, i, j] += res
    n_c, s_c, ss_c, n_w, s_w, ss_w = acc
    with np.errstate(divide="ignore", invalid="ignore"):
        T_hat = np.where(n_c > 0, s_c / n_c, np.nan)
        Tw_hat = np.where(n_w > 0, s_w / n_w, np.nan)
    return EmpiricalTriple(
        P_hat=n_c / n_trials_per_cell, T_hat=T_hat, Tw_hat=Tw_hat,
        n_correct=n_c.astype(int), n_incorrect=n_w.astype(int),
        n_trials=n_trials_per_cell, seed=seed, n_partitions=n_partitions,
        sum_correct=s_c, sumsq_correct=ss_c, sum_incorrect=s_w, sumsq_incorrect=ss_w,
    )
