"""Closed-form counterfactual transition-probability bounds and interval-CFMDP assembly.

Given one observed transition (s_t, a_t -> s_{t+1}), the counterfactual probability of
any transition (s, a -> s') is only partially identified. The bound that applies to a
query pair (s, a) depends on whether it *is* the observed pair, has support disjoint
from the observed pair's, or has overlapping support, and on which assumptions about
the underlying causal mechanism are adopted:

* NONE     -- every causal model consistent with the MDP and the observation;
* CS       -- additionally require counterfactual stability (an outcome cannot switch
              away from the observed one unless its relative likelihood increased);
* CS_MON   -- additionally require counterfactual monotonicity (the observed outcome
              cannot become less likely, an unobserved-but-possible one not more likely).

Stacking the per-step bounds for every transition yields a time-indexed interval
counterfactual MDP (ICFMDP). Bounds are computed one (query pair, observed step) row
at a time, fully vectorized over successors; the per-successor operations are thin
views into the row computation.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvariantViolation
from .mdp import Mdp, ObservedPath, validate_path

# Slack for clamping float dust in computed bounds; anything larger is a real bug.
CLAMP_TOL = 1e-9

ObsTriple = tuple[int, int, int]  # (s_t, a_t, s_{t+1})
Pair = tuple[int, int]  # (state, action)


class Assumptions(enum.Enum):
    NONE = "none"
    CS = "cs"
    CS_MON = "cs+mon"


class SupportRelation(enum.Enum):
    OBSERVED_PAIR = "observed_pair"
    DISJOINT = "disjoint"
    OVERLAPPING = "overlapping"


@dataclass(frozen=True)
class ProbInterval:
    lb: float
    ub: float

    def __post_init__(self):
        if not (0.0 <= self.lb <= self.ub <= 1.0):
            raise InvariantViolation(f"invalid probability interval [{self.lb}, {self.ub}]")

    @property
    def width(self) -> float:
        return self.ub - self.lb

    def contains(self, p: float, tol: float = 0.0) -> bool:
        return self.lb - tol <= p <= self.ub + tol


def make_interval(lb: float, ub: float) -> ProbInterval:
    """Clamp float dust (<= CLAMP_TOL) out of a computed bound pair."""
    if lb > ub + CLAMP_TOL or lb < -CLAMP_TOL or ub > 1.0 + CLAMP_TOL:
        raise InvariantViolation(f"bound pair [{lb}, {ub}] violates interval invariants")
    ub = min(max(ub, 0.0), 1.0)
    lb = min(max(lb, 0.0), ub)
    return ProbInterval(lb, ub)


def classify_support(m: Mdp, observed_pair: Pair, query_pair: Pair) -> SupportRelation:
    """Relation between the query pair's support and the observed pair's."""
    if tuple(query_pair) == tuple(observed_pair):
        return SupportRelation.OBSERVED_PAIR
    obs_row = m.transition[observed_pair[0], observed_pair[1]]
    query_row = m.transition[query_pair[0], query_pair[1]]
    if np.any((obs_row > 0) & (query_row > 0)):
        return SupportRelation.OVERLAPPING
    return SupportRelation.DISJOINT


def _cs_mask(obs_row: np.ndarray, s_next: int, query_row: np.ndarray) -> np.ndarray:
    """Per-successor stability condition: the counterfactual probability must be zero.

    Fires where the observed-pair probability of the successor is positive and the
    observed outcome's likelihood rose strictly more than the successor's under the
    query pair. Compared by cross-multiplication so zero denominators need no special
    casing; the inequality is strict, with no epsilon.
    """
    return (obs_row > 0) & (query_row[s_next] * obs_row > query_row * obs_row[s_next])


def cs_condition(m: Mdp, obs: ObsTriple, query: tuple[int, int, int]) -> bool:
    """True iff counterfactual stability forces the probability of `query` to zero."""
    s_t, a_t, s_next = obs
    s, a, s_cf = query
    return bool(_cs_mask(m.transition[s_t, a_t], s_next, m.transition[s, a])[s_cf])


# ---------------------------------------------------------------------------
# Row-level bound computations (one query pair, all successors)
# ---------------------------------------------------------------------------

def _observed_pair_rows(n: int, s_next: int) -> tuple[np.ndarray, np.ndarray]:
    lb = np.zeros(n)
    lb[s_next] = 1.0
    return lb, lb.copy()


def _no_assumption_rows(obs_row, s_next, query_row) -> tuple[np.ndarray, np.ndarray]:
    p_obs = obs_row[s_next]
    ub = np.minimum(1.0, query_row / p_obs)
    lb = np.maximum(0.0, (query_row - (1.0 - p_obs)) / p_obs)
    return lb, ub


def _cs_only_rows(obs_row, s_next, query_row, disjoint: bool) -> tuple[np.ndarray, np.ndarray]:
    p_obs = obs_row[s_next]
    cs = _cs_mask(obs_row, s_next, query_row)
    ub = np.where(cs, 0.0, np.minimum(1.0, query_row / p_obs))
    if disjoint:
        lb = np.maximum(0.0, (query_row - (1.0 - p_obs)) / p_obs)
    else:
        leftover = 1.0 - (ub.sum() - ub)  # mass the other successors cannot absorb
        lb = np.where(cs, 0.0, np.maximum(0.0, leftover))
    return lb, ub


def _overlapping_ub_row(obs_row, s_next, query_row) -> np.ndarray:
    p_obs = obs_row[s_next]
    p_next_q = query_row[s_next]
    cs = _cs_mask(obs_row, s_next, query_row)
    ub = np.where(obs_row > 0,
                  np.minimum(query_row, 1.0 - p_next_q),
                  np.minimum(1.0 - p_next_q, query_row / p_obs))
    ub[cs] = 0.0
    ub[s_next] = min(p_obs, p_next_q) / p_obs
    return ub


def _overlapping_lb_row(obs_row, s_next, query_row, ub_row) -> np.ndarray:
    cs = _cs_mask(obs_row, s_next, query_row)
    leftover = 1.0 - (ub_row.sum() - ub_row)
    lb = np.maximum(0.0, leftover)
    lb[cs] = 0.0
    lb[s_next] = max(query_row[s_next], leftover[s_next])
    return lb


def _cs_mon_rows(obs_row, s_next, query_row, disjoint: bool) -> tuple[np.ndarray, np.ndarray]:
    p_obs = obs_row[s_next]
    if disjoint:
        ub = np.where(query_row < p_obs, query_row / p_obs, 1.0)
        lb = np.where(query_row > 1.0 - p_obs, (query_row - (1.0 - p_obs)) / p_obs, 0.0)
        return lb, ub
    ub = _overlapping_ub_row(obs_row, s_next, query_row)
    return _overlapping_lb_row(obs_row, s_next, query_row, ub), ub


def transition_row_bounds(m: Mdp, obs: ObsTriple, query_pair: Pair,
                          assumptions: Assumptions) -> tuple[np.ndarray, np.ndarray]:
    """Per-successor (lb, ub) arrays for one query pair and one observed transition."""
    relation = classify_support(m, obs[:2], query_pair)
    if relation is SupportRelation.OBSERVED_PAIR:
        # Same mechanism input reproduces the observed outcome, under every assumption set.
        return _observed_pair_rows(m.num_states, obs[2])
    obs_row = m.transition[obs[0], obs[1]]
    query_row = m.transition[query_pair[0], query_pair[1]]
    disjoint = relation is SupportRelation.DISJOINT
    if assumptions is Assumptions.NONE:
        lb, ub = _no_assumption_rows(obs_row, obs[2], query_row)
    elif assumptions is Assumptions.CS:
        lb, ub = _cs_only_rows(obs_row, obs[2], query_row, disjoint)
    else:
        lb, ub = _cs_mon_rows(obs_row, obs[2], query_row, disjoint)

    if lb.sum() > 1.0 + CLAMP_TOL or ub.sum() < 1.0 - CLAMP_TOL:
        raise InvariantViolation(
            f"row bounds for pair {query_pair} given {obs} leave no valid distribution: "
            f"sum(lb)={lb.sum():.12g}, sum(ub)={ub.sum():.12g}")
    np.clip(ub, 0.0, 1.0, out=ub)
    np.minimum(lb, ub, out=lb)
    np.clip(lb, 0.0, 1.0, out=lb)
    return lb, ub


# ---------------------------------------------------------------------------
# Per-successor operations (views into the row computations, with precondition checks)
# ---------------------------------------------------------------------------

def bounds_observed_pair(m: Mdp, obs: ObsTriple) -> tuple[np.ndarray, np.ndarray]:
    """Degenerate bounds for the observed pair itself, identical for every assumption set."""
    return _observed_pair_rows(m.num_states, obs[2])


def bounds_disjoint(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int) -> ProbInterval:
    """Bounds for a pair whose support is disjoint from the observed pair's; the
    stability/monotonicity constraints are vacuous, so one formula serves every
    assumption set."""
    if classify_support(m, obs[:2], query_pair) is not SupportRelation.DISJOINT:
        raise ValueError("query pair does not have disjoint support from the observed pair")
    lb, ub = _cs_mon_rows(m.transition[obs[0], obs[1]], obs[2],
                          m.transition[query_pair[0], query_pair[1]], disjoint=True)
    return make_interval(lb[s_cf], ub[s_cf])


def _require_overlapping(m: Mdp, obs: ObsTriple, query_pair: Pair) -> None:
    if classify_support(m, obs[:2], query_pair) is not SupportRelation.OVERLAPPING:
        raise ValueError("query pair does not have overlapping support with the observed pair")


def bounds_overlapping_ub(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int) -> float:
    """Upper bound for an overlapping-support pair under CS + monotonicity."""
    _require_overlapping(m, obs, query_pair)
    row = _overlapping_ub_row(m.transition[obs[0], obs[1]], obs[2],
                              m.transition[query_pair[0], query_pair[1]])
    return float(row[s_cf])


def bounds_overlapping_lb(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int,
                          ub_row: np.ndarray) -> float:
    """Lower bound for an overlapping-support pair under CS + monotonicity; `ub_row`
    must hold the upper bounds of the same (query pair, observed step) row."""
    _require_overlapping(m, obs, query_pair)
    row = _overlapping_lb_row(m.transition[obs[0], obs[1]], obs[2],
                              m.transition[query_pair[0], query_pair[1]], np.asarray(ub_row))
    return float(row[s_cf])


def bounds_no_assumption(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int) -> ProbInterval:
    """Assumption-free bounds for any pair other than the observed one."""
    lb, ub = _no_assumption_rows(m.transition[obs[0], obs[1]], obs[2],
                                 m.transition[query_pair[0], query_pair[1]])
    return make_interval(lb[s_cf], ub[s_cf])


def bounds_cs_only_ub(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int) -> float:
    """Upper bound under counterfactual stability alone."""
    _, ub = _cs_only_rows(m.transition[obs[0], obs[1]], obs[2],
                          m.transition[query_pair[0], query_pair[1]], disjoint=False)
    return float(ub[s_cf])


def bounds_cs_only(m: Mdp, obs: ObsTriple, query_pair: Pair, s_cf: int,
                   ub_row: np.ndarray) -> ProbInterval:
    """Bounds under counterfactual stability alone, for a pair other than the observed
    one. `ub_row` must hold `bounds_cs_only_ub` for every successor of this pair."""
    obs_row = m.transition[obs[0], obs[1]]
    query_row = m.transition[query_pair[0], query_pair[1]]
    ub_row = np.asarray(ub_row)
    ub = float(ub_row[s_cf])
    if classify_support(m, obs[:2], query_pair) is SupportRelation.DISJOINT:
        p_obs = obs_row[obs[2]]
        return make_interval(max(0.0, (query_row[s_cf] - (1.0 - p_obs)) / p_obs), ub)
    if cs_condition(m, obs, (query_pair[0], query_pair[1], s_cf)):
        return make_interval(0.0, ub)
    return make_interval(max(0.0, 1.0 - (ub_row.sum() - ub)), ub)


@dataclass(frozen=True)
class IntervalCfMdp:
    """Time-indexed interval counterfactual MDP for one observed path."""

    horizon: int
    lb: np.ndarray  # (T, S, A, S)
    ub: np.ndarray  # (T, S, A, S)
    assumptions: Assumptions
    base: Mdp
    path: ObservedPath

    def __post_init__(self):
        self.lb.setflags(write=False)
        self.ub.setflags(write=False)

    def interval(self, t: int, s: int, a: int, s_cf: int) -> ProbInterval:
        return ProbInterval(float(self.lb[t, s, a, s_cf]), float(self.ub[t, s, a, s_cf]))

    def widths(self) -> np.ndarray:
        return self.ub - self.lb


def build_interval_cfmdp(m: Mdp, path: ObservedPath, assumptions: Assumptions) -> IntervalCfMdp:
    """Interval CFMDP covering every transition of m at every observed step of the path."""
    problems = validate_path(m, path)
    if problems:
        raise ValueError("path invalid for this MDP: " + "; ".join(problems))
    t_len, n, k = path.horizon, m.num_states, m.num_actions
    lb = np.zeros((t_len, n, k, n))
    ub = np.zeros((t_len, n, k, n))
    for t in range(t_len):
        obs = path.step(t)
        for s in range(n):
            for a in range(k):
                try:
                    lb[t, s, a], ub[t, s, a] = transition_row_bounds(m, obs, (s, a), assumptions)
                except InvariantViolation as exc:
                    raise InvariantViolation(f"at (t={t}, s={s}, a={a}): {exc}") from exc
    return IntervalCfMdp(t_len, lb, ub, assumptions, m, path)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def icfmdp_to_json(icf: IntervalCfMdp) -> dict:
    t_len, n, k, _ = icf.lb.shape
    intervals = [[[[{"lb": float(icf.lb[t, s, a, s2]), "ub": float(icf.ub[t, s, a, s2])}
                    for s2 in range(n)] for a in range(k)] for s in range(n)]
                 for t in range(t_len)]
    return {"horizon": icf.horizon, "assumptions": icf.assumptions.value, "intervals": intervals}


def icfmdp_csv_rows(icf: IntervalCfMdp):
    """Flat (t, s, a, s_next, lb, ub) rows."""
    t_len, n, k, _ = icf.lb.shape
    for t in range(t_len):
        for s in range(n):
            for a in range(k):
                for s2 in range(n):
                    yield t, s, a, s2, float(icf.lb[t, s, a, s2]), float(icf.ub[t, s, a, s2])


def write_icfmdp_csv(icf: IntervalCfMdp, file: str | Path) -> None:
    with open(file, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "s", "a", "s_next", "lb", "ub"])
        writer.writerows(icfmdp_csv_rows(icf))
