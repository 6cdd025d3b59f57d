"""Tabular MDPs, observed paths, deterministic time-indexed policies and exact evaluation.

All types are immutable after construction (arrays are marked read-only), so they can
be shared freely across threads. Every stochastic operation takes an explicit seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError

ROW_SUM_TOL = 1e-9


def rng_from(seed: int, *stream: int) -> np.random.Generator:
    """Seeded PCG64 generator; extra ints derive independent sub-streams."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, stream)]))


def _frozen(a, dtype=float) -> np.ndarray:
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Mdp:
    """Finite MDP: states 0..S-1, actions 0..A-1, rewards on (state, action)."""

    num_states: int
    num_actions: int
    transition: np.ndarray  # (S, A, S)
    reward: np.ndarray  # (S, A)
    initial_dist: np.ndarray  # (S,)
    state_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "transition", _frozen(self.transition))
        object.__setattr__(self, "reward", _frozen(self.reward))
        object.__setattr__(self, "initial_dist", _frozen(self.initial_dist))
        s, a = self.num_states, self.num_actions
        if self.transition.shape != (s, a, s):
            raise ValueError(f"transition shape {self.transition.shape} != {(s, a, s)}")
        if self.reward.shape != (s, a):
            raise ValueError(f"reward shape {self.reward.shape} != {(s, a)}")
        if self.initial_dist.shape != (s,):
            raise ValueError(f"initial_dist shape {self.initial_dist.shape} != {(s,)}")
        if self.state_labels is not None and len(self.state_labels) != s:
            raise ValueError("state_labels length mismatch")


@dataclass(frozen=True)
class ObservedPath:
    """Realized path: T+1 states and T actions, so every step has its observed outcome."""

    states: tuple[int, ...]
    actions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(int(s) for s in self.states))
        object.__setattr__(self, "actions", tuple(int(a) for a in self.actions))
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("need len(states) == len(actions) + 1")

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def step(self, t: int) -> tuple[int, int, int]:
        """Observed transition (s_t, a_t, s_{t+1})."""
        return self.states[t], self.actions[t], self.states[t + 1]


@dataclass(frozen=True)
class PolicySchedule:
    """Deterministic time-indexed policy: action_at[t, s] is the action at time t in state s."""

    horizon: int
    action_at: np.ndarray  # (horizon, S)

    def __post_init__(self):
        object.__setattr__(self, "action_at", _frozen(self.action_at, dtype=np.int64))
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.action_at.shape[0] != self.horizon:
            raise ValueError("action_at first axis must equal horizon")

    @staticmethod
    def stationary(actions_per_state, horizon: int) -> "PolicySchedule":
        a = np.asarray(actions_per_state, dtype=np.int64)
        return PolicySchedule(horizon, np.tile(a, (horizon, 1)))


@dataclass(frozen=True)
class ValueTable:
    """values[t, s] for t = 0..horizon; values[horizon] is the terminal value (zero)."""

    values: np.ndarray  # (horizon + 1, S)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))

    @property
    def horizon(self) -> int:
        return self.values.shape[0] - 1

    def initial_value(self, m: Mdp) -> float:
        """Expected value at t=0 under the MDP's initial distribution."""
        return float(self.values[0] @ m.initial_dist)


def validate_mdp(m: Mdp) -> list[str]:
    """Return human-readable descriptions of every violated MDP invariant (empty if none)."""
    problems = []
    if np.any(m.transition < 0) or np.any(m.transition > 1):
        bad = np.argwhere((m.transition < 0) | (m.transition > 1))[0]
        problems.append(f"transition[{tuple(bad)}] outside [0, 1]")
    row_sums = m.transition.sum(axis=2)
    for s, a in np.argwhere(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        problems.append(f"transition row (s={s}, a={a}) sums to {row_sums[s, a]:.12g}, not 1")
    if np.any(m.initial_dist < 0) or np.any(m.initial_dist > 1):
        problems.append("initial_dist entry outside [0, 1]")
    if abs(m.initial_dist.sum() - 1.0) > ROW_SUM_TOL:
        problems.append(f"initial_dist sums to {m.initial_dist.sum():.12g}, not 1")
    return problems


def validate_path(m: Mdp, path: ObservedPath) -> list[str]:
    """Check every observed transition has positive probability under m (exact > 0)."""
    problems = []
    for t in range(path.horizon):
        s, a, s2 = path.step(t)
        if not (0 <= s < m.num_states and 0 <= a < m.num_actions and 0 <= s2 < m.num_states):
            problems.append(f"step {t}: indices ({s}, {a}, {s2}) out of range")
        elif m.transition[s, a, s2] <= 0:
            problems.append(f"step {t}: observed transition ({s}, {a} -> {s2}) has probability 0")
    return problems


def sample_path(m: Mdp, policy: PolicySchedule, horizon: int, seed: int) -> ObservedPath:
    """Sample one path of `horizon` transitions; deterministic for a fixed seed."""
    if horizon > policy.horizon:
        raise ValueError("horizon exceeds policy horizon")
    rng = rng_from(seed)
    s = int(rng.choice(m.num_states, p=m.initial_dist))
    states, actions = [s], []
    for t in range(horizon):
        a = int(policy.action_at[t, s])
        row = m.transition[s, a]
        if row.sum() <= 0:
            raise ValueError(f"all-zero transition row at (s={s}, a={a})")
        s = int(rng.choice(m.num_states, p=row))
        actions.append(a)
        states.append(s)
    return ObservedPath(tuple(states), tuple(actions))


def path_return(m: Mdp, path: ObservedPath) -> float:
    """Undiscounted sum of rewards along the path."""
    return float(sum(m.reward[s, a] for s, a in zip(path.states, path.actions)))


def exact_policy_value(m: Mdp, policy: PolicySchedule, horizon: int) -> ValueTable:
    """Backward-induction expected undiscounted return of a fixed policy."""
    if horizon > policy.horizon:
        raise ValueError("horizon exceeds policy horizon")
    s_idx = np.arange(m.num_states)
    v = np.zeros((horizon + 1, m.num_states))
    for t in range(horizon - 1, -1, -1):
        a = policy.action_at[t]
        v[t] = m.reward[s_idx, a] + m.transition[s_idx, a] @ v[t + 1]
    return ValueTable(v)


def optimal_policy(m: Mdp, horizon: int) -> tuple[PolicySchedule, ValueTable]:
    """Finite-horizon optimal deterministic policy by value iteration (ties -> lowest action)."""
    v = np.zeros((horizon + 1, m.num_states))
    acts = np.zeros((horizon, m.num_states), dtype=np.int64)
    for t in range(horizon - 1, -1, -1):
        q = m.reward + m.transition @ v[t + 1]  # (S, A)
        acts[t] = np.argmax(q, axis=1)
        v[t] = q[np.arange(m.num_states), acts[t]]
    return PolicySchedule(horizon, acts), ValueTable(v)


def random_policy_schedule(num_states: int, num_actions: int, horizon: int,
                           rng: np.random.Generator) -> PolicySchedule:
    """Uniformly random deterministic time-indexed policy."""
    return PolicySchedule(horizon, rng.integers(0, num_actions, size=(horizon, num_states)))


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def mdp_to_json(m: Mdp) -> dict:
    out = {
        "num_states": m.num_states,
        "num_actions": m.num_actions,
        "transition": m.transition.tolist(),
        "reward": m.reward.tolist(),
        "initial_dist": m.initial_dist.tolist(),
    }
    if m.state_labels is not None:
        out["state_labels"] = list(m.state_labels)
    return out


def mdp_from_json(d: dict) -> Mdp:
    """Build an Mdp from its JSON dict; rows are re-normalized only within 1e-9 slack."""
    try:
        transition = np.asarray(d["transition"], dtype=float)
        reward = np.asarray(d["reward"], dtype=float)
        initial = np.asarray(d["initial_dist"], dtype=float)
        num_states = int(d["num_states"])
        num_actions = int(d["num_actions"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed MDP JSON: {exc}") from exc
    labels = tuple(d["state_labels"]) if "state_labels" in d else None

    if transition.shape != (num_states, num_actions, num_states):
        raise ConfigError("MDP JSON: transition shape inconsistent with num_states/num_actions")
    if np.any(transition < 0) or np.any(transition > 1):
        raise ConfigError("MDP JSON: transition probabilities outside [0, 1]")
    row_sums = transition.sum(axis=2)
    if np.any(np.abs(row_sums - 1.0) > ROW_SUM_TOL):
        raise ConfigError("MDP JSON: a transition row deviates from sum 1 by more than 1e-9")
    transition = transition / row_sums[:, :, None]
    if abs(initial.sum() - 1.0) > ROW_SUM_TOL:
        raise ConfigError("MDP JSON: initial_dist deviates from sum 1 by more than 1e-9")
    initial = initial / initial.sum()
    return Mdp(num_states, num_actions, transition, reward, initial, labels)


def path_to_json(path: ObservedPath) -> dict:
    return {"states": list(path.states), "actions": list(path.actions)}


def path_from_json(d: dict) -> ObservedPath:
    try:
        return ObservedPath(tuple(d["states"]), tuple(d["actions"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed path JSON: {exc}") from exc


def load_mdp(file: str | Path) -> Mdp:
    return mdp_from_json(json.loads(Path(file).read_text()))


def load_path(file: str | Path) -> ObservedPath:
    return path_from_json(json.loads(Path(file).read_text()))
