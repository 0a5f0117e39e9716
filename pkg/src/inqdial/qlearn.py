"""Deep Q-learning with experience replay over dialog episodes.

One transition is recorded per system decision point: the encoded state,
the chosen act, the turn's reward, and the encoded state plus legal acts
at the next decision point (after the partner's reply). Rewards follow a
strict two-case split per turn: the success reward when either side
answers the query that turn, otherwise a flat time-pressure penalty.

Training plays episodes with an epsilon-greedy policy against the hybrid
simulator, pushes transitions into a FIFO replay buffer, and applies SGD
steps on the mean squared TD error against a periodically synced target
network. Everything is driven by one seeded generator, so a (config,
seed) pair fully determines the learning curve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .bag import BagMLPQ
from .corpus import Corpus, Scenario, generate_scenario
from .dialog import (
    DEFAULT_TURN_CAP,
    Actor,
    DialogAct,
    DialogState,
    Event,
    Outcome,
    OutcomeKind,
    Query,
    apply_act,
    check_success,
    init_dialog,
    is_terminal,
    legal_moves,
)
from .embedding import EmbeddedQ
from .simulator import SimulatorConfig, hybrid_act


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class RewardConfig:
    success_reward: float = 20.0
    turn_penalty: float = 1.0
    discount: float = 0.99

    def __post_init__(self):
        if self.success_reward < 0 or self.turn_penalty < 0:
            raise ValueError("rewards must be nonnegative magnitudes")
        if not 0.0 <= self.discount <= 1.0:
            raise ValueError("discount must lie in [0, 1]")


@dataclass(frozen=True)
class Transition:
    state_enc: object
    act: DialogAct
    reward: float
    next_state_enc: object
    next_legal: tuple[DialogAct, ...]
    terminal: bool


class ReplayBuffer:
    """Fixed-capacity ring with strictly FIFO eviction."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._ring: list[Transition] = []
        self._next = 0
        self.inserted = 0

    def push(self, tr: Transition) -> None:
        if len(self._ring) < self.capacity:
            self._ring.append(tr)
        else:
            self._ring[self._next] = tr
        self._next = (self._next + 1) % self.capacity
        self.inserted += 1

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        idx = rng.choice(len(self._ring), size=batch_size, replace=False)
        return [self._ring[i] for i in idx]

    def snapshot(self) -> list[Transition]:
        """Contents oldest-first (test hook for the FIFO invariant)."""
        return self._ring[self._next:] + self._ring[: self._next]

    def __len__(self) -> int:
        return len(self._ring)


@dataclass(frozen=True)
class Setup:
    """One experimental cell: a belief split mode and a simulator style."""

    mode: str            # RB | UB | SB
    user: str            # "rand" | "rule"

    def __post_init__(self):
        if self.mode not in ("RB", "UB", "SB"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.user not in ("rand", "rule"):
            raise ValueError(f"unknown user style {self.user!r}")

    @property
    def p(self) -> float:
        return 1.0 if self.user == "rule" else 0.75

    def __str__(self) -> str:
        return f"{self.mode}-{self.user}"


@dataclass
class TrainConfig:
    epochs: int = 100
    dialogs_per_epoch: int = 2000
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_anneal_epochs: int = 50
    buffer_capacity: int = 10_000
    batch_size: int = 32
    learning_rate: float = 5e-3
    target_sync_episodes: int = 2000
    updates_per_episode: int = 1
    encoder: str = "embedded"  # "embedded" | "bag"
    embed_dim: int = 5
    hidden: int = 64
    turn_cap: int = DEFAULT_TURN_CAP
    seed: int = 0

    def __post_init__(self):
        if self.eps_start < self.eps_end:
            raise ValueError("eps_start must be >= eps_end")
        for name in ("dialogs_per_epoch", "buffer_capacity", "batch_size", "target_sync_episodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def epsilon(epoch: int, cfg: TrainConfig) -> float:
    """Linear anneal from eps_start to eps_end over the first anneal epochs."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    if epoch >= cfg.eps_anneal_epochs:
        return cfg.eps_end
    return cfg.eps_start - (cfg.eps_start - cfg.eps_end) * epoch / cfg.eps_anneal_epochs


def turn_reward(events: Sequence[Event], query: Query, cfg: RewardConfig) -> float:
    """Reward for one completed turn: success replaces the penalty."""
    if any(check_success(e.act, query) for e in events):
        return cfg.success_reward
    return -cfg.turn_penalty


def select_act(
    qfun, view: DialogState, legal: Sequence[DialogAct], eps: float, rng: np.random.Generator
) -> DialogAct:
    """Epsilon-greedy over the legal acts; greedy ties go to the lowest
    canonical print, which is the order `legal` arrives in."""
    if not legal:
        raise ValueError("no legal acts to select from")
    if eps > 0.0 and rng.random() < eps:
        return legal[int(rng.integers(len(legal)))]
    values = qfun.values(qfun.encode(view), legal)
    return legal[int(np.argmax(values))]


def td_target(tr: Transition, qfun_target, gamma: float) -> float:
    if tr.terminal:
        return tr.reward
    if not tr.next_legal:
        raise ValueError("non-terminal transition with no next legal acts")
    return tr.reward + gamma * max(qfun_target.values(tr.next_state_enc, tr.next_legal))


def train_step(qfun, batch: Sequence[Transition], lr: float, gamma: float, target=None) -> float:
    """One SGD step on the mean squared TD error; returns the pre-step loss."""
    if not batch:
        raise ValueError("empty batch")
    target = target or qfun
    ys = [td_target(tr, target, gamma) for tr in batch]
    loss = qfun.train_batch([(tr.state_enc, tr.act) for tr in batch], ys, lr)
    if not np.isfinite(loss):
        raise TrainingError(f"non-finite loss {loss} on batch of {len(batch)}")
    return loss


def run_episode(
    qfun,
    scenario: Scenario,
    sim_cfg: SimulatorConfig,
    eps: float,
    reward_cfg: RewardConfig,
    turn_cap: int,
    rng: np.random.Generator,
) -> tuple[list[Transition], Outcome]:
    """Play one dialog: epsilon-greedy system against the hybrid simulator.

    Emits one transition per system decision point. The system opens.
    """
    sys_view, usr_view = init_dialog(scenario.query, scenario.sigma_sys, scenario.sigma_usr, Actor.SYSTEM)
    transitions: list[Transition] = []
    outcome = is_terminal(sys_view, turn_cap)
    while outcome is None:
        legal = legal_moves(sys_view).all()
        state_enc = qfun.encode(sys_view)
        act = select_act(qfun, sys_view, legal, eps, rng)
        sys_view, usr_view, _ = apply_act(sys_view, usr_view, act, Actor.SYSTEM)
        success = check_success(act, scenario.query)
        outcome = is_terminal(sys_view, turn_cap)
        if outcome is None:
            reply = hybrid_act(usr_view, sim_cfg, rng)
            sys_view, usr_view, _ = apply_act(sys_view, usr_view, reply, Actor.USER)
            success = success or check_success(reply, scenario.query)
            outcome = is_terminal(sys_view, turn_cap)
        reward = reward_cfg.success_reward if success else -reward_cfg.turn_penalty
        next_enc = qfun.encode(sys_view)
        next_legal = () if outcome is not None else legal_moves(sys_view).all()
        transitions.append(Transition(state_enc, act, reward, next_enc, next_legal, outcome is not None))
    return transitions, outcome


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    mean_return: float
    success_rate: float
    epsilon: float
    loss_mean: float

    CSV_HEADER = "epoch,mean_return,success_rate,epsilon,loss_mean"

    def csv_row(self) -> str:
        return f"{self.epoch},{self.mean_return!r},{self.success_rate!r},{self.epsilon!r},{self.loss_mean!r}"


def make_qfun(cfg: TrainConfig, corpus: Corpus, rng: np.random.Generator):
    if cfg.encoder == "embedded":
        return EmbeddedQ.create(corpus, cfg.embed_dim, rng)
    if cfg.encoder == "bag":
        return BagMLPQ.create(corpus, rng, cfg.hidden)
    raise ValueError(f"unknown encoder {cfg.encoder!r}")


def train(
    cfg: TrainConfig,
    corpus: Corpus,
    setup: Setup,
    reward_cfg: RewardConfig = RewardConfig(),
    scenario_provider: Optional[Callable[[np.random.Generator], Scenario]] = None,
    progress: Optional[Callable[[EpochStats], None]] = None,
):
    """Full training loop; returns (qfun, per-epoch learning curve)."""
    rng = np.random.default_rng(cfg.seed)
    qfun = make_qfun(cfg, corpus, rng)
    target = qfun.clone()
    buffer = ReplayBuffer(cfg.buffer_capacity)
    sim = SimulatorConfig(p=setup.p, rng_seed=cfg.seed)
    provider = scenario_provider or (lambda r: generate_scenario(corpus, setup.mode, r))
    curve: list[EpochStats] = []
    episodes = 0
    for epoch in range(cfg.epochs):
        eps = epsilon(epoch, cfg)
        returns = []
        losses = []
        successes = 0
        for _ in range(cfg.dialogs_per_epoch):
            scenario = provider(rng)
            transitions, outcome = run_episode(qfun, scenario, sim, eps, reward_cfg, cfg.turn_cap, rng)
            for tr in transitions:
                buffer.push(tr)
            returns.append(sum(tr.reward for tr in transitions))
            successes += outcome.kind is OutcomeKind.SUCCESS
            episodes += 1
            if len(buffer) >= cfg.batch_size:
                for _ in range(cfg.updates_per_episode):
                    batch = buffer.sample(cfg.batch_size, rng)
                    losses.append(train_step(qfun, batch, cfg.learning_rate, reward_cfg.discount, target))
            if episodes % cfg.target_sync_episodes == 0:
                target = qfun.clone()
        stats = EpochStats(
            epoch=epoch,
            mean_return=float(np.mean(returns)) if returns else 0.0,
            success_rate=successes / cfg.dialogs_per_epoch,
            epsilon=eps,
            loss_mean=float(np.mean(losses)) if losses else 0.0,
        )
        curve.append(stats)
        if progress:
            progress(stats)
    return qfun, curve


def curve_csv(curve: Sequence[EpochStats], metadata: Sequence[str] = ()) -> str:
    lines = [f"# {m}" for m in metadata]
    lines.append(EpochStats.CSV_HEADER)
    lines.extend(s.csv_row() for s in curve)
    return "\n".join(lines) + "\n"
