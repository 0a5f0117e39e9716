"""Experiment orchestration: train/evaluate policy-setup grids to CSV files.

Config files are flat `key = value` text with "#" comments. Outputs are
one evaluation CSV per (policy, setup, seed) cell, a per-cell median CSV
when several seeds are configured, learning-curve CSVs for trained
policies, and a tab-separated summary table. A rerun with the same
config and seeds reproduces every file byte for byte; cells whose files
already exist are skipped, which makes interrupted runs resumable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .checkpoint import load_qfun, save_qfun
from .corpus import Corpus, resolve_corpus
from .evaluate import BaselinePolicy, EvalCurve, GreedyQPolicy, RandomPolicy, evaluate, median_curve, parse_curve_csv
from .qlearn import RewardConfig, Setup, TrainConfig, curve_csv, train

LEARNED_POLICIES = ("embedded-5d", "embedded-10d", "bag-mlp")
POLICY_NAMES = ("baseline", "random") + LEARNED_POLICIES


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', found {raw!r}")
        out[key.strip()] = value.strip()
    return out


def read_config(path: str) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


_TRAIN_FIELDS = {
    "epochs": int,
    "dialogs_per_epoch": int,
    "eps_start": float,
    "eps_end": float,
    "eps_anneal_epochs": int,
    "buffer_capacity": int,
    "batch_size": int,
    "learning_rate": float,
    "target_sync_episodes": int,
    "updates_per_episode": int,
    "turn_cap": int,
    "seed": int,
    "hidden": int,
}

_REWARD_FIELDS = {
    "success_reward": float,
    "turn_penalty": float,
    "discount": float,
}


def train_config_from(cfg: dict[str, str], policy: Optional[str] = None) -> TrainConfig:
    kwargs = {name: conv(cfg[name]) for name, conv in _TRAIN_FIELDS.items() if name in cfg}
    tc = TrainConfig(**kwargs)
    if policy is not None:
        tc = replace(tc, **_encoder_fields(policy))
    return tc


def reward_config_from(cfg: dict[str, str]) -> RewardConfig:
    kwargs = {name: conv(cfg[name]) for name, conv in _REWARD_FIELDS.items() if name in cfg}
    return RewardConfig(**kwargs)


def _encoder_fields(policy: str) -> dict:
    if policy == "bag-mlp":
        return {"encoder": "bag"}
    if policy.startswith("embedded-") and policy.endswith("d"):
        return {"encoder": "embedded", "embed_dim": int(policy[len("embedded-"):-1])}
    raise ConfigError(f"not a learnable policy: {policy!r}")


def parse_setup(token: str) -> Setup:
    mode, sep, user = token.partition("-")
    if not sep:
        raise ConfigError(f"setup must look like RB-rule or UB-rand, found {token!r}")
    return Setup(mode, user)


@dataclass(frozen=True)
class ExperimentPlan:
    corpus: Corpus
    policies: tuple[str, ...]
    setups: tuple[Setup, ...]
    seeds: tuple[int, ...]
    eval_dialogs: int
    turn_cap: int
    base_train: TrainConfig
    rewards: RewardConfig

    @staticmethod
    def from_config(cfg: dict[str, str]) -> "ExperimentPlan":
        policies = tuple(cfg.get("policies", "baseline").split())
        for p in policies:
            if p not in POLICY_NAMES:
                raise ConfigError(f"unknown policy {p!r} (known: {', '.join(POLICY_NAMES)})")
        setups = tuple(parse_setup(t) for t in cfg.get("setups", "RB-rule").split())
        seeds = tuple(int(s) for s in cfg.get("seeds", cfg.get("seed", "0")).split())
        return ExperimentPlan(
            corpus=resolve_corpus(cfg.get("corpus")),
            policies=policies,
            setups=setups,
            seeds=seeds,
            eval_dialogs=int(cfg.get("eval_dialogs", "2000")),
            turn_cap=int(cfg.get("turn_cap", "40")),
            base_train=train_config_from(cfg),
            rewards=reward_config_from(cfg),
        )


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _cell_policy(plan: ExperimentPlan, policy: str, setup: Setup, seed: int, outdir: str, log) :
    """Produce the policy object for one cell, training and caching to disk."""
    if policy == "baseline":
        return BaselinePolicy()
    if policy == "random":
        return RandomPolicy()
    ckpt = os.path.join(outdir, f"{policy}_{setup}_s{seed}.ckpt")
    curve_path = os.path.join(outdir, f"learn_{policy}_{setup}_s{seed}.csv")
    if os.path.exists(ckpt):
        return GreedyQPolicy(load_qfun(ckpt))
    tc = replace(plan.base_train, seed=seed, **_encoder_fields(policy))
    log(f"training {policy} on {setup} (seed {seed})")
    qfun, curve = train(tc, plan.corpus, setup, plan.rewards)
    save_qfun(ckpt, qfun)
    meta = (f"policy={policy}", f"setup={setup}", f"seed={seed}")
    _write(curve_path, curve_csv(curve, meta))
    return GreedyQPolicy(qfun)


def run_experiment(config_path: str, outdir: str, log=print) -> dict[tuple[str, str], EvalCurve]:
    """Run every (policy, setup) cell; returns the median curve per cell."""
    plan = ExperimentPlan.from_config(read_config(config_path))
    os.makedirs(outdir, exist_ok=True)
    results: dict[tuple[str, str], EvalCurve] = {}
    for policy in plan.policies:
        for setup in plan.setups:
            per_seed = []
            for seed in plan.seeds:
                csv_path = os.path.join(outdir, f"eval_{policy}_{setup}_s{seed}.csv")
                if os.path.exists(csv_path):
                    with open(csv_path, "r", encoding="utf-8") as fh:
                        per_seed.append(parse_curve_csv(fh.read()))
                    continue
                pol = _cell_policy(plan, policy, setup, seed, outdir, log)
                log(f"evaluating {policy} on {setup} (seed {seed}, {plan.eval_dialogs} dialogs)")
                curve = evaluate(
                    pol, setup, plan.eval_dialogs, plan.turn_cap,
                    rng=np.random.default_rng(seed), corpus=plan.corpus, seed=seed,
                )
                _write(csv_path, curve.csv())
                per_seed.append(curve)
            cell = median_curve(per_seed) if len(per_seed) > 1 else per_seed[0]
            if len(per_seed) > 1:
                _write(os.path.join(outdir, f"eval_{policy}_{setup}_median.csv"), cell.csv())
            results[(policy, str(setup))] = cell
    _write(os.path.join(outdir, "summary.tsv"), summary_table(results))
    return results


def summary_table(results: dict[tuple[str, str], EvalCurve]) -> str:
    lines = ["policy\tsetup\tsucc@5\tsucc@10\tsucc@20\tsucc@40"]
    for (policy, setup), curve in sorted(results.items()):
        lines.append(
            f"{policy}\t{setup}\t{curve.at(5)!r}\t{curve.at(10)!r}\t{curve.at(20)!r}\t{curve.at(40)!r}"
        )
    return "\n".join(lines) + "\n"
