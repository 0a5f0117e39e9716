"""Command-line surface.

Subcommands: `train` (one policy on one setup, to a checkpoint), `eval`
(success-rate-by-turn CSV for a policy), `experiment` (a full grid from
a config file), `play` (interactive dialog), and `check-gradients`.
Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .checkpoint import load_qfun, save_qfun
from .corpus import resolve_corpus
from .dialog import Actor
from .evaluate import BaselinePolicy, GreedyQPolicy, RandomPolicy, evaluate
from .experiment import (
    parse_setup,
    read_config,
    reward_config_from,
    run_experiment,
    train_config_from,
)
from .gradcheck import check_embedded, check_mlp
from .play import play_session
from .qlearn import Setup, curve_csv, train


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inqdial", description="Inquiry-dialog workbench")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_train = sub.add_parser("train", help="train one policy and save a checkpoint")
    p_train.add_argument("--config", required=True, help="key=value training config file")
    p_train.add_argument("--out", required=True, help="checkpoint path to write")
    p_train.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_train.add_argument("--curve", default=None, help="optional learning-curve CSV path")

    p_eval = sub.add_parser("eval", help="evaluate a policy into a success-rate CSV")
    p_eval.add_argument("--policy", required=True, help="checkpoint path, 'baseline', or 'random'")
    p_eval.add_argument("--setup", required=True, choices=["RB", "UB", "SB"])
    p_eval.add_argument("--user", required=True, choices=["rand", "rule"])
    p_eval.add_argument("--dialogs", type=int, default=2000)
    p_eval.add_argument("--turn-cap", type=int, default=40)
    p_eval.add_argument("--out", required=True, help="CSV path to write")
    p_eval.add_argument("--corpus", default=None, help="corpus path or builtin name")
    p_eval.add_argument("--seed", type=int, default=0)

    p_exp = sub.add_parser("experiment", help="run a policy x setup grid from a config file")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--outdir", required=True)

    p_play = sub.add_parser("play", help="play one side of a dialog interactively")
    p_play.add_argument("--policy", default="baseline", help="checkpoint path, 'baseline', or 'random'")
    p_play.add_argument("--role", required=True, choices=["user", "system"], help="side the human plays")
    p_play.add_argument("--seed", type=int, default=0, help="scenario seed")
    p_play.add_argument("--mode", default="RB", choices=["RB", "UB", "SB"])
    p_play.add_argument("--corpus", default=None)
    p_play.add_argument("--turn-cap", type=int, default=40)
    p_play.add_argument("--transcript", default=None, help="write the event log here")

    p_grad = sub.add_parser("check-gradients", help="finite-difference gradient verification")
    p_grad.add_argument("--trials", type=int, default=50)
    p_grad.add_argument("--tolerance", type=float, default=1e-4)

    return parser


def _load_policy(spec: str):
    if spec == "baseline":
        return BaselinePolicy()
    if spec == "random":
        return RandomPolicy()
    return GreedyQPolicy(load_qfun(spec))


def _cmd_train(args) -> int:
    cfg = read_config(args.config)
    tc = train_config_from(cfg, cfg.get("policy", "embedded-5d"))
    if args.seed is not None:
        from dataclasses import replace

        tc = replace(tc, seed=args.seed)
    corpus = resolve_corpus(cfg.get("corpus"))
    setup = parse_setup(cfg.get("setup", "RB-rule"))
    rewards = reward_config_from(cfg)
    qfun, curve = train(tc, corpus, setup, rewards)
    save_qfun(args.out, qfun)
    if args.curve:
        meta = (f"policy={qfun.name}", f"setup={setup}", f"seed={tc.seed}")
        with open(args.curve, "w", encoding="utf-8") as fh:
            fh.write(curve_csv(curve, meta))
    print(f"saved checkpoint to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    policy = _load_policy(args.policy)
    corpus = resolve_corpus(args.corpus)
    curve = evaluate(
        policy,
        Setup(args.setup, args.user),
        args.dialogs,
        args.turn_cap,
        rng=np.random.default_rng(args.seed),
        corpus=corpus,
        seed=args.seed,
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(curve.csv())
    print(f"wrote {args.out} (success@{args.turn_cap} = {curve.at(args.turn_cap)})")
    return 0


def _cmd_experiment(args) -> int:
    results = run_experiment(args.config, args.outdir)
    print(f"{len(results)} cells written to {args.outdir}")
    return 0


def _cmd_play(args) -> int:
    policy = _load_policy(args.policy)
    corpus = resolve_corpus(args.corpus)
    human = Actor.USER if args.role == "user" else Actor.SYSTEM
    play_session(
        policy, corpus, human,
        seed=args.seed, mode=args.mode, turn_cap=args.turn_cap,
        transcript_path=args.transcript,
    )
    return 0


def _cmd_check_gradients(args) -> int:
    emb = check_embedded(trials=max(1, args.trials * 3 // 5))
    mlp = check_mlp(trials=max(1, args.trials - emb.trials))
    for rep in (emb, mlp):
        status = "ok" if rep.ok(args.tolerance) else "FAIL"
        print(f"{rep.path}: {rep.trials} trials, {rep.coords} coordinates, "
              f"max relative error {rep.max_rel_error:.3e} [{status}]")
    if emb.ok(args.tolerance) and mlp.ok(args.tolerance):
        return 0
    raise SystemExit(2)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "train": _cmd_train,
        "eval": _cmd_eval,
        "experiment": _cmd_experiment,
        "play": _cmd_play,
        "check-gradients": _cmd_check_gradients,
    }
    try:
        return handlers[args.command](args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return 2
    except Exception as exc:  # runtime failures exit 2 with a readable message
        print(f"inqdial: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
