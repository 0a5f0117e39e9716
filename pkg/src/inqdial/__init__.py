"""Inquiry-dialog workbench.

Two participants with partial first-order knowledge pool beliefs through
an Assert/Open/Close protocol to answer a shared query. The package
provides the belief engine, the dialog state machine, simulated
partners, a recursive formula-embedding Q-function with a bag-of-formulae
baseline, deep Q-learning with experience replay, and an experiment
harness that measures success-rate-by-turn curves.
"""

from .formulas import (
    Atom,
    Belief,
    ParseError,
    Query,
    Term,
    apply_subst,
    canonicalize,
    parse_formula,
    parse_formula_lines,
    unify,
)
from .inference import (
    Argument,
    BeliefSet,
    closure,
    derives,
    find_arguments,
    is_consistent,
    minimal_supports,
)
from .dialog import (
    ActKind,
    Actor,
    Dialog,
    DialogAct,
    DialogError,
    DialogState,
    Event,
    LegalMoves,
    Outcome,
    OutcomeKind,
    QueryStore,
    apply_act,
    check_success,
    init_dialog,
    is_terminal,
    legal_moves,
)
from .simulator import SimulatorConfig, exhaustive_act, hybrid_act, random_act
from .corpus import Corpus, Scenario, builtin_corpus, generate_scenario, load_corpus, resolve_corpus
from .embedding import EmbeddedQ, Vocabulary
from .bag import BagMLPQ, BagVocab, bag_encode
from .qlearn import (
    EpochStats,
    ReplayBuffer,
    RewardConfig,
    Setup,
    TrainConfig,
    Transition,
    run_episode,
    train,
)
from .evaluate import BaselinePolicy, EvalCurve, GreedyQPolicy, RandomPolicy, evaluate, median_curve
from .checkpoint import load_qfun, save_qfun
from .experiment import run_experiment

__version__ = "0.1.0"
