"""Experiment orchestration: score cells, parameter sweeps, toy replication.

A "cell" is one (detector, parameters) evaluation on one (ID, OOD) dataset
pair, reduced to an EvalResult. Everything here is a pure function of its
inputs and the supplied seeds.

Two kinds of model flow through unchanged: live models that expose input
gradients (perturbations are computed on the fly) and ingested feature
tables (perturbed inputs must come from preprocessing-tagged variant files,
requested through the view's tag lookup; the detector then runs with eps=0
because the nudge is already baked into the stored features).

The no-OOD-access operating point used throughout when nothing else is
specified: T=1000, eps=0, scheme (min, average), M=20 exemplars per class.
Parameter sweeps exist to reproduce oracle upper bounds; selecting (T, eps)
by sweep AUROC peeks at labeled OOD data and is not a deployable policy.
"""

from dataclasses import dataclass

import numpy as np

from .datasets import bank_of_all, generate_toy_dataset1, generate_toy_dataset2, select_exemplars
from .detectors import (
    DEFAULT_SCHEME,
    Scheme,
    fit_mahalanobis,
    maha_score,
    msp_score,
    odin_score,
    pod_score,
    podft_score,
    predict_class,
)
from .finetune import FinetuneConfig, train_pairwise
from .io import IngestedSlot, PreprocessingTag, Report
from .metrics import EvalResult, ScoredPopulations, auroc, compare, fnr_at_tnr95
from .models import PairwiseHead, train_linear_softmax
from .numkit import Prng

__all__ = [
    "DEFAULT_GRID",
    "DEFAULT_SEEDS",
    "FIXED_EPS",
    "FIXED_M",
    "FIXED_SCHEME",
    "FIXED_T",
    "METHODS",
    "ExperimentSpec",
    "SweepGrid",
    "SweepOutcome",
    "build_report",
    "cell_scores",
    "run_cell",
    "run_sweep",
    "run_toy_suite",
]

METHODS = ("msp", "odin", "maha", "pod", "podft", "mindist")

# operating point that never looks at OOD data
FIXED_T = 1000.0
FIXED_EPS = 0.0
FIXED_SCHEME = DEFAULT_SCHEME
FIXED_M = 20
DEFAULT_SEEDS = (0, 1, 2)

SWEEP_TEMPERATURES = (1.0, 10.0, 100.0, 1000.0)
SWEEP_EPSILONS = (
    0.0, 0.0005, 0.001, 0.0014, 0.002, 0.0024, 0.005, 0.01, 0.05, 0.1, 0.2,
)


@dataclass(frozen=True)
class SweepGrid:
    """Search grid for oracle (T, eps) selection."""

    temperatures: tuple = SWEEP_TEMPERATURES
    epsilons: tuple = SWEEP_EPSILONS

    def __post_init__(self):
        ts = tuple(sorted({float(t) for t in self.temperatures}))
        es = tuple(sorted({float(e) for e in self.epsilons}))
        if not ts or not es:
            raise ValueError("sweep grid must have at least one T and one eps")
        if ts[0] <= 0:
            raise ValueError("temperatures must be positive")
        if es[0] < 0:
            raise ValueError("epsilons must be non-negative")
        object.__setattr__(self, "temperatures", ts)
        object.__setattr__(self, "epsilons", es)


DEFAULT_GRID = SweepGrid()


@dataclass(frozen=True)
class ExperimentSpec:
    """One cell's identity: detector, parameters, data regime, seed."""

    method: str
    T: float = FIXED_T
    eps: float = FIXED_EPS
    scheme: Scheme = FIXED_SCHEME
    M: object = FIXED_M  # int, or None for all-train exemplar banks
    regime: str = "full"
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.regime not in ("full", "low"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.M is not None and int(self.M) < 1:
            raise ValueError("M must be >= 1 (or None for all)")


class _RawView:
    """Plain point array posing as a test-split view (live models only)."""

    def __init__(self, points):
        self.points = np.asarray(points, dtype=np.float64)

    def view(self, tag=None):
        if tag is not None:
            raise ValueError(
                "raw point arrays have no preprocessed variants; live models "
                "apply perturbations on the fly"
            )
        return self.points


def _as_view(obj):
    # ndarrays also have a .view attribute, so the check must be nominal
    if isinstance(obj, (IngestedSlot, _RawView)):
        return obj
    return _RawView(obj)


def _resolve(view, model, method, T, eps):
    """Points to score plus the eps the detector itself should apply."""
    if eps > 0 and not model.supports_input_gradient:
        tag = PreprocessingTag(method, T if method == "odin" else None, eps)
        return view.view(tag), 0.0
    return view.view(), eps


def _exemplar_bank(train, M):
    return bank_of_all(train) if M is None else select_exemplars(train, M)


def cell_scores(model, train, id_view, ood_view, method, T=FIXED_T,
                eps=FIXED_EPS, scheme=FIXED_SCHEME, M=FIXED_M, seed=0,
                cfg=None):
    """Raw (id_scores, ood_scores) for one cell; see run_cell."""
    id_view, ood_view = _as_view(id_view), _as_view(ood_view)
    if method == "msp":
        score = lambda x: msp_score(model, x)
        populations = (id_view.view(), ood_view.view())
    elif method == "odin":
        id_pts, d_eps = _resolve(id_view, model, "odin", T, eps)
        ood_pts, _ = _resolve(ood_view, model, "odin", T, eps)
        score = lambda x: odin_score(model, x, T, d_eps)
        populations = (id_pts, ood_pts)
    elif method == "maha":
        id_pts, d_eps = _resolve(id_view, model, "maha", None, eps)
        ood_pts, _ = _resolve(ood_view, model, "maha", None, eps)
        state = fit_mahalanobis(model, train, d_eps)
        score = lambda x: maha_score(state, model, x)
        populations = (id_pts, ood_pts)
    elif method == "pod":
        bank = _exemplar_bank(train, M)
        score = lambda x: pod_score(bank, model, x, scheme)
        populations = (id_view.view(), ood_view.view())
    elif method == "podft":
        bank = _exemplar_bank(train, M)
        cfg = FinetuneConfig() if cfg is None else cfg
        tuned, head = train_pairwise(
            model, PairwiseHead(np.ones(model.embed_dim)), train, cfg,
            Prng(seed),
        )
        score = lambda x: podft_score(bank, tuned, head, x)
        populations = (id_view.view(), ood_view.view())
    elif method == "mindist":
        refs = np.array([model.embed(z) for z in train.points])
        score = lambda x: -float(
            np.linalg.norm(refs - model.embed(x), axis=1).min()
        )
        populations = (id_view.view(), ood_view.view())
    else:
        raise ValueError(f"unknown method {method!r}")
    id_pts, ood_pts = populations
    return (np.array([score(x) for x in id_pts]),
            np.array([score(x) for x in ood_pts]))


def run_cell(model, train, id_view, ood_view, method, **params):
    """Evaluate one detector cell to an EvalResult (AUROC, FNR@TNR95)."""
    id_scores, ood_scores = cell_scores(
        model, train, id_view, ood_view, method, **params
    )
    pops = ScoredPopulations(id_scores, ood_scores)
    return EvalResult(auroc(pops), fnr_at_tnr95(pops))


@dataclass(frozen=True)
class SweepOutcome:
    """Best grid point by AUROC (FNR@TNR95, then smallest params on ties)."""

    method: str
    chosen: dict
    result: EvalResult
    cells: tuple  # ((params dict, EvalResult), ...) in grid order


def run_sweep(model, train, id_view, ood_view, method, grid=DEFAULT_GRID,
              scheme=FIXED_SCHEME, M=FIXED_M, seed=0):
    """Oracle parameter search over the grid (OOD labels are consulted!).

    odin sweeps (T, eps); maha sweeps eps. Ties resolve to the better
    FNR@TNR95, then to the lexicographically smallest parameter tuple
    (guaranteed by ascending iteration + strict improvement).
    """
    if method == "odin":
        points = [{"T": t, "eps": e}
                  for t in grid.temperatures for e in grid.epsilons]
    elif method == "maha":
        points = [{"eps": e} for e in grid.epsilons]
    else:
        raise ValueError(f"method {method!r} has no sweepable parameters")
    cells = []
    best = None
    for params in points:
        result = run_cell(model, train, id_view, ood_view, method,
                          scheme=scheme, M=M, seed=seed, **params)
        cells.append((params, result))
        if best is None or (result.auroc, -result.fnr95) > (
            best[1].auroc, -best[1].fnr95
        ):
            best = (params, result)
    return SweepOutcome(method, best[0], best[1], tuple(cells))


def _toy_model_and_stats(bundle):
    model = train_linear_softmax(bundle.id_train)
    hits = [
        predict_class("msp", model, x) == y
        for x, y in zip(bundle.id_test.points, bundle.id_test.labels)
    ]
    return model, float(np.mean(hits))


def _cell_auroc(model, train, bundle, method, **params):
    r = run_cell(model, train, bundle.id_test.points, bundle.ood_test,
                 method, **params)
    return r.auroc


def run_toy_suite(seeds=DEFAULT_SEEDS):
    """Replicate the built-in 2-D sanity numbers on both toy datasets.

    toy1: MSP vs the nearest-train-point baseline (a far OOD cluster that a
    two-cluster linear fit maps to confident ID predictions). toy2: MSP vs
    pairwise-distance scoring with every-train-point exemplar banks under
    three (class, exemplar) accumulator pairings.
    """
    seeds = list(seeds)
    out = {
        "seeds": seeds,
        "toy1": {"accuracy": [], "msp_auroc": [], "mindist_auroc": []},
        "toy2": {"accuracy": [], "msp_auroc": [],
                 "pod_auroc": {"min,min": [], "min,average": [],
                               "average,average": []}},
    }
    for seed in seeds:
        bundle = generate_toy_dataset1(Prng(seed))
        model, acc = _toy_model_and_stats(bundle)
        out["toy1"]["accuracy"].append(acc)
        out["toy1"]["msp_auroc"].append(
            _cell_auroc(model, bundle.id_train, bundle, "msp"))
        out["toy1"]["mindist_auroc"].append(
            _cell_auroc(model, bundle.id_train, bundle, "mindist"))

        bundle = generate_toy_dataset2(Prng(seed))
        model, acc = _toy_model_and_stats(bundle)
        out["toy2"]["accuracy"].append(acc)
        out["toy2"]["msp_auroc"].append(
            _cell_auroc(model, bundle.id_train, bundle, "msp"))
        for key in out["toy2"]["pod_auroc"]:
            g_cls, g_ex = key.split(",")
            out["toy2"]["pod_auroc"][key].append(_cell_auroc(
                model, bundle.id_train, bundle, "pod",
                scheme=Scheme(g_cls, g_ex), M=None,
            ))

    def with_means(section):
        means = {}
        for name, values in section.items():
            if isinstance(values, dict):
                means[name] = {k: float(np.mean(v)) for k, v in values.items()}
            else:
                means[name] = float(np.mean(values))
        section["mean"] = means

    with_means(out["toy1"])
    with_means(out["toy2"])
    return out


def build_report(cells, methods=None):
    """Assemble a Report from {((id, ood), method, regime): EvalResult}.

    Produces the detailed per-cell table plus one win matrix per regime
    (each regime's grid must be complete or IncompleteGrid is raised).
    """
    regimes = sorted({regime for _, _, regime in cells})
    if not regimes:
        raise ValueError("no cells to report")
    rows = []
    matrices = {}
    for regime in regimes:
        sub = {
            (pair, method): result
            for (pair, method, reg), result in cells.items()
            if reg == regime
        }
        matrices[regime] = compare(sub, methods=methods)
        for (pair, method), result in sorted(sub.items()):
            rows.append({
                "id": pair[0], "ood": pair[1], "method": method,
                "T": None, "eps": None, "scheme": None, "M": None,
                "regime": regime, "seed": None,
                "auroc": result.auroc, "fnr95": result.fnr95,
            })
    return Report(rows, matrices)
