"""Active multi-view reconstruction loop and policy comparison.

Each object starts from a few dataset views. Every iteration a subset of
unconverged objects is re-observed: the current reconstruction is carved from
the object's silhouettes, the reconstruction error against ground truth is
scored over the viewpoint lattice, and new views are chosen by the configured
policy (error-guided selection, uniform random, or fixed lattice sweep),
optionally mixing in viewpoints pooled from previously processed objects of
the same category. New silhouettes are appended and all objects are
re-evaluated. Reports are deterministic functions of (corpus, config): the
same seed reproduces the same report bytes.

Randomness is drawn from numpy's PCG64 generator. Streams are derived with
``numpy.random.SeedSequence`` from (master seed, purpose tag, object index),
so each object consumes an independent stream and processing order cannot
leak randomness across objects.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .carve import ViewObservation, carve
from .geometry import Viewpoint, discretize_viewpoints
from .grid import DEFAULT_THRESHOLD, VoxelGrid, error_grid, f_score, iou, threshold_grid
from .pool import DEFAULT_POOL_CAPACITY, EmptyCategoryError, ViewpointPool, record, sample_by_category
from .selection import select_and_sample
from .synthesis import (
    SHAPE_KINDS,
    GroundTruthSilhouettes,
    ShapeSpec,
    ViewDistribution,
    ViewProvider,
    generate_shape,
    sample_dataset_viewpoints,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "POLICIES",
    "POOL_MODES",
    "SceneObject",
    "LoopConfig",
    "RunReport",
    "make_corpus",
    "run_object_iteration",
    "run_loop",
    "compare_policies",
    "report_json",
    "comparison_json",
    "config_to_dict",
    "config_from_dict",
]

REPORT_SCHEMA_VERSION = "v1"

POLICIES = ("error-guided", "random", "fixed-lattice")
POOL_MODES = ("pool-only", "fresh-only", "mixed")

# Purpose tags for deriving independent RNG streams from the master seed.
_TAG_SHAPE = 1
_TAG_INIT = 2
_TAG_SELECT = 3
_TAG_SUBSET = 4


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, *key))))


@dataclass(frozen=True)
class SceneObject:
    """One reconstruction target: a named, categorized ground-truth grid."""

    name: str
    category: str
    gt: VoxelGrid

    def __post_init__(self) -> None:
        if not self.name or not self.category:
            raise ValueError("scene objects need non-empty name and category")
        if not self.gt.is_cubic:
            raise ValueError(f"ground truth must be cubic, got dims {self.gt.dims}")


@dataclass(frozen=True)
class LoopConfig:
    """Knobs of the reconstruction loop.

    Defaults: 30-degree lattice, 3 views per round from 3 aligned initial
    views, 5% of objects refreshed per iteration, threshold 0.4.
    """

    dim: int = 32
    interval_deg: int = 30
    views_per_round: int = 3
    initial_views: int = 3
    initial_distribution: ViewDistribution = field(default_factory=lambda: ViewDistribution("aligned"))
    iterations: int = 3
    update_fraction: float = 0.05
    tau: float = DEFAULT_THRESHOLD
    selection_policy: str = "error-guided"
    pool_mode: str = "mixed"
    pool_capacity: int = DEFAULT_POOL_CAPACITY
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.views_per_round < 1:
            raise ValueError(f"views_per_round must be positive, got {self.views_per_round}")
        if not (1 <= self.initial_views <= self.initial_distribution.views_per_object):
            raise ValueError(
                f"initial_views must lie in [1, {self.initial_distribution.views_per_object}], "
                f"got {self.initial_views}"
            )
        if self.iterations < 0:
            raise ValueError(f"iterations must be nonnegative, got {self.iterations}")
        if not (0.0 < self.update_fraction <= 1.0):
            raise ValueError(f"update_fraction must lie in (0, 1], got {self.update_fraction}")
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if self.selection_policy not in POLICIES:
            raise ValueError(f"unknown selection policy {self.selection_policy!r}, expected one of {POLICIES}")
        if self.pool_mode not in POOL_MODES:
            raise ValueError(f"unknown pool mode {self.pool_mode!r}, expected one of {POOL_MODES}")
        discretize_viewpoints(self.interval_deg)  # validates the interval


def config_to_dict(config: LoopConfig) -> dict:
    return {
        "dim": config.dim,
        "interval_deg": config.interval_deg,
        "views_per_round": config.views_per_round,
        "initial_views": config.initial_views,
        "initial_distribution": {
            "kind": config.initial_distribution.kind,
            "views_per_object": config.initial_distribution.views_per_object,
        },
        "iterations": config.iterations,
        "update_fraction": config.update_fraction,
        "tau": config.tau,
        "selection_policy": config.selection_policy,
        "pool_mode": config.pool_mode,
        "pool_capacity": config.pool_capacity,
        "seed": config.seed,
    }


def config_from_dict(obj: dict) -> LoopConfig:
    """Build a config from a JSON-like dict; unknown keys are rejected."""
    known = set(config_to_dict(LoopConfig()))
    extra = set(obj) - known
    if extra:
        raise ValueError(f"unknown loop config keys: {sorted(extra)}")
    kwargs = dict(obj)
    dist = kwargs.pop("initial_distribution", None)
    if dist is not None:
        kwargs["initial_distribution"] = ViewDistribution(**dist)
    return LoopConfig(**kwargs)


def make_corpus(
    count: int,
    dim: int = 32,
    seed: int = 0,
    kinds: Sequence[str] = SHAPE_KINDS,
) -> list[SceneObject]:
    """Generate a corpus of synthetic objects, cycling through shape kinds.

    Object i is drawn from an independent stream keyed on (seed, i), so the
    corpus is reproducible and insensitive to generation order. The shape
    kind doubles as the object's category.
    """
    if count < 1:
        raise ValueError(f"corpus count must be positive, got {count}")
    for kind in kinds:
        if kind not in SHAPE_KINDS:
            raise ValueError(f"unknown shape kind {kind!r}")
    corpus = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        gt = generate_shape(ShapeSpec(kind), dim, _stream(seed, _TAG_SHAPE, i))
        corpus.append(SceneObject(name=f"{kind}-{i:03d}", category=kind, gt=gt))
    return corpus


@dataclass
class _ObjectState:
    observations: list[ViewObservation]
    initial_views: list[Viewpoint]
    rng: np.random.Generator
    converged: bool = False
    lattice_cursor: int = 0


def _random_viewpoints(n: int, rng: np.random.Generator) -> list[Viewpoint]:
    views = []
    for _ in range(n):
        yaw = rng.uniform(-180.0, 180.0)
        pitch = rng.uniform(-90.0, 90.0)
        views.append(Viewpoint(yaw=yaw, pitch=pitch))
    return views


def run_object_iteration(
    obj: SceneObject,
    state: _ObjectState,
    config: LoopConfig,
    pool: ViewpointPool,
    provider: ViewProvider,
) -> dict:
    """Select and append new views for one object; returns the update record.

    The record carries the viewpoints added, the freshly selected subset that
    should enter the pool (empty under baseline policies), and whether an
    empty pool forced a fallback to fresh selection. A converged object (zero
    reconstruction error) is left untouched.
    """
    pred = carve(state.observations, config.dim)
    err = error_grid(pred, obj.gt)
    if float(err.values.max()) == 0.0:
        state.converged = True
        return {"added": [], "pool_record": [], "pool_fallback": False, "converged": True}

    n = config.views_per_round
    fallback = False
    pool_views: list[Viewpoint] = []
    fresh: list[Viewpoint] = []

    if config.selection_policy == "error-guided":
        # The pool participates only under the error-guided policy.
        want_pool = {"pool-only": n, "fresh-only": 0, "mixed": n // 2}[config.pool_mode]
        if want_pool > 0:
            try:
                pool_views = sample_by_category(pool, obj.category, want_pool, state.rng)
            except EmptyCategoryError:
                pool_views = []
                fallback = config.pool_mode == "pool-only"
        n_fresh = n - len(pool_views)
        if n_fresh > 0:
            fresh = select_and_sample(pred, obj.gt, config.interval_deg, n_fresh, state.rng)
    elif config.selection_policy == "random":
        fresh = _random_viewpoints(n, state.rng)
    else:  # fixed-lattice
        lattice = discretize_viewpoints(config.interval_deg)
        total = len(lattice.centers)
        fresh = [lattice.centers[(state.lattice_cursor + k) % total] for k in range(n)]
        state.lattice_cursor = (state.lattice_cursor + n) % total

    added = fresh + pool_views
    for v in added:
        state.observations.append(ViewObservation(viewpoint=v, silhouette=provider.render(obj.gt, v)))
    pool_record = fresh if config.selection_policy == "error-guided" else []
    return {"added": added, "pool_record": pool_record, "pool_fallback": fallback, "converged": False}


@dataclass
class RunReport:
    """Outcome of one loop run; everything except wall_clock_s serializes."""

    schema_version: str
    config: dict
    seed: int
    objects: list[dict]
    aggregates: dict
    wall_clock_s: float = 0.0


def _evaluate(obj: SceneObject, state: _ObjectState, config: LoopConfig) -> tuple[float, float, int]:
    pred = carve(state.observations, config.dim)
    pred_occ = threshold_grid(pred, config.tau)
    gt_occ = threshold_grid(obj.gt, config.tau)
    excess = int(np.logical_and(pred_occ.bits, ~gt_occ.bits).sum())
    if float(error_grid(pred, obj.gt).values.max()) == 0.0:
        state.converged = True
    return iou(pred_occ, gt_occ), f_score(pred_occ, gt_occ), excess


def run_loop(
    corpus: Sequence[SceneObject],
    config: LoopConfig,
    pool: ViewpointPool | None = None,
    provider: ViewProvider | None = None,
) -> RunReport:
    """Run the reconstruction loop over a corpus and return its report.

    Per iteration, ``max(1, round(update_fraction * len(corpus)))`` of the
    not-yet-converged objects are re-observed (all of them if fewer remain);
    then every object is re-evaluated. Iteration 0 in the report is the
    evaluation of the initial view sets before any update. Pool writes happen
    in a serial phase after all of an iteration's updates, so objects within
    one iteration see the previous iteration's pool.
    """
    import time

    started = time.perf_counter()
    if len(corpus) == 0:
        raise ValueError("corpus must contain at least one object")
    names = [obj.name for obj in corpus]
    if len(set(names)) != len(names):
        raise ValueError("corpus object names must be unique")
    for obj in corpus:
        if obj.gt.dims != (config.dim,) * 3:
            raise ValueError(f"object {obj.name!r} dims {obj.gt.dims} do not match config dim {config.dim}")

    if pool is None:
        pool = ViewpointPool(capacity=config.pool_capacity)
    if provider is None:
        provider = GroundTruthSilhouettes(config.tau)

    dist = config.initial_distribution
    states: list[_ObjectState] = []
    object_records: list[dict] = []
    for i, obj in enumerate(corpus):
        candidates = sample_dataset_viewpoints(dist, _stream(config.seed, _TAG_INIT, i))
        stride_idx = [k * len(candidates) // config.initial_views for k in range(config.initial_views)]
        initial = [candidates[k] for k in stride_idx]
        observations = [ViewObservation(viewpoint=v, silhouette=provider.render(obj.gt, v)) for v in initial]
        states.append(
            _ObjectState(observations=observations, initial_views=initial, rng=_stream(config.seed, _TAG_SELECT, i))
        )
        object_records.append(
            {
                "name": obj.name,
                "category": obj.category,
                "initial_views": [{"yaw": v.yaw, "pitch": v.pitch} for v in initial],
                "iterations": [],
            }
        )

    def evaluate_all(iteration: int, updates: dict[int, dict]) -> None:
        for i, obj in enumerate(corpus):
            score_iou, score_f, excess = _evaluate(obj, states[i], config)
            update = updates.get(i)
            object_records[i]["iterations"].append(
                {
                    "iteration": iteration,
                    "updated": update is not None,
                    "selected": [
                        {"yaw": v.yaw, "pitch": v.pitch} for v in (update["added"] if update else [])
                    ],
                    "pool_fallback": bool(update["pool_fallback"]) if update else False,
                    "view_count": len(states[i].observations),
                    "iou": score_iou,
                    "f_score": score_f,
                    "excess_voxels": excess,
                    "converged": states[i].converged,
                    "loss": None,
                }
            )

    evaluate_all(0, {})

    n_objects = len(corpus)
    for iteration in range(1, config.iterations + 1):
        eligible = [i for i in range(n_objects) if not states[i].converged]
        updates: dict[int, dict] = {}
        if eligible:
            quota = min(max(1, round(config.update_fraction * n_objects)), len(eligible))
            subset_rng = _stream(config.seed, _TAG_SUBSET, iteration)
            picks = subset_rng.choice(len(eligible), size=quota, replace=False)
            chosen = sorted(eligible[int(p)] for p in picks)
            pending: list[tuple[str, list[Viewpoint]]] = []
            for i in chosen:
                rec = run_object_iteration(corpus[i], states[i], config, pool, provider)
                updates[i] = rec
                if rec["pool_record"]:
                    pending.append((corpus[i].category, rec["pool_record"]))
            for category, views in pending:
                record(pool, category, views)
        evaluate_all(iteration, updates)

    iterations_count = config.iterations + 1
    mean_iou = [
        float(np.mean([rec["iterations"][t]["iou"] for rec in object_records]))
        for t in range(iterations_count)
    ]
    mean_f = [
        float(np.mean([rec["iterations"][t]["f_score"] for rec in object_records]))
        for t in range(iterations_count)
    ]
    aggregates = {
        "mean_iou": mean_iou,
        "mean_f_score": mean_f,
        "converged_objects": sum(1 for s in states if s.converged),
    }
    return RunReport(
        schema_version=REPORT_SCHEMA_VERSION,
        config=config_to_dict(config),
        seed=config.seed,
        objects=object_records,
        aggregates=aggregates,
        wall_clock_s=time.perf_counter() - started,
    )


def report_json(report: RunReport) -> str:
    """Canonical JSON for a report: sorted keys, two-space indent, newline.

    Wall-clock time is deliberately excluded so identical (corpus, config)
    runs produce byte-identical files.
    """
    payload = {
        "schema_version": report.schema_version,
        "config": report.config,
        "seed": report.seed,
        "objects": report.objects,
        "aggregates": report.aggregates,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def compare_policies(corpus: Sequence[SceneObject], config_base: LoopConfig) -> dict:
    """Run every selection policy on identical footing and report deltas.

    Each policy runs the full loop with the same corpus, seed, initial views,
    and per-iteration update subsets (all derived from policy-independent
    streams); each run gets its own empty pool. Deltas compare final-iteration
    mean IoU.
    """
    runs = {}
    for policy in POLICIES:
        report = run_loop(corpus, replace(config_base, selection_policy=policy))
        runs[policy] = {
            "mean_iou": report.aggregates["mean_iou"],
            "mean_f_score": report.aggregates["mean_f_score"],
            "final_mean_iou": report.aggregates["mean_iou"][-1],
        }
    deltas = {
        "error_guided_minus_random": runs["error-guided"]["final_mean_iou"] - runs["random"]["final_mean_iou"],
        "error_guided_minus_fixed_lattice": runs["error-guided"]["final_mean_iou"]
        - runs["fixed-lattice"]["final_mean_iou"],
    }
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config_to_dict(config_base),
        "seed": config_base.seed,
        "policies": runs,
        "deltas": deltas,
    }


def comparison_json(comparison: dict) -> str:
    """Canonical JSON for a policy comparison."""
    return json.dumps(comparison, sort_keys=True, indent=2) + "\n"
