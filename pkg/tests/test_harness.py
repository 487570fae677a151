"""Reconstruction loop driver, corpus generation, and policy comparison."""

import json

import numpy as np
import pytest

from voxsel.geometry import Viewpoint
from voxsel.grid import VoxelGrid
from voxsel.harness import (
    LoopConfig,
    POLICIES,
    REPORT_SCHEMA_VERSION,
    SceneObject,
    compare_policies,
    comparison_json,
    config_from_dict,
    config_to_dict,
    make_corpus,
    report_json,
    run_loop,
    run_object_iteration,
)
from voxsel.pool import ViewpointPool
from voxsel.synthesis import ShapeSpec, ViewDistribution, generate_shape


def small_config(**kw):
    base = dict(dim=16, iterations=2, update_fraction=1.0, seed=0)
    base.update(kw)
    return LoopConfig(**base)


def empty_object(dim=16, name="empty"):
    # All silhouettes are dark, so carving recovers the grid exactly and the
    # object is converged from the start.
    return SceneObject(name=name, category="box", gt=VoxelGrid(np.zeros((dim, dim, dim))))


class TestMakeCorpus:
    def test_cycles_kinds_and_labels_categories(self):
        corpus = make_corpus(5, dim=16, seed=0, kinds=["ell", "cross"])
        assert [o.category for o in corpus] == ["ell", "cross", "ell", "cross", "ell"]
        assert [o.name for o in corpus] == [
            "ell-000", "cross-001", "ell-002", "cross-003", "ell-004",
        ]

    def test_objects_are_independent_of_corpus_size(self):
        a = make_corpus(3, dim=16, seed=4)
        b = make_corpus(6, dim=16, seed=4)
        for x, y in zip(a, b):
            assert np.array_equal(x.gt.values, y.gt.values)

    def test_deterministic_per_seed(self):
        a = make_corpus(4, dim=16, seed=12)
        b = make_corpus(4, dim=16, seed=12)
        for x, y in zip(a, b):
            assert np.array_equal(x.gt.values, y.gt.values)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            make_corpus(0)
        with pytest.raises(ValueError):
            make_corpus(2, kinds=["pyramid"])


class TestLoopConfig:
    def test_default_configuration(self):
        cfg = LoopConfig()
        assert cfg.dim == 32
        assert cfg.interval_deg == 30
        assert cfg.views_per_round == 3
        assert cfg.initial_views == 3
        assert cfg.initial_distribution.kind == "aligned"
        assert cfg.update_fraction == 0.05
        assert cfg.tau == 0.4
        assert cfg.selection_policy == "error-guided"
        assert cfg.pool_mode == "mixed"

    @pytest.mark.parametrize(
        "kw",
        [
            {"dim": 0},
            {"views_per_round": 0},
            {"initial_views": 0},
            {"initial_views": 25},
            {"iterations": -1},
            {"update_fraction": 0.0},
            {"update_fraction": 1.5},
            {"tau": 1.2},
            {"selection_policy": "greedy"},
            {"pool_mode": "sometimes"},
            {"interval_deg": 50},
        ],
    )
    def test_invalid_values_rejected(self, kw):
        with pytest.raises(ValueError):
            LoopConfig(**kw)

    def test_dict_round_trip(self):
        cfg = LoopConfig(
            dim=16,
            iterations=4,
            update_fraction=0.25,
            selection_policy="random",
            pool_mode="fresh-only",
            initial_views=5,
            initial_distribution=ViewDistribution("spherical", 10),
            seed=99,
        )
        assert config_from_dict(config_to_dict(cfg)) == cfg

    def test_unknown_keys_rejected(self):
        payload = config_to_dict(LoopConfig())
        payload["verbosity"] = 3
        with pytest.raises(ValueError, match="verbosity"):
            config_from_dict(payload)


class TestRunLoopStructure:
    def test_iteration_zero_is_the_initial_evaluation(self):
        corpus = make_corpus(3, dim=16, seed=1)
        rep = run_loop(corpus, small_config())
        for rec in rep.objects:
            first = rec["iterations"][0]
            assert first["iteration"] == 0
            assert first["updated"] is False
            assert first["selected"] == []
            assert first["view_count"] == 3

    def test_initial_views_are_strided_over_the_aligned_ring(self):
        corpus = make_corpus(1, dim=16, seed=1)
        rep = run_loop(corpus, small_config(iterations=0))
        got = rep.objects[0]["initial_views"]
        assert got == [
            {"yaw": -180.0, "pitch": 60.0},
            {"yaw": -60.0, "pitch": 60.0},
            {"yaw": 60.0, "pitch": 60.0},
        ]

    def test_view_counts_grow_by_views_per_round_when_updated(self):
        corpus = make_corpus(2, dim=16, seed=3)
        rep = run_loop(corpus, small_config(iterations=3))
        for rec in rep.objects:
            counts = [it["view_count"] for it in rec["iterations"]]
            assert counts[0] == 3
            for prev, nxt, it in zip(counts, counts[1:], rec["iterations"][1:]):
                assert nxt >= prev
                if it["updated"]:
                    assert nxt == prev + 3
                    assert len(it["selected"]) == 3

    def test_metrics_lie_in_unit_interval(self):
        corpus = make_corpus(3, dim=16, seed=5)
        rep = run_loop(corpus, small_config())
        for rec in rep.objects:
            for it in rec["iterations"]:
                assert 0.0 <= it["iou"] <= 1.0
                assert 0.0 <= it["f_score"] <= 1.0
                assert it["excess_voxels"] >= 0

    def test_update_fraction_quota_rule(self):
        # 5% of 20 objects rounds to exactly one update per iteration.
        corpus = make_corpus(20, dim=16, seed=2)
        rep = run_loop(corpus, small_config(update_fraction=0.05, iterations=2))
        for t in (1, 2):
            updated = sum(1 for rec in rep.objects if rec["iterations"][t]["updated"])
            assert updated == 1

    def test_update_fraction_one_updates_everyone(self):
        corpus = make_corpus(4, dim=16, seed=2)
        rep = run_loop(corpus, small_config(iterations=1))
        assert all(rec["iterations"][1]["updated"] for rec in rep.objects)

    def test_converged_objects_are_skipped(self):
        rep = run_loop([empty_object()], small_config())
        rec = rep.objects[0]
        assert all(it["converged"] for it in rec["iterations"])
        assert all(not it["updated"] for it in rec["iterations"])
        assert all(it["view_count"] == 3 for it in rec["iterations"])
        assert rep.aggregates["converged_objects"] == 1

    def test_iteration_on_converged_object_adds_nothing(self):
        # A centered box is exactly the intersection of its three axis-view
        # extrusions, so these observations leave zero reconstruction error.
        from voxsel.harness import GroundTruthSilhouettes, ViewObservation, _ObjectState

        dim = 16
        vals = np.zeros((dim, dim, dim))
        vals[5:11, 5:11, 5:11] = 1.0
        obj = SceneObject(name="box", category="box", gt=VoxelGrid(vals))
        provider = GroundTruthSilhouettes(0.4)
        views = [Viewpoint(0.0, 0.0), Viewpoint(-90.0, 0.0), Viewpoint(0.0, 90.0)]
        obs = [ViewObservation(viewpoint=v, silhouette=provider.render(obj.gt, v)) for v in views]
        state = _ObjectState(observations=obs, initial_views=views, rng=np.random.default_rng(0))
        rec = run_object_iteration(obj, state, small_config(), ViewpointPool(), provider)
        assert rec == {"added": [], "pool_record": [], "pool_fallback": False, "converged": True}
        assert state.converged
        assert len(state.observations) == 3

    def test_rejects_bad_corpora(self):
        with pytest.raises(ValueError):
            run_loop([], small_config())
        with pytest.raises(ValueError):
            run_loop([empty_object(dim=8)], small_config())
        twin = make_corpus(1, dim=16, seed=0) * 2
        with pytest.raises(ValueError):
            run_loop(twin, small_config())

    def test_wall_clock_recorded_on_the_report_object(self):
        rep = run_loop(make_corpus(1, dim=16, seed=0), small_config(iterations=0))
        assert rep.wall_clock_s > 0.0


class TestLoopBehavior:
    def test_per_object_iou_never_decreases(self):
        corpus = make_corpus(6, dim=16, seed=11)
        for policy in POLICIES:
            rep = run_loop(corpus, small_config(iterations=3, selection_policy=policy))
            for rec in rep.objects:
                ious = [it["iou"] for it in rec["iterations"]]
                assert all(b >= a for a, b in zip(ious, ious[1:])), (policy, rec["name"])

    def test_sphere_iteration_regression(self):
        # One error-guided iteration on the reference sphere carves away
        # 176 excess voxels.
        gt = generate_shape(ShapeSpec("sphere", radius=10.0), 32, np.random.default_rng(1))
        obj = SceneObject(name="sphere-000", category="sphere", gt=gt)
        rep = run_loop([obj], LoopConfig(seed=7, iterations=1, update_fraction=1.0))
        first, second = rep.objects[0]["iterations"]
        assert (first["view_count"], second["view_count"]) == (3, 6)
        assert first["excess_voxels"] == 732
        assert second["excess_voxels"] == 556
        assert first["iou"] == pytest.approx(0.8523002421307506, rel=1e-12)
        assert second["iou"] == pytest.approx(0.8836820083682009, rel=1e-12)

    def test_random_policy_leaves_the_pool_empty(self):
        pool = ViewpointPool()
        run_loop(make_corpus(3, dim=16, seed=4), small_config(selection_policy="random"), pool=pool)
        assert pool.categories() == []

    def test_fixed_lattice_policy_leaves_the_pool_empty(self):
        pool = ViewpointPool()
        run_loop(
            make_corpus(3, dim=16, seed=4), small_config(selection_policy="fixed-lattice"), pool=pool
        )
        assert pool.categories() == []

    def test_error_guided_pool_holds_exactly_the_fresh_selections(self):
        pool = ViewpointPool()
        corpus = make_corpus(3, dim=16, seed=4)
        rep = run_loop(corpus, small_config(pool_mode="fresh-only"), pool=pool)
        selected = {}
        for rec in rep.objects:
            views = [
                Viewpoint(s["yaw"], s["pitch"])
                for it in rec["iterations"]
                for s in it["selected"]
            ]
            selected.setdefault(rec["category"], []).extend(views)
        for category, views in selected.items():
            assert sorted(pool.entries[category], key=lambda v: (v.yaw, v.pitch)) == sorted(
                views, key=lambda v: (v.yaw, v.pitch)
            ), category

    def test_pool_only_mode_falls_back_then_recovers(self):
        corpus = make_corpus(1, dim=16, seed=6)
        rep = run_loop(corpus, small_config(pool_mode="pool-only", iterations=2))
        its = rep.objects[0]["iterations"]
        assert its[1]["updated"]
        assert its[1]["pool_fallback"] is True
        assert len(its[1]["selected"]) == 3
        if its[2]["updated"]:
            assert its[2]["pool_fallback"] is False

    def test_fixed_lattice_walks_the_centers_round_robin(self):
        corpus = make_corpus(1, dim=16, seed=8)
        rep = run_loop(corpus, small_config(selection_policy="fixed-lattice", iterations=2))
        its = rep.objects[0]["iterations"]
        first = [(s["yaw"], s["pitch"]) for s in its[1]["selected"]]
        assert first == [(-165.0, -75.0), (-135.0, -75.0), (-105.0, -75.0)]
        if its[2]["updated"]:
            second = [(s["yaw"], s["pitch"]) for s in its[2]["selected"]]
            assert second == [(-75.0, -75.0), (-45.0, -75.0), (-15.0, -75.0)]


class TestReports:
    def test_reports_are_byte_identical_across_runs(self):
        cfg = small_config(iterations=2)
        a = report_json(run_loop(make_corpus(3, dim=16, seed=9), cfg))
        b = report_json(run_loop(make_corpus(3, dim=16, seed=9), cfg))
        assert a == b

    def test_report_json_is_canonical_and_excludes_wall_clock(self):
        rep = run_loop(make_corpus(1, dim=16, seed=0), small_config(iterations=0))
        text = report_json(rep)
        assert text.endswith("\n")
        payload = json.loads(text)
        assert payload["schema_version"] == REPORT_SCHEMA_VERSION == "v1"
        assert "wall_clock_s" not in text
        assert list(payload) == sorted(payload)
        assert payload["config"] == config_to_dict(small_config(iterations=0))

    def test_different_seeds_change_the_report(self):
        a = report_json(run_loop(make_corpus(2, dim=16, seed=0), small_config(seed=0)))
        b = report_json(run_loop(make_corpus(2, dim=16, seed=0), small_config(seed=1)))
        assert a != b


@pytest.fixture(scope="module")
def sphere_corpus():
    return [
        SceneObject(
            name=f"sphere-{i:03d}",
            category="sphere",
            gt=generate_shape(ShapeSpec("sphere"), 32, np.random.default_rng(100 + i)),
        )
        for i in range(6)
    ]


class TestComparePolicies:
    def test_zero_iterations_make_all_policies_equal(self, sphere_corpus):
        # With no updates all policies see only the shared initial views.
        cmp = compare_policies(sphere_corpus, LoopConfig(seed=5, iterations=0))
        finals = {cmp["policies"][p]["final_mean_iou"] for p in POLICIES}
        assert len(finals) == 1
        assert finals.pop() == pytest.approx(0.8387133097003111, rel=1e-12)

    def test_sphere_corpus_keeps_policies_close(self, sphere_corpus):
        # Spheres look alike from everywhere; the frozen spread is 0.0265.
        cmp = compare_policies(sphere_corpus, LoopConfig(seed=5, iterations=3, update_fraction=1.0))
        finals = [cmp["policies"][p]["final_mean_iou"] for p in POLICIES]
        assert max(finals) - min(finals) < 0.05

    def test_deltas_match_the_policy_numbers(self):
        corpus = make_corpus(3, dim=16, seed=7)
        cmp = compare_policies(corpus, small_config(iterations=1))
        eg = cmp["policies"]["error-guided"]["final_mean_iou"]
        assert cmp["deltas"]["error_guided_minus_random"] == pytest.approx(
            eg - cmp["policies"]["random"]["final_mean_iou"]
        )
        assert cmp["deltas"]["error_guided_minus_fixed_lattice"] == pytest.approx(
            eg - cmp["policies"]["fixed-lattice"]["final_mean_iou"]
        )

    def test_comparison_json_canonical(self):
        corpus = make_corpus(2, dim=16, seed=3)
        cmp = compare_policies(corpus, small_config(iterations=0))
        text = comparison_json(cmp)
        assert text.endswith("\n")
        payload = json.loads(text)
        assert payload["schema_version"] == "v1"
        assert set(payload["policies"]) == set(POLICIES)
