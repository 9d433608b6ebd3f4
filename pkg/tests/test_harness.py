import csv
import dataclasses
import hashlib
import io
import json

import numpy as np
import pytest

from flapfin import harness
from flapfin import optimizer as opt
from flapfin.errors import ConfigError, MissingSnapshot, SchemaMismatch
from flapfin.plant import INTACT, FinSpec, apply_damage


def small_config(name="r", cap=6, noise=0.01, seed=1, **kw):
    cfg = harness.default_config(name, seed=seed)
    plant = dataclasses.replace(cfg.plant, noise=dataclasses.replace(cfg.plant.noise, force_noise_std=noise))
    return dataclasses.replace(cfg, plant=plant,
                               optimizer=dataclasses.replace(cfg.optimizer, max_generations=cap), **kw)


def dir_digest(path):
    h = hashlib.sha256()
    for p in sorted(path.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(path)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


@pytest.fixture(scope="module")
def parent(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    res = harness.run(small_config("parent", cap=8), root)
    return root, res


class TestConfig:
    def test_roundtrip(self):
        cfg = small_config()
        again = harness.RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg and again.hash == cfg.hash

    def test_unknown_key(self):
        with pytest.raises(ConfigError):
            harness.RunConfig.from_dict({"nmae": "x"})

    @pytest.mark.parametrize("patch", [
        {"evaluation": {"n_runs": 2}},
        {"evaluation": {"n_cycles": 3}},
        {"optimizer": {"initialization": "sideways"}},
        {"optimizer": {"max_generations": 0}},
        {"objective": {"mode": "lift"}},
        {"objective": {"f_target": -1}},
        {"plant": {"fin": {"span": -1}}},
        {"version": "2.0"},
        {"name": "a/b"},
    ])
    def test_invalid(self, patch):
        with pytest.raises(ConfigError):
            harness.RunConfig.from_dict(patch)

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            harness.RunConfig.load(tmp_path / "nope.json")

    def test_custom_initialization(self):
        from flapfin.reference import SIDE_FORCE_INITIALIZATION
        cfg = harness.RunConfig.from_dict({"optimizer": {"initialization": SIDE_FORCE_INITIALIZATION.to_dict()}})
        assert cfg.optimizer.initial_params() == SIDE_FORCE_INITIALIZATION


class TestRun:
    def test_cap(self, parent):
        root, res = parent
        assert res.termination == "cap"
        assert res.log.generations() == list(range(8))
        assert harness.RunStore(root, "parent").status()["termination"] == "cap"

    def test_log_complete(self, parent):
        root, res = parent
        for rec in res.log.records:
            assert [c.index for c in rec.candidates] == list(range(10))
            assert all(c.fitness is not None for c in rec.candidates)
        assert harness.RunStore(root, "parent").snapshot_generations() == list(range(8))

    def test_deterministic_logs(self, parent, tmp_path):
        root, _ = parent
        harness.run(small_config("parent", cap=8), tmp_path)
        a = (root / "parent" / "log.jsonl").read_bytes()
        b = (tmp_path / "parent" / "log.jsonl").read_bytes()
        assert a == b

    def test_rerun_is_noop(self, parent):
        root, res = parent
        before = dir_digest(root / "parent")
        again = harness.run(small_config("parent", cap=8), root)
        assert again.termination == "cap" and dir_digest(root / "parent") == before

    def test_changed_config_refused(self, parent):
        root, _ = parent
        with pytest.raises(ConfigError):
            harness.run(small_config("parent", cap=9), root)

    def test_crash_resume(self, parent, tmp_path, monkeypatch):
        root, _ = parent
        real = harness.evaluate_candidate

        def crash(config, generation, cand):
            if generation == 5 and cand.index == 3:
                raise KeyboardInterrupt
            return real(config, generation, cand)

        monkeypatch.setattr(harness, "evaluate_candidate", crash)
        with pytest.raises(KeyboardInterrupt):
            harness.run(small_config("parent", cap=8), tmp_path)
        assert harness.RunStore(tmp_path, "parent").status() is None
        monkeypatch.setattr(harness, "evaluate_candidate", real)
        harness.run(small_config("parent", cap=8), tmp_path)
        assert (tmp_path / "parent" / "log.jsonl").read_bytes() == (root / "parent" / "log.jsonl").read_bytes()

    def test_resume_truncates_log(self, parent, tmp_path):
        root, _ = parent
        harness.run(small_config("parent", cap=8), tmp_path)
        run_dir = tmp_path / "parent"
        for name in ("status.json", "optimum.json"):
            (run_dir / name).unlink()
        for g in (5, 6, 7):
            (run_dir / "snapshots" / f"gen_{g:05d}.json").unlink()
        # a crash mid-write leaves a torn final line
        with (run_dir / "log.jsonl").open("a") as fh:
            fh.write('{"schema": "flapfin.generation", "version": "1.0", "record": {"generation": 8')
        harness.run(small_config("parent", cap=8), tmp_path)
        assert (run_dir / "log.jsonl").read_bytes() == (root / "parent" / "log.jsonl").read_bytes()

    def test_worker_pool_matches_serial(self, parent, tmp_path):
        root, res = parent
        pooled = harness.run(small_config("parent", cap=8, workers=2), tmp_path)
        assert [r.to_dict() for r in pooled.log.records] == [r.to_dict() for r in res.log.records]

    def test_optimum_is_final_best(self, parent):
        root, res = parent
        best = opt.select_optimum(res.log.final)
        o = harness.load_optimum(root, "parent")
        assert o.generation == 7 and o.candidate == best.index
        assert o.fitness.f == best.fitness.f
        row = harness.export(root, "parent", "optimum")[0]
        assert row["stroke_angle"] == best.params.stroke_angle

    def test_noiseless_easy_target_converges(self, tmp_path):
        res = harness.run(small_config("easy", cap=300, noise=0.0), tmp_path)
        assert res.termination == "converged"
        assert opt.converged(res.state).all
        assert abs(harness.load_optimum(tmp_path, "easy").fitness.closeness_term) < 0.02


class TestBranch:
    def test_missing_snapshot(self, parent):
        root, _ = parent
        with pytest.raises(MissingSnapshot):
            harness.branch(root, "parent", 50, INTACT, 1)

    def test_lineage_isolation_and_first_generation(self, parent):
        root, res = parent
        before = dir_digest(root / "parent")
        damage = apply_damage(FinSpec(), 0.442)
        branches = harness.branch(root, "parent", 4, damage, 3, seeds=[11, 12, 13], max_generations=8)
        assert dir_digest(root / "parent") == before
        assert len(branches) == 3
        firsts = []
        for b in branches:
            cfg = harness.RunStore(root, b.run_id).load_config()
            assert cfg.lineage == harness.Lineage("parent", 4)
            assert cfg.plant.damage == damage
            assert b.log.generations() == [5, 6, 7]
            history = harness.load_history(root, b.run_id)
            assert [r.generation for r in history] == list(range(8))
            assert [r.to_dict() for r in history[:5]] == [r.to_dict() for r in res.log.records[:5]]
            firsts.append([c.raw.tolist() for c in b.log.records[0].candidates])
        # sampling comes from the snapshot, evaluation noise from the branch seed
        assert firsts[0] == firsts[1] == firsts[2]
        f = [[c.f for c in b.log.records[0].candidates] for b in branches]
        assert f[0] != f[1]

    def test_intact_same_seed_continues_parent(self, parent):
        root, res = parent
        seed = harness.RunStore(root, "parent").load_config().plant.noise.rng_seed
        (b,) = harness.branch(root, "parent", 3, INTACT, 1, seeds=[seed], names=["twin"])
        assert [r.to_dict() for r in b.log.records] == [r.to_dict() for r in res.log.records[4:]]

    def test_sampling_seeds_restart_stream(self, parent):
        root, _ = parent
        bs = harness.branch(root, "parent", 4, INTACT, 2, seeds=[31, 31], names=["s1", "s2"],
                            max_generations=6, sampling_seeds=[1, 2])
        a, b = ([c.raw.tolist() for c in r.log.records[0].candidates] for r in bs)
        assert a != b
        assert harness.RunStore(root, "s1").load_config().lineage.sampling_seed == 1

    def test_seed_count_checked(self, parent):
        root, _ = parent
        with pytest.raises(ConfigError):
            harness.branch(root, "parent", 3, INTACT, 2, seeds=[1])


class TestReport:
    def test_empty(self, parent, tmp_path):
        root, _ = parent
        with pytest.raises(ConfigError):
            harness.report(root, [], tmp_path)

    def test_bundle(self, parent, tmp_path):
        root, _ = parent
        damage = apply_damage(FinSpec(), 0.442)
        harness.branch(root, "parent", 5, damage, 2, seeds=[21, 22], names=["rb1", "rb2"], max_generations=7)
        summary = harness.report(root, ["parent", "rb1", "rb2"], tmp_path)
        for name in ("optima.csv", "fourier.csv", "radii.csv", "scree.csv", "classification.csv",
                     "parent_path_median.csv", "rb1_path_candidates.csv"):
            assert name in summary["files"]
        rows = list(csv.DictReader(open(tmp_path / "classification.csv", newline="")))
        assert [r["run"] for r in rows] == ["rb1", "rb2"]
        assert all(r["parent"] == "parent" for r in rows)
        assert all(r["amplitude_change"] in ("Increase", "Decrease", "NoChange") for r in rows)
        optima = list(csv.DictReader(open(tmp_path / "optima.csv", newline="")))
        assert len(optima) == 3
        median = list(csv.DictReader(open(tmp_path / "rb1_path_median.csv", newline="")))
        assert [int(r["generation"]) for r in median] == list(range(7))

    def test_crlf_and_quoting(self):
        text = harness.csv_text([{"a": 'x,"y"', "b": 1}, {"a": "z", "b": 2}])
        assert text == 'a,b\r\n"x,""y""",1\r\nz,2\r\n'
        assert list(csv.reader(io.StringIO(text))) == [["a", "b"], ['x,"y"', "1"], ["z", "2"]]

    def test_schema_mismatch(self, parent, tmp_path):
        root, _ = parent
        harness.run(small_config("old", cap=2), tmp_path)
        log = tmp_path / "old" / "log.jsonl"
        log.write_text(log.read_text().replace('"version":"1.0"', '"version":"2.0"'))
        with pytest.raises(SchemaMismatch):
            harness.report(tmp_path, ["old"], tmp_path / "out")

    def test_side_force_fourier_in_resultant_frame(self, tmp_path):
        cfg = harness.default_config("side", mode="side_force")
        cfg = dataclasses.replace(cfg, optimizer=dataclasses.replace(cfg.optimizer, max_generations=2))
        harness.run(cfg, tmp_path)
        rows = harness.export(tmp_path, "side", "fourier")
        assert {r["signal"] for r in rows} == {"Fx*", "Fy*", "aoa"}
        o = harness.load_optimum(tmp_path, "side")
        rotated = harness.analysis_record(o, harness.Mode.SIDE_FORCE)
        assert abs(rotated.mean_force[1]) < 1e-12

    @pytest.mark.parametrize("what", harness.EXPORTS)
    def test_exports(self, parent, what):
        root, _ = parent
        if what == "classification":
            harness.branch(root, "parent", 6, apply_damage(FinSpec()), 1, seeds=[5], names=["cls"], max_generations=8)
            rows = harness.export(root, "cls", what)
        else:
            rows = harness.export(root, "parent", what)
        assert rows and harness.csv_text(rows).endswith("\r\n")

    def test_unknown_export(self, parent):
        root, _ = parent
        with pytest.raises(ConfigError):
            harness.export(root, "parent", "everything")

    def test_sensitivity_from_final_covariance(self, parent):
        root, res = parent
        rows = harness.export(root, "parent", "sensitivity")
        assert len(rows) == 9
        assert abs(sum(r["scree_fraction"] for r in rows) - 1) < 1e-12
        assert np.all(np.array([r["normalized_radius"] for r in rows]) <= 1 + 1e-12)
