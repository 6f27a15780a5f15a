"""
Tests for narrated_vmr.config: profiles, merging, validation and fingerprints.
"""
import json
import tempfile
from pathlib import Path
from unittest import TestCase
from unittest.mock import patch

import ddt

from narrated_vmr.config.loader import (
    discover_profiles,
    get_profile_directories,
    is_safe_profile_path,
    load_profile,
    load_run_config,
    merge_config_with_patch,
    validate_run_config,
)
from narrated_vmr.config.types import DatasetConfig, RunConfig
from narrated_vmr.exceptions import ValidationError
from narrated_vmr.settings import settings

DIMS = {"video_dim": 32, "narrative_dim": 16, "word_dim": 16}


def _write(directory, name, data):
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(data if isinstance(data, str) else json.dumps(data), encoding="utf-8")
    return path


@ddt.ddt
class TestProfileDirectories(TestCase):
    """Tests for get_profile_directories and is_safe_profile_path."""

    def test_missing_directory_is_skipped_with_warning(self):
        with patch.object(settings, "PROFILE_DIRS", ["/nonexistent/profiles"]):
            with self.assertLogs("narrated_vmr.config.loader", level="WARNING") as cm:
                self.assertEqual(get_profile_directories(), [])
        self.assertTrue(any("does not exist" in msg for msg in cm.output))

    def test_custom_directories(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            with patch.object(settings, "PROFILE_DIRS", [tmpdir]):
                self.assertEqual(get_profile_directories(), [Path(tmpdir).resolve()])

    def test_safe_paths(self):
        self.assertTrue(is_safe_profile_path("base/default.json"))
        self.assertTrue(is_safe_profile_path("experimental/synthetic.json"))

    @ddt.data("", "../secrets.json", "base/../../x.json", "/etc/passwd", "base/missing.json")
    def test_unsafe_or_missing_paths(self, profile_path):
        self.assertFalse(is_safe_profile_path(profile_path))

    def test_discover_builtin_profiles(self):
        profiles = discover_profiles()
        self.assertIn("base/default.json", profiles)
        self.assertIn("experimental/synthetic.json", profiles)
        self.assertIn("experimental/ablation_no_paragraph_branch.json", profiles)
        self.assertEqual(profiles, sorted(profiles))


class TestLoadProfile(TestCase):
    """Tests for load_profile and merge_config_with_patch."""

    def test_profile_chain_is_merged(self):
        profile = load_profile("experimental/ablation_merge_add.json")
        self.assertEqual(profile["encoder"]["merge_mode"], "add")
        self.assertEqual(profile["encoder"]["d"], 32)
        self.assertEqual(profile["encoder"]["layer_norm"], True)
        self.assertEqual(profile["dataset"]["max_snippets"], 16)
        self.assertNotIn("base_profile", profile)

    def test_unsafe_profile_is_rejected(self):
        with self.assertRaises(ValidationError):
            load_profile("../../etc/passwd")

    def test_cyclic_profiles_stop(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            _write(tmpdir, "a.json", {"base_profile": "b.json"})
            _write(tmpdir, "b.json", {"base_profile": "a.json"})
            with patch.object(settings, "PROFILE_DIRS", [tmpdir]):
                with self.assertRaises(ValidationError) as cm:
                    load_profile("a.json")
        self.assertIn("deeper than", str(cm.exception))

    def test_merge_is_recursive(self):
        merged = merge_config_with_patch({"a": {"x": 1, "y": 2}, "b": 1}, {"a": {"y": 3}})
        self.assertEqual(merged, {"a": {"x": 1, "y": 3}, "b": 1})

    def test_merge_without_patch_copies(self):
        base = {"a": 1}
        merged = merge_config_with_patch(base, None)
        self.assertEqual(merged, base)
        self.assertIsNot(merged, base)


class TestLoadRunConfig(TestCase):
    """Tests for load_run_config: precedence, path resolution and validation errors."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()  # pylint: disable=consider-using-with
        self.tmpdir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def _config_file(self, **data):
        return _write(self.tmpdir, "run.json5", json.dumps({"base_profile": "experimental/synthetic.json", **data}))

    def test_default_profile_alone(self):
        config = load_run_config()
        self.assertEqual(config.encoder.d, 128)
        self.assertEqual(config.fusion.alpha, 0.5)
        self.assertIsNone(config.dataset.train)
        self.assertTrue(Path(config.output_dir).is_absolute())

    def test_relative_paths_resolve_against_the_config_file(self):
        config = load_run_config(self._config_file(dataset={"train": "data/train.jsonl"}, output_dir="out"))
        self.assertEqual(config.dataset.train, str((self.tmpdir / "data" / "train.jsonl").resolve()))
        self.assertEqual(config.output_dir, str((self.tmpdir / "out").resolve()))

    def test_profile_paths_resolve_against_the_cwd(self):
        config = load_run_config(self._config_file())
        self.assertEqual(config.narrator["fixture_path"], str((Path.cwd() / "synthetic" / "narratives.json").resolve()))

    def test_json5_comments_and_trailing_commas(self):
        path = _write(self.tmpdir, "run.json5", """
        // desk run
        {
          base_profile: "experimental/synthetic.json",
          seed: 7,
        }
        """)
        self.assertEqual(load_run_config(path).seed, 7)

    def test_overrides_win(self):
        config = load_run_config(self._config_file(seed=3), overrides={"seed": 5, "fusion": {"alpha": 0.0}})
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.train.seed, 5)
        self.assertEqual(config.fusion.alpha, 0.0)
        self.assertEqual(config.fusion.paragraph_branch, True)

    def test_invalid_json5(self):
        with self.assertRaises(ValidationError) as cm:
            load_run_config(_write(self.tmpdir, "bad.json5", "{seed: }"))
        self.assertIn("invalid JSON5", str(cm.exception))

    def test_schema_errors_name_the_field(self):
        with self.assertRaises(ValidationError) as cm:
            load_run_config(self._config_file(seed="zero", encoder={"merge_mode": "gated"}))
        message = str(cm.exception)
        self.assertIn("seed", message)
        self.assertIn("encoder.merge_mode", message)

    def test_semantic_errors_are_collected(self):
        with self.assertRaises(ValidationError) as cm:
            load_run_config(self._config_file(
                encoder={"d": 30, "heads": 4},
                narrator={"mode": "remote", "model": "gpt-4o"},
            ))
        self.assertEqual(len(cm.exception.messages), 2)
        self.assertIn("divisible", cm.exception.messages[0])
        self.assertIn("provider/model_name", cm.exception.messages[1])

    def test_remote_model_needs_provider(self):
        ok, errors = validate_run_config(merge_config_with_patch(
            load_profile("base/default.json"), {"narrator": {"model": "gpt-4o"}}
        ))
        self.assertFalse(ok)
        self.assertIn("provider/model_name", errors[0])

    def test_fixture_mode_needs_fixture_path(self):
        ok, errors = validate_run_config(merge_config_with_patch(
            load_profile("base/default.json"), {"narrator": {"mode": "fixture"}}
        ))
        self.assertFalse(ok)
        self.assertIn("fixture_path", errors[0])

    def test_eval_splits_may_name_train(self):
        config = load_run_config(self._config_file(eval_splits=["train"]))
        self.assertEqual(config.eval_splits, ("train",))

    def test_eval_splits_without_manifest_still_load(self):
        config = load_run_config(self._config_file(eval_splits=["cd-test-ood"]))
        self.assertEqual(config.eval_splits, ("cd-test-ood",))
        self.assertNotIn("cd-test-ood", config.dataset.manifests())


class TestRunConfig(TestCase):
    """Tests for the typed RunConfig view and its fingerprints."""

    def _config(self, **patch_data):
        return RunConfig.from_dict(merge_config_with_patch(load_profile("experimental/synthetic.json"), patch_data))

    def test_alpha_only_changes_the_run_fingerprint(self):
        half, zero = self._config(), self._config(fusion={"alpha": 0.0})
        self.assertEqual(half.model_fingerprint(DIMS), zero.model_fingerprint(DIMS))
        self.assertNotEqual(half.run_fingerprint(DIMS), zero.run_fingerprint(DIMS))

    def test_seed_only_changes_the_run_fingerprint(self):
        one, two = self._config(seed=1), self._config(seed=2)
        self.assertEqual(one.model_fingerprint(DIMS), two.model_fingerprint(DIMS))
        self.assertNotEqual(one.run_fingerprint(DIMS), two.run_fingerprint(DIMS))

    def test_architecture_changes_the_model_fingerprint(self):
        base = self._config()
        self.assertNotEqual(base.model_fingerprint(DIMS), self._config(encoder={"d": 64}).model_fingerprint(DIMS))
        self.assertNotEqual(base.model_fingerprint(DIMS), base.model_fingerprint({**DIMS, "video_dim": 8}))
        self.assertNotEqual(
            base.model_fingerprint(DIMS),
            self._config(fusion={"paragraph_branch": False}).model_fingerprint(DIMS),
        )

    def test_fingerprint_is_stable(self):
        self.assertEqual(self._config().run_fingerprint(DIMS), self._config().run_fingerprint(DIMS))

    def test_require_paths(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            existing = _write(tmpdir, "train.jsonl", "")
            config = self._config(dataset={"train": str(existing), "embeddings": str(Path(tmpdir) / "none.txt")})
            config.require_paths("dataset.train")
            with self.assertRaises(ValidationError) as cm:
                config.require_paths("dataset.train", "dataset.embeddings", "dataset.val")
        self.assertEqual(len(cm.exception.messages), 2)
        self.assertIn("does not exist", cm.exception.messages[0])
        self.assertIn("required", cm.exception.messages[1])

    def test_dataset_manifests(self):
        dataset = DatasetConfig(train="t.jsonl", splits={"cd-test-ood": "ood.jsonl"})
        self.assertEqual(dataset.manifests(), {"cd-test-ood": "ood.jsonl", "train": "t.jsonl"})

    def test_typed_sections_reject_bad_values(self):
        with self.assertRaises(ValidationError):
            self._config(encoder={"d": 30, "heads": 4})
