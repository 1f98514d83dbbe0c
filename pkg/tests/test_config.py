import pytest
import yaml

from mtadapt.config import (DEFAULT_APPROACHES, PROVIDER_ENV, AlignerConfig,
                            ProviderConfig, check_input_paths,
                            config_from_mapping, load_config)
from mtadapt.errors import ConfigError
from mtadapt.sets import ApproachSpec

MINIMAL = {"corpus": {"source": "train.fr", "target": "train.en"}}


def write_config(tmp_path, data, name="config.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def test_minimal_config_defaults():
    config = config_from_mapping(dict(MINIMAL))
    assert config.corpus.source == "train.fr"
    assert config.output_dir == "out"
    assert config.seed == 0
    assert config.provider.kind == "builtin"
    assert config.provider.dim == 256
    assert config.aligner.iterations == 5
    assert config.aligner.tension is None
    assert config.per_reference_target == 19
    assert config.references_per_word == 20
    assert config.accuracy_mode == "micro"
    assert config.schedule.steps == (1, 2, 3, 5, 10, 15, 20)
    assert [a.label for a in config.approaches] == [
        "finetune(1)", "randompad(2)", "randompad(20)", "augmented(20)",
        "half(20)"]
    assert tuple(DEFAULT_APPROACHES)[0] == "finetune"


def test_full_config_round_trip(tmp_path):
    (tmp_path / "skip.txt").write_text("the\nof\n", encoding="utf-8")
    data = {
        "corpus": {"source": "a.fr", "target": "a.en",
                   "test_source": "t.fr", "test_target": "t.en",
                   "lowercase": True},
        "output_dir": "results",
        "seed": 11,
        "workers": 4,
        "selection": {"min_test_count": 6, "min_train_count": 25,
                      "max_words": 50, "exclusion_list": "skip.txt"},
        "references_per_word": 10,
        "provider": {"kind": "builtin", "dim": 128, "window": 3},
        "search": {"k": 80, "min_similarity": 0.2},
        "aligner": {"iterations": 7, "tension": 4},
        "augment": {"per_reference_target": 9},
        "approaches": ["finetune", "half(20)"],
        "schedule": [1, 5, 20],
        "accuracy_mode": "macro",
    }
    config = config_from_mapping(data, base_dir=str(tmp_path))
    assert config.selection.exclusion_list == frozenset({"the", "of"})
    assert config.selection.max_words == 50
    assert config.corpus.lowercase is True
    assert config.search_k == 80
    assert config.min_similarity == 0.2
    # ints coerce to float where a float is typed
    assert config.aligner.tension == 4.0
    assert config.schedule.steps == (1, 5, 20)
    assert config.approaches == (ApproachSpec.finetune(), ApproachSpec.half(20))
    assert config.accuracy_mode == "macro"
    assert config.workers == 4


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key"):
        config_from_mapping({**MINIMAL, "colour": 1})
    with pytest.raises(ConfigError, match="corpus.*unknown"):
        config_from_mapping({"corpus": {"source": "a", "target": "b",
                                        "sourcee": "oops"}})
    with pytest.raises(ConfigError, match="selection.*unknown"):
        config_from_mapping({**MINIMAL, "selection": {"min_words": 3}})


def test_type_errors_are_loud():
    with pytest.raises(ConfigError, match="seed must be int"):
        config_from_mapping({**MINIMAL, "seed": "zero"})
    with pytest.raises(ConfigError, match="lowercase must be bool"):
        config_from_mapping({"corpus": {"source": "a", "target": "b",
                                        "lowercase": "yes"}})


def test_corpus_paths_required():
    with pytest.raises(ConfigError, match="missing required key 'corpus'"):
        config_from_mapping({})
    with pytest.raises(ConfigError, match="source and target"):
        config_from_mapping({"corpus": {"source": "a"}})


def test_value_range_checks():
    with pytest.raises(ConfigError, match="references_per_word"):
        config_from_mapping({**MINIMAL, "references_per_word": 0})
    with pytest.raises(ConfigError, match="workers"):
        config_from_mapping({**MINIMAL, "workers": 0})
    with pytest.raises(ConfigError, match="per_reference_target"):
        config_from_mapping({**MINIMAL, "augment": {"per_reference_target": 0}})
    with pytest.raises(ConfigError, match="search.k"):
        config_from_mapping({**MINIMAL, "search": {"k": 0}})
    with pytest.raises(ConfigError, match="accuracy_mode"):
        config_from_mapping({**MINIMAL, "accuracy_mode": "mean"})
    with pytest.raises(ConfigError, match="approaches"):
        config_from_mapping({**MINIMAL, "approaches": []})
    with pytest.raises(ConfigError, match="schedule"):
        config_from_mapping({**MINIMAL, "schedule": "1,2,3"})


def test_provider_config_validation():
    with pytest.raises(ConfigError, match="builtin or external"):
        ProviderConfig(kind="remote")
    with pytest.raises(ConfigError, match="address"):
        ProviderConfig(kind="external")
    assert ProviderConfig(kind="external", address="h:1").address == "h:1"


def test_provider_address_from_environment(monkeypatch):
    monkeypatch.setenv(PROVIDER_ENV, "envhost:9")
    config = config_from_mapping({**MINIMAL, "provider": {"kind": "external"}})
    assert config.provider.address == "envhost:9"
    # an explicit config address wins over the environment
    config = config_from_mapping(
        {**MINIMAL, "provider": {"kind": "external", "address": "cfg:7"}})
    assert config.provider.address == "cfg:7"


def test_provider_environment_alone_selects_external(monkeypatch):
    monkeypatch.setenv(PROVIDER_ENV, "envhost:9")
    config = config_from_mapping(MINIMAL)
    assert config.provider.kind == "external"
    assert config.provider.address == "envhost:9"
    # a config that pinned the builtin provider is not overridden
    config = config_from_mapping({**MINIMAL, "provider": {"kind": "builtin"}})
    assert config.provider.kind == "builtin"


def test_aligner_config_validation():
    with pytest.raises(ConfigError):
        AlignerConfig(iterations=0)
    with pytest.raises(ConfigError):
        AlignerConfig(tension=-1.0)
    assert AlignerConfig(tension=4.0).tension == 4.0


def test_load_config_resolves_relative_paths(tmp_path):
    subdir = tmp_path / "cfg"
    subdir.mkdir()
    path = write_config(subdir, {
        "corpus": {"source": "data/train.fr", "target": "data/train.en"}})
    config = load_config(str(path))
    assert config.base_dir == str(subdir)
    assert config.resolve("data/train.fr") == str(subdir / "data" / "train.fr")
    assert config.out_path("tables") == str(subdir / "out" / "tables")
    assert config.resolve(None) is None


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.yaml"))
    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(ConfigError, match="empty"):
        load_config(str(empty))
    bad = tmp_path / "bad.yaml"
    bad.write_text("corpus: [unclosed", encoding="utf-8")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(str(bad))
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("just a string\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(str(scalar))


def test_check_input_paths(tmp_path):
    (tmp_path / "train.fr").write_text("un\n", encoding="utf-8")
    config = config_from_mapping(dict(MINIMAL), base_dir=str(tmp_path))
    with pytest.raises(ConfigError, match="no such file"):
        check_input_paths(config, "source", "target")
    resolved = check_input_paths(config, "source")
    assert resolved == {"source": str(tmp_path / "train.fr")}
    with pytest.raises(ConfigError, match="test_source is required"):
        check_input_paths(config, "test_source")


def test_seed_manifest_reflects_settings():
    config = config_from_mapping({**MINIMAL, "seed": 3})
    assert config.seed_manifest() == {
        "seed": 3, "references_per_word": 20, "per_reference_target": 19}
