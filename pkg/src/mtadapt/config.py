"""Pipeline configuration: a single YAML file with a documented schema.

Relative paths resolve against the config file's directory. Unknown keys
are rejected so typos fail loudly. Every command-line flag overrides the
config key of the same name; the external provider address can also come
from the MTADAPT_PROVIDER environment variable.
"""

import os
from dataclasses import dataclass, field

import yaml

from .errors import ConfigError
from .sets import ApproachSpec, OccurrenceSchedule, parse_approach
from .wordselect import SelectionCriteria, load_exclusion_list

PROVIDER_ENV = "MTADAPT_PROVIDER"

DEFAULT_APPROACHES = ("finetune", "randompad(2)", "randompad(20)",
                      "augmented(20)", "half(20)")


@dataclass
class CorpusPaths:
    source: str
    target: str
    synthetic_source: str | None = None
    synthetic_target: str | None = None
    test_source: str | None = None
    test_target: str | None = None
    lowercase: bool = False


@dataclass
class ProviderConfig:
    kind: str = "builtin"
    address: str | None = None
    dim: int = 256
    window: int = 5

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ConfigError("provider.kind must be builtin or external")
        if self.kind == "external" and not self.address:
            raise ConfigError("external provider needs an address "
                              f"(config, --provider-address, or ${PROVIDER_ENV})")


@dataclass
class AlignerConfig:
    iterations: int = 5
    tension: float | None = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("aligner.iterations must be >= 1")
        if self.tension is not None and self.tension <= 0:
            raise ConfigError("aligner.tension must be positive when set")


@dataclass
class PipelineConfig:
    corpus: CorpusPaths
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1
    selection: SelectionCriteria = field(default_factory=SelectionCriteria)
    exclusion_path: str | None = None
    references_per_word: int = 20
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    search_k: int | None = None
    min_similarity: float = -1.0
    aligner: AlignerConfig = field(default_factory=AlignerConfig)
    per_reference_target: int = 19
    approaches: tuple = ()
    schedule: OccurrenceSchedule = field(default_factory=OccurrenceSchedule)
    accuracy_mode: str = "micro"
    base_dir: str = "."

    def resolve(self, path: str | None) -> str | None:
        if path is None:
            return None
        return os.path.normpath(os.path.join(self.base_dir, path))

    def out_path(self, *parts) -> str:
        return os.path.join(self.resolve(self.output_dir), *parts)

    def seed_manifest(self) -> dict:
        return {"seed": self.seed,
                "references_per_word": self.references_per_word,
                "per_reference_target": self.per_reference_target}


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _take(mapping: dict, keys: dict, where: str) -> dict:
    """Pull typed values out of a config section, rejecting unknown keys."""
    unknown = set(mapping) - set(keys)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    out = {}
    for key, kind in keys.items():
        if key not in mapping or mapping[key] is None:
            continue
        value = mapping[key]
        if kind is float and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if kind is not None and not isinstance(value, kind):
            want = kind[0].__name__ if isinstance(kind, tuple) else kind.__name__
            raise ConfigError(f"{where}: {key} must be {want}, "
                              f"got {type(value).__name__}")
        out[key] = value
    return out


def config_from_mapping(data: dict, base_dir: str = ".") -> PipelineConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    known = {"corpus", "output_dir", "seed", "workers", "selection",
             "references_per_word", "provider", "search", "aligner",
             "augment", "approaches", "schedule", "accuracy_mode"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"config: unknown key(s) {sorted(unknown)}")

    corpus_raw = _require(data, "corpus", "config")
    corpus_kwargs = _take(corpus_raw, {
        "source": str, "target": str, "synthetic_source": str,
        "synthetic_target": str, "test_source": str, "test_target": str,
        "lowercase": bool}, "corpus")
    if "source" not in corpus_kwargs or "target" not in corpus_kwargs:
        raise ConfigError("corpus: source and target paths are required")
    corpus = CorpusPaths(**corpus_kwargs)

    selection_raw = data.get("selection", {}) or {}
    selection_kwargs = _take(selection_raw, {
        "min_test_count": int, "min_train_count": int, "max_words": int,
        "per_sentence": bool, "exclusion_list": str}, "selection")
    exclusion_path = selection_kwargs.pop("exclusion_list", None)
    if exclusion_path is not None:
        resolved = os.path.normpath(os.path.join(base_dir, exclusion_path))
        selection_kwargs["exclusion_list"] = load_exclusion_list(resolved)
    selection = SelectionCriteria(**selection_kwargs)

    provider_raw = data.get("provider", {}) or {}
    provider_kwargs = _take(provider_raw, {
        "kind": str, "address": str, "dim": int, "window": int}, "provider")
    env_address = os.environ.get(PROVIDER_ENV)
    if env_address and "address" not in provider_kwargs:
        provider_kwargs["address"] = env_address
        # like --provider-address: an address alone selects the external
        # provider, unless the config pinned the kind explicitly
        provider_kwargs.setdefault("kind", "external")
    provider = ProviderConfig(**provider_kwargs)

    search_raw = data.get("search", {}) or {}
    search_kwargs = _take(search_raw, {"k": int, "min_similarity": float},
                          "search")

    aligner_raw = data.get("aligner", {}) or {}
    aligner_kwargs = _take(aligner_raw, {"iterations": int, "tension": float},
                           "aligner")
    aligner = AlignerConfig(**aligner_kwargs)

    augment_raw = data.get("augment", {}) or {}
    augment_kwargs = _take(augment_raw, {"per_reference_target": int},
                           "augment")

    approaches_raw = data.get("approaches", list(DEFAULT_APPROACHES))
    if not isinstance(approaches_raw, list) or not approaches_raw:
        raise ConfigError("approaches must be a non-empty list")
    approaches = tuple(parse_approach(str(a)) for a in approaches_raw)

    schedule_raw = data.get("schedule")
    if schedule_raw is None:
        schedule = OccurrenceSchedule()
    else:
        if not isinstance(schedule_raw, list):
            raise ConfigError("schedule must be a list of integers")
        schedule = OccurrenceSchedule(tuple(schedule_raw))

    top_kwargs = _take({k: v for k, v in data.items()
                        if k in ("output_dir", "seed", "workers",
                                 "references_per_word", "accuracy_mode")},
                       {"output_dir": str, "seed": int, "workers": int,
                        "references_per_word": int, "accuracy_mode": str},
                       "config")
    mode = top_kwargs.get("accuracy_mode", "micro")
    if mode not in ("micro", "macro"):
        raise ConfigError("accuracy_mode must be micro or macro")
    if top_kwargs.get("references_per_word", 1) < 1:
        raise ConfigError("references_per_word must be >= 1")
    if top_kwargs.get("workers", 1) < 1:
        raise ConfigError("workers must be >= 1")
    if augment_kwargs.get("per_reference_target", 1) < 1:
        raise ConfigError("augment.per_reference_target must be >= 1")
    if search_kwargs.get("k", 1) < 1:
        raise ConfigError("search.k must be >= 1")

    return PipelineConfig(
        corpus=corpus,
        selection=selection,
        exclusion_path=exclusion_path,
        provider=provider,
        search_k=search_kwargs.get("k"),
        min_similarity=search_kwargs.get("min_similarity", -1.0),
        aligner=aligner,
        per_reference_target=augment_kwargs.get("per_reference_target", 19),
        approaches=approaches,
        schedule=schedule,
        accuracy_mode=mode,
        base_dir=base_dir,
        **{k: v for k, v in top_kwargs.items() if k != "accuracy_mode"},
    )


def load_config(path: str) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if data is None:
        raise ConfigError(f"config file {path} is empty")
    return config_from_mapping(data, base_dir=os.path.dirname(os.path.abspath(path)))


def check_input_paths(config: PipelineConfig, *attrs: str) -> dict:
    """Verify the named corpus paths exist; returns {attr: resolved path}."""
    resolved = {}
    for attr in attrs:
        raw = getattr(config.corpus, attr)
        if raw is None:
            raise ConfigError(f"corpus.{attr} is required for this command")
        path = config.resolve(raw)
        if not os.path.exists(path):
            raise ConfigError(f"corpus.{attr}: no such file: {path}")
        resolved[attr] = path
    return resolved
