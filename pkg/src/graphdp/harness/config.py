from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

DEFAULT_EPSILONS = (0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 4.5, 6.5, 9.0, 12.0, 16.0, 20.0)
DEFAULT_ATTACK_EPSILONS = (1.0, 3.0, 9.0)

DESCRIPTIVE = (
    "degree", "clustering", "betweenness", "closeness",
    "density", "harmonic_diameter", "assortativity", "modularity", "ari",
)
SCENARIO_1_METRICS = DESCRIPTIVE + ("influence_spread", "pagerank_ndcg", "link_prediction", "node_classification")
SCENARIO_2_METRICS = (
    "num_nodes", "num_edges", "density", "harmonic_diameter", "assortativity", "modularity",
    "degree", "clustering", "betweenness", "closeness",
)
PRESETS = {
    "descriptive": (DESCRIPTIVE, ()),
    "scenario1": (SCENARIO_1_METRICS, ("membership_inference", "reconstruction")),
    "scenario2": (SCENARIO_2_METRICS, ("deanonymization",)),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: dict
    mechanism: dict
    epsilons: list = field(default_factory=lambda: list(DEFAULT_EPSILONS))
    trials: int = 10
    base_seed: int = 0
    metrics: list = field(default_factory=lambda: list(DESCRIPTIVE))
    attacks: list = field(default_factory=list)
    attack_epsilons: list = field(default_factory=lambda: list(DEFAULT_ATTACK_EPSILONS))
    output_dir: str = "results"
    delta: float = 0.0
    centrality_mode: str = "exact"
    centrality_rel_error: float = 0.01
    cascade: dict = field(default_factory=dict)
    gcn: dict = field(default_factory=dict)
    attack_pairs: int = 1000
    workers: int = 1
    name: Optional[str] = None

    def __post_init__(self):
        self.epsilons = [float(e) for e in self.epsilons]
        self.attack_epsilons = [float(e) for e in self.attack_epsilons]
        if not self.epsilons or any(e <= 0 for e in self.epsilons):
            raise ConfigError("epsilons must be positive")
        if any(b <= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ConfigError("epsilons must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.attacks:
            missing = [e for e in self.attack_epsilons if e not in self.epsilons]
            if missing:
                raise ConfigError(f"attack epsilons {missing} are not in the epsilon schedule")
        if "id" not in self.mechanism:
            raise ConfigError("mechanism needs an 'id'")
        if not ("path" in self.dataset or "synthetic" in self.dataset):
            raise ConfigError("dataset needs either 'path' or 'synthetic'")
        if self.centrality_mode not in ("exact", "sampled"):
            raise ConfigError("centrality_mode must be 'exact' or 'sampled'")

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        if "name" in self.dataset:
            return str(self.dataset["name"])
        if "path" in self.dataset:
            return Path(self.dataset["path"]).stem
        return "synthetic-" + str(self.dataset["synthetic"].get("generator", "graph"))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        preset = d.pop("preset", None)
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
            metrics, attacks = PRESETS[preset]
            d.setdefault("metrics", list(metrics))
            d.setdefault("attacks", list(attacks))
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError(f"{path}: expected a JSON object")
        base = Path(path).parent
        ds = d.get("dataset", {})
        for key in ("path", "features", "labels"):
            if key in ds and not Path(ds[key]).is_absolute():
                ds[key] = str(base / ds[key])
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(d)

    def to_dict(self) -> dict:
        return asdict(self)
