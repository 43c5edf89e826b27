from __future__ import annotations

from dataclasses import dataclass, field

ERROR_KINDS = ("raw", "absolute", "relative", "wasserstein")


@dataclass(frozen=True)
class MetricValue:
    value: float
    error_kind: str

    def __post_init__(self):
        if self.error_kind not in ERROR_KINDS:
            raise ValueError(f"unknown error kind {self.error_kind!r}")
        if self.error_kind != "raw" and self.value < 0:
            raise ValueError(f"{self.error_kind} errors are non-negative")


@dataclass
class MetricReport:
    entries: dict[str, MetricValue] = field(default_factory=dict)
    skipped: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, value: float, error_kind: str) -> None:
        self.entries[name] = MetricValue(float(value), error_kind)

    def skip(self, name: str, reason: str) -> None:
        self.skipped[name] = reason

    def rows(self):
        for name, mv in self.entries.items():
            yield name, mv.value, mv.error_kind
