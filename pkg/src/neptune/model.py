"""Trained detector: per window length cut-offs and rule set, plus settings."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .quantization import PercentileTable
from .rules import RuleSet

FORMAT_VERSION = 1


class ModelMismatch(ValueError):
    """Run settings disagree with the settings a model was trained under."""


@dataclass
class DetectorModel:
    settings: dict
    entries: dict[int, tuple[PercentileTable, RuleSet]] = field(repr=False)
    percentile_source: str = "computed"

    @property
    def fps(self) -> int:
        return int(self.settings["fps"])

    def check(self, settings: dict) -> None:
        diff = {k: (self.settings.get(k), v) for k, v in settings.items()
                if k in self.settings and self.settings[k] != v}
        if diff:
            desc = ", ".join(f"{k}: model={m!r} run={r!r}" for k, (m, r) in sorted(diff.items()))
            raise ModelMismatch(f"configuration does not match model ({desc})")

    def to_json(self) -> dict:
        d = {"version": FORMAT_VERSION}
        d.update(self.settings)
        d["percentile_source"] = self.percentile_source
        d["windows"] = {str(m): {"percentile_table": t.to_json(), "ruleset": r.to_json()}
                        for m, (t, r) in sorted(self.entries.items())}
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def from_json(cls, d) -> "DetectorModel":
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model version {d.get('version')!r}")
        settings = {k: v for k, v in d.items()
                    if k not in ("version", "windows", "percentile_source")}
        entries = {}
        for key, w in d["windows"].items():
            m = int(key)
            entries[m] = (PercentileTable.from_json(w["percentile_table"]),
                          RuleSet.from_json(m, w["ruleset"]))
        return cls(settings, entries, d.get("percentile_source", "computed"))

    @classmethod
    def load(cls, path) -> "DetectorModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))
