"""Run manifests: the index of every artifact a run produced, with seeds and config."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

SCHEMA_ID = "certopt.manifest/1"
MANIFEST_NAME = "manifest.json"

_PATH = {"type": "string", "minLength": 1}
_PATH_MAP = {"type": "object", "additionalProperties": _PATH}

MANIFEST_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": SCHEMA_ID,
    "title": "certopt run manifest",
    "type": "object",
    "required": ["schema", "run_id", "problem", "tool_version", "created", "seeds",
                 "config", "artifacts", "stages"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "run_id": {"type": "string", "pattern": "^[0-9a-f]{12}$"},
        "problem": {"type": "string", "minLength": 1},
        "tool_version": {"type": "string"},
        "created": {"type": "string"},
        "seeds": {"type": "object", "additionalProperties": {"type": "integer"}},
        "config": {"type": "object"},
        "stages": {"type": "array", "items": {"type": "string"}},
        "artifacts": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dataset": _PATH,
                "correlation": _PATH,
                "models": _PATH_MAP,
                "metrics": _PATH_MAP,
                "parity": _PATH_MAP,
                "leaderboards": _PATH_MAP,
                "history": _PATH,
                "archive": _PATH,
                "rigorous_history": _PATH,
                "rigorous_archive": _PATH,
                "report": _PATH,
                "fronts": _PATH,
            },
        },
    },
}


class ManifestError(ValueError):
    pass


def run_id_for(problem: str, seeds: dict, config: dict) -> str:
    blob = json.dumps([problem, seeds, config], sort_keys=True)
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


@dataclass
class RunManifest:
    """Artifacts are stored as paths relative to the run directory."""

    root: Path
    problem: str
    seeds: dict[str, int] = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)
    stages: list[str] = field(default_factory=list)
    tool_version: str = ""
    created: str = ""

    @property
    def path(self) -> Path:
        return self.root / MANIFEST_NAME

    @property
    def run_id(self) -> str:
        return run_id_for(self.problem, self.seeds, self.config)

    def resolve(self, rel: str) -> Path:
        return self.root / rel

    def record(self, kind: str, rel: str, name: str | None = None) -> Path:
        """Register an artifact (``name`` keys the per-output maps) and return its path."""
        if name is None:
            self.artifacts[kind] = rel
        else:
            self.artifacts.setdefault(kind, {})[name] = rel
        return self.resolve(rel)

    def mark(self, stage: str) -> None:
        if stage not in self.stages:
            self.stages.append(stage)

    def referenced(self) -> list[str]:
        out = []
        for value in self.artifacts.values():
            out.extend(value.values() if isinstance(value, dict) else [value])
        return out

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_ID,
            "run_id": self.run_id,
            "problem": self.problem,
            "tool_version": self.tool_version,
            "created": self.created,
            "seeds": dict(self.seeds),
            "config": self.config,
            "artifacts": self.artifacts,
            "stages": list(self.stages),
        }

    def save(self) -> Path:
        """Validate and write; every referenced file must already exist."""
        missing = [rel for rel in self.referenced() if not self.resolve(rel).is_file()]
        if missing:
            raise ManifestError(f"manifest references missing files: {missing}")
        if not self.created:
            self.created = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        doc = self.to_dict()
        validate(doc)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return self.path

    @classmethod
    def from_dict(cls, doc: dict, root: str | Path) -> RunManifest:
        validate(doc)
        m = cls(Path(root), doc["problem"], dict(doc["seeds"]), doc["config"],
                doc["artifacts"], list(doc["stages"]), doc["tool_version"], doc["created"])
        if m.run_id != doc["run_id"]:
            raise ManifestError(f"run_id {doc['run_id']} does not match seeds and config "
                                f"(expected {m.run_id})")
        return m

    @classmethod
    def load(cls, root: str | Path) -> RunManifest:
        root = Path(root)
        if root.is_file():
            root, path = root.parent, root
        else:
            path = root / MANIFEST_NAME
        return cls.from_dict(json.loads(path.read_text()), root)


def validate(doc: dict) -> None:
    try:
        jsonschema.validate(doc, MANIFEST_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ManifestError(f"manifest invalid at {where}: {exc.message}") from None
