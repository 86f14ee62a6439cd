"""Versioned JSON model files.

Floats are written with Python's shortest round-trip ``repr``, so loading and
re-saving a file reproduces it byte for byte.  An ``xbnet`` artifact stores
layer weights only; trees exist during training and are never written.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import gbdt, network
from .errors import DataError, FormatVersionError

FORMAT_VERSION = 1
KINDS = ("xbnet", "gbt")


@dataclass
class ModelArtifact:
    kind: str
    model: object
    preprocessing: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    train_time: dict | None = None

    def to_dict(self) -> dict:
        if self.kind == "xbnet":
            payload = {"layers": self.model.to_dict()}
        elif self.kind == "gbt":
            payload = {"trees": self.model.to_dict()}
        else:
            raise DataError(f"unknown model kind {self.kind!r}")
        d = {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            **payload,
            "preprocessing": self.preprocessing,
            "config": self.config,
            "metrics": self.metrics,
        }
        if self.train_time is not None:
            d["train_time"] = self.train_time
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelArtifact":
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise FormatVersionError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
        kind = d.get("kind")
        try:
            if kind == "xbnet":
                if "trees" in d:
                    raise DataError("xbnet artifact must not carry a tree payload")
                model = network.XbnetModel.from_dict(d["layers"])
            elif kind == "gbt":
                model = gbdt.GbtModel.from_dict(d["trees"])
            else:
                raise DataError(f"unknown model kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed {kind} artifact: {exc}") from exc
        return cls(kind, model, d.get("preprocessing", {}), d.get("config", {}),
                   d.get("metrics", {}), d.get("train_time"))


def dumps(artifact: ModelArtifact) -> str:
    return json.dumps(artifact.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"


def save(artifact: ModelArtifact, path) -> None:
    Path(path).write_text(dumps(artifact))


def load(path) -> ModelArtifact:
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise DataError(f"model file not found: {path}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"model file {path} is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise DataError(f"model file {path} does not hold a JSON object")
    return ModelArtifact.from_dict(d)
