"""YAML dataset manifests and spectrum-spec config files.

A manifest looks like::

    params:
      taper: 25            # boundary ramp width (grid points)
      dims: [1024, 1024]   # padded size, null for automatic
      family: haar
      levels: null         # decomposition depth, null for log2(min dims)
      scales: [3, 4, 5, 6, 7, 8]
      smoother: box        # box | box:<half-width> | shrink | none
      nvec: [1, 2, 3]      # null for every available subspace size
      nb: 50
      seed: 0
    classes:
      - label: day01
        date: "2011-06-05"
        type: C            # C, F or FC
        members: [m01.wsg, m02.wsg]
        observation: obs.wsg

Relative paths resolve against the manifest's directory.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError, ValidationError
from .lws import Smoother
from .pipeline import PipelineParams
from .simulate import SpectrumSpec
from .verify import DEFAULT_NB

PRECIP_TYPES = ("C", "F", "FC")


@dataclass(frozen=True)
class ClassEntry:
    label: str
    date: str
    type: str
    members: tuple[Path, ...]
    observation: Path


@dataclass(frozen=True)
class DatasetManifest:
    path: Path
    classes: tuple[ClassEntry, ...]
    pipeline: PipelineParams
    nvec: tuple[int, ...] | None = None
    nb: int = DEFAULT_NB
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def n_members(self) -> int:
        return len(self.classes[0].members)


def parse_scales(value) -> tuple[int, ...] | None:
    """Accept ``[3, 4, 5]``, ``"3-8"`` or ``"3,4,5"``."""
    if value is None:
        return None
    if isinstance(value, str):
        out = []
        for part in value.split(","):
            part = part.strip()
            if "-" in part:
                a, b = part.split("-", 1)
                out.extend(range(int(a), int(b) + 1))
            elif part:
                out.append(int(part))
        return tuple(out)
    if isinstance(value, int):
        return (value,)
    return tuple(int(v) for v in value)


def parse_dims(value) -> tuple[int, int] | None:
    if value is None:
        return None
    if isinstance(value, str):
        parts = value.lower().replace("*", "x").split("x")
        if len(parts) == 1:
            parts = parts * 2
        return (int(parts[0]), int(parts[1]))
    if isinstance(value, int):
        return (value, value)
    a, b = value
    return (int(a), int(b))


def pipeline_from_dict(d: dict) -> PipelineParams:
    try:
        return PipelineParams(
            taper=int(d.get("taper", 25)),
            dims=parse_dims(d.get("dims")),
            family=str(d.get("family", "haar")),
            levels=None if d.get("levels") is None else int(d["levels"]),
            scales=parse_scales(d.get("scales")),
            smoother=Smoother.parse(str(d.get("smoother", "box"))),
            edge_factor=float(d.get("edge_factor", 0.0)),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid pipeline parameters: {exc}") from exc


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot load manifest {path}: {exc}") from exc
    if not isinstance(doc, dict) or "classes" not in doc:
        raise ValidationError(f"{path}: manifest needs a 'classes' list")
    params = doc.get("params") or {}
    base = path.parent
    entries = []
    for n, c in enumerate(doc["classes"]):
        label = str(c.get("label", f"C{n + 1}"))
        try:
            members = tuple(base / str(m) for m in c["members"])
            obs = base / str(c["observation"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"class {label!r}: missing members/observation") from exc
        ptype = str(c.get("type", ""))
        if ptype and ptype not in PRECIP_TYPES:
            raise ValidationError(f"class {label!r}: type {ptype!r} not in {PRECIP_TYPES}")
        for f in (*members, obs):
            if not f.is_file():
                raise ValidationError(f"class {label!r}: file {f} does not exist")
        entries.append(ClassEntry(label=label, date=str(c.get("date", "")), type=ptype, members=members, observation=obs))
    if len(entries) < 2:
        raise ValidationError(f"{path}: need at least 2 classes")
    n_e = len(entries[0].members)
    for e in entries[1:]:
        if len(e.members) != n_e:
            raise ValidationError(
                f"class {e.label!r} has {len(e.members)} members, expected {n_e} (from class {entries[0].label!r})"
            )
    nvec = params.get("nvec")
    return DatasetManifest(
        path=path,
        classes=tuple(entries),
        pipeline=pipeline_from_dict(params),
        nvec=parse_scales(nvec) if nvec is not None else None,
        nb=int(params.get("nb", DEFAULT_NB)),
        seed=int(params.get("seed", 0)),
    )


def dump_manifest(path, classes: list[dict], params: dict) -> None:
    Path(path).write_text(yaml.safe_dump({"params": params, "classes": classes}, sort_keys=False))


def load_spectrum_spec(path) -> SpectrumSpec:
    """YAML with ``J`` and a ``spectrum`` list of ``{scale, direction, energy | grid}``."""
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot load spectrum spec {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError(f"{path}: spectrum spec must be a mapping")
    return SpectrumSpec.from_dict(doc)
