"""
Key-value run configuration files.

The format is the dotenv KEY=VALUE syntax; sections are dotted key prefixes:

    example=light-cone
    samples=25
    tolerance.lemma-3.3=1e-8
    ambient.kind=constant
    ambient.matrix=-1,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1
    immersion.kind=linear
    immersion.matrix=1,0,0;1,0,0;0,1,0;0,0,1
    immersion.box.low=-1,-1,-1
    immersion.box.high=1,1,1

Matrices are rows separated by ';', warped-product blocks are matrices
separated by '|'.
"""

import logging
import os
from typing import Dict, List, Optional, Tuple

import numpy as np
from dotenv import dotenv_values

from core import tensors
from core.ambient import AmbientManifold, ConstantMetric, Warp, WarpedProductMetric
from core.catalog import CatalogEntry, linear_map, get_entry
from core.submanifold import Immersion
from utils.config import RunConfig
from utils.errors import ConfigurationError

logger = logging.getLogger("NullRig")

RUN_KEYS = {
    "example": str,
    "suite": str,
    "samples": int,
    "seed": int,
    "sign_convention": int,
    "rigging": str,
    "report_path": str,
    "format": str,
    "workers": int,
    "timestamp": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}
AMBIENT_KEYS = ("kind", "matrix", "blocks", "warps", "index", "name")
IMMERSION_KEYS = ("kind", "matrix", "offset", "entry", "box.low", "box.high", "name")


def parse_vector(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise ConfigurationError(f"Malformed vector '{text}': {e}")


def parse_matrix(text: str) -> np.ndarray:
    rows = [parse_vector(row) for row in text.split(";") if row.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigurationError(f"Malformed matrix '{text}'")
    return np.array(rows)


def format_matrix(matrix) -> str:
    return ";".join(",".join(repr(float(x)) for x in row) for row in np.atleast_2d(matrix))


def _section(values: Dict[str, str], prefix: str, known) -> Dict[str, str]:
    out = {}
    for key, value in values.items():
        if key.startswith(prefix + "."):
            name = key[len(prefix) + 1:]
            if name not in known:
                raise ConfigurationError(f"Unknown configuration key '{key}'")
            out[name] = value
    return out


def _index(text: str) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise ConfigurationError(f"Bad value for 'ambient.index': {e}")


def build_ambient(section: Dict[str, str], fallback: Optional[AmbientManifold] = None) -> AmbientManifold:
    """AmbientManifold from the `ambient.*` keys (constant or warped family)."""
    if not section:
        if fallback is None:
            raise ConfigurationError("No ambient.* keys and no catalog immersion to take the ambient from")
        return fallback
    kind = section.get("kind", "constant")
    name = section.get("name", "ambient")
    if kind == "constant":
        if "matrix" not in section:
            raise ConfigurationError("ambient.kind=constant needs ambient.matrix")
        metric = ConstantMetric(parse_matrix(section["matrix"]))
        index = _index(section["index"]) if "index" in section else tensors.signature(metric.matrix)[0]
    elif kind == "warped":
        if "blocks" not in section or "index" not in section:
            raise ConfigurationError("ambient.kind=warped needs ambient.blocks and ambient.index")
        blocks = [parse_matrix(b) for b in section["blocks"].split("|")]
        warps = [Warp.parse(w) for w in section["warps"].split(",")] if "warps" in section else None
        metric = WarpedProductMetric(blocks, warps)
        index = _index(section["index"])
    else:
        raise ConfigurationError(f"Unknown ambient family '{kind}' (choose constant or warped)")
    return AmbientManifold(dim=metric.dim, index=index, metric_fn=metric, name=name)


def build_immersion(section: Dict[str, str]) -> Tuple[Immersion, Optional[CatalogEntry]]:
    """Immersion from the `immersion.*` keys, plus the catalog entry it refers to, if any."""
    kind = section.get("kind")
    box = None
    if "box.low" in section or "box.high" in section:
        if "box.low" not in section or "box.high" not in section:
            raise ConfigurationError("immersion.box.low and immersion.box.high go together")
        box = (parse_vector(section["box.low"]), parse_vector(section["box.high"]))
    if kind == "linear":
        if "matrix" not in section or box is None:
            raise ConfigurationError("immersion.kind=linear needs immersion.matrix and a box")
        matrix = parse_matrix(section["matrix"])
        offset = parse_vector(section["offset"]) if "offset" in section else None
        if matrix.shape[1] != len(box[0]):
            raise ConfigurationError("immersion box dimension does not match the matrix")
        name = section.get("name", "linear")
        return Immersion(matrix.shape[1], linear_map(matrix, offset), box=box, name=name), None
    if kind == "catalog":
        if "entry" not in section:
            raise ConfigurationError("immersion.kind=catalog needs immersion.entry")
        entry = get_entry(section["entry"])
        base = entry.immersion
        immersion = Immersion(base.sub_dim, base.map_fn, domain=base.domain, box=box or base.box, name=base.name)
        return immersion, entry
    raise ConfigurationError(f"Unknown immersion family '{kind}' (choose linear or catalog)")


def load_config_file(path: str) -> Tuple[Dict[str, object], Optional[CatalogEntry]]:
    """
    Read a run configuration file

    Args:
        path: file in dotenv KEY=VALUE format

    Returns:
        (typed RunConfig values, user-defined example or None)
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f"Config file not found: {path}")
    raw = {k: v for k, v in dotenv_values(path).items() if v is not None}
    run: Dict[str, object] = {}
    tolerance: Dict[str, float] = {}
    for key, value in raw.items():
        if key in RUN_KEYS:
            try:
                run[key] = RUN_KEYS[key](value)
            except ValueError as e:
                raise ConfigurationError(f"Bad value for '{key}': {e}")
        elif key.startswith("tolerance."):
            try:
                tolerance[key[len("tolerance."):]] = float(value)
            except ValueError as e:
                raise ConfigurationError(f"Bad tolerance '{key}': {e}")
        elif not key.startswith(("ambient.", "immersion.")):
            raise ConfigurationError(f"Unknown configuration key '{key}'")
    if tolerance:
        run["tolerance"] = tolerance

    immersion_keys = _section(raw, "immersion", IMMERSION_KEYS)
    ambient_keys = _section(raw, "ambient", AMBIENT_KEYS)
    entry = None
    if immersion_keys:
        immersion, referenced = build_immersion(immersion_keys)
        ambient = build_ambient(ambient_keys, referenced.ambient if referenced else None)
        entry = custom_entry(str(run.get("example", "custom")), ambient, immersion)
        run["example"] = entry.id
    elif ambient_keys:
        raise ConfigurationError("ambient.* keys need an immersion.* section")
    logger.debug(f"Loaded {len(raw)} keys from {path}")
    return run, entry


def custom_entry(entry_id: str, ambient: AmbientManifold, immersion: Immersion) -> CatalogEntry:
    """A user geometry: automatic frames and rigging, no expected values."""
    if ambient.dim <= immersion.sub_dim:
        raise ConfigurationError("Ambient dimension must exceed the submanifold dimension")
    entry = CatalogEntry(
        id=entry_id,
        description="user-defined geometry",
        ambient=ambient,
        immersion=immersion,
        classification="unknown",
        immersion_spec={"kind": "custom"},
    )
    entry.classification = entry.computed_classification()
    return entry


def merge_run_config(file_values: Dict[str, object], flag_values: Dict[str, object]) -> RunConfig:
    """Flags win over file values; tolerance maps merge key by key."""
    merged = dict(file_values)
    for key, value in flag_values.items():
        if value is None:
            continue
        if key == "tolerance":
            merged["tolerance"] = {**merged.get("tolerance", {}), **value}
        else:
            merged[key] = value
    return RunConfig.from_mapping(merged)


def export_entry(entry: CatalogEntry) -> str:
    """Serialise a catalog entry in the config-file format."""
    m, f = entry.ambient, entry.immersion
    lines = [f"# {entry.id}: {entry.description} ({entry.classification})", f"example={entry.id}"]
    metric = m.metric_fn.describe()
    lines.append(f"ambient.kind={metric['kind']}")
    if metric["kind"] == "constant":
        lines.append(f"ambient.matrix={format_matrix(metric['matrix'])}")
    else:
        lines.append(f"ambient.blocks={'|'.join(format_matrix(b) for b in metric['blocks'])}")
        lines.append(f"ambient.warps={','.join(metric['warps'])}")
    lines.append(f"ambient.index={m.index}")
    lines.append(f"ambient.name={m.name}")
    spec = entry.immersion_spec
    if spec.get("kind") == "linear":
        lines.append("immersion.kind=linear")
        lines.append(f"immersion.matrix={format_matrix(spec['matrix'])}")
        lines.append(f"immersion.offset={','.join(repr(float(x)) for x in spec['offset'])}")
    else:
        lines.append("immersion.kind=catalog")
        lines.append(f"immersion.entry={spec.get('entry', entry.id)}")
    if f.box is not None:
        lines.append(f"immersion.box.low={','.join(repr(float(x)) for x in f.box[0])}")
        lines.append(f"immersion.box.high={','.join(repr(float(x)) for x in f.box[1])}")
    lines.append(f"immersion.name={f.name}")
    return "\n".join(lines) + "\n"
