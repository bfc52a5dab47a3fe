"""
Experiment config files and truth tables.

Config format: one `key = value` per line, `#` starts a comment. Values are
JSON literals (numbers, true/false, quoted strings, arrays); anything that is
not valid JSON is taken as a bare string. Dotted keys build nested sections,
e.g. `generate.width = 4`. A file starting with '{' is read as JSON.

Truth table format: one `<bits> <bit>` pair per line.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import ValidationError

from app.errors import ConfigurationError
from app.models.experiment_config import ExperimentConfig
from app.utils.bits import Bits, parse_bits


def _value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config_text(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """Nested data plus the line number of every top-level key."""
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text), {}
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"Invalid JSON: {exc.msg}", exc.lineno) from exc

    data: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"Expected 'key = value', got {stripped!r}", number)
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key:
            raise ConfigurationError("Empty key", number)
        *sections, leaf = key.split(".")
        target = data
        for section in sections:
            target = target.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigurationError(f"Key {key!r} nests under a non-section value", number)
        if leaf in target:
            raise ConfigurationError(f"Duplicate key {key!r}", number)
        target[leaf] = _value(value)
        lines.setdefault(sections[0] if sections else leaf, number)
    return data, lines


def _resolve_paths(data: Dict[str, Any], base: Path) -> None:
    def resolve(path: str) -> str:
        candidate = Path(path)
        return str(candidate if candidate.is_absolute() else base / candidate)

    if isinstance(data.get("instances"), list):
        data["instances"] = [resolve(p) for p in data["instances"]]
    for key in ("truth", "output_dir"):
        if isinstance(data.get(key), str):
            data[key] = resolve(data[key])


def build_config(data: Dict[str, Any], lines: Dict[str, int] | None = None) -> ExperimentConfig:
    lines = lines or {}
    for key in data:
        if key not in ExperimentConfig.model_fields:
            raise ConfigurationError(f"Unknown key {key!r}", lines.get(key))
    try:
        return ExperimentConfig(**data)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        top = str(error["loc"][0]) if error["loc"] else None
        raise ConfigurationError(f"{location}: {error['msg']}", lines.get(top)) from exc


def load_config(path: Union[str, Path], master_seed: Optional[int] = None) -> ExperimentConfig:
    """Parse a config file; relative file references resolve against its directory.

    `master_seed` fills in the seed when the file does not set one.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"Cannot read config {path}: {exc.strerror}") from exc
    data, lines = parse_config_text(text)
    _resolve_paths(data, path.parent)
    if master_seed is not None:
        data.setdefault("master_seed", master_seed)
    return build_config(data, lines)


def _flatten(key: str, value: Any, out: List[str]) -> None:
    if isinstance(value, dict) and value:
        for name, item in value.items():
            _flatten(f"{key}.{name}", item, out)
    else:
        out.append(f"{key} = {json.dumps(value)}")


def dump_config(config: ExperimentConfig) -> str:
    """Canonical key = value text; load(dump(c)) == c."""
    lines: List[str] = []
    for key, value in config.model_dump(mode="json", exclude_none=True).items():
        _flatten(key, value, lines)
    return "\n".join(lines) + "\n"


def parse_truth_table(text: str) -> Dict[Bits, int]:
    table: Dict[Bits, int] = {}
    width = None
    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        if len(tokens) != 2 or tokens[1] not in ("0", "1"):
            raise ConfigurationError("Expected '<bits> <0|1>'", number)
        try:
            x = parse_bits(tokens[0])
        except Exception as exc:
            raise ConfigurationError(str(exc), number) from exc
        if width is not None and len(x) != width:
            raise ConfigurationError(f"Input of width {len(x)} after width {width}", number)
        width = len(x)
        table[x] = int(tokens[1])
    return table


def load_truth_table(path: Union[str, Path]) -> Dict[Bits, int]:
    try:
        return parse_truth_table(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"Cannot read truth table {path}: {exc.strerror}") from exc
