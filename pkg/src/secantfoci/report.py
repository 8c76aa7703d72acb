"""Run-report serialization and schema validation."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import SchemaError


@lru_cache(maxsize=1)
def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def validate_report(report: dict) -> None:
    """Raise SchemaError naming the first offending location."""
    validator = jsonschema.Draft202012Validator(report_schema())
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        where = "/".join(str(x) for x in err.absolute_path) or "<root>"
        raise SchemaError(f"report invalid at {where}: {err.message}")


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=1, allow_nan=False) + "\n"


def loads_report(text: str, validate: bool = True) -> dict:
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", line=exc.lineno)
    if validate:
        validate_report(report)
    return report


def save_report(report: dict, path) -> None:
    Path(path).write_text(dumps_report(report))


def load_report(path, validate: bool = True) -> dict:
    return loads_report(Path(path).read_text(), validate=validate)
