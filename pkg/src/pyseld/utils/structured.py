"""typed conversion between dataclasses and plain structures"""
from __future__ import annotations

import dataclasses
import types
from pathlib import Path
from typing import Any, Literal, Mapping, TypeVar, Union, get_args, get_origin, get_type_hints

from pyseld.exceptions import ConfigError

T = TypeVar("T")


def to_plain(obj: Any) -> Any:
    """dataclasses, tuples and paths as YAML-safe builtins"""

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}

    if isinstance(obj, Mapping):
        return {str(key): to_plain(value) for key, value in obj.items()}

    if isinstance(obj, (list, tuple)):
        return [to_plain(value) for value in obj]

    if isinstance(obj, Path):
        return obj.as_posix()

    if hasattr(obj, "item") and getattr(obj, "ndim", None) == 0:
        return obj.item()

    return obj


def _coerce(tp: Any, value: Any, path: str) -> Any:
    """convert value to the annotated type"""

    origin, args = get_origin(tp), get_args(tp)

    if tp is Any:
        return value

    # optionals and unions
    if origin in (Union, types.UnionType):

        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"'{path}' must not be empty")

        errors = []
        for arg in (arg for arg in args if arg is not type(None)):
            try:
                return _coerce(arg, value, path)
            except ConfigError as exc:
                errors.append(str(exc))

        raise ConfigError(errors[0] if len(errors) == 1 else f"'{path}' matches none of {args}: {value!r}")

    if origin is Literal:
        if value not in args:
            raise ConfigError(f"'{path}' must be one of {list(args)}, got {value!r}")
        return value

    if isinstance(tp, type) and dataclasses.is_dataclass(tp):
        return from_mapping(tp, value, path)

    if origin is tuple:

        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"'{path}' must be a sequence, got {value!r}")

        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))

        if args and len(args) != len(value):
            raise ConfigError(f"'{path}' must hold {len(args)} values, got {len(value)}")

        return tuple(_coerce(arg, v, f"{path}[{i}]") for i, (arg, v) in enumerate(zip(args, value))) if args else tuple(value)

    if origin is list:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"'{path}' must be a sequence, got {value!r}")
        return [_coerce(args[0], v, f"{path}[{i}]") if args else v for i, v in enumerate(value)]

    if origin is dict:
        if not isinstance(value, Mapping):
            raise ConfigError(f"'{path}' must be a mapping, got {value!r}")
        if not args:
            return dict(value)
        return {_coerce(args[0], k, path): _coerce(args[1], v, f"{path}.{k}") for k, v in value.items()}

    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"'{path}' must be a boolean, got {value!r}")
        return value

    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{path}' must be an integer, got {value!r}")
        return value

    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{path}' must be a number, got {value!r}")
        return float(value)

    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"'{path}' must be a string, got {value!r}")
        return value

    if tp is Path:
        return Path(value)

    return value


def from_mapping(cls: type[T], mapping: Mapping[str, Any] | None, path: str = "") -> T:
    """Build a dataclass from a mapping with full-field validation.

    Unknown keys and values of the wrong type raise ConfigError,
    missing keys take the field defaults."""

    mapping = {} if mapping is None else mapping
    if not isinstance(mapping, Mapping):
        raise ConfigError(f"'{path or cls.__name__}' must be a mapping, got {mapping!r}")

    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls) if f.init}

    unknown = set(mapping) - names
    if unknown:
        raise ConfigError(f"unknown keys in '{path or cls.__name__}': {sorted(unknown)}")

    kwargs = {
        key: _coerce(hints[key], value, f"{path}.{key}" if path else key)
        for key, value in mapping.items()
    }

    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{path or cls.__name__}': {exc}") from exc
