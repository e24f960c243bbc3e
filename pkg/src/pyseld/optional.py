"""Optional imports"""
from __future__ import annotations

__all__ = ["import_optional_dependency"]

from importlib import import_module
from importlib.metadata import metadata, version, PackageNotFoundError
from types import ModuleType

import re

from packaging.requirements import Requirement
from pyseld import __package__ as _PACKAGE_


def _optional_requirements(distribution_name: str) -> dict[str, Requirement]:
    """collect requirements declared under any extra"""

    try:
        meta = metadata(distribution_name)
    except PackageNotFoundError:
        return {}

    # keep requirements guarded by an extra marker
    reqs = meta.get_all('Requires-Dist', failobj=[])
    reqs = [req for req in reqs if re.search(r"extra\s*==", req)]

    parsed = (Requirement(req.split(';')[0].strip()) for req in reqs)
    return {req.name.lower(): req for req in parsed}


def import_optional_dependency(
    module_name: str,
    dependency_name: str | None = None
) -> ModuleType:
    """Import optional dependency

    Parameters
    ----------
    module_name: str
        name of optional dependency
    dependency_name: str, default None
        Distribution name when it differs from the import name.

    Returns
    -------
    module: ModuleType
        module of requested optional dependency
    """

    # default distribution name
    if dependency_name is None:
        dependency_name = module_name.split('.', 1)[0].replace('_', '-')

    # version pin from package metadata, absent for source checkouts
    req = _optional_requirements(_PACKAGE_).get(dependency_name.lower())

    # check installation
    try:
        installed = version(dependency_name)

    except PackageNotFoundError as exc:
        spec = str(req.specifier) if req is not None else ''
        msg = (
            f"Missing optional dependency '{dependency_name}'. "
            f"Use pip or conda to install {dependency_name}{spec}."
        )
        raise ImportError(msg) from exc

    # check version
    if req is not None and not req.specifier.contains(installed, prereleases=True):
        msg = (
            f"{_PACKAGE_} requires version '{req.name}{req.specifier}' "
            f"(version '{installed}' currently installed)."
        )
        raise ImportError(msg)

    return import_module(module_name)
