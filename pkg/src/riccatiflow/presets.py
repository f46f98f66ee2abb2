"""Registry of the shipped preset files.

A name resolves to ``presets/<name>.<ext>`` inside the package; anything that
looks like a path is used as is.  Representations additionally accept
``canonical`` and ``trivial``, which are built from the surface.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .cocycle import Representation
from .surface import SurfaceGroup


class PresetNotFound(LookupError):
    pass


def preset_dir() -> Path:
    return Path(str(resources.files("riccatiflow") / "presets"))


def available(ext: str) -> list:
    return sorted(p.stem for p in preset_dir().glob(f"*.{ext}"))


def resolve(name: str, ext: str) -> Path:
    p = Path(name)
    if p.suffix or "/" in name or "\\" in name:
        if not p.is_file():
            raise PresetNotFound(f"file not found: {name}")
        return p
    q = preset_dir() / f"{name}.{ext}"
    if not q.is_file():
        raise PresetNotFound(
            f"no {ext} preset named {name!r}; available: {', '.join(available(ext))}")
    return q


def load_surface(name: str) -> SurfaceGroup:
    return SurfaceGroup.from_file(resolve(name, "surface"))


def load_representation(name: str, G: SurfaceGroup) -> Representation:
    if name == "canonical":
        rho = Representation.canonical(G)
    elif name == "trivial":
        rho = Representation.trivial(G)
    else:
        rho = Representation.from_file(resolve(name, "rep"))
    rho.check_surface(G)
    return rho


def load_pingpong(name: str):
    from .schottky import PingPongSystem

    return PingPongSystem.from_file(resolve(name, "pingpong"))
