"""Record-replay harness for evaluating bystander privacy PETs on AR headsets."""

from pathlib import Path

from ._core import *  # noqa: F401,F403
from ._core import HeadsetProfile, PetKind

__all__ = [name for name in dir() if not name.startswith("_")]

_HERE = Path(__file__).resolve().parent
# installed wheel first, then the source tree (editable installs)
_PROFILE_DIRS = [_HERE / "profiles", _HERE.parent.parent / "profiles"]


def shipped_profile(name: str, pet: "PetKind" = PetKind.Implicit) -> "HeadsetProfile":
    """Load one of the bundled headset profiles (hl2, mq3, ml2)."""
    for d in _PROFILE_DIRS:
        path = d / f"{name}.profile"
        if path.exists():
            return HeadsetProfile.load(str(path), pet)
    raise FileNotFoundError(f"no shipped profile named {name!r}")
