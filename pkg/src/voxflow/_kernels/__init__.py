"""Ray-cast kernel backend selection.

The compiled extension is optional; a numpy fallback produces bit-identical
results (the compiled kernel is built with floating-point contraction off and
evaluates the same expressions in the same order). Set VOXFLOW_BACKEND to
"compiled" or "python" to force one; the default prefers the extension.
"""
import os

from ..errors import InvalidArgumentError

try:
    from . import _native
except ImportError:
    _native = None


def available_backends():
    names = ["python"]
    if _native is not None:
        names.insert(0, "compiled")
    return tuple(names)


def active_backend() -> str:
    forced = os.environ.get("VOXFLOW_BACKEND", "")
    if forced not in ("", "compiled", "python"):
        raise InvalidArgumentError(
            f"VOXFLOW_BACKEND must be 'compiled' or 'python', not {forced!r}"
        )
    if forced == "compiled" and _native is None:
        raise InvalidArgumentError(
            "VOXFLOW_BACKEND=compiled but the extension is not built"
        )
    if forced:
        return forced
    return "compiled" if _native is not None else "python"


def native_module():
    return _native
