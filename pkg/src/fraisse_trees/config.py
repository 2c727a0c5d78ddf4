"""Central size caps and kernel backend selection.

Caps keep the exhaustive oracle suites within desk-scale budgets.  Two
environment variables adjust runtime behavior:

FRAISSE_CAP     materialization bound for staged constructions (default 10**6)
FRAISSE_KERNEL  enumeration backend, "numba" or "numpy" (default numba when
                available)
"""
import os

ORACLE_TREE_CAP = 8
ORACLE_GRAPH_CAP = 6
ORACLE_EPI_DOMAIN_CAP = 8
ORACLE_EPI_CODOMAIN_CAP = 6
AMALGAM_BOUND = 10
HU_CAP = 8
SEMANTIC_CONFLUENCE_CAP = 12
DEFAULT_MATERIALIZE_CAP = 10 ** 6


class CapExceeded(ValueError):
    """A requested size exceeds the configured cap."""


def require_cap(value: int, cap: int, what: str) -> None:
    if value > cap:
        raise CapExceeded(f"{what}: {value} exceeds cap {cap}")


def materialize_cap() -> int:
    raw = os.environ.get("FRAISSE_CAP")
    if raw is None:
        return DEFAULT_MATERIALIZE_CAP
    try:
        val = int(raw)
    except ValueError:
        raise CapExceeded(f"FRAISSE_CAP={raw!r} is not an integer")
    if val <= 0:
        raise CapExceeded(f"FRAISSE_CAP={val} must be positive")
    return val


def kernel_backend() -> str:
    """Resolved backend name: "numba" or "numpy"."""
    raw = os.environ.get("FRAISSE_KERNEL", "").strip().lower()
    if raw in ("numba", "numpy"):
        return raw
    if raw:
        raise CapExceeded(f"FRAISSE_KERNEL={raw!r} not one of numba, numpy")
    try:
        import numba  # noqa: F401
        return "numba"
    except ImportError:
        return "numpy"
