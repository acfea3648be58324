"""Resource guards for the exact counters and quadratures.

All hard limits in the package are collected here so that desk-scale runs
stay reproducible and a runaway instance fails fast with a clear message.
Defaults can be overridden per call or globally through environment
variables prefixed ``WARINGBOX_`` (e.g. ``WARINGBOX_BRUTE_FORCE_TUPLES``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields


class ValidationError(ValueError):
    """Bad user input: violated precondition or malformed argument."""


class GuardExceeded(RuntimeError):
    """An instance would exceed a configured resource guard."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to converge within its depth cap."""


@dataclass(frozen=True)
class Guards:
    brute_force_tuples: int = 10**8      # max product of box sides enumerated
    convolution_length: int = 10**7      # max N for coefficient arrays
    mitm_half: int = 10**7               # max size of one half-enumeration
    vinogradov_tuples: int = 2 * 10**6   # max X**s in the hash join
    weighted_tail_m: int = 10**6         # max target in the weighted sum
    circle_samples: int = 6 * 10**6      # max equispaced samples on the circle
    conv_grid: int = 2**22               # max fine-grid cells, singular integral


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"environment variable {name}={raw!r} is not an integer") from exc


def guards_from_env() -> Guards:
    """Default guards, with any WARINGBOX_* environment overrides applied."""
    kwargs = {}
    for f in fields(Guards):
        kwargs[f.name] = _env_int("WARINGBOX_" + f.name.upper(), f.default)
    return Guards(**kwargs)


DEFAULT_GUARDS = guards_from_env()
