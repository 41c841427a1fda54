"""Check reports and seeded random streams."""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class CheckReport:
    """Outcome of an empirical check.

    ``worst_violation`` is the largest observed ``lhs - rhs`` of the checked
    inequality. Non-strict checks pass iff ``worst_violation <= slack``;
    strict ones (``strict=True``) pass iff ``worst_violation < slack``.
    """

    name: str
    passed: bool
    worst_violation: float
    witness: dict[str, Any] = field(default_factory=dict)
    samples_used: int = 0
    slack: float = 0.0
    strict: bool = False

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_violation": to_jsonable(self.worst_violation),
            "witness": to_jsonable(self.witness),
            "samples_used": self.samples_used,
            "slack": self.slack,
            "strict": self.strict,
        }


def make_report(name, worst, slack, witness=None, samples=0, strict=False) -> CheckReport:
    worst = float(worst)
    passed = worst < slack if strict else worst <= slack
    return CheckReport(
        name=name,
        passed=bool(passed),
        worst_violation=worst,
        witness=witness or {},
        samples_used=int(samples),
        slack=float(slack),
        strict=strict,
    )


def child_rng(seed: int, key: str) -> np.random.Generator:
    """Independent generator for the check called ``key``.

    Streams are keyed by name so adding a new check never shifts the draws
    of an existing one.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, zlib.crc32(key.encode())]))


def sample_ball(rng: np.random.Generator, center, radius: float, m: int) -> np.ndarray:
    """``m`` points uniform in the closed Euclidean ball, shape ``(m, n)``."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    n = center.size
    if n == 1:
        return center + rng.uniform(-radius, radius, size=(m, 1))
    d = rng.standard_normal((m, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=(m, 1)) ** (1.0 / n)
    return center + r * d


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
