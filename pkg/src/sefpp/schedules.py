"""Step-size schedules ``n -> tau_n`` / ``n -> alpha_n`` with summability metadata.

``n`` is the 0-based iteration count (the update from state ``n`` to
``n + 1`` uses the value at ``n``).
"""
from dataclasses import dataclass

import numpy as np

from .errors import RejectedConfigError

__all__ = ["Schedule", "tau_schedule", "as_schedule"]

KINDS = ("constant", "harmonic", "power")


@dataclass(frozen=True)
class Schedule:
    """``constant``: ``c``; ``harmonic``: ``c/(n+shift)``; ``power``: ``c/(n+shift)^p``.

    The default ``shift=1`` gives the ``c/(n+1)`` families; ``harmonic`` with
    ``shift=2`` is ``1/(n+2)``.
    """

    kind: str
    c: float
    p: float = 1.0
    shift: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise RejectedConfigError(f"schedule kind must be one of {KINDS}, got {self.kind!r}")
        if not self.c > 0 and not (self.kind == "constant" and self.c == 0):
            raise RejectedConfigError(f"schedule constant c must be positive, got {self.c}")
        if self.kind != "constant" and not self.shift > 0:
            raise RejectedConfigError(f"schedule shift must be positive, got {self.shift}")
        if self.kind == "power" and not self.p > 0:
            raise RejectedConfigError(f"power schedule exponent must be positive, got {self.p}")

    @classmethod
    def constant(cls, c):
        return cls("constant", float(c))

    @classmethod
    def harmonic(cls, c=1.0, shift=1.0):
        return cls("harmonic", float(c), 1.0, float(shift))

    @classmethod
    def power(cls, c, p, shift=1.0):
        return cls("power", float(c), float(p), float(shift))

    @property
    def exponent(self):
        return {"constant": 0.0, "harmonic": 1.0}.get(self.kind, self.p)

    def __call__(self, n):
        if self.kind == "constant":
            return self.c
        return self.c / (n + self.shift) ** self.exponent

    def values(self, count):
        n = np.arange(count, dtype=np.float64)
        if self.kind == "constant":
            return np.full(count, self.c)
        return self.c / (n + self.shift) ** self.exponent

    # p-series facts for c / (n + shift)^p
    @property
    def tends_to_zero(self):
        return self.exponent > 0 or self.c == 0

    @property
    def diverges(self):
        return self.exponent <= 1.0 and self.c > 0

    @property
    def square_summable(self):
        return self.exponent > 0.5 or self.c == 0

    def describe(self):
        if self.kind == "constant":
            return f"constant({self.c:g})"
        if self.kind == "harmonic":
            return f"harmonic({self.c:g}/(n+{self.shift:g}))"
        return f"power({self.c:g}/(n+{self.shift:g})^{self.p:g})"


def tau_schedule(kind, n, c=1.0, p=1.0, shift=1.0):
    """Evaluate the schedule ``kind`` at ``n`` (functional convenience form)."""
    return Schedule(kind, float(c), float(p), float(shift))(n)


def as_schedule(value):
    """Accept a ``Schedule``, a bare number (constant) or a mapping of fields."""
    if isinstance(value, Schedule):
        return value
    if isinstance(value, (int, float)):
        return Schedule.constant(value)
    if isinstance(value, dict):
        fields = dict(value)
        kind = fields.pop("kind", None)
        unknown = set(fields) - {"c", "p", "shift"}
        if kind is None or unknown:
            raise RejectedConfigError(f"schedule needs 'kind' and only c/p/shift, got {value!r}")
        return Schedule(kind, float(fields.get("c", 1.0)), float(fields.get("p", 1.0)),
                        float(fields.get("shift", 1.0)))
    raise RejectedConfigError(f"cannot interpret {value!r} as a schedule")
