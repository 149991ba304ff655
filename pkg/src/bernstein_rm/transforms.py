"""Maps from a data support onto [0, 1], and density pullbacks back to it."""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = ["SupportKind", "SupportTransform", "parse_support"]


class SupportKind(enum.Enum):
    BOUNDED = "bounded"
    REAL = "real"
    HALFLINE = "halfline"
    IDENTITY = "identity"


@dataclass(frozen=True)
class SupportTransform:
    """A change of variable ``y = T(x)`` with ``T`` onto [0, 1].

    * bounded ``[lo, hi]``: ``(x - lo) / (hi - lo)``
    * real line: ``1/2 + arctan(x) / pi``
    * half line ``[0, inf)``: ``x / (1 + x)``
    * identity on [0, 1]

    A density ``g`` of ``Y`` pulls back to ``f(x) = T'(x) g(T(x))``.
    """

    kind: SupportKind = SupportKind.IDENTITY
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", SupportKind(self.kind))
        if self.kind is SupportKind.BOUNDED:
            if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
                raise ValueError(f"bounded support needs finite lo < hi, got [{self.lo}, {self.hi}]")
        elif (self.lo, self.hi) != (0.0, 1.0):
            raise ValueError("lo and hi only apply to the bounded kind")

    @classmethod
    def bounded(cls, lo, hi):
        return cls(SupportKind.BOUNDED, float(lo), float(hi))

    @classmethod
    def real_line(cls):
        return cls(SupportKind.REAL)

    @classmethod
    def half_line(cls):
        return cls(SupportKind.HALFLINE)

    @classmethod
    def identity(cls):
        return cls(SupportKind.IDENTITY)

    @property
    def support(self):
        if self.kind is SupportKind.BOUNDED:
            return self.lo, self.hi
        if self.kind is SupportKind.REAL:
            return -math.inf, math.inf
        if self.kind is SupportKind.HALFLINE:
            return 0.0, math.inf
        return 0.0, 1.0

    def check(self, x):
        """Raise ``ValueError`` naming the first value outside the support."""
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        bad = np.isnan(x) | (x < lo) | (x > hi)
        if np.any(bad):
            first = x.ravel()[np.flatnonzero(bad.ravel())[0]]
            raise ValueError(f"value {first!r} lies outside the support [{lo}, {hi}]")
        return x

    def forward(self, x):
        x = self.check(x)
        if self.kind is SupportKind.BOUNDED:
            y = (x - self.lo) / (self.hi - self.lo)
        elif self.kind is SupportKind.REAL:
            y = 0.5 + np.arctan(x) / np.pi
        elif self.kind is SupportKind.HALFLINE:
            y = np.where(np.isinf(x), 1.0, x / (1.0 + np.where(np.isinf(x), 0.0, x)))
        else:
            y = x
        return np.clip(y, 0.0, 1.0)

    def backward(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(np.isnan(y) | (y < 0.0) | (y > 1.0)):
            raise ValueError("backward expects values in [0, 1]")
        if self.kind is SupportKind.BOUNDED:
            return self.lo + (self.hi - self.lo) * y
        with np.errstate(divide="ignore"):
            if self.kind is SupportKind.REAL:
                return np.tan(np.pi * (y - 0.5))
            if self.kind is SupportKind.HALFLINE:
                return y / (1.0 - y)
        return y

    def jacobian(self, x):
        """``T'(x)``."""
        x = self.check(x)
        if self.kind is SupportKind.BOUNDED:
            return np.full_like(x, 1.0 / (self.hi - self.lo))
        if self.kind is SupportKind.REAL:
            return 1.0 / (np.pi * (1.0 + x**2))
        if self.kind is SupportKind.HALFLINE:
            return 1.0 / (1.0 + x) ** 2
        return np.ones_like(x)

    def backward_density(self, g, x):
        """Density on the original scale at ``x`` from a density ``g`` on [0, 1]."""
        x = self.check(x)
        return self.jacobian(x) * np.asarray(g(self.forward(x)), dtype=float)

    def __str__(self):
        if self.kind is SupportKind.BOUNDED:
            return f"{self.lo:g},{self.hi:g}"
        return {"real": "real", "halfline": "halfline", "identity": "unit"}[self.kind.value]


def parse_support(text):
    """``"a,b"``, ``"real"``, ``"halfline"`` or ``"unit"``."""
    key = text.strip().lower()
    if key == "real":
        return SupportTransform.real_line()
    if key == "halfline":
        return SupportTransform.half_line()
    if key in ("unit", "identity"):
        return SupportTransform.identity()
    parts = key.split(",")
    if len(parts) == 2:
        try:
            return SupportTransform.bounded(float(parts[0]), float(parts[1]))
        except ValueError as exc:
            raise ValueError(f"bad support {text!r}: {exc}") from None
    raise ValueError(f"bad support {text!r}; use 'a,b', 'real', 'halfline' or 'unit'")
