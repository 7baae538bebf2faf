"""Endpoint fixing of separable lower/upper-bound clock parameters.

Over a rectangular region, a parameter that only ever lower-bounds
clocks is optimally fixed to its interval infimum and a pure upper
bound to its supremum, for both max and min objectives.  Parameters
appearing in both roles stay free; non-rectangular regions are refused,
since per-parameter endpoint fixing is only sound when the region is a
product of intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .model import BOTH, LOWER, UNUSED, UPPER, Pppta, classify_lu, instantiate


class LuError(ValueError):
    pass


@dataclass(frozen=True)
class ClockRegion:
    """Clock-parameter region: a rectangle and/or an explicit finite set."""
    rectangular: Optional[Dict[str, Tuple[int, int]]] = None
    explicit: Optional[Tuple[dict, ...]] = None

    def __post_init__(self):
        if self.rectangular is None and self.explicit is None:
            raise LuError("empty region specification")
        if self.rectangular is not None:
            for p, (lo, hi) in self.rectangular.items():
                if lo > hi:
                    raise LuError(f"empty interval [{lo},{hi}] for '{p}'")
        if self.explicit is not None and not self.explicit:
            raise LuError("explicit region with no valuations")

    @classmethod
    def from_model(cls, m: Pppta) -> "ClockRegion":
        return cls(rectangular=dict(m.clock_params))

    @classmethod
    def from_points(cls, points) -> "ClockRegion":
        return cls(explicit=tuple(dict(pt) for pt in points))

    def is_rectangular(self) -> bool:
        return self.rectangular is not None

    def points(self) -> List[dict]:
        """All valuations of the region, deterministically ordered."""
        if self.explicit is not None:
            return [dict(pt) for pt in self.explicit]
        import itertools
        names = sorted(self.rectangular)
        axes = [range(self.rectangular[p][0], self.rectangular[p][1] + 1)
                for p in names]
        return [dict(zip(names, pt)) for pt in itertools.product(*axes)]


@dataclass
class ReductionReport:
    fixed: Dict[str, int]
    residual_model: Pppta
    residual_region: ClockRegion
    classification: Dict[str, str]

    def render(self) -> str:
        lines = []
        for p, v in sorted(self.fixed.items()):
            lines.append(f"fix {p} = {v} ({self.classification[p]})")
        rect = self.residual_region.rectangular or {}
        for p, (lo, hi) in sorted(rect.items()):
            lines.append(f"keep {p} in [{lo}, {hi}] ({self.classification[p]})")
        return "\n".join(lines) if lines else "nothing to reduce"


def reduce(m: Pppta, region: ClockRegion, objective: str = "max") -> ReductionReport:
    """Fix separable parameters at their optimal interval endpoints.

    The same endpoints are optimal for max and min: widening the timing
    envelope only enlarges the scheduler space.
    """
    if objective not in ("max", "min"):
        raise LuError(f"unknown objective {objective!r}")
    if not region.is_rectangular():
        raise LuError("region is not rectangular: per-parameter endpoint "
                      "fixing needs a separable (product) region; evaluate "
                      "the explicit valuations exhaustively instead")
    rect = dict(region.rectangular)
    missing = set(m.clock_params) - set(rect)
    if missing:
        raise LuError(f"region misses parameters: {sorted(missing)}")
    extra = set(rect) - set(m.clock_params)
    if extra:
        raise LuError(f"region names unknown parameters: {sorted(extra)}")
    for p, (lo, hi) in rect.items():
        dlo, dhi = m.clock_params[p]
        if lo < dlo or hi > dhi:
            raise LuError(f"region interval [{lo},{hi}] for '{p}' outside "
                          f"declared domain [{dlo},{dhi}]")

    classification = classify_lu(m)
    fixed: Dict[str, int] = {}
    residual: Dict[str, Tuple[int, int]] = {}
    for p, (lo, hi) in rect.items():
        cls = classification[p]
        if cls == LOWER:
            fixed[p] = lo
        elif cls == UPPER:
            fixed[p] = hi
        elif cls == UNUSED:
            fixed[p] = lo
        else:  # BOTH: not separable into a single role
            residual[p] = (lo, hi)
    residual_model = instantiate(m, fixed) if fixed else m
    return ReductionReport(fixed, residual_model,
                           ClockRegion(rectangular=residual),
                           classification)
