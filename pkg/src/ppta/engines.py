"""Shared orchestration for checking, synthesis, and export.

Both the HTTP service and the command line funnel through these entry
points, so precondition handling and result flags live in one place.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from . import backwards as bwd
from . import digital, lu, pmdp
from .model import Pppta, instantiate, validate

ENGINES = ("digital", "backwards")
OBJECTIVES = ("max", "min")
MODES = ("exact", "iterate")


class PreconditionError(ValueError):
    """Engine or objective preconditions not met (usage is fine)."""


class ValidationError(ValueError):
    """The model itself is broken."""


def _validated(m: Pppta) -> Pppta:
    diags = validate(m)
    if diags:
        raise ValidationError("; ".join(d.render() for d in diags))
    return m


def _check_choices(objective, engine, mode):
    if objective not in OBJECTIVES:
        raise PreconditionError(f"unknown objective {objective!r}")
    if engine not in ENGINES:
        raise PreconditionError(f"unknown engine {engine!r}")
    if mode not in MODES:
        raise PreconditionError(f"unknown mode {mode!r}")
    if engine == "backwards" and objective != "max":
        raise PreconditionError("the backwards engine only computes max "
                                "reachability")


def _require_total(m: Pppta, gamma, rho):
    missing = set(m.clock_params) - set(gamma)
    if missing:
        raise PreconditionError(f"no values for clock parameters {sorted(missing)}")
    missing = set(m.prob_params) - set(rho)
    if missing:
        raise PreconditionError(f"no values for probability parameters "
                                f"{sorted(missing)}")


@dataclass
class CheckResult:
    value: Fraction
    objective: str
    engine: str
    mode: str
    flags: Dict[str, object] = field(default_factory=dict)

    def render_value(self) -> str:
        if self.mode == "exact":
            return str(self.value)
        return f"{float(self.value):.10f} (iterative, tolerance 1e-8)"


def run_check(m: Pppta, targets, objective: str, engine: str = "digital",
              mode: str = "exact", gamma: Mapping[str, int] = None,
              rho: Mapping[str, Fraction] = None,
              cap: Optional[int] = bwd.DEFAULT_CAP) -> CheckResult:
    gamma, rho = dict(gamma or {}), dict(rho or {})
    _check_choices(objective, engine, mode)
    _validated(m)
    _require_total(m, gamma, rho)
    targets = list(targets)
    if not targets:
        raise PreconditionError("no target locations given")
    unknown = set(targets) - set(m.locations)
    if unknown:
        raise PreconditionError(f"undeclared target locations: {sorted(unknown)}")
    inst = instantiate(m, gamma, rho)
    flags: Dict[str, object] = {}

    if engine == "digital":
        try:
            mdp_, target_idx = digital.build_digital(inst, targets)
        except digital.DigitalError as e:
            raise PreconditionError(str(e)) from None
        if objective == "min":
            warnings = digital.zero_time_cycle_check(inst)
            if warnings:
                flags["zeno_caveat"] = warnings
        if not target_idx:
            return CheckResult(Fraction(0), objective, engine, mode, flags)
        result = pmdp.solve_reach(mdp_, target_idx, objective, mode)
        return CheckResult(result.value(mdp_.initial), objective, engine,
                           mode, flags)

    zones = bwd.target_zones_for_locations(inst, targets)
    system = bwd.explore(inst, zones, cap=cap)
    nu = {c: Fraction(0) for c in inst.clocks}
    ev = bwd.max_reach_eval(system, inst.initial, nu, {})
    if ev.truncated:
        flags["truncated"] = True
        flags["bound"] = "lower"
    if ev.witness is not None:
        flags["witness"] = ev.witness.render()
    if mode == "iterate":
        # The backwards evaluation is exact either way; report as such.
        flags["note"] = "backwards engine always solves exactly"
    return CheckResult(ev.value, objective, engine, "exact", flags)


# ---------------------------------------------------------------------------
# Synthesis

@dataclass
class SynthPoint:
    gamma: Dict[str, int]
    rho: Dict[str, Fraction]
    value: Fraction
    flags: Dict[str, object]


@dataclass
class SynthResult:
    best: SynthPoint
    table: List[SynthPoint]
    fixed: Dict[str, int]
    flags: Dict[str, object]


def rho_grid_points(m: Pppta, spec: Mapping[str, object] = None,
                    default_count: int = 3) -> List[Dict[str, Fraction]]:
    """Probability-parameter grid: explicit value lists or N evenly
    spaced points per parameter across its declared interval."""
    spec = dict(spec or {})
    unknown = set(spec) - set(m.prob_params)
    if unknown:
        raise PreconditionError(f"grid names unknown probability parameters: "
                                f"{sorted(unknown)}")
    axes = []
    names = sorted(m.prob_params)
    for p in names:
        lo, hi = m.prob_params[p]
        entry = spec.get(p, default_count)
        if isinstance(entry, int):
            n = entry
            if n < 1:
                raise PreconditionError(f"grid count for '{p}' must be >= 1")
            if n == 1 or lo == hi:
                vals = [lo]
            else:
                vals = [lo + (hi - lo) * Fraction(i, n - 1) for i in range(n)]
        else:
            vals = [Fraction(v) for v in entry]
            if not vals:
                raise PreconditionError(f"empty grid for '{p}'")
            for v in vals:
                if not lo <= v <= hi:
                    raise PreconditionError(f"grid value {v} for '{p}' outside "
                                            f"domain [{lo},{hi}]")
        axes.append(vals)
    import itertools
    return [dict(zip(names, pt)) for pt in itertools.product(*axes)]


def _point_key(pt: SynthPoint):
    return (tuple(sorted(pt.gamma.items())),
            tuple(sorted(pt.rho.items())))


def run_synth(m: Pppta, targets, objective: str, engine: str = "digital",
              mode: str = "exact", region: Optional[lu.ClockRegion] = None,
              rho_spec: Mapping[str, object] = None,
              apply_reduction: bool = True,
              cap: Optional[int] = bwd.DEFAULT_CAP) -> SynthResult:
    _check_choices(objective, engine, mode)
    _validated(m)
    region = region or lu.ClockRegion.from_model(m)
    flags: Dict[str, object] = {}

    fixed: Dict[str, int] = {}
    work_model = m
    if region.is_rectangular() and apply_reduction:
        report = lu.reduce(m, region, objective)
        fixed = report.fixed
        work_model = report.residual_model
        gamma_points = report.residual_region.points()
        if fixed:
            flags["lu_fixed"] = dict(fixed)
    else:
        gamma_points = region.points()

    rhos = rho_grid_points(work_model, rho_spec)
    jobs = [(g, r) for g in gamma_points for r in rhos]
    if not jobs:
        raise PreconditionError("empty synthesis grid")

    def evaluate(job):
        g, r = job
        res = run_check(work_model, targets, objective, engine, mode,
                        gamma=g, rho=r, cap=cap)
        full_gamma = dict(fixed)
        full_gamma.update(g)
        return SynthPoint(full_gamma, dict(r), res.value, res.flags)

    threads = max(1, int(os.environ.get("PPTA_THREADS", "1") or "1"))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            table = list(pool.map(evaluate, jobs))
    else:
        table = [evaluate(j) for j in jobs]

    table.sort(key=_point_key)
    best = table[0]
    for pt in table[1:]:
        if (pt.value > best.value if objective == "max"
                else pt.value < best.value):
            best = pt
    for pt in table:
        if pt.flags.get("truncated"):
            flags["truncated"] = True
        if pt.flags.get("zeno_caveat"):
            flags["zeno_caveat"] = pt.flags["zeno_caveat"]
    return SynthResult(best, table, fixed, flags)


# ---------------------------------------------------------------------------
# Export

def export_pmdp(mdp_: pmdp.FinitePmdp, targets, header: str = "") -> str:
    """Stable text dump of an MDP: states, transitions, initial, targets."""
    lines = []
    if header:
        lines.append(f"# {header}")
    lines.append("pmdp")
    lines.append(f"initial {mdp_.initial}")
    lines.append(f"sink {mdp_.sink}")
    lines.append("targets " + (" ".join(str(t) for t in sorted(targets)) or "-"))
    lines.append("states")
    for i, label in enumerate(mdp_.labels):
        lines.append(f"  {i} {label}")
    lines.append("transitions")
    for s in range(len(mdp_.labels)):
        for a in mdp_.actions_of(s):
            outs = mdp_.branches[(s, a)]
            body = " ".join(f"{w.render()}->{t}" for w, t in outs) or "-"
            lines.append(f"  {s} {a} : {body}")
    return "\n".join(lines) + "\n"


def run_export(m: Pppta, targets, engine: str = "digital",
               gamma: Mapping[str, int] = None,
               rho: Mapping[str, Fraction] = None,
               cap: Optional[int] = bwd.DEFAULT_CAP) -> str:
    gamma, rho = dict(gamma or {}), dict(rho or {})
    if engine not in ENGINES:
        raise PreconditionError(f"unknown engine {engine!r}")
    _validated(m)
    missing = set(m.clock_params) - set(gamma)
    if missing:
        raise PreconditionError(f"no values for clock parameters {sorted(missing)}")
    targets = list(targets)
    unknown = set(targets) - set(m.locations)
    if unknown:
        raise PreconditionError(f"undeclared target locations: {sorted(unknown)}")
    inst = instantiate(m, gamma, rho)
    if engine == "digital":
        try:
            mdp_, target_idx = digital.build_digital(inst, targets)
        except digital.DigitalError as e:
            raise PreconditionError(str(e)) from None
        return export_pmdp(mdp_, target_idx,
                           header=f"digital pmdp of {m.name}")
    zones = bwd.target_zones_for_locations(inst, targets)
    system = bwd.explore(inst, zones, cap=cap)
    mdp_, target_idx = bwd.build_sub_pmdp(system)
    return export_pmdp(mdp_, target_idx,
                       header=f"backwards pmdp of {m.name}")
