"""Cycle inequalities for switching relaxations, and their separation.

For a cycle C with per-line weight w_a (capacity over susceptance) and a
subset S of its lines with Delta(S) = 2 w(S) - w(C) > 0, the inequality

    sum_S sigma_a f_a / B_a + sum_S [Delta(S) - w_a] x_a
        + Delta(S) sum_{C\\S} x_a  <=  Delta(S) (|C| - 1)

and its reflection in f cut fractional points while holding at every
on/off-feasible flow pattern around the cycle.  Separation works in
normalized coordinates g_a = sigma_a f_a / B_a: writing
K_C = 1 - sum_C (1 - x_a) and v_a = g_a - w_a x_a + 2 w_a K_C, the
violation of any S is sum_S v_a - w(C) K_C, so the most violated subset
simply collects the nonnegative v_a.  When K_C <= 0 no subset is
violated and both separators return nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from dcots.cyclebasis import Cycle
from dcots.formulations import VariableMap

__all__ = [
    "VIOL_TOL",
    "SeparationContext",
    "CycleInequality",
    "delta",
    "k_value",
    "make_context",
    "separate_closed_form",
    "separate_all",
    "inequality_row",
    "violation",
    "log_line",
]

VIOL_TOL = 1e-6


@dataclass(frozen=True)
class SeparationContext:
    """A cycle with the relaxation values its cuts are separated from.

    ``w``, ``g_hat``, and ``x_hat`` are indexed by position in
    ``cycle.members``; ``g_hat`` holds the signed, susceptance-scaled
    flows and ``k_value`` equals 1 - sum(1 - x_hat).
    """

    cycle: Cycle
    w: tuple[float, ...]
    g_hat: tuple[float, ...]
    x_hat: tuple[float, ...]
    k_value: float


@dataclass(frozen=True)
class CycleInequality:
    """One separated cut: a side, a subset of the cycle, its gap data."""

    cycle: Cycle
    side: str  # "right" keeps the flow sum's sign, "left" negates it
    subset: frozenset[int]  # line ids
    delta: float
    violation_found: float

    def key(self):
        return (self.cycle.edge_ids, self.side, self.subset)


def delta(subset: Sequence[int], w: Sequence[float]) -> float:
    """Excess weight 2 w(S) - w(C) of a subset within its cycle."""
    return 2.0 * sum(w[a] for a in subset) - sum(w)


def k_value(x_hat: Sequence[float]) -> float:
    """1 - sum(1 - x_a): positive only when the cycle is nearly closed."""
    return 1.0 - sum(1.0 - x for x in x_hat)


def make_context(cycle: Cycle, f_hat: Mapping[int, float],
                 x_hat: Mapping[int, float]) -> SeparationContext:
    """Normalize relaxation values onto a cycle's member order."""
    w, g, x = [], [], []
    for ln, s in cycle.members:
        w.append(ln.w)
        g.append(s * f_hat[ln.id] / ln.susceptance)
        x.append(min(1.0, max(0.0, x_hat[ln.id])))
    return SeparationContext(cycle, tuple(w), tuple(g), tuple(x), k_value(x))


def _emit(ctx: SeparationContext, side: str, positions, viol: float) -> CycleInequality:
    ids = frozenset(ctx.cycle.members[a][0].id for a in positions)
    d = delta(tuple(positions), ctx.w)
    assert d > 0.0
    return CycleInequality(ctx.cycle, side, ids, d, viol)


def separate_closed_form(ctx: SeparationContext,
                         viol_tol: float = VIOL_TOL) -> list[CycleInequality]:
    """Most-violated cut per side, by collecting the nonnegative v_a.

    Returns at most one right and one left inequality; nothing when
    K_C <= 0, when the best violation is within ``viol_tol``, or when
    the collected subset is no heavier than half the cycle.
    """
    kc = ctx.k_value
    if kc <= 0.0:
        return []
    out = []
    wc = sum(ctx.w)
    for side, sign in (("right", 1.0), ("left", -1.0)):
        v = [sign * g - w * x + 2.0 * w * kc
             for g, w, x in zip(ctx.g_hat, ctx.w, ctx.x_hat)]
        star = [a for a, va in enumerate(v) if va >= 0.0]
        viol = sum(v[a] for a in star) - wc * kc
        if viol > viol_tol and sum(ctx.w[a] for a in star) > 0.5 * wc:
            out.append(_emit(ctx, side, star, viol))
    return out


def separate_all(ctx: SeparationContext,
                 viol_tol: float = VIOL_TOL) -> list[CycleInequality]:
    """Grow the closed-form seed into every violated superset.

    Starting from the nonnegative-v_a seed, lines of the complement are
    added in member order; a branch stops once its violation is gone,
    which is final because every added v_a is negative.
    """
    kc = ctx.k_value
    if kc <= 0.0:
        return []
    out = []
    wc = sum(ctx.w)
    for side, sign in (("right", 1.0), ("left", -1.0)):
        v = [sign * g - w * x + 2.0 * w * kc
             for g, w, x in zip(ctx.g_hat, ctx.w, ctx.x_hat)]
        seed = [a for a, va in enumerate(v) if va >= 0.0]
        rest = [a for a in range(len(v)) if v[a] < 0.0]

        def recurse(s, k):
            vs = sum(v[a] for a in s)
            if vs <= wc * kc:
                return
            viol = vs - wc * kc
            if viol > viol_tol and sum(ctx.w[a] for a in s) > 0.5 * wc:
                out.append(_emit(ctx, side, s, viol))
            for l in range(k, len(rest)):
                recurse(s + [rest[l]], l + 1)

        recurse(list(seed), 0)
    return out


def inequality_row(ineq: CycleInequality, vmap: VariableMap):
    """Materialize a cut as an LP row over flow and on/off columns."""
    sign = 1.0 if ineq.side == "right" else -1.0
    d = ineq.delta
    coeffs = []
    for ln, s in ineq.cycle.members:
        if ln.id in ineq.subset:
            coeffs.append((vmap.flow[ln.id], sign * s / ln.susceptance))
            coeffs.append((vmap.x[ln.id], d - ln.w))
        else:
            coeffs.append((vmap.x[ln.id], d))
    return coeffs, "<=", d * (len(ineq.cycle.members) - 1.0)


def violation(ineq: CycleInequality, f_hat: Mapping[int, float],
              x_hat: Mapping[int, float]) -> float:
    """Left side minus right side of the cut at a point; positive means cut off."""
    sign = 1.0 if ineq.side == "right" else -1.0
    d = ineq.delta
    lhs = 0.0
    for ln, s in ineq.cycle.members:
        if ln.id in ineq.subset:
            lhs += sign * s * f_hat[ln.id] / ln.susceptance
            lhs += (d - ln.w) * x_hat[ln.id]
        else:
            lhs += d * x_hat[ln.id]
    return lhs - d * (len(ineq.cycle.members) - 1.0)


def log_line(ineq: CycleInequality) -> str:
    """One-line audit record of an emitted cut."""
    ids = ",".join(str(i) for i in sorted(ineq.subset))
    cyc = ",".join(str(i) for i in ineq.cycle.signed_ids())
    return (f"cycle=[{cyc}] side={ineq.side} S={{{ids}}} "
            f"delta={ineq.delta:.9g} viol={ineq.violation_found:.9g}")
