"""LP and MILP formulations of dispatch and switching problems.

Four builders share a column layout of generator outputs, line flows,
optional bus angles, and optional on/off line variables:

* angle dispatch: flows tied to angle differences through susceptances;
* cycle dispatch: angles eliminated, one flow-sum row per basis cycle;
* angle switching: big-M relaxation of the angle rows plus on/off
  capacity links, binary line variables;
* cycle switching: balance and capacity links only, with two-sided
  big-M cycle rows supplied eagerly or lazily.

Big-M values follow the network's total capacity-over-susceptance weight,
which bounds every angle spread reachable by a connected dispatch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from dcots.cyclebasis import Cycle, CycleSet
from dcots.lp import LinearProgram
from dcots.network import PowerNetwork

__all__ = [
    "VariableMap",
    "BigMConfig",
    "MilpModel",
    "compute_big_m",
    "cycle_big_m",
    "build_opf_angle",
    "build_opf_cycle",
    "build_ots_angle",
    "build_ots_cycle",
    "cycle_cut_rows",
    "add_switching_budget",
    "to_lp_text",
]


@dataclass(frozen=True)
class VariableMap:
    """Column indices for each family of model variables.

    ``pg`` is keyed by generator list index, ``flow`` and ``x`` by line
    id, ``theta`` by bus id; families absent from a model map to {}.
    """

    pg: dict[int, int]
    flow: dict[int, int]
    theta: dict[int, int]
    x: dict[int, int]


@dataclass(frozen=True)
class BigMConfig:
    """Big-M data for the switching formulations.

    ``theta_bound`` bounds every angle from the reference bus; the
    per-line constants deactivate the angle rows of open lines.
    """

    theta_bound: float
    m_line: tuple[tuple[int, float], ...]  # (line id, M) pairs

    def m_for(self, line_id: int) -> float:
        for lid, m in self.m_line:
            if lid == line_id:
                return m
        raise KeyError(f"no big-M for line {line_id}")


@dataclass
class MilpModel:
    """A built model: the LP relaxation plus integrality marks."""

    lp: LinearProgram
    vmap: VariableMap
    integer_cols: tuple[int, ...]
    net: PowerNetwork
    bigm: BigMConfig | None = None


def compute_big_m(net: PowerNetwork) -> BigMConfig:
    """Big-M constants from the total capacity/susceptance weight.

    With one bus fixed at angle zero, any angle in a connected active
    topology is bounded by Theta = sum of capacity/susceptance over all
    lines; a line's constant 2 B Theta + capacity then covers the largest
    possible angle difference its relaxed rows must absorb.
    """
    theta = sum(ln.w for ln in net.lines)
    pairs = tuple((ln.id, 2.0 * ln.susceptance * theta + ln.capacity) for ln in net.lines)
    return BigMConfig(theta, pairs)


def cycle_big_m(cycle: Cycle) -> float:
    """Big-M for a cycle's flow-sum rows: the cycle weight itself."""
    return cycle.weight


def _base_columns(lp: LinearProgram, net: PowerNetwork, with_theta: bool,
                  with_x: bool, theta_bound: float | None) -> VariableMap:
    pg = {i: lp.add_col(cost=g.cost, lo=g.p_min, hi=g.p_max)
          for i, g in enumerate(net.generators)}
    flow = {ln.id: lp.add_col(lo=-ln.capacity, hi=ln.capacity) for ln in net.lines}
    theta: dict[int, int] = {}
    if with_theta:
        bound = theta_bound if theta_bound is not None else float("inf")
        for b in net.buses:
            theta[b.id] = lp.add_col(lo=-bound, hi=bound)
        ref = min(theta)
        lp.set_bounds(theta[ref], 0.0, 0.0)
    x: dict[int, int] = {}
    if with_x:
        for ln in net.lines:
            lo = 0.0 if ln.switchable else 1.0
            x[ln.id] = lp.add_col(lo=lo, hi=1.0)
    return VariableMap(pg, flow, theta, x)


def _balance_rows(lp: LinearProgram, net: PowerNetwork, vmap: VariableMap) -> None:
    gen_at = {g.bus: i for i, g in enumerate(net.generators)}
    for b in net.buses:
        coeffs = []
        if b.id in gen_at:
            coeffs.append((vmap.pg[gen_at[b.id]], 1.0))
        for ln in net.lines:
            if ln.from_bus == b.id:
                coeffs.append((vmap.flow[ln.id], -1.0))
            elif ln.to_bus == b.id:
                coeffs.append((vmap.flow[ln.id], 1.0))
        lp.add_row(coeffs, "==", b.load)


def build_opf_angle(net: PowerNetwork) -> tuple[LinearProgram, VariableMap]:
    """Angle-based dispatch LP.

    Minimizes generation cost subject to bus balance, flows equal to
    susceptance times angle difference, and thermal limits; the
    lowest-indexed bus is the angle reference.
    """
    lp = LinearProgram()
    vmap = _base_columns(lp, net, with_theta=True, with_x=False, theta_bound=None)
    _balance_rows(lp, net, vmap)
    for ln in net.lines:
        lp.add_row([
            (vmap.flow[ln.id], 1.0),
            (vmap.theta[ln.from_bus], -ln.susceptance),
            (vmap.theta[ln.to_bus], ln.susceptance),
        ], "==", 0.0)
    return lp, vmap


def build_opf_cycle(net: PowerNetwork, cycles: CycleSet) -> tuple[LinearProgram, VariableMap]:
    """Cycle-based dispatch LP: angles replaced by per-cycle flow sums.

    Equivalent to the angle LP when ``cycles`` is a cycle basis of the
    network: around each basis cycle the signed flows over susceptance
    must cancel.
    """
    lp = LinearProgram()
    vmap = _base_columns(lp, net, with_theta=False, with_x=False, theta_bound=None)
    _balance_rows(lp, net, vmap)
    for cyc in cycles:
        coeffs = [(vmap.flow[ln.id], s / ln.susceptance) for ln, s in cyc.members]
        lp.add_row(coeffs, "==", 0.0)
    return lp, vmap


def build_ots_angle(net: PowerNetwork, bigm: BigMConfig | None = None) -> MilpModel:
    """Angle-based switching MILP with big-M deactivation.

    Open lines carry no flow; closed lines obey the angle rows.  Angles
    live in [-Theta, Theta] with the lowest-indexed bus fixed at zero,
    which keeps the big-M rows valid for every on/off pattern.
    """
    if bigm is None:
        bigm = compute_big_m(net)
    lp = LinearProgram()
    vmap = _base_columns(lp, net, with_theta=True, with_x=True,
                         theta_bound=bigm.theta_bound)
    _balance_rows(lp, net, vmap)
    for ln in net.lines:
        m = bigm.m_for(ln.id)
        fcol, xcol = vmap.flow[ln.id], vmap.x[ln.id]
        ohm = [(fcol, 1.0), (vmap.theta[ln.from_bus], -ln.susceptance),
               (vmap.theta[ln.to_bus], ln.susceptance)]
        lp.add_row(ohm + [(xcol, m)], "<=", m)
        lp.add_row(ohm + [(xcol, -m)], ">=", -m)
        lp.add_row([(fcol, 1.0), (xcol, -ln.capacity)], "<=", 0.0)
        lp.add_row([(fcol, 1.0), (xcol, ln.capacity)], ">=", 0.0)
    integer = tuple(vmap.x[ln.id] for ln in net.lines if ln.switchable)
    return MilpModel(lp, vmap, integer, net, bigm)


def build_ots_cycle(net: PowerNetwork, bigm: BigMConfig | None = None,
                    cycles: CycleSet = CycleSet()) -> MilpModel:
    """Angle-free switching MILP.

    Carries only balance and on/off capacity links; flow consistency
    around cycles comes from two-sided big-M cycle rows, added here for
    ``cycles`` and lazily by the solver for whatever else is violated.
    """
    if bigm is None:
        bigm = compute_big_m(net)
    lp = LinearProgram()
    vmap = _base_columns(lp, net, with_theta=False, with_x=True, theta_bound=None)
    _balance_rows(lp, net, vmap)
    for ln in net.lines:
        fcol, xcol = vmap.flow[ln.id], vmap.x[ln.id]
        lp.add_row([(fcol, 1.0), (xcol, -ln.capacity)], "<=", 0.0)
        lp.add_row([(fcol, 1.0), (xcol, ln.capacity)], ">=", 0.0)
    model = MilpModel(lp, vmap, tuple(vmap.x[ln.id] for ln in net.lines if ln.switchable),
                      net, bigm)
    for cyc in cycles:
        for row in cycle_cut_rows(cyc, vmap):
            lp.add_row(*row)
    return model


def cycle_cut_rows(cycle: Cycle, vmap: VariableMap):
    """Two big-M rows forcing a cycle's flow sum toward zero.

    With every line of the cycle closed the signed flows over
    susceptance must cancel exactly; each open line relaxes the pair by
    the cycle weight.
    """
    m = cycle_big_m(cycle)
    k = len(cycle.members)
    fpart = [(vmap.flow[ln.id], s / ln.susceptance) for ln, s in cycle.members]
    xpart_up = [(vmap.x[ln.id], m) for ln, _ in cycle.members]
    xpart_dn = [(vmap.x[ln.id], -m) for ln, _ in cycle.members]
    return [
        (fpart + xpart_up, "<=", m * k),
        (fpart + xpart_dn, ">=", -m * k),
    ]


def add_switching_budget(model: MilpModel, n_off: int) -> MilpModel:
    """Append a row keeping at least |L| - n_off lines closed."""
    lp = model.lp.copy()
    coeffs = [(col, 1.0) for col in model.vmap.x.values()]
    lp.add_row(coeffs, ">=", float(len(model.net.lines) - n_off))
    return replace(model, lp=lp)


def to_lp_text(lp: LinearProgram, integer_cols=()) -> str:
    """Render a program in CPLEX LP text format for external inspection."""
    name = lambda j: f"x{j}"  # noqa: E731
    obj_terms = " + ".join(f"{c:.17g} {name(j)}" for j, c in enumerate(lp.obj) if c != 0.0)
    parts = ["Minimize", " obj: " + (obj_terms.replace("+ -", "- ") or "0 " + name(0))]
    parts.append("Subject To")
    for i, (coeffs, sense, rhs) in enumerate(lp.rows):
        terms = " + ".join(f"{v:.17g} {name(c)}" for c, v in coeffs).replace("+ -", "- ")
        op = {"<=": "<=", ">=": ">=", "==": "="}[sense]
        parts.append(f" r{i}: {terms} {op} {rhs:.17g}")
    parts.append("Bounds")
    for j, (lo, hi) in enumerate(zip(lp.lo, lp.hi)):
        lo_s = f"{lo:.17g}" if lo != -float("inf") else "-inf"
        hi_s = f"{hi:.17g}" if hi != float("inf") else "+inf"
        parts.append(f" {lo_s} <= {name(j)} <= {hi_s}")
    if integer_cols:
        parts.append("General")
        parts.append(" " + " ".join(name(j) for j in integer_cols))
    parts.append("End")
    return "\n".join(parts) + "\n"
