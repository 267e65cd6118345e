"""Cut-and-branch solver for line switching.

The driver strengthens the root relaxation with separated cycle
inequalities, then runs a deterministic best-bound branch-and-bound on
the binary line variables.  Integral candidates are screened by a lazy
flow-consistency check: a spanning forest of the active lines fixes
angles, and any active chord whose implied angle difference disagrees
with its flow yields a cycle whose big-M rows are added globally before
the search continues.  Incumbents are post-processed into a connected
active topology with recovered angles.

Cycle selection modes: ``default`` adds no root cuts, ``basic``
separates over a cycle basis, ``more`` over the basis expanded by
pairwise symmetric differences and optionally sampled.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass

from dcots.cuts import VIOL_TOL, inequality_row, make_context, separate_all
from dcots.cyclebasis import (
    Cycle,
    CycleSet,
    cycle_basis,
    cycle_of_chord,
    expand_cycle_set,
    sample_cycles,
)
from dcots.formulations import (
    MilpModel,
    add_switching_budget,
    build_ots_angle,
    build_ots_cycle,
    cycle_cut_rows,
)
from dcots.lp import add_rows, solve
from dcots.network import PowerNetwork

__all__ = [
    "KVL_TOL",
    "CSV_HEADER",
    "SolverConfig",
    "SolveResult",
    "RootRelaxationError",
    "strengthen_root",
    "branch_and_bound",
    "lazy_kvl_check",
    "recover_angles",
    "repair_connected",
    "solve_ots",
    "result_to_doc",
    "result_csv_row",
]

KVL_TOL = 1e-6
_INT_TOL = 1e-6
_GAP_EPS = 1e-9

CSV_HEADER = ["instance", "mode", "status", "objective", "bound", "gap",
              "nodes", "cuts", "z_LP", "z_LP_cuts", "wall_time_s"]

_MODES = ("default", "basic", "more")


@dataclass(frozen=True)
class SolverConfig:
    """Tuning knobs; the defaults reproduce the standard setup."""

    rel_gap: float = 0.001
    time_limit_s: float = 3600.0
    strengthen_rounds: int = 5
    cycle_mode: str = "default"
    expansion_k: int = 2
    sample_fraction: float = 1.0
    seed: int = 0
    use_cycle_formulation: bool = False

    def __post_init__(self):
        if self.cycle_mode not in _MODES:
            raise ValueError(f"cycle_mode must be one of {_MODES}")
        if self.rel_gap < 0 or self.strengthen_rounds < 0:
            raise ValueError("rel_gap and strengthen_rounds must be nonnegative")


@dataclass
class SolveResult:
    """Outcome of one solve; incumbent fields are None when none exists."""

    status: str
    x: dict[int, float] | None = None
    f: dict[int, float] | None = None
    theta: dict[int, float] | None = None
    p: dict[int, float] | None = None
    objective: float | None = None
    best_bound: float | None = None
    gap: float | None = None
    nodes: int = 0
    cuts_added: int = 0
    root_lp_values: tuple[float | None, float | None] = (None, None)
    wall_time_s: float = 0.0


class RootRelaxationError(RuntimeError):
    """Root LP did not come back optimal; carries the LP status."""

    def __init__(self, status: str, z_lp: float | None = None):
        super().__init__(f"root relaxation {status}")
        self.status = status
        self.z_lp = z_lp


def strengthen_root(model: MilpModel, cycles: CycleSet, rounds: int,
                    viol_tol: float = VIOL_TOL):
    """Add separated cycle inequalities to the root until none violate.

    Returns (model, z_LP, z_LP_cuts, cuts_added) where z_LP is the
    plain relaxation value and z_LP_cuts the value after the last
    round.  Raises RootRelaxationError when any root solve is not
    optimal; infeasibility after valid cuts proves the instance itself
    infeasible.
    """
    lp = model.lp
    sol = solve(lp)
    if sol.status != "optimal":
        raise RootRelaxationError(sol.status)
    z_lp = sol.obj
    n_cuts = 0
    pool = set()
    for _ in range(rounds):
        if len(cycles) == 0:
            break
        f_hat = {lid: sol.x[col] for lid, col in model.vmap.flow.items()}
        x_hat = {lid: sol.x[col] for lid, col in model.vmap.x.items()}
        new_rows = []
        for cyc in cycles:
            for cut in separate_all(make_context(cyc, f_hat, x_hat), viol_tol):
                if cut.key() in pool:
                    continue
                pool.add(cut.key())
                new_rows.append(inequality_row(cut, model.vmap))
        if not new_rows:
            break
        lp = add_rows(lp, new_rows)
        n_cuts += len(new_rows)
        sol = solve(lp, warm=sol.basis)
        if sol.status != "optimal":
            raise RootRelaxationError(sol.status, z_lp)
    strengthened = MilpModel(lp, model.vmap, model.integer_cols, model.net, model.bigm)
    return strengthened, z_lp, sol.obj, n_cuts


def _union_find(bus_ids):
    parent = {b: b for b in bus_ids}

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    def union(u, v):
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        parent[max(ru, rv)] = min(ru, rv)
        return True

    return find, union


def _forest_and_chords(net: PowerNetwork, x):
    find, union = _union_find([b.id for b in net.buses])
    tree, chords = [], []
    for ln in net.lines:
        if x[ln.id] < 0.5:
            continue
        (tree if union(ln.from_bus, ln.to_bus) else chords).append(ln)
    return tree, chords


def _forest_angles(net: PowerNetwork, tree, f):
    adj: dict[int, list] = {b.id: [] for b in net.buses}
    for ln in tree:
        adj[ln.from_bus].append((ln.to_bus, -f[ln.id] / ln.susceptance))
        adj[ln.to_bus].append((ln.from_bus, f[ln.id] / ln.susceptance))
    theta: dict[int, float] = {}
    for root in sorted(adj):
        if root in theta:
            continue
        theta[root] = 0.0
        stack = [root]
        while stack:
            u = stack.pop()
            for v, step in adj[u]:
                if v not in theta:
                    theta[v] = theta[u] + step
                    stack.append(v)
    return theta


def lazy_kvl_check(net: PowerNetwork, x, f, kvl_tol: float = KVL_TOL) -> Cycle | None:
    """Flow-consistency screen for an integral candidate.

    Fixes angles along a spanning forest of the active lines and
    returns the tree cycle of the active chord with the largest
    angle-versus-flow residual, or None when every residual is within
    ``kvl_tol``.
    """
    tree, chords = _forest_and_chords(net, x)
    if not chords:
        return None
    theta = _forest_angles(net, tree, f)
    worst, worst_r = None, kvl_tol
    for ln in chords:
        r = abs(theta[ln.from_bus] - theta[ln.to_bus] - f[ln.id] / ln.susceptance)
        if r > worst_r:
            worst, worst_r = ln, r
    if worst is None:
        return None
    return cycle_of_chord(net, [ln.id for ln in tree], worst)


def recover_angles(net: PowerNetwork, x, f):
    """Angles consistent with the active flows, zero at each component's
    lowest-indexed bus; valid once lazy_kvl_check finds nothing."""
    tree, _ = _forest_and_chords(net, x)
    return _forest_angles(net, tree, f)


def repair_connected(net: PowerNetwork, x, f, p):
    """Close the cheapest set of forest edges joining active components.

    Scans off lines in id order and turns one on, carrying zero flow,
    whenever it joins two components; no cycle among active lines is
    created, so flow consistency and the objective are untouched.
    """
    find, union = _union_find([b.id for b in net.buses])
    for ln in net.lines:
        if x[ln.id] >= 0.5:
            union(ln.from_bus, ln.to_bus)
    x2, f2 = dict(x), dict(f)
    for ln in net.lines:
        if x2[ln.id] < 0.5 and union(ln.from_bus, ln.to_bus):
            x2[ln.id] = 1.0
            f2[ln.id] = 0.0
    return x2, f2, p


def _gap(obj: float, bound: float) -> float:
    return (obj - bound) / max(abs(obj), _GAP_EPS)


def branch_and_bound(model: MilpModel, config: SolverConfig, lazy_source,
                     t0: float | None = None, root_cuts: int = 0,
                     root_lp_values=(None, None)) -> SolveResult:
    """Deterministic best-bound search over the binary line variables.

    Branches on the most fractional variable (ties to the lowest line
    id); integral candidates pass through ``lazy_source``, and a
    returned cycle contributes its two big-M rows to every open node
    instead of an incumbent.
    """
    start = time.monotonic() if t0 is None else t0
    base_lp = model.lp
    vmap = model.vmap
    col_to_lid = {col: lid for lid, col in vmap.x.items()}
    int_cols = sorted(model.integer_cols, key=lambda c: col_to_lid[c])

    incumbent = None
    inc_obj = float("inf")
    nodes = 0
    cuts = root_cuts
    lazy_pool = set()
    counter = 0
    heap = [(-float("inf"), counter, (), None)]
    status = None
    best_bound = -float("inf")

    def timed_out():
        return time.monotonic() - start > config.time_limit_s

    while heap:
        bound, _, overrides, warm = heapq.heappop(heap)
        best_bound = bound
        if incumbent is not None:
            if _gap(inc_obj, bound) <= config.rel_gap:
                break
            if bound >= inc_obj - _GAP_EPS * (1.0 + abs(inc_obj)):
                break
        if timed_out():
            status = "feasible-time-limit" if incumbent is not None else "infeasible-unknown"
            break

        lp = base_lp.copy()
        for col, lo, hi in overrides:
            lp.set_bounds(col, lo, hi)
        nodes += 1
        lazy_rounds = 0
        while True:
            sol = solve(lp, warm=warm)
            if sol.status == "unbounded":
                return SolveResult(status="unbounded", nodes=nodes, cuts_added=cuts,
                                   root_lp_values=root_lp_values,
                                   wall_time_s=time.monotonic() - start)
            if sol.status != "optimal":
                break
            node_obj = sol.obj
            if incumbent is not None and node_obj >= inc_obj - _GAP_EPS * (1.0 + abs(inc_obj)):
                break
            frac = [(abs(sol.x[c] - round(sol.x[c])), c) for c in int_cols]
            fractional = [(d, c) for d, c in frac if d > _INT_TOL]
            if fractional:
                worst = max(d for d, _ in fractional)
                branch_col = next(c for d, c in fractional if d == worst)
                for lo, hi in ((0.0, 0.0), (1.0, 1.0)):
                    counter += 1
                    heapq.heappush(heap, (node_obj, counter,
                                          overrides + ((branch_col, lo, hi),),
                                          sol.basis))
                break
            x_hat = {lid: float(round(sol.x[col])) for lid, col in vmap.x.items()}
            f_hat = {lid: sol.x[col] for lid, col in vmap.flow.items()}
            cyc = lazy_source(x_hat, f_hat)
            if cyc is None:
                if node_obj < inc_obj:
                    inc_obj = node_obj
                    incumbent = sol
                break
            lazy_rounds += 1
            if lazy_rounds > 10 * max(1, len(model.net.lines)):
                raise RuntimeError("lazy cycle rows failed to converge")
            if cyc.edge_ids not in lazy_pool:
                lazy_pool.add(cyc.edge_ids)
                rows = cycle_cut_rows(cyc, vmap)
                base_lp = add_rows(base_lp, rows)
                cuts += len(rows)
            lp = add_rows(lp, cycle_cut_rows(cyc, vmap))
            warm = sol.basis
        if timed_out() and heap:
            status = "feasible-time-limit" if incumbent is not None else "infeasible-unknown"
            break

    wall = time.monotonic() - start
    if status is None:
        if incumbent is None:
            return SolveResult(status="infeasible", nodes=nodes, cuts_added=cuts,
                               root_lp_values=root_lp_values, wall_time_s=wall)
        status = "optimal-within-gap"
        if not heap:
            best_bound = inc_obj  # search exhausted: the incumbent is the bound
    if incumbent is None:
        return SolveResult(status=status, nodes=nodes, cuts_added=cuts,
                           root_lp_values=root_lp_values, wall_time_s=wall)
    x_out = {lid: float(round(incumbent.x[col])) for lid, col in vmap.x.items()}
    f_out = {lid: incumbent.x[col] for lid, col in vmap.flow.items()}
    p_out = {gi: incumbent.x[col] for gi, col in vmap.pg.items()}
    theta_out = ({bid: incumbent.x[col] for bid, col in vmap.theta.items()}
                 if vmap.theta else None)
    bound_out = best_bound if best_bound > -float("inf") else inc_obj
    bound_out = min(bound_out, inc_obj)
    return SolveResult(status=status, x=x_out, f=f_out, theta=theta_out, p=p_out,
                       objective=inc_obj, best_bound=bound_out,
                       gap=max(0.0, _gap(inc_obj, bound_out)), nodes=nodes,
                       cuts_added=cuts, root_lp_values=root_lp_values, wall_time_s=wall)


def _cycles_for_mode(net: PowerNetwork, config: SolverConfig) -> CycleSet:
    if config.cycle_mode == "default":
        return CycleSet()
    cs = cycle_basis(net)
    if config.cycle_mode == "more":
        for _ in range(config.expansion_k):
            cs = expand_cycle_set(cs)
        cs = sample_cycles(cs, config.sample_fraction, config.seed)
    return cs


def solve_ots(net: PowerNetwork, config: SolverConfig | None = None,
              n_off: int | None = None) -> SolveResult:
    """Solve the switching problem end to end.

    Builds the angle model (or the angle-free one when configured),
    optionally caps the number of open lines at ``n_off``, strengthens
    the root per the cycle mode, runs branch-and-bound with the lazy
    consistency check, and post-processes the incumbent into a
    connected topology with recovered angles.
    """
    if config is None:
        config = SolverConfig()
    t0 = time.monotonic()
    model = build_ots_cycle(net) if config.use_cycle_formulation else build_ots_angle(net)
    if n_off is not None:
        model = add_switching_budget(model, n_off)
    cycles = _cycles_for_mode(net, config)
    rounds = 0 if config.cycle_mode == "default" else config.strengthen_rounds
    try:
        model, z_lp, z_cuts, n_cuts = strengthen_root(model, cycles, rounds)
    except RootRelaxationError as err:
        status = "infeasible" if err.status == "infeasible" else "unbounded"
        return SolveResult(status=status, root_lp_values=(err.z_lp, None),
                           wall_time_s=time.monotonic() - t0)
    res = branch_and_bound(model, config, lambda x, f: lazy_kvl_check(net, x, f),
                           t0=t0, root_cuts=n_cuts, root_lp_values=(z_lp, z_cuts))
    if res.x is not None:
        res.x, res.f, res.p = repair_connected(net, res.x, res.f, res.p)
        res.theta = recover_angles(net, res.x, res.f)
        res.wall_time_s = time.monotonic() - t0
    return res


def result_to_doc(res: SolveResult, instance: str | None = None,
                  mode: str | None = None) -> dict:
    """JSON-ready record of a solve outcome."""
    doc = {
        "status": res.status,
        "objective": res.objective,
        "best_bound": res.best_bound,
        "gap": res.gap,
        "nodes": res.nodes,
        "cuts": res.cuts_added,
        "z_LP": res.root_lp_values[0],
        "z_LP_cuts": res.root_lp_values[1],
        "wall_time_s": res.wall_time_s,
    }
    if instance is not None:
        doc["instance"] = instance
    if mode is not None:
        doc["mode"] = mode
    if res.x is not None:
        doc["x"] = {str(k): v for k, v in sorted(res.x.items())}
        doc["f"] = {str(k): v for k, v in sorted(res.f.items())}
        doc["p"] = {str(k): v for k, v in sorted(res.p.items())}
        doc["theta"] = {str(k): v for k, v in sorted(res.theta.items())}
    return doc


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def result_csv_row(res: SolveResult, instance: str, mode: str) -> list[str]:
    """One benchmark CSV row in the fixed column order."""
    return [instance, mode, res.status, _fmt(res.objective), _fmt(res.best_bound),
            _fmt(res.gap), str(res.nodes), str(res.cuts_added),
            _fmt(res.root_lp_values[0]), _fmt(res.root_lp_values[1]),
            _fmt(res.wall_time_s)]
