"""
When opening a line helps
=========================

DC flows obey Kirchhoff's voltage law around every closed cycle, so an
extra line can overload a corridor that was fine without it.  On this
instance the all-lines-on dispatch is infeasible, and switching a
single line off restores it: the discrete analogue of the Braess
paradox, swept over an increasing switching budget.
"""

from dcots.oracle import SubsetSumInstance, dispatch_lp, reduce_subset_sum
from dcots.solver import SolverConfig, repair_connected, solve_ots

net = reduce_subset_sum(SubsetSumInstance((1, 2), 2))
print(f"{len(net.buses)} buses, {len(net.lines)} lines, "
      f"load {sum(b.load for b in net.buses)} served from bus 0")

# With every line in service the cycle constraints force more flow into
# the tight corridor than it can carry.
obj, _ = dispatch_lp(net, [ln.id for ln in net.lines])
print("all lines on:", "infeasible" if obj is None else f"cost {obj}")

# Sweep the budget: at most N lines may be opened.
for n_off in range(0, 4):
    res = solve_ots(net, SolverConfig(rel_gap=0.0), n_off=n_off)
    if res.objective is None:
        print(f"  budget N={n_off}: {res.status}")
        continue
    opened = sorted(i for i, v in res.x.items() if v < 0.5)
    print(f"  budget N={n_off}: cost {res.objective:.6f}, opened lines {opened}")

# The unconstrained solve picks the same remedy, and the connectivity
# repair re-closes any line whose loss would split the grid, at no cost.
res = solve_ots(net, SolverConfig(rel_gap=0.0))
x2, f2, p2 = repair_connected(net, res.x, res.f, res.p)
print("final topology:", {i: int(v) for i, v in sorted(x2.items())},
      "| cost", res.objective)
assert res.objective == 2.0
