"""Independent brute-force and LP verification of the polyhedral claims.

Everything here is deliberately redundant with the main solver: LPs go
through scipy's HiGHS rather than the in-repo simplex, ranks are
computed in exact rational arithmetic, and ground truth for switching
instances comes from enumerating topologies outright.  The cycle
relaxation S_C is handled in normalized coordinates g_a =
sigma_a f_a / B_a, where capacities become the weights w_a and the
all-closed flow-sum condition reads sum(g) = 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from dcots.cuts import delta
from dcots.cyclebasis import cycle_basis
from dcots.formulations import build_opf_angle, build_opf_cycle
from dcots.lp import LinearProgram
from dcots.network import PowerNetwork, build_network
from dcots.solver import recover_angles

__all__ = [
    "HullCheckReport",
    "SubsetSumInstance",
    "solve_lp_reference",
    "exact_rank",
    "hull_rows",
    "enumerate_S_C_vertices",
    "check_hull_equality",
    "membership_extended",
    "check_projection_prop4",
    "check_facets",
    "reduce_subset_sum",
    "subset_sum_brute",
    "subset_sum_witness",
    "reduction_ots_feasible",
    "reduction_witness_angles",
    "fixed_injection_feasible",
    "dispatch_lp",
    "brute_force_ots",
    "check_opf_equivalence",
]

_FLOW_TOL = 1e-8


def solve_lp_reference(lp: LinearProgram):
    """Solve a LinearProgram with scipy's HiGHS as an independent route."""
    n = lp.n_cols
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, sense, rhs in lp.rows:
        row = np.zeros(n)
        for c, v in coeffs:
            row[c] += v
        if sense == "<=":
            a_ub.append(row)
            b_ub.append(rhs)
        elif sense == ">=":
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            a_eq.append(row)
            b_eq.append(rhs)
    res = linprog(np.asarray(lp.obj),
                  A_ub=np.array(a_ub) if a_ub else None,
                  b_ub=np.array(b_ub) if b_ub else None,
                  A_eq=np.array(a_eq) if a_eq else None,
                  b_eq=np.array(b_eq) if b_eq else None,
                  bounds=list(zip(lp.lo, lp.hi)), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    return status, (res.fun if res.status == 0 else None), res.x


def exact_rank(rows) -> int:
    """Rank of a rational matrix by fraction-exact Gaussian elimination."""
    mat = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    n_cols = len(mat[0]) if mat else 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(mat)) if mat[r][col] != 0), None)
        if pivot is None:
            continue
        mat[rank], mat[pivot] = mat[pivot], mat[rank]
        inv = 1 / mat[rank][col]
        mat[rank] = [v * inv for v in mat[rank]]
        for r in range(len(mat)):
            if r != rank and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [a - factor * b for a, b in zip(mat[r], mat[rank])]
        rank += 1
        if rank == len(mat):
            break
    return rank


# ---------------------------------------------------------------------------
# the single-cycle relaxation S_C, in normalized (g, x) coordinates


def _positive_delta_subsets(w):
    n = len(w)
    for mask in range(1, 1 << n):
        s = tuple(a for a in range(n) if mask >> a & 1)
        if delta(s, w) > 0.0:
            yield s


def hull_rows(w, drop=None):
    """Inequality description of conv(S_C): both cut sides per heavy
    subset plus the capacity rows, as (A_ub, b_ub) over [g, x].

    ``drop`` removes one (side, subset) row for negative controls.
    """
    n = len(w)
    rows, rhs = [], []
    for s in _positive_delta_subsets(w):
        d = delta(s, w)
        for side in (1.0, -1.0):
            if drop is not None and drop == (side, frozenset(s)):
                continue
            row = np.zeros(2 * n)
            for a in s:
                row[a] = side
                row[n + a] = d - w[a]
            for a in range(n):
                if a not in s:
                    row[n + a] = d
            rows.append(row)
            rhs.append(d * (n - 1))
    for a in range(n):
        for side in (1.0, -1.0):
            row = np.zeros(2 * n)
            row[a] = side
            row[n + a] = -w[a]
            rows.append(row)
            rhs.append(0.0)
    return np.array(rows), np.array(rhs)


def enumerate_S_C_vertices(w) -> np.ndarray:
    """All vertices of the pieces of S_C, rows [g | x], de-duplicated.

    A fully closed cycle contributes the vertices of the capacity box
    cut by the zero-flow-sum hyperplane; any other on/off pattern
    contributes the corners of its restricted box.
    """
    n = len(w)
    w = np.asarray(w, dtype=float)
    points = []
    for bits in itertools.product((0.0, 1.0), repeat=n):
        x = np.array(bits)
        if all(b == 1.0 for b in bits):
            for free in range(n):
                others = [a for a in range(n) if a != free]
                for signs in itertools.product((1.0, -1.0), repeat=n - 1):
                    g = np.zeros(n)
                    g[others] = np.array(signs) * w[others]
                    g[free] = -g[others].sum()
                    if abs(g[free]) <= w[free] + 1e-12:
                        points.append(np.concatenate([g, x]))
        else:
            on = [a for a in range(n) if bits[a] == 1.0]
            for signs in itertools.product((1.0, -1.0), repeat=len(on)):
                g = np.zeros(n)
                for a, s in zip(on, signs):
                    g[a] = s * w[a]
                points.append(np.concatenate([g, x]))
    pts = np.array(points)
    return np.unique(np.round(pts, 9), axis=0)


@dataclass(frozen=True)
class HullCheckReport:
    cycle_size: int
    trials: int
    max_gap: float
    worst_objective: tuple[float, ...] | None


def check_hull_equality(w, trials: int = 200, seed: int = 0,
                        drop=None) -> HullCheckReport:
    """Random-objective comparison of the vertex hull against the
    inequality description; equal maxima for every objective certify
    that the description is exactly the convex hull."""
    n = len(w)
    verts = enumerate_S_C_vertices(w)
    a_ub, b_ub = hull_rows(w, drop=drop)
    bounds = [(-wa, wa) for wa in w] + [(0.0, 1.0)] * n
    rng = np.random.default_rng(seed)
    max_gap, worst = 0.0, None
    for _ in range(trials):
        c = rng.standard_normal(2 * n)
        vertex_best = float((verts @ c).max())
        res = linprog(-c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        assert res.status == 0
        gap = abs(-res.fun - vertex_best)
        if gap > max_gap:
            max_gap, worst = gap, tuple(c)
    return HullCheckReport(n, trials, max_gap, worst)


def directional_gap(w, objective, drop=None) -> float:
    """Description max minus vertex max along one objective."""
    verts = enumerate_S_C_vertices(w)
    a_ub, b_ub = hull_rows(w, drop=drop)
    n = len(w)
    bounds = [(-wa, wa) for wa in w] + [(0.0, 1.0)] * n
    c = np.asarray(objective, dtype=float)
    res = linprog(-c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    assert res.status == 0
    return float(-res.fun - (verts @ c).max())


def membership_extended(g, x, w) -> bool:
    """Hull membership decided by the extended system's feasibility.

    Free variables are the closed-side flows and the cycle indicator;
    the split flows on the open side are eliminated as f - f1.
    """
    n = len(w)
    g = np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    if (np.abs(g) > w * x + 1e-9).any() or (x < -1e-9).any() or (x > 1 + 1e-9).any():
        return False
    # columns: f1 (n), y
    a_ub, b_ub = [], []

    def row(f1_coeffs, y_coeff, rhs):
        a_ub.append(np.concatenate([f1_coeffs, [y_coeff]]))
        b_ub.append(rhs)

    for a in range(n):
        e = np.zeros(n)
        e[a] = 1.0
        row(e, -w[a], 0.0)                      # f1 <= w y
        row(-e, -w[a], 0.0)                     # -f1 <= w y
        row(-e, w[a], w[a] * x[a] - g[a])       # g - f1 <= w (x - y)
        row(e, w[a], w[a] * x[a] + g[a])        # f1 - g <= w (x - y)
        row(np.zeros(n), 1.0, x[a])             # y <= x_a
    row(np.zeros(n), -1.0, -(x.sum() - (n - 1)))  # sum x - y <= n - 1
    a_eq = [np.concatenate([np.ones(n), [0.0]])]
    b_eq = [0.0]
    bounds = [(-float(wa), float(wa)) for wa in w] + [(0.0, 1.0)]
    res = linprog(np.zeros(n + 1), A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                  A_eq=np.array(a_eq), b_eq=np.array(b_eq), bounds=bounds,
                  method="highs")
    return res.status == 0


def check_projection_prop4(w, trials: int = 200, seed: int = 0) -> float:
    """Max objective gap between the extended system and its claimed
    projection onto (g, x, y); zero certifies the projection formula."""
    n = len(w)
    w = np.asarray(w, dtype=float)
    # extended variables: g (n), f1 (n), x (n), y
    ext_rows, ext_rhs = [], []

    def ext(gc, f1c, xc, yc, rhs):
        ext_rows.append(np.concatenate([gc, f1c, xc, [yc]]))
        ext_rhs.append(rhs)

    zeros = np.zeros(n)
    for a in range(n):
        e = np.zeros(n)
        e[a] = 1.0
        ext(zeros, e, zeros, -w[a], 0.0)            # f1 <= w y
        ext(zeros, -e, zeros, -w[a], 0.0)
        ext(e, -e, -w[a] * e, w[a], 0.0)            # g - f1 - w x + w y <= 0
        ext(-e, e, -w[a] * e, w[a], 0.0)
        ext(zeros, zeros, -e, 1.0, 0.0)             # y <= x_a
        ext(e, zeros, -w[a] * e, 0.0, 0.0)          # g <= w x
        ext(-e, zeros, -w[a] * e, 0.0, 0.0)
    ext(zeros, zeros, np.ones(n), -1.0, n - 1.0)    # sum x - y <= n - 1
    ext_eq = [np.concatenate([zeros, np.ones(n), zeros, [0.0]])]
    ext_bounds = ([(-wa, wa) for wa in w] + [(-wa, wa) for wa in w]
                  + [(0.0, 1.0)] * n + [(0.0, 1.0)])

    # projected variables: g (n), x (n), y
    prj_rows, prj_rhs = [], []

    def prj(gc, xc, yc, rhs):
        prj_rows.append(np.concatenate([gc, xc, [yc]]))
        prj_rhs.append(rhs)

    for a in range(n):
        e = np.zeros(n)
        e[a] = 1.0
        prj(e, -w[a] * e, 0.0, 0.0)
        prj(-e, -w[a] * e, 0.0, 0.0)
        prj(zeros, -e, 1.0, 0.0)
    for s in _positive_delta_subsets(tuple(w)):
        d = delta(s, tuple(w))
        gc = np.zeros(n)
        xc = np.zeros(n)
        for a in s:
            gc[a] = 1.0
            xc[a] = -w[a]
        prj(gc, xc, d, 0.0)
        prj(-gc, xc, d, 0.0)
    prj(zeros, np.ones(n), -1.0, n - 1.0)
    prj_bounds = [(-wa, wa) for wa in w] + [(0.0, 1.0)] * n + [(0.0, 1.0)]

    rng = np.random.default_rng(seed)
    max_gap = 0.0
    for _ in range(trials):
        c = rng.standard_normal(2 * n + 1)
        c_ext = np.concatenate([c[:n], np.zeros(n), c[n:]])
        r1 = linprog(-c_ext, A_ub=np.array(ext_rows), b_ub=np.array(ext_rhs),
                     A_eq=np.array(ext_eq), b_eq=[0.0], bounds=ext_bounds,
                     method="highs")
        r2 = linprog(-c, A_ub=np.array(prj_rows), b_ub=np.array(prj_rhs),
                     bounds=prj_bounds, method="highs")
        assert r1.status == 0 and r2.status == 0
        max_gap = max(max_gap, abs(r1.fun - r2.fun))
    return max_gap


# ---------------------------------------------------------------------------
# facet verification in exact arithmetic


def _cut_row_exact(w, subset):
    n = len(w)
    d = 2 * sum(w[a] for a in subset) - sum(w)
    g_coeff = [Fraction(1) if a in subset else Fraction(0) for a in range(n)]
    x_coeff = [d - w[a] if a in subset else d for a in range(n)]
    return g_coeff, x_coeff, d * (n - 1)


def _witness_points(w, subset):
    n = len(w)
    s = sorted(subset)
    comp = [a for a in range(n) if a not in subset]
    w_s = sum(w[a] for a in s)
    rho = sum(w[a] for a in comp) / w_s
    eps = min(w) / 1000
    for _ in range(10):
        ok = all(rho * w[a] + eps <= w[a] for a in s)
        if len(s) > 1:
            ok = ok and all(rho * w[a] - (len(s) - 1) * eps >= -w[a] for a in s)
        if ok:
            break
        eps /= 2
    else:
        raise AssertionError("no feasible epsilon for witness points")
    points = []
    for a_hat in s:  # closed-cycle points riding the face
        f = [None] * n
        for a in s:
            f[a] = rho * w[a] + eps if a != a_hat else rho * w[a] - (len(s) - 1) * eps
        for a in comp:
            f[a] = -w[a]
        points.append((f, [Fraction(1)] * n))
    for a_hat in s:  # one subset line opened
        f = [w[a] if a != a_hat else Fraction(0) for a in range(n)]
        x = [Fraction(1) if a != a_hat else Fraction(0) for a in range(n)]
        points.append((f, x))
    for idx, a_til in enumerate(comp):  # one complement line opened
        f = [w[a] if a in subset else Fraction(0) for a in range(n)]
        x = [Fraction(1) if a != a_til else Fraction(0) for a in range(n)]
        points.append((f, x))
        if len(comp) >= 2:
            a_bar = comp[(idx + 1) % len(comp)]
            f2 = list(f)
            f2[a_bar] = w[a_bar]
            points.append((list(f2), list(x)))
    return points


def check_facets(w, subset) -> bool:
    """Certify one cut as facet-defining by explicit witness points.

    Builds the proof's point families in exact arithmetic, verifies
    each lies in S_C and on the cut's face, and checks the required
    affine (or, with a single complement line, linear) rank.
    """
    n = len(w)
    w = [Fraction(v) for v in w]
    subset = frozenset(subset)
    comp_size = n - len(subset)
    d = 2 * sum(w[a] for a in subset) - sum(w)
    assert d > 0, "facet check requires a heavy subset"
    g_coeff, x_coeff, rhs = _cut_row_exact(w, subset)
    points = _witness_points(w, subset)
    expected = 2 * n if comp_size != 1 else 2 * n - 1
    if len(points) != expected:
        return False
    for f, x in points:
        if any(abs(fa) > wa * xa for fa, wa, xa in zip(f, w, x)):
            return False
        if all(xa == 1 for xa in x) and sum(f) != 0:
            return False
        lhs = sum(gc * fa for gc, fa in zip(g_coeff, f))
        lhs += sum(xc * xa for xc, xa in zip(x_coeff, x))
        if lhs != rhs:
            return False
    if comp_size == 1:
        mat = [list(f) + list(x) for f, x in points]
        return exact_rank(mat) == 2 * n - 1
    base = points[0]
    mat = [[fa - f0 for fa, f0 in zip(f, base[0])]
           + [xa - x0 for xa, x0 in zip(x, base[1])] for f, x in points[1:]]
    return exact_rank(mat) == 2 * n - 1


# ---------------------------------------------------------------------------
# the subset-sum hardness construction


@dataclass(frozen=True)
class SubsetSumInstance:
    a: tuple[int, ...]
    b: int

    def __post_init__(self):
        if any(v <= 0 for v in self.a) or self.b <= 0:
            raise ValueError("subset-sum terms must be positive")


def reduce_subset_sum(inst: SubsetSumInstance) -> PowerNetwork:
    """Network whose switching feasibility encodes a subset-sum query.

    Bus 0 generates exactly two units; one unit must reach the load
    over the direct line, the other over the two-hop corridor, and the
    middle parallel paths can carry the corridor unit exactly when some
    subset of a sums to b.
    """
    n = len(inst.a)
    buses = [(i, 0.0) for i in range(n + 2)] + [(n + 2, 2.0)]
    gens = [(0, 2.0, 2.0, 1.0)]
    lines = []
    for i, ai in enumerate(inst.a, start=1):
        cap = ai / inst.b
        lines.append((len(lines), 0, i, 2.0 * ai, cap))
        lines.append((len(lines), i, n + 1, 2.0 * ai, cap))
    lines.append((len(lines), n + 1, n + 2, 1.0, 1.0))
    lines.append((len(lines), 0, n + 2, inst.b / (inst.b + 1), 1.0))
    return build_network(buses=buses, generators=gens, lines=lines, base_mva=1.0)


def subset_sum_brute(inst: SubsetSumInstance) -> bool:
    reachable = {0}
    for v in inst.a:
        reachable |= {r + v for r in reachable}
    return inst.b in reachable


def subset_sum_witness(inst: SubsetSumInstance) -> tuple[int, ...] | None:
    """Index set of one subset reaching the target, or None."""
    parents: dict[int, tuple[int, ...]] = {0: ()}
    for i, v in enumerate(inst.a):
        for total, picks in list(parents.items()):
            if total + v not in parents:
                parents[total + v] = picks + (i,)
    return parents.get(inst.b)


def _exact_solve(a_rows, rhs):
    mat = [[Fraction(v) for v in row] + [Fraction(r)]
           for row, r in zip(a_rows, rhs)]
    n = len(mat)
    for col in range(n):
        pivot = next(r for r in range(col, n) if mat[r][col] != 0)
        mat[col], mat[pivot] = mat[pivot], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [v * inv for v in mat[col]]
        for r in range(n):
            if r != col and mat[r][col] != 0:
                factor = mat[r][col]
                mat[r] = [x - factor * y for x, y in zip(mat[r], mat[col])]
    return [row[-1] for row in mat]


def reduction_witness_angles(inst: SubsetSumInstance, subset):
    """Exact angles of the reduced network once only the chosen paths
    stay closed, anchored at the load bus; None if any line overloads.

    Everything is rational, so a correct witness reproduces the
    construction's angle values with no rounding at all.
    """
    n = len(inst.a)
    subset = sorted(subset)
    b = inst.b
    # edges as (u, v, susceptance, capacity), buses 0..n+2, load bus last
    edges = []
    for i in subset:
        ai = inst.a[i]
        cap = Fraction(ai, b)
        edges.append((0, i + 1, Fraction(2 * ai), cap))
        edges.append((i + 1, n + 1, Fraction(2 * ai), cap))
    edges.append((n + 1, n + 2, Fraction(1), Fraction(1)))
    edges.append((0, n + 2, Fraction(b, b + 1), Fraction(1)))
    active_buses = sorted({0, n + 1, n + 2} | {i + 1 for i in subset})
    idx = {bus: k for k, bus in enumerate(active_buses)}
    inj = {bus: Fraction(0) for bus in active_buses}
    inj[0] = Fraction(2)
    inj[n + 2] = Fraction(-2)
    m = len(active_buses)
    lap = [[Fraction(0)] * m for _ in range(m)]
    for u, v, sus, _ in edges:
        iu, iv = idx[u], idx[v]
        lap[iu][iu] += sus
        lap[iv][iv] += sus
        lap[iu][iv] -= sus
        lap[iv][iu] -= sus
    anchor = idx[n + 2]
    keep = [k for k in range(m) if k != anchor]
    sub_rows = [[lap[r][c] for c in keep] for r in keep]
    sub_rhs = [inj[active_buses[r]] for r in keep]
    solution = _exact_solve(sub_rows, sub_rhs)
    theta = {active_buses[anchor]: Fraction(0)}
    for k, val in zip(keep, solution):
        theta[active_buses[k]] = val
    for u, v, sus, cap in edges:
        if abs(sus * (theta[u] - theta[v])) > cap:
            return None
    return theta


def fixed_injection_feasible(net: PowerNetwork, active_ids) -> bool:
    """Exact feasibility of one topology when every injection is fixed.

    Solves each active component's reduced angle system and checks the
    implied flows against capacities; components must balance exactly.
    """
    inj = {b.id: -b.load for b in net.buses}
    for g in net.generators:
        if g.p_min != g.p_max:
            raise ValueError("injections are not fixed")
        inj[g.bus] += g.p_min
    active = [ln for ln in net.lines if ln.id in active_ids]
    comp = {b.id: b.id for b in net.buses}

    def find(u):
        while comp[u] != u:
            comp[u] = comp[comp[u]]
            u = comp[u]
        return u

    for ln in active:
        comp[find(ln.from_bus)] = find(ln.to_bus)
    groups: dict[int, list[int]] = {}
    for b in net.buses:
        groups.setdefault(find(b.id), []).append(b.id)
    scale = max(1.0, max(abs(v) for v in inj.values()) if inj else 1.0)
    for members in groups.values():
        total = sum(inj[b] for b in members)
        if abs(total) > _FLOW_TOL * scale:
            return False
        if len(members) == 1:
            continue
        idx = {b: k for k, b in enumerate(members)}
        lap = np.zeros((len(members), len(members)))
        lines_here = [ln for ln in active if ln.from_bus in idx and ln.to_bus in idx]
        for ln in lines_here:
            u, v = idx[ln.from_bus], idx[ln.to_bus]
            lap[u, u] += ln.susceptance
            lap[v, v] += ln.susceptance
            lap[u, v] -= ln.susceptance
            lap[v, u] -= ln.susceptance
        rhs = np.array([inj[b] for b in members])
        theta = np.zeros(len(members))
        theta[1:] = np.linalg.solve(lap[1:, 1:], rhs[1:])
        for ln in lines_here:
            flow = ln.susceptance * (theta[idx[ln.from_bus]] - theta[idx[ln.to_bus]])
            if abs(flow) > ln.capacity + _FLOW_TOL * scale:
                return False
    return True


def reduction_ots_feasible(inst: SubsetSumInstance) -> bool:
    """Exhaustive topology feasibility of the reduced network.

    A half-open middle path is a dangling active line carrying zero
    flow, so every topology is flow-equivalent to a choice of fully
    closed paths plus the two corridor lines; each such class is
    checked exactly.
    """
    n = len(inst.a)
    for mask in range(1 << n):
        kept = [i for i in range(n) if mask >> i & 1]
        for direct_on in (True, False):
            for corridor_on in (True, False):
                buses = [(i, 0.0) for i in range(n + 2)] + [(n + 2, 2.0)]
                gens = [(0, 2.0, 2.0, 1.0)]
                lines = []
                for i in kept:
                    ai = inst.a[i]
                    cap = ai / inst.b
                    lines.append((len(lines), 0, i + 1, 2.0 * ai, cap))
                    lines.append((len(lines), i + 1, n + 1, 2.0 * ai, cap))
                if corridor_on:
                    lines.append((len(lines), n + 1, n + 2, 1.0, 1.0))
                if direct_on:
                    lines.append((len(lines), 0, n + 2, inst.b / (inst.b + 1), 1.0))
                if not lines:
                    continue
                sub = build_network(buses=buses, generators=gens, lines=lines,
                                    base_mva=1.0)
                if fixed_injection_feasible(sub, {ln.id for ln in sub.lines}):
                    return True
    return False


# ---------------------------------------------------------------------------
# brute-force switching ground truth


def dispatch_lp(net: PowerNetwork, active_ids):
    """Min-cost dispatch on one topology via the reference LP solver."""
    gens = net.generators
    m, nb = len(net.lines), len(net.buses)
    bus_idx = {b.id: k for k, b in enumerate(net.buses)}
    nvar = len(gens) + m + nb  # p, f, theta
    a_eq, b_eq = [], []
    for b in net.buses:
        row = np.zeros(nvar)
        for gi, g in enumerate(gens):
            if g.bus == b.id:
                row[gi] = 1.0
        for li, ln in enumerate(net.lines):
            if ln.from_bus == b.id:
                row[len(gens) + li] -= 1.0
            if ln.to_bus == b.id:
                row[len(gens) + li] += 1.0
        a_eq.append(row)
        b_eq.append(b.load)
    for li, ln in enumerate(net.lines):
        if ln.id not in active_ids:
            continue
        row = np.zeros(nvar)
        row[len(gens) + li] = 1.0
        row[len(gens) + m + bus_idx[ln.from_bus]] = -ln.susceptance
        row[len(gens) + m + bus_idx[ln.to_bus]] = ln.susceptance
        a_eq.append(row)
        b_eq.append(0.0)
    bounds = [(g.p_min, g.p_max) for g in gens]
    for ln in net.lines:
        cap = ln.capacity if ln.id in active_ids else 0.0
        bounds.append((-cap, cap))
    bounds += [(None, None)] * nb
    cost = np.concatenate([[g.cost for g in gens], np.zeros(m + nb)])
    res = linprog(cost, A_eq=np.array(a_eq), b_eq=np.array(b_eq),
                  bounds=bounds, method="highs")
    if res.status != 0:
        return None, None
    return float(res.fun), {ln.id: float(res.x[len(gens) + li])
                            for li, ln in enumerate(net.lines)}


def _component_screen(net: PowerNetwork, active_ids) -> bool:
    comp = {b.id: b.id for b in net.buses}

    def find(u):
        while comp[u] != u:
            comp[u] = comp[comp[u]]
            u = comp[u]
        return u

    for ln in net.lines:
        if ln.id in active_ids:
            comp[find(ln.from_bus)] = find(ln.to_bus)
    load: dict[int, float] = {}
    pmin: dict[int, float] = {}
    pmax: dict[int, float] = {}
    for b in net.buses:
        root = find(b.id)
        load[root] = load.get(root, 0.0) + b.load
        pmin.setdefault(root, 0.0)
        pmax.setdefault(root, 0.0)
    for g in net.generators:
        root = find(g.bus)
        pmin[root] += g.p_min
        pmax[root] += g.p_max
    return all(pmin[r] - 1e-9 <= load[r] <= pmax[r] + 1e-9 for r in load)


def brute_force_ots(net: PowerNetwork, early_exit_feasible: bool = False):
    """Ground-truth switching optimum by full topology enumeration.

    Iterates every on/off pattern of the switchable lines, screens each
    for per-component supply bounds, solves the surviving dispatch LPs,
    and returns (best objective, best pattern) or (None, None).
    """
    switchable = [ln.id for ln in net.lines if ln.switchable]
    always_on = {ln.id for ln in net.lines if not ln.switchable}
    best_obj, best_x = None, None
    for mask in range(1 << len(switchable)):
        active = always_on | {switchable[i] for i in range(len(switchable))
                              if mask >> i & 1}
        if not _component_screen(net, active):
            continue
        obj, _ = dispatch_lp(net, active)
        if obj is None:
            continue
        if early_exit_feasible:
            return obj, {lid: (1.0 if lid in active else 0.0)
                         for lid in (ln.id for ln in net.lines)}
        if best_obj is None or obj < best_obj - 1e-12:
            best_obj = obj
            best_x = {ln.id: (1.0 if ln.id in active else 0.0) for ln in net.lines}
    return best_obj, best_x


def check_opf_equivalence(net: PowerNetwork):
    """Angle-vs-cycle dispatch agreement through the reference solver.

    Returns (status, objective gap, flow reconstruction gap, objective);
    the flow gap re-derives flows from recovered angles on the cycle
    solution and measures the worst line discrepancy.
    """
    lp_a, vmap_a = build_opf_angle(net)
    lp_c, vmap_c = build_opf_cycle(net, cycle_basis(net))
    st_a, obj_a, _ = solve_lp_reference(lp_a)
    st_c, obj_c, x_c = solve_lp_reference(lp_c)
    if st_a != st_c:
        return f"status-mismatch:{st_a}/{st_c}", None, None, None
    if st_a != "optimal":
        return st_a, None, None, None
    f_c = {lid: float(x_c[col]) for lid, col in vmap_c.flow.items()}
    theta = recover_angles(net, {ln.id: 1.0 for ln in net.lines}, f_c)
    flow_gap = max(abs(ln.susceptance * (theta[ln.from_bus] - theta[ln.to_bus])
                       - f_c[ln.id]) for ln in net.lines)
    return "optimal", abs(obj_a - obj_c), flow_gap, obj_a
