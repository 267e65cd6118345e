"""Power network model, file formats, and instance generation recipes.

A network is a multigraph of buses and lines plus a generator set.  All
mathematical modules read per-unit quantities; the dataclasses also retain
the raw MW-denominated numbers so that writing a network back to disk and
re-reading it reproduces the per-unit values bit for bit.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np

__all__ = [
    "Bus",
    "Generator",
    "Line",
    "PowerNetwork",
    "ValidationReport",
    "build_network",
    "parse_native",
    "parse_matpower",
    "serialize_native",
    "validate",
    "perturb_loads",
    "augment_with_cycle",
    "relocate_generators",
    "random_connected_network",
]


@dataclass(frozen=True)
class Bus:
    """A bus with its active power demand.

    Attributes
    ----------
    id : int
        Unique bus identifier.
    load : float
        Active power demand in per-unit.
    load_mw : float
        The same demand in MW, as written in instance files.
    """

    id: int
    load: float
    load_mw: float


@dataclass(frozen=True)
class Generator:
    """A dispatchable generator attached to one bus.

    Attributes
    ----------
    bus : int
        Bus the generator injects at.
    p_min, p_max : float
        Output bounds in per-unit, 0 <= p_min <= p_max.
    cost : float
        Linear cost per per-unit output; equals cost_per_mwh * base_mva,
        so objective values come out in currency units.
    """

    bus: int
    p_min: float
    p_max: float
    cost: float
    pmin_mw: float
    pmax_mw: float
    cost_per_mwh: float


@dataclass(frozen=True)
class Line:
    """A transmission line between two buses.

    Attributes
    ----------
    id : int
        Unique line identifier.
    from_bus, to_bus : int
        Endpoints; flow is signed positive from ``from_bus`` to ``to_bus``.
    susceptance : float
        Per-unit susceptance, > 0.
    capacity : float
        Per-unit thermal limit on |flow|, > 0.
    switchable : bool
        Whether the solver may open this line.
    """

    id: int
    from_bus: int
    to_bus: int
    susceptance: float
    capacity: float
    capacity_mw: float
    switchable: bool

    @property
    def w(self) -> float:
        """Capacity over susceptance; the line's weight in cycle arithmetic."""
        return self.capacity / self.susceptance


@dataclass(frozen=True)
class PowerNetwork:
    """An immutable network instance.

    Buses, generators, and lines are kept in the order they were defined;
    line order is the column/row order used by every matrix built from the
    network.
    """

    base_mva: float
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    lines: tuple[Line, ...]

    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    def line_by_id(self, line_id: int) -> Line:
        for ln in self.lines:
            if ln.id == line_id:
                return ln
        raise KeyError(f"no line with id {line_id}")

    def bus_by_id(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(f"no bus with id {bus_id}")

    def graph(self) -> nx.MultiGraph:
        """Undirected multigraph with edges keyed by line id."""
        g = nx.MultiGraph()
        g.add_nodes_from(b.id for b in self.buses)
        for ln in self.lines:
            g.add_edge(ln.from_bus, ln.to_bus, key=ln.id)
        return g

    def total_load(self) -> float:
        return sum(b.load for b in self.buses)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...]


def build_network(buses, generators, lines, base_mva: float = 1.0) -> PowerNetwork:
    """Construct a network from per-unit tuples.

    Parameters
    ----------
    buses : iterable of (id, load)
    generators : iterable of (bus, p_min, p_max, cost)
    lines : iterable of (id, from, to, susceptance, capacity) or the same
        with a trailing ``switchable`` flag (default True).
    base_mva : float
        MVA base; with the default of 1.0 the stored MW numbers equal the
        per-unit numbers exactly.

    Returns
    -------
    PowerNetwork
    """
    b = tuple(Bus(int(i), float(d), float(d) * base_mva) for i, d in buses)
    g = tuple(
        Generator(int(i), float(lo), float(hi), float(c),
                  float(lo) * base_mva, float(hi) * base_mva, float(c) / base_mva)
        for i, lo, hi, c in generators
    )
    ls = []
    for row in lines:
        if len(row) == 5:
            lid, u, v, sus, cap = row
            sw = True
        else:
            lid, u, v, sus, cap, sw = row
        ls.append(Line(int(lid), int(u), int(v), float(sus), float(cap),
                       float(cap) * base_mva, bool(sw)))
    return PowerNetwork(float(base_mva), b, g, tuple(ls))


# ---------------------------------------------------------------------------
# native JSON format

_BUS_KEYS = {"id", "load_mw"}
_GEN_KEYS = {"bus", "pmin_mw", "pmax_mw", "cost_per_mwh"}
_LINE_KEYS = {"id", "from", "to", "susceptance_pu", "capacity_mw", "switchable"}


def _check_keys(obj: dict, wanted: set, what: str) -> None:
    missing = wanted - obj.keys()
    extra = obj.keys() - wanted
    if missing:
        raise ValueError(f"{what}: missing keys {sorted(missing)}")
    if extra:
        raise ValueError(f"{what}: unknown keys {sorted(extra)}")


def parse_native(doc: str | dict) -> PowerNetwork:
    """Parse the native JSON network format.

    Parameters
    ----------
    doc : str or dict
        JSON text or an already-decoded document with keys ``base_mva``,
        ``buses``, ``generators``, ``lines``.

    Returns
    -------
    PowerNetwork

    Raises
    ------
    ValueError
        On missing/unknown keys or non-numeric fields, naming the
        offending element.
    """
    if isinstance(doc, str):
        doc = json.loads(doc)
    _check_keys(doc, {"base_mva", "buses", "generators", "lines"}, "document")
    base = float(doc["base_mva"])
    if not (base > 0 and math.isfinite(base)):
        raise ValueError(f"base_mva must be positive and finite, got {doc['base_mva']!r}")
    buses = []
    for i, b in enumerate(doc["buses"]):
        _check_keys(b, _BUS_KEYS, f"buses[{i}]")
        buses.append(Bus(int(b["id"]), float(b["load_mw"]) / base, float(b["load_mw"])))
    gens = []
    for i, g in enumerate(doc["generators"]):
        _check_keys(g, _GEN_KEYS, f"generators[{i}]")
        gens.append(Generator(
            int(g["bus"]),
            float(g["pmin_mw"]) / base, float(g["pmax_mw"]) / base,
            float(g["cost_per_mwh"]) * base,
            float(g["pmin_mw"]), float(g["pmax_mw"]), float(g["cost_per_mwh"]),
        ))
    lines = []
    for i, ln in enumerate(doc["lines"]):
        _check_keys(ln, _LINE_KEYS, f"lines[{i}]")
        lines.append(Line(
            int(ln["id"]), int(ln["from"]), int(ln["to"]),
            float(ln["susceptance_pu"]),
            float(ln["capacity_mw"]) / base, float(ln["capacity_mw"]),
            bool(ln["switchable"]),
        ))
    return PowerNetwork(base, tuple(buses), tuple(gens), tuple(lines))


def serialize_native(net: PowerNetwork) -> str:
    """Serialize to the native JSON format.

    Writes the stored MW-denominated numbers, so
    ``parse_native(serialize_native(net))`` reproduces ``net`` exactly for
    any network that itself came from a file (and for any network built
    with ``base_mva == 1``).
    """
    doc = {
        "base_mva": net.base_mva,
        "buses": [{"id": b.id, "load_mw": b.load_mw} for b in net.buses],
        "generators": [
            {"bus": g.bus, "pmin_mw": g.pmin_mw, "pmax_mw": g.pmax_mw,
             "cost_per_mwh": g.cost_per_mwh}
            for g in net.generators
        ],
        "lines": [
            {"id": ln.id, "from": ln.from_bus, "to": ln.to_bus,
             "susceptance_pu": ln.susceptance, "capacity_mw": ln.capacity_mw,
             "switchable": ln.switchable}
            for ln in net.lines
        ],
    }
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# MATPOWER subset

def _matpower_matrix(text: str, name: str) -> list[list[float]] | None:
    m = re.search(rf"mpc\.{name}\s*=\s*\[(.*?)\];", text, re.S)
    if m is None:
        return None
    rows = []
    for chunk in re.split(r"[;\n]", m.group(1)):
        chunk = chunk.strip()
        if not chunk:
            continue
        rows.append([float(tok) for tok in chunk.replace(",", " ").split()])
    return rows


def parse_matpower(text: str) -> PowerNetwork:
    """Parse the supported subset of a MATPOWER case file.

    Reads ``mpc.baseMVA``, ``mpc.bus`` (BUS_I, PD), ``mpc.gen`` (GEN_BUS,
    PMAX, PMIN), ``mpc.branch`` (F_BUS, T_BUS, BR_X, RATE_A, BR_STATUS)
    and, when present, linear ``mpc.gencost`` rows.  Susceptance is 1/BR_X,
    capacities are RATE_A / baseMVA, out-of-service branches are dropped,
    and every kept branch is switchable.  Line ids are assigned 0.. in file
    order of the kept branches.

    Raises
    ------
    ValueError
        On missing tables, non-positive reactance, zero RATE_A, duplicate
        generator buses, or genuinely quadratic cost rows.
    """
    text = re.sub(r"%.*", "", text)
    base_m = re.search(r"mpc\.baseMVA\s*=\s*([0-9eE.+-]+)\s*;", text)
    if base_m is None:
        raise ValueError("missing mpc.baseMVA")
    base = float(base_m.group(1))
    bus_rows = _matpower_matrix(text, "bus")
    gen_rows = _matpower_matrix(text, "gen")
    branch_rows = _matpower_matrix(text, "branch")
    if bus_rows is None or gen_rows is None or branch_rows is None:
        raise ValueError("missing one of mpc.bus / mpc.gen / mpc.branch")
    cost_rows = _matpower_matrix(text, "gencost")

    buses = [Bus(int(r[0]), r[2] / base, r[2]) for r in bus_rows]

    costs = []
    if cost_rows is not None:
        if len(cost_rows) < len(gen_rows):
            raise ValueError("gencost has fewer rows than gen")
        for i, r in enumerate(cost_rows):
            model, ncost = int(r[0]), int(r[3])
            if model != 2:
                raise ValueError(f"gencost[{i}]: only polynomial cost (MODEL=2) supported")
            coeffs = r[4:4 + ncost]  # highest degree first
            if any(abs(c) > 0 for c in coeffs[:-2]):
                raise ValueError(f"gencost[{i}]: cost is not linear")
            costs.append(coeffs[-2] if ncost >= 2 else 0.0)
    else:
        costs = [0.0] * len(gen_rows)

    gens = []
    seen_gen_bus = set()
    for i, r in enumerate(gen_rows):
        gbus, pmax, pmin = int(r[0]), r[8], r[9]
        if gbus in seen_gen_bus:
            raise ValueError(f"gen[{i}]: second generator at bus {gbus}")
        seen_gen_bus.add(gbus)
        gens.append(Generator(gbus, pmin / base, pmax / base, costs[i] * base,
                              pmin, pmax, costs[i]))

    lines = []
    lid = 0
    for i, r in enumerate(branch_rows):
        fbus, tbus, x, rate_a, status = int(r[0]), int(r[1]), r[3], r[5], int(r[10])
        if status == 0:
            continue
        if x <= 0:
            raise ValueError(f"branch[{i}]: BR_X must be positive, got {x}")
        if rate_a == 0:
            raise ValueError(f"branch[{i}]: RATE_A of 0 (unlimited) is not supported")
        lines.append(Line(lid, fbus, tbus, 1.0 / x, rate_a / base, rate_a, True))
        lid += 1

    return PowerNetwork(base, tuple(buses), tuple(gens), tuple(lines))


# ---------------------------------------------------------------------------
# validation

def validate(net: PowerNetwork) -> ValidationReport:
    """Check structural soundness of a network.

    Verifies unique ids, existing endpoints, no self-loops, positive
    susceptances and capacities, generator bus references, at most one
    generator per bus, ordered generator bounds, and connectivity.

    Returns
    -------
    ValidationReport
        ``ok`` is True iff no problems were found; ``problems`` lists one
        message per offence.
    """
    problems: list[str] = []
    if not (net.base_mva > 0 and math.isfinite(net.base_mva)):
        problems.append(f"base_mva not positive/finite: {net.base_mva}")
    bus_ids = [b.id for b in net.buses]
    if len(set(bus_ids)) != len(bus_ids):
        dup = sorted({i for i in bus_ids if bus_ids.count(i) > 1})
        problems.append(f"duplicate bus ids: {dup}")
    id_set = set(bus_ids)
    for b in net.buses:
        if not math.isfinite(b.load):
            problems.append(f"bus {b.id}: non-finite load")
    line_ids = [ln.id for ln in net.lines]
    if len(set(line_ids)) != len(line_ids):
        dup = sorted({i for i in line_ids if line_ids.count(i) > 1})
        problems.append(f"duplicate line ids: {dup}")
    for ln in net.lines:
        if ln.from_bus not in id_set or ln.to_bus not in id_set:
            problems.append(f"line {ln.id}: endpoint not a bus "
                            f"({ln.from_bus}, {ln.to_bus})")
        if ln.from_bus == ln.to_bus:
            problems.append(f"line {ln.id}: self-loop at bus {ln.from_bus}")
        if not (ln.susceptance > 0 and math.isfinite(ln.susceptance)):
            problems.append(f"line {ln.id}: susceptance must be positive, "
                            f"got {ln.susceptance}")
        if not (ln.capacity > 0 and math.isfinite(ln.capacity)):
            problems.append(f"line {ln.id}: capacity must be positive, "
                            f"got {ln.capacity}")
    gen_buses = [g.bus for g in net.generators]
    if len(set(gen_buses)) != len(gen_buses):
        dup = sorted({i for i in gen_buses if gen_buses.count(i) > 1})
        problems.append(f"more than one generator at bus(es) {dup}")
    for g in net.generators:
        if g.bus not in id_set:
            problems.append(f"generator at unknown bus {g.bus}")
        if not (0 <= g.p_min <= g.p_max):
            problems.append(f"generator at bus {g.bus}: "
                            f"need 0 <= p_min <= p_max, got [{g.p_min}, {g.p_max}]")
    if net.buses and not problems:
        if not nx.is_connected(net.graph()):
            k = nx.number_connected_components(net.graph())
            problems.append(f"network is not connected ({k} components)")
    return ValidationReport(not problems, tuple(problems))


# ---------------------------------------------------------------------------
# instance generation recipes

def perturb_loads(net: PowerNetwork, low: int, high: int, seed: int) -> PowerNetwork:
    """Add an integer MW draw from [low, high] to every bus load.

    Draws one integer per bus, in bus order, from a generator seeded with
    ``seed``; per-unit loads are recomputed from the perturbed MW values.
    """
    rng = np.random.default_rng(seed)
    buses = []
    for b in net.buses:
        mw = b.load_mw + int(rng.integers(low, high + 1))
        buses.append(Bus(b.id, mw / net.base_mva, mw))
    return replace(net, buses=tuple(buses))


def augment_with_cycle(net: PowerNetwork, cycle_len: int, n_lines: int,
                       seed: int) -> PowerNetwork:
    """Add lines that each close a cycle of ``cycle_len`` lines.

    Each new line joins the endpoints of a simple path of ``cycle_len - 1``
    existing lines (found by seeded random walks, with an exhaustive
    search as fallback), gets capacity equal to 30% of the smallest
    existing capacity, susceptance copied from a uniformly chosen existing
    line, and the next free id.

    Raises
    ------
    ValueError
        If no cycle of the requested length can be closed.
    """
    if cycle_len < 2:
        raise ValueError("cycle_len must be at least 2")
    rng = np.random.default_rng(seed)
    cur = net
    for _ in range(n_lines):
        g = cur.graph()
        pair = None
        for _attempt in range(5000):
            nodes = sorted(g.nodes)
            start = nodes[rng.integers(len(nodes))]
            path = [start]
            ok = True
            for _step in range(cycle_len - 1):
                nbrs = sorted(v for v in g.neighbors(path[-1]) if v not in path)
                if not nbrs:
                    ok = False
                    break
                path.append(nbrs[rng.integers(len(nbrs))])
            if ok:
                pair = (path[0], path[-1])
                break
        if pair is None:
            # exhaustive fallback so absence of a closable cycle is a real error
            candidates = set()
            for u in sorted(g.nodes):
                for p in nx.all_simple_paths(g, u, sorted(g.nodes), cutoff=cycle_len - 1):
                    if len(p) == cycle_len and p[0] < p[-1]:
                        candidates.add((p[0], p[-1]))
            if not candidates:
                raise ValueError(f"no cycle of length {cycle_len} can be closed")
            cand = sorted(candidates)
            pair = cand[rng.integers(len(cand))]
        cap_mw = 0.30 * min(ln.capacity_mw for ln in cur.lines)
        donor = cur.lines[rng.integers(len(cur.lines))]
        new = Line(max(ln.id for ln in cur.lines) + 1, pair[0], pair[1],
                   donor.susceptance, cap_mw / cur.base_mva, cap_mw, True)
        cur = replace(cur, lines=cur.lines + (new,))
    return cur


def random_connected_network(seed: int, n_buses: int | None = None,
                             max_buses: int = 8, max_extra_lines: int = 2,
                             switchable: bool = True) -> PowerNetwork:
    """Sample a small connected test network, deterministically per seed.

    Buses carry uniform loads; a spanning tree plus a few extra lines
    (possibly parallel, so the graph is a proper multigraph) carry
    uniform susceptances and capacities.  A wide-range cheap generator
    at bus 0 and a pricier one at the last bus make most draws
    dispatchable while leaving congestion to the line caps.
    """
    rng = np.random.default_rng(seed)
    if n_buses is None:
        n_buses = int(rng.integers(3, max_buses + 1))
    buses = [(i, float(np.round(rng.uniform(0.0, 1.0), 3))) for i in range(n_buses)]
    total = sum(load for _, load in buses)
    gens = [(0, 0.0, total + 1.0, 1.0),
            (n_buses - 1, 0.0, total + 1.0, float(np.round(rng.uniform(2, 6), 3)))]
    lines = []
    order = rng.permutation(n_buses)
    for k in range(1, n_buses):
        u = int(order[k])
        v = int(order[int(rng.integers(0, k))])
        lines.append((len(lines), u, v,
                      float(np.round(rng.uniform(0.5, 3.0), 3)),
                      float(np.round(rng.uniform(0.4, 1.6), 3)),
                      switchable))
    for _ in range(int(rng.integers(1, max_extra_lines + 1))):
        u, v = rng.choice(n_buses, size=2, replace=False)
        lines.append((len(lines), int(u), int(v),
                      float(np.round(rng.uniform(0.5, 3.0), 3)),
                      float(np.round(rng.uniform(0.4, 1.6), 3)),
                      switchable))
    return build_network(buses, gens, lines)


def relocate_generators(net: PowerNetwork, seed: int) -> PowerNetwork:
    """Move each generator to its own bus or a uniformly chosen neighbor.

    Generators are processed in list order; each picks uniformly from
    {stay} union neighboring buses and re-draws while the pick collides
    with another generator's current position, so the one-generator-per-bus
    rule is preserved.
    """
    rng = np.random.default_rng(seed)
    g = net.graph()
    positions = [gen.bus for gen in net.generators]
    for i, gen in enumerate(net.generators):
        options = [gen.bus] + sorted(set(g.neighbors(gen.bus)))
        others = set(positions[:i] + positions[i + 1:])
        for _attempt in range(1000):
            pick = options[rng.integers(len(options))]
            if pick not in others:
                positions[i] = pick
                break
        else:
            raise ValueError(f"no free bus for generator at {gen.bus}")
    gens = tuple(replace(gen, bus=positions[i]) for i, gen in enumerate(net.generators))
    return replace(net, generators=gens)
