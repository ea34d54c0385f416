"""Blow-up plan inference and bounded construction search.

The records name the base points blown up but encode the infinitely-near
part only through opaque bracket patterns, so a plan is recovered by
search: distribute the forced number of blow-ups over the listed base
nodes, branch over the nodes sitting on each tower's exceptional curves,
and accept exactly the interpretations whose marked surface reports the
stated chains.  Pruning only ever discards states that provably cannot
reach the stated chain strings.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .assembly import MarkedSurface, SurfaceReport, nef_ample_check, surface_report
from .chains import wahl_singularity
from .configuration import Configuration, ConfigurationError, det_exact, geography_check
from .catalog.records import BlowupSpec, ChainSpec, SurfaceRecord

__all__ = [
    "PlanError", "PlanStep", "BlowupPlan", "InferenceResult",
    "SearchParams", "SearchResult", "infer_plan", "search_constructions",
    "mark_chains",
]


class PlanError(ValueError):
    """Plan references a node that does not exist in the evolving surface."""


@dataclass(frozen=True)
class PlanStep:
    """Blow up the occurrence-th node between the named curves."""

    a: str
    b: str
    occurrence: int = 0

    def __str__(self) -> str:
        tag = f"#{self.occurrence}" if self.occurrence else ""
        return f"{self.a}*{self.b}{tag}"


@dataclass(frozen=True)
class BlowupPlan:
    steps: tuple[PlanStep, ...]

    def execute(self, base: Configuration) -> Configuration:
        config = base
        for step in self.steps:
            nodes = config.nodes_between(step.a, step.b)
            if step.occurrence >= len(nodes):
                raise PlanError(f"no node #{step.occurrence} between "
                                f"{step.a} and {step.b}")
            config = config.blow_up(nodes[step.occurrence].id)
        return config

    def __str__(self) -> str:
        return ", ".join(str(s) for s in self.steps)


@dataclass
class InferenceResult:
    record: SurfaceRecord
    plan: Optional[BlowupPlan] = None
    marked: Optional[MarkedSurface] = None
    report: Optional[SurfaceReport] = None
    states: int = 0
    near_misses: list[str] = field(default_factory=list)

    @property
    def success(self) -> bool:
        return self.plan is not None

    def summary(self) -> str:
        if self.success:
            return (f"({self.record.rid}) plan found after {self.states} states: "
                    f"{self.plan}")
        misses = "; ".join(self.near_misses[:4]) or "no partial matches"
        return (f"({self.record.rid}) ambiguous after {self.states} states: "
                f"{misses}")


# -- chain marking ------------------------------------------------------------

def _paths_matching(config: Configuration, target: tuple[int, ...],
                    used: set[str]) -> list[tuple[str, ...]]:
    """All simple paths whose self-intersection string equals the target.

    Consecutive path curves must share exactly one node; curves in `used`
    are excluded.  Matches of a string and its reverse are deduplicated.
    """
    curves = {c.name: c.self_int for c in config.curves}
    out: set[tuple[str, ...]] = set()

    def extend(path: list[str], pos: int) -> None:
        if pos == len(target):
            key = min(tuple(path), tuple(reversed(path)))
            out.add(key)
            return
        last = path[-1]
        for nxt in sorted(config.neighbors(last)):
            if nxt in used or nxt in path:
                continue
            if curves[nxt] != -target[pos]:
                continue
            if len(config.nodes_between(last, nxt)) != 1:
                continue
            if any(config.pairing(nxt, earlier) != 0 for earlier in path[:-1]):
                continue
            path.append(nxt)
            extend(path, pos + 1)
            path.pop()

    for name, self_int in sorted(curves.items()):
        if name in used or self_int != -target[0]:
            continue
        extend([name], 1)
    return sorted(out)


def mark_chains(config: Configuration, targets: Sequence[tuple[int, ...]],
                ade: Sequence[tuple[str, ...]] = ()) -> Optional[MarkedSurface]:
    """Mark disjoint chains matching the target strings exactly, or None.

    Targets are matched longest first; the marking must leave only (-1)-
    and (-2)-curves unmarked.
    """
    order = sorted(range(len(targets)), key=lambda i: -len(targets[i]))
    chosen: dict[int, tuple[str, ...]] = {}

    def assign(k: int, used: set[str]) -> bool:
        if k == len(order):
            return True
        idx = order[k]
        for path in _paths_matching(config, targets[idx], used):
            if any(config.pairing(a, b) != 0
                   for a in path for other in chosen.values() for b in other):
                continue
            chosen[idx] = path
            if assign(k + 1, used | set(path)):
                return True
            del chosen[idx]
        return False

    ade_used = {c for chain in ade for c in chain}
    if not assign(0, set(ade_used)):
        return None
    ordered = []
    for idx in range(len(targets)):
        path = chosen[idx]
        entries = tuple(-config.curve(c).self_int for c in path)
        if entries != tuple(targets[idx]):
            path = tuple(reversed(path))
        ordered.append(tuple(path))
    try:
        return MarkedSurface(config, tuple(ordered), tuple(tuple(c) for c in ade))
    except Exception:
        return None


# -- inference ---------------------------------------------------------------

def _entry_budget(targets: Sequence[tuple[int, ...]]) -> dict[int, int]:
    budget: dict[int, int] = {}
    for target in targets:
        for b in target:
            if b >= 3:
                for k in range(3, b + 1):
                    budget[k] = budget.get(k, 0) + 1
    return budget


def _prunable(config: Configuration, budget) -> bool:
    """True when the state provably cannot finish in the stated chains.

    Curves only sink under blow-ups, so a state with more curves at depth
    >= k than the stated chains have entries >= k is dead; the search
    variant only bounds the maximal entry.
    """
    if budget is None:
        return False
    if "max_entry" in budget:
        return any(-c.self_int > budget["max_entry"] for c in config.curves)
    counts: dict[int, int] = {}
    for curve in config.curves:
        depth = -curve.self_int
        if depth >= 3:
            for k in range(3, depth + 1):
                counts[k] = counts.get(k, 0) + 1
    return any(have > budget.get(k, 0) for k, have in counts.items())


def _substring_pool(targets: Sequence[tuple[int, ...]]) -> set[tuple[int, ...]]:
    """All contiguous substrings of the stated chains, both orientations."""
    pool: set[tuple[int, ...]] = set()
    for target in targets:
        for chain in (tuple(target), tuple(reversed(target))):
            for i in range(len(chain)):
                for j in range(i + 1, len(chain) + 1):
                    pool.add(chain[i:j])
    return pool


def _state_ok(xs: tuple[int, ...], budget) -> bool:
    if budget is None:
        return True
    if "max_entry" in budget:
        return all(x <= budget["max_entry"] for x in xs)
    counts: dict[int, int] = {}
    for x in xs:
        for k in range(3, x + 1):
            counts[k] = counts.get(k, 0) + 1
    return all(counts[k] <= budget.get(k, 0) for k in counts)


def _runs_embed(xs: tuple[int, ...], pool: Optional[set[tuple[int, ...]]]) -> bool:
    """Completed-tower filter: maximal runs of non-(-1) exceptional curves
    are final and must occur contiguously inside some stated chain."""
    if pool is None:
        return True
    run: list[int] = []
    for x in xs + (1,):
        if x == 1:
            if run and tuple(run) not in pool:
                return False
            run = []
        else:
            run.append(x)
    return True


def _tower_outcomes(size: int, budget, pool,
                    ones_cap: Optional[int] = None) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Enumerate completed towers abstractly, one witness script each.

    A tower lives on the local chain [c1', E..., c2']; a blow-up picks a
    gap (a surviving node), deepens its two sides and inserts a fresh
    (-1)-curve.  States that differ only in the script are merged; results
    are (exceptional depth string, gap script) pairs.

    For large towers with known targets the enumeration runs backwards
    instead: assemble candidate final strings from target substrings
    separated by surviving (-1)s, and keep the ones that contract to a
    single curve.
    """
    if pool is not None and ones_cap is not None and size >= 5:
        return _targeted_outcomes(size, budget, pool, ones_cap)
    level: dict[tuple[int, ...], tuple[int, ...]] = {(1,): ()}
    for step in range(size - 1):
        remaining = size - 2 - step
        nxt: dict[tuple[int, ...], tuple[int, ...]] = {}
        for xs, script in sorted(level.items()):
            for gap in range(len(xs) + 1):
                new = list(xs)
                if gap > 0:
                    new[gap - 1] += 1
                if gap < len(xs):
                    new[gap] += 1
                new.insert(gap, 1)
                state = tuple(new)
                if state in nxt or not _state_ok(state, budget):
                    continue
                if ones_cap is not None and state.count(1) - remaining > ones_cap:
                    continue  # each insertion removes at most one surviving 1
                nxt[state] = script + (gap,)
        level = nxt
    return [(xs, script) for xs, script in sorted(level.items())
            if _runs_embed(xs, pool)
            and (ones_cap is None or xs.count(1) <= ones_cap)]


def _reduce_script(final: tuple[int, ...]) -> Optional[tuple[int, ...]]:
    """Insertion script producing `final` from a single (-1), or None.

    Contracts 1-entries one at a time (neighbors decrement, boundaries
    absorb silently); a successful contraction order reversed is exactly
    the insertion script, gap g being the entry index of the inserted 1.
    """
    dead: set[tuple[int, ...]] = set()

    def rec(state: tuple[int, ...]) -> Optional[list[int]]:
        if state == (1,):
            return []
        if state in dead:
            return None
        for i, x in enumerate(state):
            if x != 1:
                continue
            new = list(state)
            del new[i]
            ok = True
            if i > 0:
                new[i - 1] -= 1
                ok = ok and new[i - 1] >= 1
            if i < len(new):
                new[i] -= 1
                ok = ok and new[i] >= 1
            if not ok:
                continue
            sub = rec(tuple(new))
            if sub is not None:
                return sub + [i]
        dead.add(state)
        return None

    script = rec(final)
    if script is None:
        return None
    # the reduction reaches the single base exceptional, so the reversed
    # removal order is exactly the insertion script after the base blow-up
    return tuple(script)


def _targeted_outcomes(size: int, budget, pool: set[tuple[int, ...]],
                       ones_cap: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Assemble candidate final tower strings run-by-run and validate them.

    A completed tower keeps at least one and at most ones_cap surviving
    (-1)-curves; runs between them must occur inside the stated chains.
    """
    by_len: dict[int, set[tuple[int, ...]]] = {}
    for sub in pool:
        by_len.setdefault(len(sub), set()).add(sub)
    outcomes: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    seen: set[tuple[int, ...]] = set()
    # j surviving (-1)s split the string into j+1 runs (outer ones may be empty)
    for j in range(1, ones_cap + 1):
        if size >= j:
            _assemble_runs(size, j, by_len, budget, seen, outcomes)
    return sorted(outcomes)


def _assemble_runs(size: int, ones: int, by_len, budget, seen, outcomes) -> None:
    """Place `ones` single 1s between runs summing to size - ones."""
    def rec(parts: list[tuple[int, ...]], slots_left: int, mass_left: int) -> None:
        if slots_left == 0:
            if mass_left != 0:
                return
            final: list[int] = []
            for i, part in enumerate(parts):
                if i:
                    final.append(1)
                final.extend(part)
            state = tuple(final)
            if len(state) != size or state in seen:
                return
            if not _state_ok(state, budget):
                return
            seen.add(state)
            script = _reduce_script(state)
            if script is not None:
                outcomes.append((state, script))
            return
        min_here = 0 if (not parts or slots_left == 1) else 1
        for length in range(min_here, mass_left + 1):
            if length == 0:
                rec(parts + [()], slots_left - 1, mass_left)
                continue
            for run in sorted(by_len.get(length, ())):
                rec(parts + [run], slots_left - 1, mass_left - length)

    rec([], ones + 1, size - ones)


def _tower_scripts(config: Configuration, base: PlanStep, size: int,
                   budget, pool=None, ones_cap=None) -> Iterable[tuple[Configuration, tuple[PlanStep, ...]]]:
    """All inequivalent ways to blow `size` times over one base node.

    Replays each abstract outcome's witness script on the concrete
    configuration: gap g of the local chain is the surviving node between
    neighbours g and g+1.
    """
    nodes = config.nodes_between(base.a, base.b)
    if base.occurrence >= len(nodes):
        return
    for _, script in _tower_outcomes(size, budget, pool, ones_cap):
        state = config.blow_up(nodes[base.occurrence].id)
        local = [base.a, state.history[-1].exceptional, base.b]
        steps = [base]
        ok = True
        for gap in script:
            u, v = local[gap], local[gap + 1]
            between = state.nodes_between(u, v)
            if not between:
                ok = False
                break
            # the surviving local-chain node is the newest between u and v
            node = between[-1]
            occ = len(between) - 1
            state = state.blow_up(node.id)
            local.insert(gap + 1, state.history[-1].exceptional)
            steps.append(PlanStep(node.a if node.a <= node.b else node.b,
                                  max(node.a, node.b), occ))
        if ok:
            yield state, tuple(steps)


def _allocations(total: int, sizes_min: Sequence[int],
                 hints: Sequence[Optional[int]]) -> Iterable[tuple[int, ...]]:
    """Compositions of `total` with given minimums, hinted sizes first.

    Lazily yields allocations by increasing total deviation from the hints
    (bracket-pattern lengths), so the hinted allocation comes out first
    without materializing the composition space.
    """
    n = len(sizes_min)
    suffix_min = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + sizes_min[i]

    def layer(budget: Optional[int]) -> Iterable[tuple[int, ...]]:
        def rec(i: int, left: int, bad_left: Optional[int], acc: list[int]):
            if i == n:
                if left == 0 and (bad_left is None or bad_left == 0):
                    yield tuple(acc)
                return
            hi = left - suffix_min[i + 1]
            for s in range(sizes_min[i], hi + 1):
                if bad_left is None:
                    b = None
                else:
                    b = bad_left - (abs(s - hints[i]) if hints[i] is not None else 0)
                    if b < 0:
                        continue
                acc.append(s)
                yield from rec(i + 1, left - s, b, acc)
                acc.pop()
        yield from rec(0, total, budget, [])

    if all(h is None for h in hints):
        yield from layer(None)
        return
    max_bad = total + sum(h for h in hints if h is not None)
    for budget in range(max_bad + 1):
        yield from layer(budget)


def _combo_feasible(base: Configuration, combo: Sequence[int],
                    targets: Sequence[tuple[int, ...]]) -> bool:
    """Cheap sound filters on a choice of base nodes to blow up.

    Every incident chosen node sinks its curve at least one step, so the
    forced depths must embed into the stated chain entries; and unblown
    nodes survive as chain adjacencies, so they must form simple disjoint
    paths.
    """
    chosen = set(combo)
    inc: dict[str, int] = {}
    degree: dict[str, int] = {}
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    surviving: list[tuple[str, str]] = []
    for node in base.nodes:
        if node.id in chosen:
            inc[node.a] = inc.get(node.a, 0) + 1
            inc[node.b] = inc.get(node.b, 0) + 1
        else:
            if node.is_self_node:
                continue  # its curve can only survive as a free nodal curve
            degree[node.a] = degree.get(node.a, 0) + 1
            degree[node.b] = degree.get(node.b, 0) + 1
            if degree[node.a] > 2 or degree[node.b] > 2:
                return False
            ra, rb = find(node.a), find(node.b)
            if ra == rb:
                return False  # unblown nodes close a cycle
            parent[ra] = rb
            surviving.append((node.a, node.b))
    forced = sorted((2 + k for k in inc.values()), reverse=True)
    entries = sorted((b for t in targets for b in t), reverse=True)
    if len(forced) > len(entries):
        return False
    if not all(f <= e for f, e in zip(forced, entries)):
        return False
    # a surviving node is a chain adjacency: its endpoint depths must
    # dominate some adjacent entry pair of a stated chain
    adjacent = {(t[i], t[i + 1]) for t in targets for i in range(len(t) - 1)}
    adjacent |= {(y, x) for x, y in adjacent}
    for u, v in surviving:
        du, dv = 2 + inc.get(u, 0), 2 + inc.get(v, 0)
        if not any(x >= du and y >= dv for x, y in adjacent):
            return False
    return True


def infer_plan(record: SurfaceRecord, base: Configuration,
               max_states: int = 200000, prune: bool = True,
               ade: Sequence[tuple[str, ...]] = (),
               rank_cap: Optional[int] = None) -> InferenceResult:
    """Recover a concrete blow-up plan realizing the record, by search.

    The number of blow-ups is forced by K^2; bracket patterns only rank the
    size allocations tried first.  Succeeds when some interpretation yields
    a marked surface whose chains are exactly the stated ones; the survivor
    is re-certified (ample check, K^2, obstruction) in the result report.
    """
    result = InferenceResult(record)
    targets = [tuple(c.chain) for c in record.chains]
    for spec in record.chains:
        sing = wahl_singularity(spec.chain)
        if sing is None:
            raise PlanError(f"({record.rid}): stated chain {list(spec.chain)} "
                            f"is not a Wahl chain")
        if sing.n != spec.n or spec.a not in (sing.a, sing.n - sing.a):
            raise PlanError(f"({record.rid}): stated ({spec.n},{spec.a}) does not "
                            f"match chain {list(spec.chain)} = ({sing.n},{sing.a})")
    budget = _entry_budget(targets) if prune else None
    pool = _substring_pool(targets) if prune else None
    b_total = record.blowup_total
    if b_total < 0:
        raise PlanError(f"({record.rid}): negative blow-up count")
    # every exceptional curve ends inside a chain or as a surviving (-1);
    # with all base curves available for chains this bounds the survivors
    ones_total = b_total - sum(len(t) for t in targets) + len(base.curves)

    if record.steps:
        base_specs = list(record.steps)
    else:
        base_specs = None

    def run_bases(bases: list[PlanStep], hints: list[Optional[int]]) -> Optional[BlowupPlan]:
        mins = [1] * len(bases)
        if sum(mins) > b_total:
            return None
        ones_cap = ones_total - (len(bases) - 1) if prune else None
        if ones_cap is not None and ones_cap < 1:
            return None  # every tower keeps at least one (-1)-curve
        for alloc in _allocations(b_total, mins, hints):
            stack: list[tuple[Configuration, tuple[PlanStep, ...], int]] = [(base, (), 0)]
            while stack:
                config, steps, idx = stack.pop()
                if result.states > max_states:
                    result.near_misses.append("state budget exhausted")
                    return None
                if idx == len(bases):
                    result.states += 1
                    marked = mark_chains(config, targets, ade)
                    if marked is not None:
                        return BlowupPlan(steps)
                    if len(result.near_misses) < 40:
                        result.near_misses.append(
                            f"alloc {alloc}: executed but chains do not match")
                    continue
                for state, tower_steps in _tower_scripts(config, bases[idx],
                                                         alloc[idx], budget, pool,
                                                         ones_cap):
                    result.states += 1
                    if not _prunable(state, budget):
                        stack.append((state, steps + tower_steps, idx + 1))
        return None

    plan = None
    if base_specs is None and b_total == 0:
        marked = mark_chains(base, targets, ade)
        if marked is not None:
            result.plan = BlowupPlan(())
            result.marked = marked
            result.report = surface_report(marked, base, rank_cap)
            return result
        result.near_misses.append("no blow-ups forced but chains do not match")
        return result
    if base_specs is not None:
        # a step always blows the first surviving node of its pair: the two
        # nodes of a doubly-meeting pair are interchangeable until one goes
        bases = []
        hints: list[Optional[int]] = []
        for spec in base_specs:
            pair = (spec.a, spec.b) if spec.a <= spec.b else (spec.b, spec.a)
            bases.append(PlanStep(pair[0], pair[1], 0))
            hints.append(len(spec.pattern) if spec.pattern is not None else 1)
        plan = run_bases(bases, hints)
    else:
        # free search over base-node subsets of the forced size
        geo = geography_check(len(record.chains), record.k2)
        m = geo.nodes_to_blow_up
        node_ids = sorted(n.id for n in base.nodes)
        seen_pairsets: set[tuple] = set()
        for combo in itertools.combinations(node_ids, m):
            if result.states > max_states:
                result.near_misses.append("state budget exhausted")
                break
            pairs = tuple(sorted(base.node(nid).pair() for nid in combo))
            if pairs in seen_pairsets:
                continue  # same multiset of pairs: isomorphic choice of nodes
            seen_pairsets.add(pairs)
            if prune and not _combo_feasible(base, combo, targets):
                continue
            bases = [PlanStep(a, b) for a, b in pairs]
            plan = run_bases(bases, [None] * m)
            if plan is not None:
                break

    if plan is None:
        if not result.near_misses:
            result.near_misses.append("search space exhausted without a match")
        return result

    config = plan.execute(base)
    marked = mark_chains(config, targets, ade)
    assert marked is not None
    result.plan = plan
    result.marked = marked
    result.report = surface_report(marked, base, rank_cap)
    return result


# -- construction search -------------------------------------------------------

@dataclass(frozen=True)
class SearchParams:
    k2: int
    max_chains: int
    max_blowups: int
    curve_pool: Optional[tuple[str, ...]] = None
    subset_size: Optional[int] = None
    max_states: int = 500000
    max_results: int = 25


@dataclass
class SearchResult:
    records: list[SurfaceRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    states: int = 0
    exhausted: bool = False


def _greedy_mark(config: Configuration) -> Optional[MarkedSurface]:
    """Mark the components of the non-(-1) subgraph, if they are all chains.

    Components that are paths of (-2)-curves become ADE chains; paths whose
    string is a Wahl chain become Wahl chains; anything else fails.
    """
    names = [c.name for c in config.curves if c.self_int != -1]
    adjacency = {n: sorted(x for x in config.neighbors(n) if x in set(names))
                 for n in names}
    seen: set[str] = set()
    wahl: list[tuple[str, ...]] = []
    ade: list[tuple[str, ...]] = []
    for name in sorted(names):
        if name in seen:
            continue
        comp = {name}
        frontier = [name]
        while frontier:
            cur = frontier.pop()
            for nxt in adjacency[cur]:
                if nxt not in comp:
                    comp.add(nxt)
                    frontier.append(nxt)
        seen |= comp
        ends = [n for n in comp if len([x for x in adjacency[n] if x in comp]) <= 1]
        if len(comp) == 1:
            path = [next(iter(comp))]
        elif len(ends) == 2:
            path = [ends[0]]
            while len(path) < len(comp):
                nxts = [x for x in adjacency[path[-1]] if x in comp and x not in path]
                if len(nxts) != 1:
                    return None
                path.append(nxts[0])
        else:
            return None  # cycle or branch point
        for a, b in zip(path, path[1:]):
            if len(config.nodes_between(a, b)) != 1:
                return None
        entries = tuple(-config.curve(c).self_int for c in path)
        if all(b == 2 for b in entries):
            ade.append(tuple(path))
        elif wahl_singularity(entries) is not None:
            wahl.append(tuple(path))
        else:
            return None
    try:
        return MarkedSurface(config, tuple(wahl), tuple(ade))
    except Exception:
        return None


def search_constructions(params: SearchParams, a0: Configuration,
                         prune: bool = True) -> SearchResult:
    """Enumerate ample constructions over subsets of the configuration.

    Deterministic: subsets, node choices and emitted records are all in
    canonical order.  Budget exhaustion is reported, partial results are
    still returned.
    """
    result = SearchResult()
    pool = sorted(params.curve_pool) if params.curve_pool else \
        sorted(c.name for c in a0.curves)
    for name in pool:
        a0.curve(name)
    found: set[tuple] = set()

    for p in range(1, params.max_chains + 1):
        geo = geography_check(p, params.k2)
        if not geo.admissible:
            result.notes.append(f"P={p}, K^2={params.k2} inadmissible by geography")
            continue
        size = params.subset_size or geo.r
        if size != geo.r:
            result.notes.append(f"subset size {size} incompatible with r={geo.r}")
            continue
        if size > len(pool):
            continue
        for subset in itertools.combinations(pool, size):
            if result.states > params.max_states:
                result.exhausted = True
                result.notes.append("state budget exhausted")
                return result
            sub = a0.restrict(subset)
            if sub.t2 != geo.t2:
                continue
            if det_exact(sub.intersection_matrix()) == 0:
                continue
            _search_subset(params, geo, sub, subset, result, found, prune)
            if len(result.records) >= params.max_results:
                result.notes.append("result budget reached")
                return result
    return result


def _search_subset(params: SearchParams, geo, sub: Configuration, subset,
                   result: SearchResult, found: set, prune: bool) -> None:
    max_entry = 4 * params.k2 + 4  # no Wahl chain of admissible length is deeper
    budget = None if not prune else {"max_entry": max_entry}
    node_ids = sorted(n.id for n in sub.nodes)
    m = geo.nodes_to_blow_up
    base_det = det_exact(sub.intersection_matrix())
    seen_pairsets: set[tuple] = set()
    for combo in itertools.combinations(node_ids, m):
        pairs = tuple(sorted(sub.node(nid).pair() for nid in combo))
        if pairs in seen_pairsets:
            continue
        seen_pairsets.add(pairs)
        bases = [PlanStep(a, b) for a, b in pairs]
        for total in range(m, params.max_blowups + 1):
            for alloc in _allocations(total, [1] * m, [None] * m):
                stack = [(sub, (), 0)]
                while stack:
                    config, steps, idx = stack.pop()
                    result.states += 1
                    if result.states > params.max_states:
                        result.exhausted = True
                        result.notes.append("state budget exhausted")
                        return
                    if idx == m:
                        _harvest(params, config, steps, bases, alloc, subset,
                                 base_det, result, found)
                        continue
                    for state, tower_steps in _tower_scripts(config, bases[idx],
                                                             alloc[idx], budget):
                        stack.append((state, steps + tower_steps, idx + 1))


def _harvest(params: SearchParams, config: Configuration, steps, bases, alloc,
             subset, base_det: int, result: SearchResult, found: set) -> None:
    marked = _greedy_mark(config)
    if marked is None or not marked.wahl_chains or marked.ade_chains:
        return
    from .assembly import k_squared
    if k_squared(marked) != params.k2:
        return
    if nef_ample_check(marked).status != "ample":
        return
    sings = tuple(sorted((s.n, min(s.a, s.n - s.a)) for s in marked.wahl_data()))
    key = (tuple(subset), sings)
    if key in found:
        return
    found.add(key)
    chains = []
    for chain in marked.wahl_chains:
        entries = tuple(-config.curve(c).self_int for c in chain)
        sing = wahl_singularity(entries)
        chains.append(ChainSpec(sing.n, sing.a, entries))
    # collapse the flat step list back into per-base-node specs:
    # tower i created exceptionals E{start+1}..E{start+alloc[i]}
    specs: list[BlowupSpec] = []
    start = 0
    for base_step, size in zip(bases, alloc):
        if size == 1:
            specs.append(BlowupSpec(base_step.a, base_step.b, None))
        else:
            pattern = tuple(-config.curve(f"E{start + j + 1}").self_int
                            for j in range(size))
            specs.append(BlowupSpec(base_step.a, base_step.b, pattern))
        start += size
    rid = f"{params.k2}.{len(found)}"
    result.records.append(SurfaceRecord(
        rid, params.k2, tuple(subset), base_det, tuple(specs), tuple(chains)))
