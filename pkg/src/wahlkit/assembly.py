"""Marked surfaces: chain marking, K^2, nef/ample certification,
obstruction dimension, singularity reports and fundamental-group verdicts.

A MarkedSurface is a blown-up configuration together with the Wahl chains
to be contracted, the chains of (-2)-curves contracted to rational double
points, and everything else left alone.  All certificates work through
exact discrepancy sums; nothing here ever reports more than the underlying
sufficiency criteria allow (in particular the fundamental-group verdict is
never "nontrivial").
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from .chains import (CyclicQuotient, TSingularity, WahlSingularity, blow_down_compose,
                     discrepancies, meridian_exponents, t_singularity, wahl_singularity)
from .configuration import Configuration, ConfigurationError, det_exact, rank_exact

__all__ = [
    "AssemblyError", "MarkedSurface", "Witness", "NefAmpleReport",
    "SingularityEntry", "Pi1Report", "SurfaceReport",
    "k_squared", "nef_ample_check", "obstruction_dim",
    "singularity_report", "pi1_verdict", "surface_report",
]


class AssemblyError(ValueError):
    """Malformed marking: chains that are not chains, overlaps, bad types."""


@dataclass(frozen=True)
class MarkedSurface:
    surface: Configuration
    wahl_chains: tuple[tuple[str, ...], ...]
    ade_chains: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self) -> None:
        self._validate()

    @property
    def blowup_count(self) -> int:
        return self.surface.blowup_count

    @property
    def free_curves(self) -> tuple[str, ...]:
        marked = {c for chain in self.wahl_chains + self.ade_chains for c in chain}
        return tuple(c.name for c in self.surface.curves if c.name not in marked)

    def chain_of(self, name: str) -> Optional[int]:
        for i, chain in enumerate(self.wahl_chains):
            if name in chain:
                return i
        return None

    def wahl_data(self) -> tuple[WahlSingularity, ...]:
        out = []
        for chain in self.wahl_chains:
            entries = tuple(-self.surface.curve(c).self_int for c in chain)
            sing = wahl_singularity(entries)
            assert sing is not None  # _validate guarantees it
            out.append(sing)
        return tuple(out)

    def _validate(self) -> None:
        seen: set[str] = set()
        for chain in self.wahl_chains + self.ade_chains:
            if not chain:
                raise AssemblyError("empty chain in marking")
            for name in chain:
                if name in seen:
                    raise AssemblyError(f"curve {name} marked twice")
                seen.add(name)
        for chain in self.wahl_chains + self.ade_chains:
            for name in chain:
                if self.surface.self_nodes(name):
                    raise AssemblyError(f"chain curve {name} has a self-node")
            for left, right in zip(chain, chain[1:]):
                if len(self.surface.nodes_between(left, right)) != 1:
                    raise AssemblyError(f"consecutive chain curves {left},{right} must "
                                        f"share exactly one node")
            for i, a in enumerate(chain):
                for b in chain[i + 2:]:
                    if self.surface.pairing(a, b) != 0:
                        raise AssemblyError(f"non-consecutive chain curves {a},{b} meet")
        for chain in self.wahl_chains:
            entries = tuple(-self.surface.curve(c).self_int for c in chain)
            if wahl_singularity(entries) is None:
                raise AssemblyError(f"marked chain {chain} has string {list(entries)}, "
                                    f"not a Wahl chain")
        for chain in self.ade_chains:
            bad = [c for c in chain if self.surface.curve(c).self_int != -2]
            if bad:
                raise AssemblyError(f"ADE chain member {bad[0]} is not a (-2)-curve; "
                                    f"only A_k chains of (-2)-curves are supported")
        for i, a in [(i, c) for i, ch in enumerate(self.wahl_chains) for c in ch]:
            for chain in self.ade_chains:
                for b in chain:
                    if self.surface.pairing(a, b) != 0:
                        raise AssemblyError(f"ADE chain through {b} meets Wahl chain "
                                            f"curve {a}")
        for i, chain in enumerate(self.wahl_chains):
            for j in range(i + 1, len(self.wahl_chains)):
                for a in chain:
                    for b in self.wahl_chains[j]:
                        if self.surface.pairing(a, b) != 0:
                            raise AssemblyError(f"Wahl chains {i} and {j} meet at "
                                                f"{a},{b}")


def k_squared(ms: MarkedSurface) -> int:
    """K_X^2 of the contracted surface: -#blow-ups + sum of chain lengths."""
    return -ms.blowup_count + sum(len(c) for c in ms.wahl_chains)


@dataclass(frozen=True)
class Witness:
    kind: str
    curve: str
    detail: str


@dataclass(frozen=True)
class Contraction:
    curve: str
    joins: tuple[int, ...]
    result: Optional[CyclicQuotient]
    t_type: Optional[TSingularity]


@dataclass(frozen=True)
class NefAmpleReport:
    status: str  # "ample" | "nef-only" | "not-nef"
    witnesses: tuple[Witness, ...] = ()
    warnings: tuple[Witness, ...] = ()
    contractions: tuple[Contraction, ...] = ()

    @property
    def nef(self) -> bool:
        return self.status in ("ample", "nef-only")

    @property
    def canonical_ample(self) -> bool:
        """Ample after passing to the canonical model.

        A nef-only verdict still certifies the canonical model when K^2 is
        positive and every zero curve is contractible there: equality
        (-1)-curves joining two chain ends (their contraction is a
        T-singularity) and stray (-2)-configurations (rational double
        points).
        """
        if self.status == "ample":
            return True
        if self.status != "nef-only":
            return False
        if any(w.kind == "k-squared" for w in self.warnings):
            return False
        return all(c.t_type is not None for c in self.contractions)


def _discrepancy_table(ms: MarkedSurface) -> dict[str, Fraction]:
    table: dict[str, Fraction] = {}
    for chain in ms.wahl_chains:
        entries = [-ms.surface.curve(c).self_int for c in chain]
        for name, d in zip(chain, discrepancies(entries)):
            table[name] = d
    return table


def nef_ample_check(ms: MarkedSurface) -> NefAmpleReport:
    """Certify the contracted canonical class through discrepancy sums.

    For each (-1)-curve G the sum s(G) of the discrepancies of the Wahl
    chain curves it meets (with node multiplicity) must be <= -1 for nef
    and < -1 for ample; ample additionally needs K^2 > 0 and no stray
    (-2)-curve away from the chains.
    """
    surface = ms.surface
    chain_index = {c: i for i, ch in enumerate(ms.wahl_chains) for c in ch}
    marked = set(chain_index) | {c for ch in ms.ade_chains for c in ch}
    table = _discrepancy_table(ms)

    witnesses: list[Witness] = []
    warnings: list[Witness] = []
    contractions: list[Contraction] = []
    for curve in surface.curves:
        if curve.name in marked:
            continue
        if curve.self_int not in (-1, -2):
            return NefAmpleReport("not-nef", (Witness(
                "bad-free-curve", curve.name,
                f"unmarked curve with self-intersection {curve.self_int}"),))

    strict = True
    for curve in surface.curves:
        if curve.self_int != -1 or curve.name in marked:
            continue
        meets: list[str] = []
        s = Fraction(0)
        for node in surface.nodes_at(curve.name):
            other = node.other(curve.name)
            if other in table:
                s += table[other]
                meets.append(other)
        if s > -1:
            witnesses.append(Witness("negative-curve", curve.name,
                                     f"discrepancy sum {s} > -1"))
        elif s == -1:
            strict = False
            contractions.append(_contraction_for(ms, curve.name, meets))

    if witnesses:
        return NefAmpleReport("not-nef", tuple(witnesses))

    zero_curves: list[Witness] = []
    for curve in surface.curves:
        if curve.self_int != -2 or curve.name in marked:
            continue
        touches_wahl = any(n in chain_index for n in surface.neighbors(curve.name))
        if touches_wahl:
            continue
        touches_exc = any(surface.curve(n).self_int == -1
                          for n in surface.neighbors(curve.name))
        kind = "free-two-meets-exceptional" if touches_exc else "free-two-isolated"
        zero_curves.append(Witness(kind, curve.name,
                                   "(-2)-curve away from every Wahl chain is a zero "
                                   "curve for the contracted canonical class"))

    k2 = k_squared(ms)
    if strict and not zero_curves and k2 > 0:
        return NefAmpleReport("ample", (), tuple(warnings), tuple(contractions))
    notes = list(zero_curves)
    if k2 <= 0:
        notes.append(Witness("k-squared", "-", f"K^2 = {k2} is not positive"))
    return NefAmpleReport("nef-only", (), tuple(notes) + tuple(warnings),
                          tuple(contractions))


def _contraction_for(ms: MarkedSurface, curve: str, meets: list[str]) -> Contraction:
    """Describe the T-singularity produced by contracting an equality curve."""
    chain_index = {c: i for i, ch in enumerate(ms.wahl_chains) for c in ch}
    joined = tuple(chain_index[m] for m in meets)
    if len(meets) == 2 and len(set(joined)) == 2:
        (i, a), (j, b) = (joined[0], meets[0]), (joined[1], meets[1])
        left = _oriented(ms, i, a, end="last")
        right = _oriented(ms, j, b, end="first")
        if left is not None and right is not None:
            cq = blow_down_compose(left, right)
            return Contraction(curve, (i, j), cq, t_singularity(cq.m, cq.q))
    # interior or single-chain equality: no chain-chain join picture to report
    return Contraction(curve, tuple(sorted(set(joined))), None, None)


def _oriented(ms: MarkedSurface, index: int, end_curve: str,
              end: str) -> Optional[tuple[int, ...]]:
    chain = ms.wahl_chains[index]
    if end_curve not in (chain[0], chain[-1]):
        return None
    names = list(chain)
    if end == "last" and end_curve == chain[0]:
        names.reverse()
    if end == "first" and end_curve == chain[-1]:
        names.reverse()
    return tuple(-ms.surface.curve(c).self_int for c in names)


def obstruction_dim(config: Configuration, ambient_rank_cap: Optional[int] = None) -> int:
    """dim H^2(X, T_X) = r minus the (capped) rank of the Gram matrix.

    Zero exactly when the Gram matrix is invertible; the cap models the
    Picard number of the ambient surface.
    """
    matrix = config.intersection_matrix()
    rank = rank_exact(matrix)
    if ambient_rank_cap is not None:
        rank = min(rank, ambient_rank_cap)
    return config.r - rank


@dataclass(frozen=True)
class SingularityEntry:
    kind: str  # "wahl" | "ade"
    quotient: CyclicQuotient
    wahl: Optional[WahlSingularity] = None
    ade_k: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == "wahl":
            return f"1/{self.quotient.m}(1,{self.quotient.q})"
        return f"A{self.ade_k} = 1/{self.quotient.m}(1,{self.quotient.q})"


def singularity_report(ms: MarkedSurface) -> list[SingularityEntry]:
    """Wahl chains as 1/n^2(1,na-1), A_k chains as 1/(k+1)(1,k)."""
    entries = [SingularityEntry("wahl", s.quotient(), wahl=s) for s in ms.wahl_data()]
    for chain in ms.ade_chains:
        k = len(chain)
        entries.append(SingularityEntry("ade", CyclicQuotient(k + 1, k), ade_k=k))
    return entries


@dataclass(frozen=True)
class Pi1Report:
    status: str  # "trivial" | "inconclusive"
    justification: str
    per_chain: tuple[str, ...] = ()


def _chain_hits(ms: MarkedSurface, curve: str) -> dict[int, list[str]]:
    """Wahl chain index -> chain curves this curve meets (with multiplicity)."""
    hits: dict[int, list[str]] = {}
    chain_index = {c: i for i, ch in enumerate(ms.wahl_chains) for c in ch}
    for node in ms.surface.nodes_at(curve):
        other = node.other(curve)
        if other in chain_index:
            hits.setdefault(chain_index[other], []).append(other)
    return hits


def pi1_verdict(ms: MarkedSurface) -> Pi1Report:
    """Sufficiency test for simple connectivity of the smoothed surface.

    Seeds: an external curve joining the ends of two chains with coprime
    indices kills both; one meeting a chain's end and nothing else kills
    that chain.  Then meridian propagation runs to a fixpoint: an external
    curve meeting a live chain exactly once, and otherwise only dead
    chains, kills that position's meridian exponent, and a chain dies once
    its exponents and n^2 have gcd 1.  Never reports "nontrivial".
    """
    chains = ms.wahl_chains
    if not chains:
        return Pi1Report("trivial", "no Wahl chains marked")
    data = ms.wahl_data()
    surface = ms.surface
    chain_curves = {c for ch in chains for c in ch}
    externals = [c.name for c in surface.curves if c.name not in chain_curves]

    dead: dict[int, str] = {}
    for name in externals:
        hits = _chain_hits(ms, name)
        total_nodes = len(surface.nodes_at(name))
        hit_nodes = sum(len(v) for v in hits.values())
        if total_nodes != hit_nodes:
            continue  # meets something outside the chains: not condition I/II
        ends = {i: hit[0] for i, hit in hits.items()
                if len(hit) == 1 and hit[0] in (chains[i][0], chains[i][-1])}
        if len(hits) == 1 and len(ends) == 1:
            i = next(iter(ends))
            dead.setdefault(i, f"{name} meets only the end {ends[i]}")
        elif len(hits) == 2 and len(ends) == 2:
            i, j = sorted(ends)
            if gcd(data[i].n, data[j].n) == 1:
                why = f"{name} joins chain ends; gcd({data[i].n},{data[j].n})=1"
                dead.setdefault(i, why)
                dead.setdefault(j, why)

    changed = True
    while changed and len(dead) < len(chains):
        changed = False
        for i, chain in enumerate(chains):
            if i in dead:
                continue
            entries = [-surface.curve(c).self_int for c in chain]
            exps = meridian_exponents(entries)
            imposed: list[tuple[int, str]] = []
            for name in externals:
                hits = _chain_hits(ms, name)
                if len(hits.get(i, [])) != 1:
                    continue
                if any(j != i and j not in dead for j in hits):
                    continue  # tied to a still-live chain: no clean relation
                pos = chain.index(hits[i][0])
                imposed.append((exps[pos], name))
            m = data[i].n * data[i].n
            g = gcd(m, *(t for t, _ in imposed)) if imposed else m
            if g == 1:
                dead[i] = ("meridian exponents "
                           f"{[t for t, _ in imposed]} from "
                           f"{[n for _, n in imposed]} generate")
                changed = True

    notes = tuple(f"chain {i}: {dead[i]}" if i in dead else
                  f"chain {i}: residual meridian subgroup nontrivial"
                  for i in range(len(chains)))
    if len(dead) == len(chains):
        return Pi1Report("trivial", "every chain meridian group dies", notes)
    return Pi1Report("inconclusive",
                     "no sufficiency criterion applies; triviality not certified",
                     notes)


@dataclass(frozen=True)
class SurfaceReport:
    """Everything the toolkit certifies about one construction."""

    k2: int
    singularities: tuple[str, ...]
    ample: NefAmpleReport
    obstruction: int
    pi1: Pi1Report
    family_dim: int

    def lines(self) -> list[str]:
        out = [f"K^2 = {self.k2}",
               "singularities: " + ", ".join(self.singularities),
               f"canonical class: {self.ample.status}",
               f"obstruction dimension: {self.obstruction}",
               f"pi1 verdict: {self.pi1.status} ({self.pi1.justification})",
               f"family dimension: {self.family_dim}"]
        for w in self.ample.witnesses + self.ample.warnings:
            out.append(f"  witness[{w.kind}] {w.curve}: {w.detail}")
        return out


def surface_report(ms: MarkedSurface, base: Configuration,
                   ambient_rank_cap: Optional[int] = None) -> SurfaceReport:
    """Assemble the full report; base is the configuration before blow-ups."""
    k2 = k_squared(ms)
    return SurfaceReport(
        k2=k2,
        singularities=tuple(str(e) for e in singularity_report(ms)),
        ample=nef_ample_check(ms),
        obstruction=obstruction_dim(base, ambient_rank_cap),
        pi1=pi1_verdict(ms),
        family_dim=20 - 2 * k2,
    )
