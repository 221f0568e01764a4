"""Defect detection relative to subshifts of finite type: defect fields,
their local minima, and classification of defects as interfaces (between
domains of an SFT decomposition) or dislocations (phase changes inside one
periodic SFT).

The defect field at k is the length of the largest admissible word centred
on k, with the window convention [k - (n-1)//2, k + n//2] (the centre of an
even-length word is its left-of-centre cell).  On a finite window the field
saturates at the in-window maximum; saturated cells are flagged and never
reported as defects.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

import numpy as np

from .lattice import Alphabet, Configuration


class SFTError(ValueError):
    pass


def _as_words(forbidden) -> tuple[tuple[int, ...], ...]:
    out = []
    for w in forbidden:
        if isinstance(w, str):
            w = tuple(int(ch) for ch in w)
        out.append(tuple(int(s) for s in w))
    return tuple(out)


@dataclass(frozen=True)
class SFTSpec:
    """Subshift of finite type given by its forbidden words."""

    alphabet: Alphabet
    forbidden: tuple[tuple[int, ...], ...]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "forbidden", _as_words(self.forbidden))
        for w in self.forbidden:
            if not w:
                raise SFTError("empty forbidden word")
            if any(not 0 <= s < self.alphabet.size for s in w):
                raise SFTError("forbidden word outside alphabet")
        if not self._has_cycle():
            raise SFTError("empty language: no bi-infinite admissible path")

    @property
    def order(self) -> int:
        return max((len(w) for w in self.forbidden), default=1)

    def admissible(self, word) -> bool:
        word = tuple(int(s) for s in word)
        for f in self.forbidden:
            lf = len(f)
            for i in range(len(word) - lf + 1):
                if word[i:i + lf] == f:
                    return False
        return True

    def _has_cycle(self) -> bool:
        nodes, edges = debruijn_graph(self)
        # prune to the recurrent part
        nodes = set(nodes)
        while True:
            outs = {u for u, _ in edges}
            ins = {v for _, v in edges}
            keep = {u for u in nodes if u in outs and u in ins}
            if keep == nodes:
                return bool(nodes)
            nodes = keep
            edges = [(u, v) for u, v in edges if u in nodes and v in nodes]

    def occurrence_intervals(self, cells: np.ndarray):
        """(start, end) pairs, inclusive, of forbidden-word occurrences."""
        out = []
        for f in self.forbidden:
            lf = len(f)
            n = len(cells) - lf + 1
            if n < 1:
                continue
            hit = np.ones(n, dtype=bool)
            for i, s in enumerate(f):
                hit &= cells[i:i + n] == s
            for j in np.flatnonzero(hit):
                out.append((int(j), int(j) + lf - 1))
        return sorted(out)


def language(sft: SFTSpec, length: int) -> set[tuple[int, ...]]:
    """All admissible words of the given length (desk scale only)."""
    words = {()}
    for _ in range(length):
        words = {w + (a,) for w in words for a in range(sft.alphabet.size)
                 if sft.admissible(w + (a,))}
    return words


def debruijn_graph(sft: SFTSpec, r: int | None = None):
    """Nodes = admissible (r-1)-words, edges = admissible r-words."""
    if r is None:
        r = max(2, sft.order)
    nodes = sorted(language(sft, r - 1))
    edges = [(u, u[1:] + (a,)) for u in nodes for a in range(sft.alphabet.size)
             if sft.admissible(u + (a,))]
    return nodes, edges


# ---------------------------------------------------------------------------
# defect fields


@dataclass
class DefectField:
    """Per-cell largest centred admissible length over an exact window."""

    values: np.ndarray
    saturated: np.ndarray
    lo: int                      # coordinate of values[0]

    def positions(self) -> list[int]:
        """Defect coordinates: non-saturated local minima (plateau cells
        count individually; runs touching the window boundary are skipped)."""
        v = self.values
        n = len(v)
        out = []
        for k in range(1, n - 1):
            if self.saturated[k]:
                continue
            if v[k] <= v[k - 1] and v[k] <= v[k + 1]:
                out.append(self.lo + k)
        return out


def defect_field(sft: SFTSpec, c: Configuration) -> DefectField:
    """Largest centred admissible length at each exact cell.

    An occurrence [s, e] of a forbidden word caps the field at
    max(2(k-s), 2(e-k)-1): the largest centred window that does not fully
    contain [s, e]."""
    xs = c.exact_cells().astype(np.int64)
    n = len(xs)
    k = np.arange(n)
    sat = np.minimum(2 * k + 1, 2 * (n - 1 - k) + 1)
    vals = sat.copy()
    iv = sft.occurrence_intervals(xs)
    if iv:
        ss = np.array([s for s, _ in iv])
        ee = np.array([e for _, e in iv])
        # nearest fully-right interval: min end among starts >= k
        order = np.argsort(ss)
        ss_s, ee_s = ss[order], ee[order]
        sufmin = np.minimum.accumulate(ee_s[::-1])[::-1]
        i = np.searchsorted(ss_s, k, side="left")
        has = i < len(ss_s)
        eR = np.where(has, sufmin[np.minimum(i, len(ss_s) - 1)], 0)
        vals = np.where(has, np.minimum(vals, 2 * (eR - k) - 1), vals)
        # nearest fully-left interval: max start among ends <= k
        order = np.argsort(ee)
        ss_e, ee_e = ss[order], ee[order]
        premax = np.maximum.accumulate(ss_e)
        i = np.searchsorted(ee_e, k, side="right") - 1
        has = i >= 0
        sL = np.where(has, premax[np.maximum(i, 0)], 0)
        vals = np.where(has, np.minimum(vals, 2 * (k - sL)), vals)
        # straddled intervals, cell by cell (total work <= sum of lengths)
        for s, e in iv:
            kk = np.arange(max(s + 1, 0), min(e, n - 1) + 1)
            if len(kk):
                g = np.maximum(2 * (kk - s), 2 * (e - kk) - 1)
                vals[kk] = np.minimum(vals[kk], g)
    vals = np.maximum(vals, 0)
    return DefectField(vals, vals >= sat, c.exact_lo)


def union_defect_field(sfts, c: Configuration) -> DefectField:
    """Field relative to a disjoint union of subshifts: the language of a
    union is the union of languages, so the field is the pointwise max."""
    fields = [defect_field(s, c) for s in sfts]
    vals = np.maximum.reduce([f.values for f in fields])
    sat = np.any([f.saturated for f in fields], axis=0)
    return DefectField(vals, sat, fields[0].lo)


# ---------------------------------------------------------------------------
# periods and phases


@dataclass(frozen=True)
class PeriodData:
    """Period P of a transitive SFT and the phase class of every
    (order-1)-word, from BFS distances mod P off a base node."""

    P: int
    classes: dict[tuple[int, ...], int]
    order: int
    consistent: bool    # adjacency property verified at the order length

    def partition(self):
        out = [set() for _ in range(self.P)]
        for w, i in self.classes.items():
            out[i].add(w)
        return out


def compute_period(sft: SFTSpec, base: tuple[int, ...] | None = None) -> PeriodData:
    """P = gcd of closed-walk lengths of the de Bruijn graph, which must be
    transitive (one recurrent strongly connected component)."""
    r = max(2, sft.order)
    nodes, edges = debruijn_graph(sft, r)
    succ = {u: [] for u in nodes}
    pred = {u: [] for u in nodes}
    for u, v in edges:
        succ[u].append(v)
        pred[v].append(u)
    # recurrent part: prune sources/sinks, then demand a single SCC
    live = set(nodes)
    changed = True
    while changed:
        changed = False
        for u in list(live):
            if not any(v in live for v in succ[u]) \
                    or not any(v in live for v in pred[u]):
                live.discard(u)
                changed = True
    if not live:
        raise SFTError("no recurrent admissible words")
    comp = _scc_of(sorted(live)[0], succ, pred, live)
    if comp != live:
        raise SFTError("SFT is not transitive: several recurrent components")
    if base is None:
        base = sorted(live)[0]
    if base not in live:
        raise SFTError("base word is not recurrent")
    dist = {base: 0}
    queue = [base]
    while queue:
        u = queue.pop(0)
        for v in succ[u]:
            if v in live and v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    P = 0
    for u in live:
        for v in succ[u]:
            if v in live:
                P = gcd(P, dist[u] + 1 - dist[v])
    P = abs(P) if P else 1
    classes = {u: dist[u] % P for u in live}
    # defining adjacency property: an overlap-compatible pair is admissible
    # iff the phases are consecutive
    ok = True
    for u in live:
        for a in range(sft.alphabet.size):
            v = u[1:] + (a,)
            if v not in live:
                continue
            adm = sft.admissible(u + (a,))
            if adm != ((classes[u] + 1) % P == classes[v]):
                ok = False
    return PeriodData(P, classes, r, ok)


def _scc_of(start, succ, pred, live):
    def reach(adj):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v in live and v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen
    return reach(succ) & reach(pred)


# ---------------------------------------------------------------------------
# classification


@dataclass
class DefectReading:
    """Defect positions with (left, right) labels: domain indices for
    interfaces, local phases for dislocations."""

    kind: str
    positions: list[int]
    labels: list[tuple[int, int]]

    def label_strings(self) -> list[str]:
        return [f"{a}-{b}" for a, b in self.labels]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("position,left,right\n")
            for p, (a, b) in zip(self.positions, self.labels):
                fh.write(f"{p},{a},{b}\n")


@dataclass(frozen=True)
class Decomposition:
    """Disjoint union of domain SFTs; alpha = length at which the domain
    languages are pairwise disjoint (verified by enumeration)."""

    domains: tuple[SFTSpec, ...]
    alpha: int

    def __post_init__(self):
        langs = [language(d, self.alpha) for d in self.domains]
        for i, j in itertools.combinations(range(len(langs)), 2):
            inter = langs[i] & langs[j]
            if inter:
                raise SFTError(
                    f"domains {i} and {j} share length-{self.alpha} words, "
                    f"e.g. {sorted(inter)[0]}")

    def periods(self) -> list[PeriodData]:
        return [compute_period(d) for d in self.domains]


def classify_interfaces(dec: Decomposition, c: Configuration) -> DefectReading:
    """Label each defect of the union subshift by the domains of the
    flanking regions (least-index domain when a region is too short to
    disambiguate)."""
    fields = [defect_field(d, c) for d in dec.domains]
    vals = np.maximum.reduce([f.values for f in fields])
    sat = np.any([f.saturated for f in fields], axis=0)
    union = DefectField(vals, sat, fields[0].lo)
    pos = union.positions()
    lo = union.lo
    bounds = [lo] + pos + [lo + len(vals) - 1]
    # one representative cell per region between consecutive defects
    def region_domain(a, b):
        if b < a:
            b = a
        mid = (a + b) // 2 - lo
        col = np.array([f.values[mid] for f in fields])
        return int(np.argmax(col))          # argmax takes the least index
    labels = []
    for i, p in enumerate(pos):
        left = region_domain(bounds[i] + (1 if i else 0), p - 1)
        right = region_domain(p + 1, bounds[i + 2] - (0 if i == len(pos) - 1
                                                      else 1))
        labels.append((left, right))
    return DefectReading("interface", pos, labels)


def classify_dislocations(sft: SFTSpec, pd: PeriodData,
                          c: Configuration) -> DefectReading:
    """Label each defect by the local phases of the flanking regions:
    phase(region) + defect position mod P, which is invariant under
    translation of the configuration."""
    if pd.P < 2:
        raise SFTError("dislocations need period >= 2")
    if not pd.consistent:
        raise SFTError("phase partition failed the adjacency property")
    field = defect_field(sft, c)
    xs = c.exact_cells()
    pos = field.positions()
    m = pd.order - 1                        # node-word length
    P = pd.P

    def local_phase(defect, starts):
        # first admissible node word among the candidate start coordinates
        for a in starts:
            i = a - field.lo
            if i < 0 or i + m > len(xs):
                continue
            w = tuple(int(s) for s in xs[i:i + m])
            if w in pd.classes:
                return (pd.classes[w] - a + defect) % P
        return 0                            # region too short: fixed default

    labels = []
    for i, p in enumerate(pos):
        prev_p = pos[i - 1] if i else field.lo - 1
        next_p = pos[i + 1] if i + 1 < len(pos) else field.lo + len(xs)
        # the left region ends at the defect cell, the right one starts
        # just after it; prefer the node word nearest the defect
        left = local_phase(p, range(p - m + 1, prev_p, -1))
        right = local_phase(p, range(p + 1, next_p - m + 1))
        labels.append((left, right))
    return DefectReading("dislocation", pos, labels)
