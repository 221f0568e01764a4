"""Particle systems over cellular automata: defect morphisms, update
functions, and mechanical verification of the particle axioms.

A particle system is a morphism pi sending configurations to particle
sequences, plus an update function phi assigning each particle coordinate a
finite set of target offsets in [-r, r].  The axioms (locality, surjectivity,
particle control, disjunction, coalescence) are checked exhaustively on every
cyclic word of a given length; cyclic words are legitimate periodic
configurations, so every reported violation is genuine, and the length bound
2*(w + r + radius) + 1 makes the center evaluation of any same-length
linear word appear among the checks.

Update functions are scalar callables `update(pi_win, x_win, rule_win)`
returning a tuple of offsets; the checker tabulates them over all
(x-window, rule-window) codes up front and evaluates by gather.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .lattice import (Alphabet, BINARY, Configuration, GLIDER_ALPHABET,
                      rng_stream, window_sample)
from .rules import (LocalRule, PCASpec, make_cyclic, make_elementary,
                    make_fates_pca, make_gliders, make_line_pca,
                    make_one_sided_captive, make_random_walk_ca, project,
                    step, step_pca)

NO_PARTICLE, PROGRESSING, INTERACTING = 0, 1, 2


@dataclass(frozen=True)
class ParticleSystem:
    """Morphism + update function + radii.

    particle_codes: codes of the morphism's output alphabet that are
    particles (everything else is background).  update takes three tuples:
    pi values at offsets [-w, w], x values at offsets [x_lo, x_hi], and rule
    indices at offsets [rule window] (empty tuple for a deterministic CA).
    """

    name: str
    morphism: LocalRule
    particle_codes: tuple[int, ...]
    particle_names: dict[int, str]
    update: callable
    r: int
    w: int
    rule_window: tuple[int, int] = (0, 0)
    speeds: dict[int, int] = field(default_factory=dict)

    @property
    def x_window(self) -> tuple[int, int]:
        return (-self.w + self.morphism.min_off,
                self.w + self.morphism.max_off)

    def min_enum_len(self, ca_radius: int) -> int:
        return 2 * (self.w + self.r + ca_radius) + 1


class FeasibilityError(Exception):
    pass


# ---------------------------------------------------------------------------
# enumeration checker


@dataclass
class ConditionResult:
    passed: bool
    n_checked: int
    witnesses: list  # (word, coordinate, rule_assignment)


@dataclass
class CheckReport:
    system: str
    enum_len: int
    conditions: dict[str, ConditionResult]
    notes: list[str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def summary(self) -> str:
        lines = [f"{self.system}: enum_len={self.enum_len} "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        for name, c in self.conditions.items():
            lines.append(f"  {name}: {'pass' if c.passed else 'FAIL'} "
                         f"({c.n_checked} checks)")
            for wd, k, a in c.witnesses[:3]:
                lines.append(f"    witness word={wd} k={k} rules={a}")
        lines.extend("  note: " + n for n in self.notes)
        return "\n".join(lines)


def _cyclic_apply(rule: LocalRule, arr: np.ndarray) -> np.ndarray:
    """Apply a local rule to each row read as a cyclic word."""
    idx = np.zeros(arr.shape, dtype=np.int64)
    for o in rule.offsets:
        idx *= rule.alphabet.size
        idx += np.roll(arr, -o, axis=1)
    return rule.table[idx]


def _enum_words(size: int, length: int, lo: int, hi: int) -> np.ndarray:
    """Rows lo:hi of the lexicographic enumeration of size**length words."""
    codes = np.arange(lo, hi, dtype=np.int64)
    out = np.empty((hi - lo, length), dtype=np.uint8)
    for j in range(length - 1, -1, -1):
        out[:, j] = codes % size
        codes //= size
    return out


def _cyclic_assignments(n_rules: int, allowed: np.ndarray, length: int):
    """All cyclic words over rule indices whose adjacent pairs are allowed."""
    out = []

    def extend(path):
        if len(path) == length:
            if allowed[path[-1], path[0]]:
                out.append(tuple(path))
            return
        for nxt in range(n_rules):
            if allowed[path[-1], nxt]:
                extend(path + [nxt])

    for start in range(n_rules):
        extend([start])
    return out


def _encode_windows(arr: np.ndarray, size: int, lo: int, hi: int
                    ) -> np.ndarray:
    """Per-coordinate cyclic window codes; out[:, k] encodes
    arr[:, (k+lo..k+hi) mod L] in base `size`, first cell most significant."""
    code = np.zeros(arr.shape, dtype=np.int64)
    for o in range(lo, hi + 1):
        code *= size
        code += np.roll(arr, -o, axis=1)
    return code


def _decode_base(code: int, size: int, n: int) -> tuple[int, ...]:
    out = [0] * n
    for i in range(n - 1, -1, -1):
        out[i] = code % size
        code //= size
    return tuple(out)


class _PhiTable:
    """Scalar update function tabulated over every (x-window code,
    rule-window code) pair; the window spaces are tiny, so the full table
    is cheap and turns every later lookup into a single gather."""

    def __init__(self, ps: ParticleSystem, ca_alphabet: Alphabet,
                 n_rules: int, rw_len: int):
        self.ps = ps
        self.size = ca_alphabet.size
        self.x_lo, self.x_hi = ps.x_window
        self.locality_bad: list[tuple[int, int]] = []
        n_x = self.size ** (self.x_hi - self.x_lo + 1)
        n_r = n_rules ** rw_len
        tab = np.empty((n_r, n_x), dtype=np.int64)
        for rc in range(n_r):
            rwin = _decode_base(rc, n_rules, rw_len)
            for xc in range(n_x):
                tab[rc, xc] = self._eval(xc, rc, rwin)
        self.table = tab

    def _eval(self, xcode: int, rcode: int, rule_win: tuple[int, ...]) -> int:
        ps = self.ps
        xw = _decode_base(xcode, self.size, self.x_hi - self.x_lo + 1)
        m = ps.morphism
        pi = tuple(
            int(m(*[xw[j + o - self.x_lo] for o in m.offsets]))
            for j in range(-ps.w, ps.w + 1))
        offs = ps.update(pi, xw, rule_win)
        mask = 0
        for o in offs:
            if not -ps.r <= o <= ps.r:
                self.locality_bad.append((xcode, rcode))
                continue
            mask |= 1 << (o + ps.r)
        return mask


def _mask_tables(r: int):
    n = 1 << (2 * r + 1)
    pop = np.zeros(n, dtype=np.int64)
    mino = np.full(n, 999, dtype=np.int64)
    maxo = np.full(n, -999, dtype=np.int64)
    for m in range(1, n):
        offs = [o - r for o in range(2 * r + 1) if (m >> o) & 1]
        pop[m] = len(offs)
        mino[m] = min(offs)
        maxo[m] = max(offs)
    return pop, mino, maxo


def check_particle_system(ca, ps: ParticleSystem, enum_len: int,
                          max_witnesses: int = 5,
                          chunk_rows: int = 200_000) -> CheckReport:
    """Verify the particle axioms on every cyclic word of length enum_len,
    under every admissible rule assignment when `ca` is a PCA.

    Conditions reported: locality, empty_at_nonparticle, particle_control,
    surjectivity, disjunction, coalescence, interaction_bound (the
    |phi| + |phi^-1| <= 2r+2 count at nonempty interactions).
    """
    is_pca = isinstance(ca, PCASpec)
    rules = ca.rules if is_pca else (ca,)
    radius = ca.radius
    if enum_len < ps.min_enum_len(radius):
        raise FeasibilityError(
            f"enum_len {enum_len} below soundness bound "
            f"{ps.min_enum_len(radius)}")
    L = enum_len
    size = rules[0].alphabet.size
    r, w = ps.r, ps.w
    pcodes = np.array(sorted(ps.particle_codes), dtype=np.int64)
    pop, mino, maxo = _mask_tables(r)
    rw_lo, rw_hi = ps.rule_window
    rw_len = rw_hi - rw_lo + 1
    phi = _PhiTable(ps, rules[0].alphabet, len(rules) if is_pca else 1,
                    rw_len)

    if is_pca:
        if ca.law.kind == "iid":
            active = [i for i, p in enumerate(ca.law.probs) if p > 0]
            assigns = list(itertools.product(active, repeat=L))
        else:
            assigns = _cyclic_assignments(len(rules),
                                          ca.law.allowed_pairs(), L)
        # every condition is per-coordinate and commutes with rotating the
        # word and the assignment together, so one assignment per rotation
        # class covers all of them
        assigns = [a for a in assigns
                   if all(a <= a[i:] + a[:i] for i in range(1, L))]
    else:
        assigns = [None]

    names = ["locality", "empty_at_nonparticle", "particle_control",
             "surjectivity", "disjunction", "coalescence",
             "interaction_bound"]
    res = {n: ConditionResult(True, 0, []) for n in names}
    notes = []
    res["locality"].n_checked = phi.table.size
    if phi.locality_bad:
        res["locality"].passed = False
        res["locality"].witnesses = [
            ("window code", xc, rc) for xc, rc in
            phi.locality_bad[:max_witnesses]]
    n_ambiguous = 0

    def witness(cond, viol, words_chunk, assign):
        c = res[cond]
        c.passed = False
        for wi, k in np.argwhere(viol)[:max_witnesses - len(c.witnesses)]:
            c.witnesses.append((tuple(int(s) for s in words_chunk[wi]),
                                int(k), assign))

    n_words = size ** L
    for lo in range(0, n_words, chunk_rows):
        words = _enum_words(size, L, lo, min(lo + chunk_rows, n_words))
        PI = _cyclic_apply(ps.morphism, words)
        P = np.isin(PI, pcodes)
        XC = _encode_windows(words, size, *ps.x_window)
        Fr = [_cyclic_apply(rule, words) for rule in rules]
        for assign in assigns:
            if assign is None:
                F = Fr[0]
            else:
                F = np.empty_like(words)
                for k in range(L):
                    F[:, k] = Fr[assign[k]][:, k]
            PIF = _cyclic_apply(ps.morphism, F)
            PF = np.isin(PIF, pcodes)
            if assign is None:
                rcodes = np.zeros(L, dtype=np.int64)
            else:
                rcodes = np.empty(L, dtype=np.int64)
                for k in range(L):
                    rc = 0
                    for o in range(rw_lo, rw_hi + 1):
                        rc = rc * len(rules) + assign[(k + o) % L]
                    rcodes[k] = rc
            M = phi.table[rcodes[None, :], XC]
            nc = words.size

            viol = ~P & (M != 0)
            res["empty_at_nonparticle"].n_checked += nc
            if viol.any():
                witness("empty_at_nonparticle", viol, words, assign)
            M = np.where(P, M, 0)

            # particle control: every image coordinate hosts a particle
            viol = np.zeros(words.shape, dtype=bool)
            covered = np.zeros(words.shape, dtype=bool)
            claimed = np.zeros(words.shape, dtype=np.int64)
            for o in range(-r, r + 1):
                src = ((M >> (o + r)) & 1).astype(bool)
                viol |= src & ~np.roll(PF, -o, axis=1)
                shifted = np.roll(src, o, axis=1)
                covered |= shifted
                claimed += shifted
            res["particle_control"].n_checked += nc
            if viol.any():
                witness("particle_control", viol, words, assign)

            viol = PF & ~covered
            res["surjectivity"].n_checked += nc
            if viol.any():
                witness("surjectivity", viol, words, assign)

            # disjunction between particle pairs at cyclic distance <= 2r
            for d in range(1, 2 * r + 1):
                B = np.roll(M, -d, axis=1)
                both = P & np.roll(P, -d, axis=1)
                eq = M == (B << d)
                ordered = maxo[M] < mino[B] + d
                viol = both & ~eq & ~ordered
                res["disjunction"].n_checked += nc
                if viol.any():
                    witness("disjunction", viol, words, assign)

            # coalescence: each particle progresses (single target, single
            # claimant, type preserved) or is destructive (fewer created)
            cols = np.arange(L)[None, :]
            img = (cols + np.where(M != 0, mino[M], 0)) % L
            gs = np.take_along_axis(claimed, img, axis=1)
            tp = np.take_along_axis(PIF, img, axis=1) == PI
            nonempty = P & (M != 0)
            prog = nonempty & (pop[M] == 1) & (gs == 1) & tp
            destr = (P & (M == 0)) | (nonempty & (pop[M] < gs))
            viol = P & ~prog & ~destr
            res["coalescence"].n_checked += nc
            if viol.any():
                witness("coalescence", viol, words, assign)

            viol = nonempty & ~prog & (pop[M] + gs > 2 * r + 2)
            res["interaction_bound"].n_checked += nc
            if viol.any():
                witness("interaction_bound", viol, words, assign)

            # three or more particles in one phi window: resolved by the
            # update function's own case order; flagged, not failed
            crowd = np.zeros(words.shape, dtype=np.int64)
            for d in range(-w, w + 1):
                crowd += np.roll(P, d, axis=1)
            n_ambiguous += int((P & (crowd >= 3)).sum())

    if n_ambiguous:
        notes.append(f"{n_ambiguous} particle coordinates saw >=3 particles "
                     "in one update window; resolved by fixed case order")
    return CheckReport(ps.name, enum_len, res, notes)


# ---------------------------------------------------------------------------
# step classification and density traces


def _linear_codes(cells: np.ndarray, size: int, lo: int, hi: int) -> np.ndarray:
    """Window codes over a linear array: out[j] encodes
    cells[lpad+j+lo .. lpad+j+hi] with lpad = max(0, -lo)."""
    lpad, rpad = max(0, -lo), max(0, hi)
    n = len(cells) - lpad - rpad
    code = np.zeros(n, dtype=np.int64)
    for o in range(lo, hi + 1):
        code *= size
        code += cells[lpad + o: lpad + o + n]
    return code


def classify_step(ca, ps: ParticleSystem, c: Configuration,
                  rule_field: np.ndarray | None = None,
                  field_origin: int = 0, phi: _PhiTable | None = None):
    """Tag the particle coordinates of one update step as progressing or
    interacting.  For a PCA pass the drawn per-cell rule field (as returned
    by step_pca alongside the next configuration).

    Returns (tags, lo): tags[i] in {NO_PARTICLE, PROGRESSING, INTERACTING}
    is the tag at coordinate lo + i; the range is the widest sub-window of
    the exact region on which the classification is determined."""
    is_pca = isinstance(ca, PCASpec)
    rules = ca.rules if is_pca else (ca,)
    size = rules[0].alphabet.size
    r = ps.r
    rw_lo, rw_hi = ps.rule_window
    if phi is None:
        phi = _PhiTable(ps, rules[0].alphabet,
                        len(rules) if is_pca else 1, rw_hi - rw_lo + 1)
    pcodes = np.array(sorted(ps.particle_codes), dtype=np.int64)
    pop, mino, _ = _mask_tables(r)
    xs = c.exact_cells()
    e0 = c.exact_lo

    # image cells under the step actually taken
    m_lo = min(ru.min_off for ru in rules)
    m_hi = max(ru.max_off for ru in rules)
    lpad, rpad = max(0, -m_lo), max(0, m_hi)
    fa0 = e0 + lpad
    n_f = len(xs) - lpad - rpad
    if is_pca:
        if rule_field is None:
            raise ValueError("classifying a PCA step needs the drawn rule field")
        sel = rule_field[fa0 - field_origin: fa0 - field_origin + n_f]
        fs = np.empty(n_f, dtype=np.uint8)
        for i, ru in enumerate(rules):
            m = sel == i
            if m.any():
                fs[m] = ru.apply_cells(xs, lpad, rpad)[m]
    else:
        fs = rules[0].apply_cells(xs, lpad, rpad)

    plp, prp = max(0, -ps.morphism.min_off), max(0, ps.morphism.max_off)
    PI = ps.morphism.apply_cells(xs, plp, prp).astype(np.int64)
    p0 = e0 + plp
    PIF = ps.morphism.apply_cells(fs, plp, prp).astype(np.int64)
    pf0 = fa0 + plp
    x_lo, x_hi = ps.x_window
    XC = _linear_codes(xs, size, x_lo, x_hi)
    xc0 = e0 + max(0, -x_lo)
    if is_pca:
        RC = _linear_codes(rule_field.astype(np.int64), len(rules),
                           rw_lo, rw_hi)
        rc0 = field_origin + max(0, -rw_lo)

    # masks on the range where both windows are known
    Ml = max(xc0, rc0) if is_pca else xc0
    Mh = min(xc0 + len(XC), rc0 + len(RC)) - 1 if is_pca \
        else xc0 + len(XC) - 1
    Ml, Mh = max(Ml, p0), min(Mh, p0 + len(PI) - 1)
    Pm = np.isin(PI[Ml - p0: Mh - p0 + 1], pcodes)
    if is_pca:
        M = phi.table[RC[Ml - rc0: Mh - rc0 + 1], XC[Ml - xc0: Mh - xc0 + 1]]
    else:
        M = phi.table[0, XC[Ml - xc0: Mh - xc0 + 1]]
    M = np.where(Pm, M, 0)

    # claimants per image coordinate
    Cl, Ch = Ml + r, Mh - r
    claimed = np.zeros(Ch - Cl + 1, dtype=np.int64)
    for o in range(-r, r + 1):
        claimed += (M[Cl - o - Ml: Ch - o - Ml + 1] >> (o + r)) & 1

    lo = max(Ml, Cl + r, pf0 + r, p0)
    hi = min(Mh, Ch - r, pf0 + len(PIF) - 1 - r, p0 + len(PI) - 1)
    if lo > hi:
        raise ValueError("exact region too narrow to classify a step")
    n = hi - lo + 1
    Mk = M[lo - Ml: lo - Ml + n]
    Pk = Pm[lo - Ml: lo - Ml + n]
    img = np.arange(lo, hi + 1) + np.where(Mk != 0, mino[Mk], 0)
    gs = claimed[img - Cl]
    tp = PIF[img - pf0] == PI[lo - p0: lo - p0 + n]
    prog = Pk & (pop[Mk] == 1) & (gs == 1) & tp
    tags = np.zeros(n, dtype=np.uint8)
    tags[prog] = PROGRESSING
    tags[Pk & ~prog] = INTERACTING
    return tags, lo


@dataclass
class DensityTrace:
    """Particle densities along sampled trajectories, all measured on one
    deterministic shrinking window per step so that D(t) = sum_p D_p(t)
    exactly.  Slack arrays record, per transition t -> t+1, the largest
    violation over trajectories of the coalescence inequalities

        D(t+1) <= D(t) - D_inter(t)/(r+1) + (2r+2)/L(t)
        D_p(t+1) <= D_p(t) + D_inter(t) + (2r+2)/L(t)

    (negative slack everywhere = both hold pathwise)."""

    system: str
    particle_names: dict[int, str]
    ts: np.ndarray
    D: np.ndarray
    D_prog: np.ndarray
    D_inter: np.ndarray
    D_p: dict[int, np.ndarray]
    slack_total: np.ndarray
    slack_species: np.ndarray
    region_lengths: np.ndarray
    n_traj: int

    @property
    def inequalities_hold(self) -> bool:
        return bool((self.slack_total <= 0).all()
                    and (self.slack_species <= 0).all())

    def to_csv(self, path) -> None:
        codes = sorted(self.D_p)
        cols = ["t", "D", "D_inter", "D_prog"]
        cols += [f"D_{self.particle_names.get(p, p)}" for p in codes]
        cols += ["slack_total", "slack_species"]
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for i, t in enumerate(self.ts):
                row = [str(int(t)), f"{self.D[i]:.10g}",
                       f"{self.D_inter[i]:.10g}", f"{self.D_prog[i]:.10g}"]
                row += [f"{self.D_p[p][i]:.10g}" for p in codes]
                if i < len(self.slack_total):
                    row += [f"{self.slack_total[i]:.10g}",
                            f"{self.slack_species[i]:.10g}"]
                else:
                    row += ["", ""]
                fh.write(",".join(row) + "\n")


def trace_densities(ca, ps: ParticleSystem, measure, t_max: int,
                    n_traj: int, cells: int, seed: int = 0) -> DensityTrace:
    """Sample trajectories, classify every step, and average densities.

    `cells` is the guaranteed minimum measurement-window width at t_max."""
    is_pca = isinstance(ca, PCASpec)
    rules = ca.rules if is_pca else (ca,)
    r = ps.r
    rw_lo, rw_hi = ps.rule_window
    phi = _PhiTable(ps, rules[0].alphabet,
                    len(rules) if is_pca else 1, rw_hi - rw_lo + 1)
    pcodes = sorted(ps.particle_codes)
    m_lo = min(ru.min_off for ru in rules)
    m_hi = max(ru.max_off for ru in rules)
    dl, dr = max(0, -m_lo), max(0, m_hi)       # exact shrink per step
    K = (max(-ps.x_window[0], ps.x_window[1]) + 2 * r + dl + dr
         + max(-rw_lo, rw_hi, 0)
         + max(-ps.morphism.min_off, ps.morphism.max_off, 0) + 2)
    total = cells + 2 * K + (dl + dr) * t_max
    T = t_max

    shape = (n_traj, T + 1)
    aD = np.zeros(shape)
    aProg = np.zeros(shape)
    aInter = np.zeros(shape)
    aP = {p: np.zeros(shape) for p in pcodes}
    lens = np.zeros(T + 1, dtype=np.int64)
    for i in range(n_traj):
        rng = rng_stream(seed, "density-trace", i)
        c = window_sample(measure, total, 0, rng)
        for t in range(T + 1):
            lo_t = c.exact_lo + K
            hi_t = c.exact_hi - K
            L = hi_t - lo_t + 1
            lens[t] = L
            pic = project(ps.morphism, c)
            piw = pic.cells[lo_t - pic.origin: hi_t - pic.origin + 1]
            for p in pcodes:
                aP[p][i, t] = np.count_nonzero(piw == p) / L
            aD[i, t] = sum(aP[p][i, t] for p in pcodes)
            if t == T:
                aProg[i, t] = aInter[i, t] = np.nan
                break
            if is_pca:
                c2, fld, fo = step_pca(ca, c, rng)
                tags, tlo = classify_step(ca, ps, c, fld, fo, phi)
            else:
                c2 = step(ca, c)
                tags, tlo = classify_step(ca, ps, c, phi=phi)
            tw = tags[lo_t - tlo: hi_t - tlo + 1]
            if len(tw) != L:
                raise ValueError("classification window narrower than "
                                 "the measurement window")
            aProg[i, t] = np.count_nonzero(tw == PROGRESSING) / L
            aInter[i, t] = np.count_nonzero(tw == INTERACTING) / L
            c = c2

    corr = (2 * r + 2) / lens[:T].astype(float)
    s_tot = aD[:, 1:] - aD[:, :-1] + aInter[:, :-1] / (r + 1) - corr
    s_sp = np.full((n_traj, T), -np.inf)
    for p in pcodes:
        s = aP[p][:, 1:] - aP[p][:, :-1] - aInter[:, :-1] - corr
        s_sp = np.maximum(s_sp, s)
    return DensityTrace(
        ps.name, dict(ps.particle_names), np.arange(T + 1),
        aD.mean(axis=0), aProg.mean(axis=0), aInter.mean(axis=0),
        {p: aP[p].mean(axis=0) for p in pcodes},
        s_tot.max(axis=0), s_sp.max(axis=0), lens, n_traj)


# ---------------------------------------------------------------------------
# built-in systems

R184, R232 = 0, 1        # rule indices inside the traffic/majority PCA
LINE_SWAP = 1            # take-right index inside the line PCA


def _morphism_from_pairs(alphabet: Alphabet, mapping, n_out: int,
                         offsets=(0, 1), name="defects") -> LocalRule:
    """mapping: callable(window tuple) -> output code."""
    from .rules import rule_from_function
    return rule_from_function(alphabet, offsets,
                              lambda *wn: mapping(wn),
                              out_alphabet=Alphabet(n_out), name=name)


def rule184_system() -> tuple[LocalRule, ParticleSystem]:
    """Dislocations of the traffic automaton over the checkerboard: 00 is
    p01 (speed +1), 11 is p10 (speed -1), head-on pairs annihilate."""
    ca = make_elementary(184)

    def morph(wn):
        return {(0, 0): 1, (1, 1): 2}.get(wn, 0)

    pi = _morphism_from_pairs(ca.alphabet, morph, 3, name="184-dislocations")

    def upd(pi_w, x_w, rules):
        c = pi_w[2]
        if c == 1:
            return () if 2 in (pi_w[3], pi_w[4]) else (1,)
        if c == 2:
            return () if 1 in (pi_w[0], pi_w[1]) else (-1,)
        return ()

    ps = ParticleSystem("rule184", pi, (1, 2), {1: "p01", 2: "p10"},
                        upd, r=1, w=2, speeds={1: 1, 2: -1})
    return ca, ps


def cyclic_system(n: int) -> tuple[LocalRule, ParticleSystem]:
    """Colour interfaces of the n-state cyclic automaton grouped by speed:
    code 1 = right-movers (left cell is the successor), 2 = left-movers,
    3 = stationary walls."""
    ca = make_cyclic(n)

    def morph(wn):
        a, b = wn
        if a == b:
            return 0
        if a == (b + 1) % n:
            return 1
        if b == (a + 1) % n:
            return 2
        return 3

    pi = _morphism_from_pairs(ca.alphabet, morph, 4,
                              name=f"cyclic{n}-interfaces")

    def upd(pi_w, x_w, rules):
        c = pi_w[2]
        if c == 1:
            nxt = pi_w[3]
            if nxt == 2:
                return ()
            if nxt == 0 and pi_w[4] == 2:
                return ()
            return (1,)
        if c == 2:
            prv = pi_w[1]
            if prv == 1:
                return ()
            if prv == 0 and pi_w[0] == 1:
                return ()
            return (-1,)
        if c == 3:
            return (0,)
        return ()

    ps = ParticleSystem(f"cyclic{n}", pi, (1, 2, 3),
                        {1: "p+", 2: "p-", 3: "p0"},
                        upd, r=1, w=2, speeds={1: 1, 2: -1, 3: 0})
    return ca, ps


def one_sided_captive_system(table_2d
                             ) -> tuple[LocalRule, ParticleSystem]:
    """Domain walls of a one-sided captive rule F(x)_i = f(x_i, x_{i+1}):
    walls with f(a,b) = a stand still, walls with f(a,b) = b move left."""
    ca = make_one_sided_captive(table_2d)
    tab = np.asarray(table_2d, dtype=np.uint8)

    def morph(wn):
        a, b = wn
        if a == b:
            return 0
        return 1 if tab[a, b] == a else 2

    pi = _morphism_from_pairs(ca.alphabet, morph, 3, name="captive-walls")

    def upd(pi_w, x_w, rules):
        c = pi_w[2]
        if c == 1:
            if pi_w[3] == 2:  # left-mover arrives; survives iff wall remains
                return (0,) if x_w[2] != x_w[4] else ()
            return (0,)
        if c == 2:
            if pi_w[1] == 1:
                return (-1,) if x_w[1] != x_w[3] else ()
            return (-1,)
        return ()

    ps = ParticleSystem("captive", pi, (1, 2), {1: "stay", 2: "left"},
                        upd, r=1, w=2, speeds={1: 0, 2: -1})
    return ca, ps


def random_walk_system() -> tuple[LocalRule, ParticleSystem]:
    """Second-layer marks of the two-layer walk automaton; each mark follows
    the first-layer coin at its cell (right on (0,1), stay on (1,1))."""
    ca = make_random_walk_ca()
    pi = _morphism_from_pairs(ca.alphabet, lambda wn: wn[0] & 1, 2,
                              offsets=(0,), name="second-layer")

    def upd(pi_w, x_w, rules):
        if pi_w[0] != 1:
            return ()
        return (1,) if x_w[0] == 1 else (0,)

    ps = ParticleSystem("random-walk", pi, (1,), {1: "mark"},
                        upd, r=1, w=0)
    return ca, ps


def fates_system(p: float) -> tuple[PCASpec, ParticleSystem]:
    """Interfaces of the traffic/majority mix between the domains all-0,
    all-1 and checkerboard, with the 1|0 interface already rewritten as a
    p12 + p20 pair.  Speeds of p12/p20 depend on the rule drawn at their
    deciding cell, so the update function reads the rule field at k-1..k+5;
    the widest case is the triple collision p20 + p01 + p12 (domains
    2|0|1|2) which annihilates completely when both deciding cells draw
    the traffic rule."""
    ca = make_fates_pca(p)

    def morph(wn):
        if wn == (0, 0, 1, 1):
            return 1                      # p01
        if wn[1:] == (1, 1, 0):
            return 2                      # p12
        if wn == (0, 0, 1, 0):
            return 3                      # p02
        if wn[1:] == (1, 0, 0):
            return 4                      # p20
        if wn == (1, 0, 1, 1):
            return 5                      # p21
        return 0

    pi = _morphism_from_pairs(ca.alphabet, morph, 6, offsets=(0, 1, 2, 3),
                              name="fates-interfaces")

    def upd(pi_w, x_w, rules):
        c = pi_w[3]
        P = lambda o: pi_w[o + 3]
        R = lambda o: rules[o + 1]
        if c == 1:                      # p01: eaten only in the triple
            if (P(-2) == 4 and R(0) == R184) and (P(1) == 2 and R(3) == R184):
                return ()
            return (0,)
        if c == 3:                      # p02
            return () if (P(1) == 4 and R(3) == R232) else (1,)
        if c == 5:                      # p21
            return () if (P(-2) == 2 and R(0) == R232) else (-1,)
        if c == 2:                      # p12
            if R(2) == R184:
                if P(-1) == 1 and P(-3) == 4 and R(-1) == R184:
                    return ()
                return (-1,)
            if P(2) == 5:
                return ()
            if P(1) == 4:
                return (0,) if R(3) == R232 else (1,)
            return (1,)
        if c == 4:                      # p20
            if R(2) == R184:
                if P(2) == 1:
                    if P(3) == 2 and R(5) == R184:
                        return ()
                    return (2,)
                return (1,)
            if P(-1) == 3:
                return ()
            if P(-1) == 2 and R(1) == R232:
                return (0,)
            return (-1,)
        return ()

    ps = ParticleSystem("fates", pi, (1, 2, 3, 4, 5),
                        {1: "p01", 2: "p12", 3: "p02", 4: "p20", 5: "p21"},
                        upd, r=2, w=3, rule_window=(-1, 5),
                        speeds={1: 0, 3: 1, 5: -1})
    return ca, ps


def line_system() -> tuple[PCASpec, ParticleSystem]:
    """Checkerboard defects (00 and 11) of the line PCA; a defect moves by
    two cells exactly when a swap fires across one of its edge cells."""
    ca = make_line_pca()

    def morph(wn):
        return {(0, 0): 1, (1, 1): 2}.get(wn, 0)

    pi = _morphism_from_pairs(ca.rules[0].alphabet, morph, 3,
                              name="line-defects")

    def upd(pi_w, x_w, rules):
        if pi_w[3] == 0:
            return ()
        # x_w covers offsets [-3, 4]; rules covers offsets [-1, 1]
        x = lambda o: x_w[o + 3]
        if rules[0] == LINE_SWAP:       # swap of cells (k-1, k)
            if x(-1) == x(0):
                return (0,)
            return (-2,) if x(-2) == x(0) else ()
        if rules[1] == LINE_SWAP:       # swap of (k, k+1): equal letters
            return (0,)
        if rules[2] == LINE_SWAP:       # swap of (k+1, k+2)
            if x(2) == x(1):
                return (0,)
            return (2,) if x(3) == x(1) else ()
        return (0,)

    ps = ParticleSystem("line", pi, (1, 2), {1: "d00", 2: "d11"},
                        upd, r=2, w=3, rule_window=(-1, 1))
    return ca, ps


def glider_factor_system(base, factor: LocalRule, v_minus: int, v_plus: int,
                         name: str) -> tuple:
    """Particle system induced by an exact factor map onto a gliders
    automaton: a glider of sign s at k goes to k + v_s iff the gliders
    automaton applied to the factor image keeps it there."""
    G = make_gliders(v_minus, v_plus)
    w = v_plus - v_minus
    r = max(-v_minus, v_plus)

    def upd(pi_w, x_w, rules):
        c = pi_w[w]
        if c == 1 or c == 3:
            return ()
        v_s = v_plus if c == 2 else v_minus
        lo = w + v_s - v_plus
        win = pi_w[lo: lo + (v_plus - v_minus) + 1]
        return (v_s,) if G(*win) == c else ()

    ps = ParticleSystem(name, factor, (0, 2), {0: "-1", 2: "+1"},
                        upd, r=r, w=w, speeds={0: v_minus, 2: v_plus})
    return base, ps


def traffic_factor_system():
    """Rule #184 factored onto the (-1,+1) gliders automaton."""
    from .rules import rule_from_function
    f = rule_from_function(BINARY, (0, 1),
                           lambda a, b: 2 if (a, b) == (0, 0)
                           else 0 if (a, b) == (1, 1) else 1,
                           out_alphabet=GLIDER_ALPHABET, name="traffic-gliders")
    return glider_factor_system(make_elementary(184), f, -1, 1,
                                "traffic-factor")


def cyclic3_factor_system():
    """3-state cyclic automaton factored onto the (-1,+1) gliders automaton."""
    from .rules import rule_from_function
    ca = make_cyclic(3)

    def g(a, b):
        if a == (b + 1) % 3:
            return 2
        if b == (a + 1) % 3:
            return 0
        return 1

    f = rule_from_function(ca.alphabet, (0, 1), g,
                           out_alphabet=GLIDER_ALPHABET, name="cyclic3-gliders")
    return glider_factor_system(ca, f, -1, 1, "cyclic3-factor")


def captive_factor_system(table_2d):
    """Binary one-sided captive rule factored onto the (-1,0) gliders
    automaton (standing walls become +1 gliders, left-movers -1)."""
    from .rules import rule_from_function
    ca = make_one_sided_captive(table_2d)
    tab = np.asarray(table_2d, dtype=np.uint8)
    if ca.alphabet.size != 2:
        raise ValueError("factor onto gliders needs a binary captive rule")

    def g(a, b):
        if a == b:
            return 1
        return 2 if tab[a, b] == a else 0

    f = rule_from_function(ca.alphabet, (0, 1), g,
                           out_alphabet=GLIDER_ALPHABET, name="captive-gliders")
    return glider_factor_system(ca, f, -1, 0, "captive-factor")


def product128_factor_system():
    """Rule #128 block edges mapped to (-1,+1) gliders: the induced walk is
    degenerate (edges strictly alternate), the counterexample to power-law
    decay."""
    from .rules import rule_from_function
    f = rule_from_function(BINARY, (0, 1),
                           lambda a, b: 2 if (a, b) == (0, 1)
                           else 0 if (a, b) == (1, 0) else 1,
                           out_alphabet=GLIDER_ALPHABET, name="128-gliders")
    return glider_factor_system(make_elementary(128), f, -1, 1, "128-factor")


def gliders_identity_system(v_minus: int, v_plus: int):
    """The gliders automaton as a particle system over itself."""
    from .rules import rule_from_function
    ident = rule_from_function(GLIDER_ALPHABET, (0,), lambda s: s,
                               out_alphabet=GLIDER_ALPHABET, name="identity")
    return glider_factor_system(make_gliders(v_minus, v_plus), ident,
                                v_minus, v_plus,
                                f"gliders({v_minus},{v_plus})")


BUILTIN_SYSTEMS = {
    "rule184": rule184_system,
    "cyclic3": lambda: cyclic_system(3),
    "cyclic4": lambda: cyclic_system(4),
    "cyclic5": lambda: cyclic_system(5),
    "captive": lambda: one_sided_captive_system([[0, 0], [0, 1]]),
    "random-walk": random_walk_system,
    "fates": lambda: fates_system(0.5),
    "line": line_system,
    "traffic-factor": traffic_factor_system,
    "cyclic3-factor": cyclic3_factor_system,
    "captive-factor": lambda: captive_factor_system([[0, 0], [0, 1]]),
    "128-factor": product128_factor_system,
    "gliders(-1,1)": lambda: gliders_identity_system(-1, 1),
    "gliders(-1,0)": lambda: gliders_identity_system(-1, 0),
}
