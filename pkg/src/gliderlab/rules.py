"""Local rules, deterministic CA stepping, and probabilistic (per-cell) rule
fields.

A LocalRule is a lookup table over a finite neighborhood.  Rules with equal
input/output alphabets act as cellular automata; rules with a different
output alphabet serve as morphisms (e.g. particle projections, glider
factors).  Stepping trims the window to the computable range and shrinks the
exact region according to the rule's actual offsets, so iterated statistics
match the infinite lattice exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Alphabet, BINARY, GLIDER_ALPHABET, Configuration


@dataclass(frozen=True)
class LocalRule:
    """f(x)_i = table[code of (x_{i+o})_{o in offsets}], code in mixed radix
    with the first offset most significant."""

    alphabet: Alphabet
    offsets: tuple[int, ...]
    table: np.ndarray
    out_alphabet: Alphabet | None = None
    name: str = ""

    def __post_init__(self):
        offs = tuple(int(o) for o in self.offsets)
        if offs != tuple(sorted(set(offs))):
            raise ValueError("offsets must be strictly increasing")
        object.__setattr__(self, "offsets", offs)
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        table.flags.writeable = False
        object.__setattr__(self, "table", table)
        if self.out_alphabet is None:
            object.__setattr__(self, "out_alphabet", self.alphabet)
        if len(table) != self.alphabet.size ** len(offs):
            raise ValueError("table size does not match neighborhood")
        if table.size and int(table.max()) >= self.out_alphabet.size:
            raise ValueError("table value outside output alphabet")

    @property
    def min_off(self) -> int:
        return self.offsets[0]

    @property
    def max_off(self) -> int:
        return self.offsets[-1]

    @property
    def radius(self) -> int:
        return max(abs(self.min_off), abs(self.max_off))

    @property
    def is_automaton(self) -> bool:
        return self.out_alphabet.size == self.alphabet.size

    def window_codes(self, cells: np.ndarray, lpad: int, rpad: int) -> np.ndarray:
        """Mixed-radix neighborhood codes for outputs at cell indices
        lpad .. len(cells)-1-rpad (lpad >= -min_off, rpad >= max_off)."""
        n_out = len(cells) - lpad - rpad
        if n_out < 1:
            raise ValueError("window too small for this rule")
        idx = np.zeros(n_out, dtype=np.int64)
        size = self.alphabet.size
        for o in self.offsets:
            idx *= size
            idx += cells[lpad + o : lpad + o + n_out]
        return idx

    def apply_cells(self, cells: np.ndarray, lpad: int, rpad: int) -> np.ndarray:
        return self.table[self.window_codes(cells, lpad, rpad)]

    def __call__(self, *window: int) -> int:
        """Evaluate on one neighborhood, given in offset order."""
        if len(window) != len(self.offsets):
            raise ValueError("window length must match neighborhood")
        code = 0
        for s in window:
            code = code * self.alphabet.size + int(s)
        return int(self.table[code])


def rule_from_function(alphabet: Alphabet, offsets, fn, out_alphabet=None,
                       name="") -> LocalRule:
    """Tabulate fn over all neighborhoods.  fn takes len(offsets) symbols."""
    offsets = tuple(offsets)
    m = len(offsets)
    size = alphabet.size
    table = np.empty(size ** m, dtype=np.uint8)
    for code in range(size ** m):
        win, c = [], code
        for _ in range(m):
            win.append(c % size)
            c //= size
        win.reverse()
        table[code] = fn(*win)
    return LocalRule(alphabet, offsets, table, out_alphabet, name)


def step(rule: LocalRule, c: Configuration) -> Configuration:
    """One synchronous update; trims the window to the computable range and
    shrinks the exact region per the rule's offsets."""
    if not rule.is_automaton:
        raise ValueError("step requires equal input/output alphabets")
    lpad, rpad = max(0, -rule.min_off), max(0, rule.max_off)
    out = rule.apply_cells(c.cells, lpad, rpad)
    new_origin = c.origin + lpad
    lo = max(new_origin, c.exact_lo - rule.min_off)
    hi = min(new_origin + len(out) - 1, c.exact_hi - rule.max_off)
    if lo > hi:
        raise ValueError("exact region exhausted; sample a wider margin")
    return Configuration(rule.out_alphabet, out, new_origin, lo, hi)


def project(morphism: LocalRule, c: Configuration) -> Configuration:
    """Apply a local morphism (possibly alphabet-changing) to a window."""
    lpad, rpad = max(0, -morphism.min_off), max(0, morphism.max_off)
    out = morphism.apply_cells(c.cells, lpad, rpad)
    new_origin = c.origin + lpad
    lo = max(new_origin, c.exact_lo - morphism.min_off)
    hi = min(new_origin + len(out) - 1, c.exact_hi - morphism.max_off)
    if lo > hi:
        raise ValueError("exact region exhausted by projection")
    return Configuration(morphism.out_alphabet, out, new_origin, lo, hi)


# ---------------------------------------------------------------------------
# probabilistic CA: an independent or Markov field of local rules, one per cell


@dataclass(frozen=True)
class RuleLaw:
    """Law of the per-cell rule index field.

    kind "iid": indices drawn independently with probabilities `probs`.
    kind "markov": stationary Markov chain along the line with transition
    matrix `trans` (rows sum to 1) and stationary vector `stationary`;
    zero entries of `trans` encode forbidden adjacent rule pairs.
    """

    kind: str
    probs: tuple[float, ...] | None = None
    trans: np.ndarray | None = None
    stationary: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "iid":
            if self.probs is None or abs(sum(self.probs) - 1.0) > 1e-9:
                raise ValueError("iid law needs probabilities summing to 1")
        elif self.kind == "markov":
            t = np.asarray(self.trans, dtype=float)
            s = np.asarray(self.stationary, dtype=float)
            if not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError("transition rows must sum to 1")
            if not np.allclose(s @ t, s, atol=1e-8):
                raise ValueError("stationary vector is not stationary")
            t.flags.writeable = False
            s.flags.writeable = False
            object.__setattr__(self, "trans", t)
            object.__setattr__(self, "stationary", s)
        else:
            raise ValueError(f"unknown rule-field law {self.kind!r}")

    @property
    def n_rules(self) -> int:
        return len(self.probs) if self.kind == "iid" else len(self.stationary)

    def allowed_pairs(self) -> np.ndarray:
        """Boolean matrix of permitted adjacent (left, right) rule pairs."""
        n = self.n_rules
        if self.kind == "iid":
            return np.ones((n, n), dtype=bool)
        return np.asarray(self.trans) > 0

    def sample_field(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "iid":
            return rng.choice(self.n_rules, size=n, p=self.probs).astype(np.uint8)
        u = rng.random(n)
        start = int(np.searchsorted(np.cumsum(self.stationary), u[0]))
        cumt = np.cumsum(self.trans, axis=1)
        return _markov_field(np.asarray(cumt), start, u)


def _markov_field(cumt, start, u):  # pragma: no cover - thin wrapper
    from numba import njit

    global _markov_field_jit
    try:
        f = _markov_field_jit
    except NameError:
        @njit(cache=True)
        def f(cumt, start, u):
            n = u.shape[0]
            out = np.empty(n, dtype=np.uint8)
            out[0] = start
            s = start
            for i in range(1, n):
                row = cumt[s]
                x = u[i]
                j = 0
                while row[j] < x:
                    j += 1
                out[i] = j
                s = j
            return out
        _markov_field_jit = f
    return f(cumt, start, u)


@dataclass(frozen=True)
class PCASpec:
    """Probabilistic CA: each cell independently updated by the rule drawn at
    that cell from `law`."""

    rules: tuple[LocalRule, ...]
    law: RuleLaw
    name: str = ""

    def __post_init__(self):
        if len(self.rules) != self.law.n_rules:
            raise ValueError("law dimension must match number of rules")
        a = self.rules[0].alphabet
        for r in self.rules:
            if r.alphabet.size != a.size or not r.is_automaton:
                raise ValueError("all constituent rules must share one alphabet")

    @property
    def alphabet(self) -> Alphabet:
        return self.rules[0].alphabet

    @property
    def min_off(self) -> int:
        return min(r.min_off for r in self.rules)

    @property
    def max_off(self) -> int:
        return max(r.max_off for r in self.rules)

    @property
    def radius(self) -> int:
        return max(abs(self.min_off), abs(self.max_off))


def step_pca(pca: PCASpec, c: Configuration, rng: np.random.Generator):
    """One probabilistic update.  Returns (new configuration, applied rule
    field, field origin); field[i] is the rule index applied at coordinate
    field_origin + i."""
    lpad, rpad = max(0, -pca.min_off), max(0, pca.max_off)
    n_out = len(c.cells) - lpad - rpad
    if n_out < 1:
        raise ValueError("window too small for this PCA")
    field = pca.law.sample_field(n_out, rng)
    out = np.empty(n_out, dtype=np.uint8)
    for i, rule in enumerate(pca.rules):
        sel = field == i
        if not sel.any():
            continue
        # per-rule outputs over the common range, then per-cell selection
        out[sel] = rule.apply_cells(c.cells, lpad, rpad)[sel]
    new_origin = c.origin + lpad
    lo = max(new_origin, c.exact_lo - pca.min_off)
    hi = min(new_origin + n_out - 1, c.exact_hi - pca.max_off)
    if lo > hi:
        raise ValueError("exact region exhausted; sample a wider margin")
    cfg = Configuration(pca.alphabet, out, new_origin, lo, hi)
    return cfg, field, new_origin


def iterate(rule_or_pca, c: Configuration, t: int,
            rng: np.random.Generator | None = None, observer=None) -> Configuration:
    """Iterate `t` steps; observer(step_index, configuration) is called after
    each step when given."""
    for i in range(t):
        if isinstance(rule_or_pca, PCASpec):
            if rng is None:
                raise ValueError("probabilistic CA needs an rng")
            c, _, _ = step_pca(rule_or_pca, c, rng)
        else:
            c = step(rule_or_pca, c)
        if observer is not None:
            observer(i + 1, c)
    return c


# ---------------------------------------------------------------------------
# rule text format: lossless, human-diffable


def rule_to_text(rule: LocalRule) -> str:
    lines = [
        f"name {rule.name}",
        f"alphabet {rule.alphabet.size}",
        f"out_alphabet {rule.out_alphabet.size}",
        "offsets " + " ".join(str(o) for o in rule.offsets),
        "table " + " ".join(str(int(v)) for v in rule.table),
    ]
    return "\n".join(lines) + "\n"


def rule_from_text(text: str) -> LocalRule:
    fields = {}
    for line in text.strip().splitlines():
        key, _, rest = line.partition(" ")
        fields[key] = rest
    try:
        a = Alphabet(int(fields["alphabet"]))
        out = Alphabet(int(fields["out_alphabet"]))
        offsets = tuple(int(o) for o in fields["offsets"].split())
        table = np.asarray([int(v) for v in fields["table"].split()], dtype=np.uint8)
    except (KeyError, ValueError) as e:
        raise ValueError(f"malformed rule text: {e}") from None
    return LocalRule(a, offsets, table, out if out.size != a.size else None,
                     fields.get("name", ""))


# ---------------------------------------------------------------------------
# named rules


def make_elementary(number: int) -> LocalRule:
    """Wolfram-numbered elementary CA on {0,1}, neighborhood {-1,0,1}."""
    if not 0 <= number <= 255:
        raise ValueError("elementary rule number must be in 0..255")
    return rule_from_function(
        BINARY, (-1, 0, 1),
        lambda l, m, r: (number >> (4 * l + 2 * m + r)) & 1,
        name=f"rule{number}")


def make_cyclic(n: int) -> LocalRule:
    """n-state cyclic CA: a cell is eaten by a neighbor holding its successor
    mod n."""
    if n < 2:
        raise ValueError("cyclic CA needs at least 2 states")

    def f(l, m, r):
        s = (m + 1) % n
        return s if (l == s or r == s) else m

    return rule_from_function(Alphabet(n), (-1, 0, 1), f, name=f"cyclic{n}")


def make_gliders(v_minus: int, v_plus: int) -> LocalRule:
    """(v-, v+)-gliders automaton on {-1,0,+1} (symbol code = value + 1).

    +1 gliders travel at speed v+, -1 gliders at v- < v+; opposite gliders
    annihilate where the signed partial sums say they meet.
    """
    if not (v_minus < v_plus and v_minus <= 0 <= v_plus):
        raise ValueError("need v- < v+ with v- <= 0 <= v+")
    offsets = tuple(range(-v_plus, -v_minus + 1))

    def f(*win):
        x = {o: w - 1 for o, w in zip(offsets, win)}
        plus = x[-v_plus] == 1 and all(
            sum(x[n] for n in range(-v_plus + 1, N + 1)) >= 0
            for N in range(-v_plus + 1, -v_minus + 1))
        minus = x[-v_minus] == -1 and all(
            sum(x[n] for n in range(N, -v_minus)) <= 0
            for N in range(-v_plus, -v_minus))
        if plus and minus:
            raise AssertionError("gliders rule branches overlap")
        return 2 if plus else (0 if minus else 1)

    return rule_from_function(GLIDER_ALPHABET, offsets, f,
                              name=f"gliders({v_minus},{v_plus})")


def make_one_sided_captive(table_2d) -> LocalRule:
    """One-sided captive CA on neighborhood {0,1}: f(a,b) must be a or b."""
    t = np.asarray(table_2d, dtype=np.uint8)
    n = t.shape[0]
    if t.shape != (n, n):
        raise ValueError("captive table must be square")
    for a in range(n):
        for b in range(n):
            if t[a, b] not in (a, b):
                raise ValueError(f"captivity violated at ({a},{b})")
    return LocalRule(Alphabet(n), (0, 1), t.reshape(-1).copy(),
                     name=f"captive{n}")


#: symbol code for the two-layer alphabet (Z/2 x Z/2): code = 2*a + b
def make_random_walk_ca() -> LocalRule:
    """Two-layer CA on (Z/2)^2, neighborhood {-2..2}: first layer is the
    additive automaton a_{-2} + a_{+2} mod 2; second layer carries walkers
    that step right or hold according to the first layer, merging on
    contact."""
    alpha = Alphabet(4, ("00", "01", "10", "11"))

    def f(m2, m1, z, p1, p2):
        a = ((m2 >> 1) + (p2 >> 1)) % 2
        c = 1 if ((m1 == 0b01) or (z == 0b11)) else 0
        return 2 * a + c

    return rule_from_function(alpha, (-2, -1, 0, 1, 2), f, name="random-walk-ca")


def make_fates_rules() -> tuple[LocalRule, LocalRule]:
    """(traffic, majority) pair used by the density-classifier PCA."""
    return make_elementary(184), make_elementary(232)


def make_fates_pca(p: float) -> PCASpec:
    """Per-cell mix: traffic (#184) with probability p, majority (#232)
    otherwise."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0,1]")
    return PCASpec(make_fates_rules(), RuleLaw("iid", (p, 1.0 - p)),
                   name=f"fates({p})")


def parry_law(allowed: np.ndarray, tol: float = 1e-12, max_iter: int = 10000
              ) -> RuleLaw:
    """Max-entropy (Parry) Markov law on the SFT of rule sequences with the
    given allowed adjacency matrix; Perron data by power iteration."""
    A = np.asarray(allowed, dtype=float)
    n = A.shape[0]
    r = np.ones(n) / n
    l = np.ones(n) / n
    lam = 1.0
    for _ in range(max_iter):
        r2 = A @ r
        l2 = l @ A
        lam = r2.sum() / r.sum()
        r2 /= np.linalg.norm(r2)
        l2 /= np.linalg.norm(l2)
        if np.abs(r2 - r).max() < tol and np.abs(l2 - l).max() < tol:
            r, l = r2, l2
            break
        r, l = r2, l2
    lam = (l @ A @ r) / (l @ r)
    trans = A * r[None, :] / (lam * r[:, None])
    trans /= trans.sum(axis=1, keepdims=True)
    stat = l * r
    stat /= stat.sum()
    return RuleLaw("markov", trans=trans, stationary=stat)


LINE_SWAP_EXCEPTIONS = (0b0101, 0b1010)  # 4-windows left unswapped


def make_line_pca() -> PCASpec:
    """Probabilistic 'line dynamics' on {0,1}: rule indices 0 = identity,
    1 = take-right, 2 = take-left.  A (1,2) pair of adjacent indices swaps
    the two letters unless the surrounding 4-window is a pure checkerboard;
    the Markov field forbids index pairs that would tear a swap apart.
    Defaults to the max-entropy law on the admissible index sequences."""
    ident = rule_from_function(BINARY, (0,), lambda m: m, name="line-id")

    def in_exc(w):
        return w in (tuple(int(b) for b in f"{e:04b}") for e in LINE_SWAP_EXCEPTIONS)

    def take_right(m1, z, p1, p2):
        return z if in_exc((m1, z, p1, p2)) else p1

    def take_left(m2, m1, z, p1):
        return z if in_exc((m2, m1, z, p1)) else m1

    f1 = rule_from_function(BINARY, (-1, 0, 1, 2), take_right, name="line-right")
    fm1 = rule_from_function(BINARY, (-2, -1, 0, 1), take_left, name="line-left")
    # forbidden adjacent pairs: (0,2),(1,1),(1,0),(2,2),(2,1)
    allowed = np.array([[1, 1, 0],
                        [0, 0, 1],
                        [1, 0, 0]], dtype=bool)
    return PCASpec((ident, f1, fm1), parry_law(allowed), name="line")
