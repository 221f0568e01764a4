"""Shift-invariant measures: specification, sampling, cylinder estimation,
and the summable cylinder distance d_M.

Words of length L over an alphabet of size s are encoded as integers in
base s, first letter most significant.  Empirical cylinder tables store one
count array per word length, pooled across positions and trajectories.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .lattice import Alphabet, Configuration, rng_stream, window_sample
from .rules import LocalRule, PCASpec, step, step_pca


def encode_words(cells: np.ndarray, length: int, size: int) -> np.ndarray:
    """Base-`size` codes of all factors of `cells` of the given length."""
    n = len(cells) - length + 1
    if n < 1:
        return np.empty(0, dtype=np.int64)
    code = np.zeros(n, dtype=np.int64)
    for j in range(length):
        code *= size
        code += cells[j : j + n]
    return code


def decode_word(code: int, length: int, size: int) -> tuple[int, ...]:
    out = []
    for _ in range(length):
        out.append(code % size)
        code //= size
    return tuple(reversed(out))


@dataclass(frozen=True)
class MixTag:
    """Analytic bookkeeping: whether a measure is asserted to satisfy the
    mixing hypotheses under which the entry-time limit law is proved."""

    is_mix: bool
    note: str = ""


@dataclass(frozen=True)
class MeasureSpec:
    """A sampleable shift-invariant measure.

    kinds:
      bernoulli: iid with `probs` per symbol.
      markov:    stationary one-step chain (`trans` rows sum to 1,
                 `stationary` its stationary vector).
      periodic:  uniform over the shift orbit of the periodic word `word`.
      product:   independent layered product of `layers`; composite symbol
                 code = layer codes in mixed radix, first layer most
                 significant.
    """

    kind: str
    alphabet: Alphabet
    probs: tuple[float, ...] | None = None
    trans: tuple[tuple[float, ...], ...] | None = None
    word: tuple[int, ...] | None = None
    layers: tuple["MeasureSpec", ...] | None = None
    mix: MixTag | None = None

    def __post_init__(self):
        if self.kind == "bernoulli":
            if self.probs is None or len(self.probs) != self.alphabet.size:
                raise ValueError("bernoulli needs one probability per symbol")
            if abs(sum(self.probs) - 1.0) > 1e-9 or min(self.probs) < 0:
                raise ValueError("probabilities must be a distribution")
        elif self.kind == "markov":
            t = np.asarray(self.trans, dtype=float)
            if t.shape != (self.alphabet.size,) * 2:
                raise ValueError("transition matrix shape mismatch")
            if not np.allclose(t.sum(axis=1), 1.0, atol=1e-9):
                raise ValueError("transition rows must sum to 1")
            if self.probs is None:
                raise ValueError("markov needs its stationary vector in probs")
            s = np.asarray(self.probs)
            if not np.allclose(s @ t, s, atol=1e-8):
                raise ValueError("probs is not stationary for trans")
        elif self.kind == "periodic":
            if not self.word:
                raise ValueError("periodic needs a nonempty word")
            if max(self.word) >= self.alphabet.size:
                raise ValueError("word symbol outside alphabet")
        elif self.kind == "product":
            if not self.layers:
                raise ValueError("product needs layers")
            sz = 1
            for m in self.layers:
                sz *= m.alphabet.size
            if sz != self.alphabet.size:
                raise ValueError("alphabet size must equal product of layers")
        else:
            raise ValueError(f"unknown measure kind {self.kind!r}")

    # -- sampling ----------------------------------------------------------

    def sample_cells(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "bernoulli":
            return rng.choice(self.alphabet.size, size=n, p=self.probs
                              ).astype(np.uint8)
        if self.kind == "markov":
            from .rules import RuleLaw
            law = RuleLaw("markov", trans=np.asarray(self.trans),
                          stationary=np.asarray(self.probs))
            return law.sample_field(n, rng)
        if self.kind == "periodic":
            w = np.asarray(self.word, dtype=np.uint8)
            phase = int(rng.integers(len(w)))
            reps = -(-(n + phase) // len(w))
            return np.tile(w, reps)[phase : phase + n]
        # product
        strides = [m.alphabet.size for m in self.layers]
        out = np.zeros(n, dtype=np.uint8)
        for m in self.layers:
            out = out * m.alphabet.size + m.sample_cells(n, rng)
        return out

    # -- exact cylinder probabilities ---------------------------------------

    def cylinder(self, word) -> float:
        """mu([word]); word is a sequence of symbol codes."""
        w = tuple(int(s) for s in word)
        if len(w) == 0:
            return 1.0
        if self.kind == "bernoulli":
            p = 1.0
            for s in w:
                p *= self.probs[s]
            return p
        if self.kind == "markov":
            t = np.asarray(self.trans)
            p = self.probs[w[0]]
            for a, b in zip(w, w[1:]):
                p *= t[a, b]
            return float(p)
        if self.kind == "periodic":
            u = self.word
            P = len(u)
            hits = 0
            for k in range(P):
                if all(u[(k + i) % P] == s for i, s in enumerate(w)):
                    hits += 1
            return hits / P
        # product: probability factorizes over layers of the projected word
        p = 1.0
        rem = list(w)
        sizes = [m.alphabet.size for m in self.layers]
        digits = []
        for s in w:
            d, c = [], s
            for size in reversed(sizes):
                d.append(c % size)
                c //= size
            digits.append(list(reversed(d)))
        for li, m in enumerate(self.layers):
            p *= m.cylinder([d[li] for d in digits])
        return p

    def exact_cylinders(self, max_len: int) -> dict[int, np.ndarray]:
        """Arrays of mu([u]) for all words u of each length 1..max_len."""
        size = self.alphabet.size
        out = {}
        for L in range(1, max_len + 1):
            arr = np.empty(size ** L)
            for code in range(size ** L):
                arr[code] = self.cylinder(decode_word(code, L, size))
            out[L] = arr
        return out

    def mix_tag(self) -> MixTag:
        if self.mix is not None:
            return self.mix
        if self.kind == "bernoulli" and min(self.probs) >= 0:
            return MixTag(True, "Bernoulli measures are mixing")
        if self.kind == "markov":
            t = np.asarray(self.trans)
            if (np.linalg.matrix_power(t > 0, self.alphabet.size ** 2)).all():
                return MixTag(True, "primitive Markov chains are mixing")
        return MixTag(False, "not asserted")


def bernoulli(probs, alphabet: Alphabet | None = None, mix=None) -> MeasureSpec:
    probs = tuple(float(p) for p in probs)
    return MeasureSpec("bernoulli", alphabet or Alphabet(len(probs)),
                       probs=probs, mix=mix)


def markov(trans, stationary=None, alphabet=None, mix=None) -> MeasureSpec:
    t = np.asarray(trans, dtype=float)
    if stationary is None:
        w, v = np.linalg.eig(t.T)
        i = int(np.argmin(np.abs(w - 1.0)))
        s = np.real(v[:, i])
        stationary = s / s.sum()
    return MeasureSpec("markov", alphabet or Alphabet(t.shape[0]),
                       probs=tuple(float(p) for p in stationary),
                       trans=tuple(tuple(float(x) for x in row) for row in t),
                       mix=mix)


def periodic(word, alphabet=None, mix=None) -> MeasureSpec:
    word = tuple(int(s) for s in word)
    return MeasureSpec("periodic", alphabet or Alphabet(max(word) + 1),
                       word=word, mix=mix or MixTag(False, "periodic orbits are not mixing"))


def product(*layers: MeasureSpec, mix=None) -> MeasureSpec:
    sz = 1
    for m in layers:
        sz *= m.alphabet.size
    return MeasureSpec("product", Alphabet(sz), layers=tuple(layers), mix=mix)


# ---------------------------------------------------------------------------
# empirical cylinder tables


@dataclass
class EmpiricalCylinders:
    """Pooled word counts up to max_len, with per-length totals."""

    alphabet: Alphabet
    max_len: int
    counts: dict[int, np.ndarray] = field(default_factory=dict)
    totals: dict[int, int] = field(default_factory=dict)

    @classmethod
    def empty(cls, alphabet: Alphabet, max_len: int) -> "EmpiricalCylinders":
        counts = {L: np.zeros(alphabet.size ** L, dtype=np.int64)
                  for L in range(1, max_len + 1)}
        totals = {L: 0 for L in range(1, max_len + 1)}
        return cls(alphabet, max_len, counts, totals)

    def add_configuration(self, c: Configuration) -> None:
        cells = c.exact_cells()
        for L in range(1, self.max_len + 1):
            codes = encode_words(cells, L, self.alphabet.size)
            if codes.size:
                self.counts[L] += np.bincount(codes,
                                              minlength=self.alphabet.size ** L)
                self.totals[L] += codes.size

    def freqs(self, length: int) -> np.ndarray:
        if self.totals.get(length, 0) == 0:
            raise ValueError(f"no samples of length {length}")
        return self.counts[length] / self.totals[length]

    def freq(self, word) -> float:
        w = tuple(int(s) for s in word)
        code = 0
        for s in w:
            code = code * self.alphabet.size + s
        return float(self.freqs(len(w))[code])

    def half_width(self, word, z: float = 1.96) -> float:
        """Normal-approximation half-width for one cylinder frequency."""
        p = self.freq(word)
        n = self.totals[len(tuple(word))]
        return z * float(np.sqrt(max(p * (1 - p), 1e-12) / n))

    def to_csv(self, fh, config_hash: str = "") -> None:
        fh.write("word,length,count,freq,half_width\n")
        for L in range(1, self.max_len + 1):
            total = self.totals[L]
            for code in range(self.alphabet.size ** L):
                w = decode_word(code, L, self.alphabet.size)
                cnt = int(self.counts[L][code])
                p = cnt / total if total else 0.0
                hw = 1.96 * np.sqrt(max(p * (1 - p), 1e-12) / total) if total else 0.0
                fh.write(f"{self.alphabet.word_str(w)},{L},{cnt},{p:.10g},{hw:.6g}\n")
        fh.write(f"# config_hash={config_hash}\n")


def required_margin(rule_or_pca, t: int) -> tuple[int, int]:
    """Cells consumed on each side of the exact region by t steps."""
    r = rule_or_pca
    lpad, rpad = max(0, -r.min_off), max(0, r.max_off)
    return lpad * t, rpad * t


def estimate_cylinders(rule_or_pca, measure: MeasureSpec, t: int, max_len: int,
                       n_traj: int, cells_per_traj: int, seed: int,
                       grid: tuple[int, ...] | None = None):
    """Empirical cylinder table(s) of the time-t image of `measure`.

    With `grid` given, returns {t_i: EmpiricalCylinders} for every t_i in the
    grid (t is ignored); otherwise a single table at time t.  Each trajectory
    uses its own deterministic substream of `seed`.
    """
    times = tuple(sorted(grid)) if grid is not None else (t,)
    t_max = times[-1]
    lm, rm = required_margin(rule_or_pca, t_max)
    margin = max(lm, rm)
    out = {ti: EmpiricalCylinders.empty(measure.alphabet, max_len)
           for ti in times}
    is_pca = isinstance(rule_or_pca, PCASpec)
    for traj in range(n_traj):
        rng = rng_stream(seed, traj)
        # the whole initial sample is exact; the extra width feeds the cone
        c = window_sample(measure, cells_per_traj + 2 * margin, 0, rng,
                          origin=-margin)
        if 0 in out:
            out[0].add_configuration(c)
        for step_i in range(1, t_max + 1):
            if is_pca:
                c, _, _ = step_pca(rule_or_pca, c, rng)
            else:
                c = step(rule_or_pca, c)
            if step_i in out:
                out[step_i].add_configuration(c)
    return out if grid is not None else out[t_max]


# ---------------------------------------------------------------------------
# cylinder distance


def _valuation_array(v, length: int, size: int) -> np.ndarray:
    """Normalize a cylinder valuation to a dense array over words of one
    length.  Accepts EmpiricalCylinders, MeasureSpec, dict word->prob, or
    {length: array}."""
    if isinstance(v, EmpiricalCylinders):
        return v.freqs(length)
    if isinstance(v, MeasureSpec):
        arr = np.empty(size ** length)
        for code in range(size ** length):
            arr[code] = v.cylinder(decode_word(code, length, size))
        return arr
    if isinstance(v, dict) and v and isinstance(next(iter(v)), int):
        return np.asarray(v[length], dtype=float)
    arr = np.zeros(size ** length)
    for word, p in v.items():
        w = tuple(int(s) for s in word)
        if len(w) != length:
            continue
        code = 0
        for s in w:
            code = code * size + s
        arr[code] = p
    return arr


def dm_distance(a, b, max_len: int, size: int | None = None) -> float:
    """Truncated cylinder metric sum_{n<=max_len} 2^-n max_u |a([u])-b([u])|.

    The tail beyond max_len contributes at most 2^-max_len.
    """
    if size is None:
        for v in (a, b):
            if isinstance(v, (EmpiricalCylinders, MeasureSpec)):
                size = v.alphabet.size
                break
        else:
            raise ValueError("pass size= when neither side carries an alphabet")
    total = 0.0
    for L in range(1, max_len + 1):
        fa = _valuation_array(a, L, size)
        fb = _valuation_array(b, L, size)
        if fa.shape != fb.shape:
            raise ValueError("valuation lengths disagree")
        total += 0.5 ** L * float(np.abs(fa - fb).max())
    return total


def dirac_point(symbol: int, alphabet: Alphabet) -> MeasureSpec:
    """Point mass on the uniform configuration of one symbol."""
    return periodic((symbol,), alphabet)
