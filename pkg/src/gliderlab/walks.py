"""Random-walk representation of gliders automata.

The signed partial-sum walk S(0)=0, S(k+1)-S(k)=x_k turns glider survival
questions into strict-argmin questions: after t steps a -1 glider sits at j
iff the walk over [j - v+ t, j - v- t + 1] attains its strict minimum at the
right endpoint (and a +1 glider iff at the left endpoint).  Entry times and
defect densities are computed directly from one walk per trajectory, with
explicit stepping kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import GLIDER_ALPHABET, Configuration, rng_stream
from .rules import LocalRule, make_gliders, step


@dataclass(frozen=True)
class WalkProcess:
    """Partial sums of a glider window: sums[i] = S(origin + i), with S
    normalized to 0 at coordinate 0 when it is inside the window."""

    sums: np.ndarray
    origin: int

    def S(self, k: int) -> int:
        return int(self.sums[k - self.origin])


def walk_sums(cells: np.ndarray) -> np.ndarray:
    inc = cells.astype(np.int64) - 1
    s = np.empty(len(cells) + 1, dtype=np.int64)
    s[0] = 0
    np.cumsum(inc, out=s[1:])
    return s


def walk_of(c: Configuration) -> WalkProcess:
    """Walk of the exact region of a glider configuration."""
    s = walk_sums(c.exact_cells())
    if c.exact_lo <= 0 <= c.exact_hi + 1:
        s = s - s[-c.exact_lo]
    return WalkProcess(s, c.exact_lo)


def sliding_min(s: np.ndarray, w: int) -> np.ndarray:
    """out[i] = min(s[i : i+w]) for all full windows (van Herk/Gil-Werman)."""
    n = len(s)
    if w < 1 or w > n:
        raise ValueError("window must fit")
    if w == 1:
        return s.copy()
    pad = (-n) % w
    sp = np.concatenate([s, np.full(pad, s.max())])
    blocks = sp.reshape(-1, w)
    pre = np.minimum.accumulate(blocks, axis=1).reshape(-1)
    suf = np.minimum.accumulate(blocks[:, ::-1], axis=1)[:, ::-1].reshape(-1)
    i = np.arange(n - w + 1)
    return np.minimum(suf[i], pre[i + w - 1])


# ---------------------------------------------------------------------------
# exhaustive oracle for the argmin characterization


def _step_batch(rule: LocalRule, arr: np.ndarray) -> tuple[np.ndarray, int]:
    """One step applied to every row; returns (outputs, left trim)."""
    lpad, rpad = max(0, -rule.min_off), max(0, rule.max_off)
    n_out = arr.shape[1] - lpad - rpad
    idx = np.zeros((arr.shape[0], n_out), dtype=np.int64)
    for o in rule.offsets:
        idx *= rule.alphabet.size
        idx += arr[:, lpad + o : lpad + o + n_out]
    return rule.table[idx], lpad


def _strict_min_at(S: np.ndarray, pos: int, a: int, b: int) -> np.ndarray:
    """Row-wise: is S[:, pos] strictly below S over columns [a, b] \\ {pos}?"""
    cols = [c for c in range(a, b + 1) if c != pos]
    rest = S[:, cols].min(axis=1)
    return S[:, pos] < rest


@dataclass
class OracleReport:
    checked: int = 0
    mismatches: int = 0
    witnesses: list = None

    def __post_init__(self):
        if self.witnesses is None:
            self.witnesses = []


def lemma_min_oracle(v_minus: int, v_plus: int, word_len: int, t_max: int,
                     rule: LocalRule | None = None,
                     transport_n_max: int = 3) -> OracleReport:
    """Exhaustively compare stepping against the walk argmin characterization
    over all glider words of the given length, for all t <= t_max and all
    coordinates whose light cone and walk window both fit.

    Also checks the one-step argmin transport identity
    j = strict-argmin_{[j, j+n]} S_{G(x)}  iff
    j - v+ = strict-argmin_{[j-v+, j+n-v-]} S_x.
    Pass `rule` to test a (possibly corrupted) substitute for the gliders
    automaton.
    """
    G = rule if rule is not None else make_gliders(v_minus, v_plus)
    L = word_len
    n_words = 3 ** L
    words = np.empty((n_words, L), dtype=np.uint8)
    codes = np.arange(n_words)
    for j in range(L - 1, -1, -1):
        words[:, j] = codes % 3
        codes //= 3
    S = np.zeros((n_words, L + 1), dtype=np.int64)
    np.cumsum(words.astype(np.int64) - 1, axis=1, out=S[:, 1:])

    rep = OracleReport()
    arr, origin = words, 0
    for t in range(1, t_max + 1):
        out, lpad = _step_batch(G, arr)
        arr = out
        origin += lpad
        if arr.shape[1] < 1:
            break
        for jj in range(arr.shape[1]):
            j = origin + jj  # absolute coordinate
            a, b = j - v_plus * t, j - v_minus * t + 1
            if a < 0 or b > L:
                continue
            val = arr[:, jj]
            is_minus = _strict_min_at(S, b, a, b)
            is_plus = _strict_min_at(S, a, a, b)
            bad = ((val == 0) != is_minus) | ((val == 2) != is_plus)
            rep.checked += n_words
            nbad = int(bad.sum())
            if nbad:
                rep.mismatches += nbad
                for wi in np.flatnonzero(bad)[:3]:
                    rep.witnesses.append(
                        ("lemma", t, j, tuple(int(s) for s in words[wi])))
        if t == 1:
            SG = np.zeros((n_words, arr.shape[1] + 1), dtype=np.int64)
            np.cumsum(arr.astype(np.int64) - 1, axis=1, out=SG[:, 1:])
            for n in range(1, transport_n_max + 1):
                for jj in range(arr.shape[1] + 1):
                    j = origin + jj  # S_G index jj <-> coordinate j
                    if jj + n > arr.shape[1]:
                        continue
                    a, b = j - v_plus, j + n - v_minus
                    if a < 0 or b > L:
                        continue
                    lhs = _strict_min_at(SG, jj, jj, jj + n)
                    rhs = _strict_min_at(S, a, a, b)
                    bad = lhs != rhs
                    rep.checked += n_words
                    nbad = int(bad.sum())
                    if nbad:
                        rep.mismatches += nbad
                        for wi in np.flatnonzero(bad)[:3]:
                            rep.witnesses.append(
                                ("transport", n, j,
                                 tuple(int(s) for s in words[wi])))
    return rep


# ---------------------------------------------------------------------------
# entry times


def limit_cdf(alpha, v_minus: int, v_plus: int):
    """Limit law of T_n^- / n for mixing measures with zero mean and finite
    variance: (2/pi) arctan sqrt(-v- a / (v+ - v- + v+ a))."""
    a = np.asarray(alpha, dtype=float)
    num = -v_minus * a
    den = (v_plus - v_minus) + v_plus * a
    return (2.0 / np.pi) * np.arctan(np.sqrt(np.maximum(num, 0.0) / den))


def _glider_cells(measure, n: int, rng, factor: LocalRule | None):
    """Sample n glider symbols, optionally as the image of a base measure
    under a factor morphism (extra base cells cover the factor's offsets)."""
    if factor is None:
        return measure.sample_cells(n, rng)
    pad_l, pad_r = max(0, -factor.min_off), max(0, factor.max_off)
    base = measure.sample_cells(n + pad_l + pad_r, rng)
    return factor.apply_cells(base, pad_l, pad_r)


def entry_times(v_minus: int, v_plus: int, measure, n: int, n_samples: int,
                seed: int, t_max: int | None = None, species: str = "-",
                factor: LocalRule | None = None):
    """First k such that a glider of the requested species is seen in the
    fundamental window at time n + k, per sample.

    Returns (times, censored): times[i] = k, censored[i] marks samples with
    no entry up to t_max (their time is set to t_max + 1).  Computed from the
    walk via the argmin characterization; see entry_times_stepping for the
    dynamical cross-check.
    """
    if t_max is None:
        t_max = 64 * n
    if species == "+":
        # mirror: reverse space and swap glider signs
        return _entry_minus(-v_plus, -v_minus, measure, n, n_samples, seed,
                            t_max, factor, mirrored=True)
    if species != "-":
        raise ValueError("species must be '-' or '+'")
    if v_minus == 0:
        raise ValueError("species '-' needs v- < 0")
    return _entry_minus(v_minus, v_plus, measure, n, n_samples, seed, t_max,
                        factor, mirrored=False)


def _entry_minus(v_minus, v_plus, measure, n, n_samples, seed, t_max, factor,
                 mirrored):
    vm = -v_minus  # > 0
    lo = min(0, -v_plus * (n + t_max))
    hi = vm * (n + t_max) + vm  # cells over [lo, hi-1], S over [lo, hi]
    mid = vm * n
    times = np.empty(n_samples, dtype=np.int64)
    censored = np.zeros(n_samples, dtype=bool)
    k = np.arange(t_max + 1, dtype=np.int64)
    for i in range(n_samples):
        rng = rng_stream(seed, i)
        cells = _glider_cells(measure, hi - lo, rng, factor)
        if mirrored:
            cells = 2 - cells[::-1]
        S = walk_sums(cells)  # index c -> S(lo + c)
        off = -lo
        # prefix/suffix minima pivoted at mid
        left = S[: mid + off + 1]
        sufmin = np.minimum.accumulate(left[::-1])[::-1]  # min S[c..mid]
        right = S[mid + off :]
        premin = np.minimum.accumulate(right)  # min S[mid..mid+c]
        best = t_max + 1
        for j in range(vm):
            a = vm * (n + k) + j + 1
            b = -v_plus * (n + k) + j
            cond = S[a + off] < np.minimum(sufmin[b + off],
                                           premin[a - 1 - mid])
            hit = np.flatnonzero(cond)
            if hit.size:
                best = min(best, int(hit[0]))
        times[i] = best
        censored[i] = best > t_max
    return times, censored


def entry_times_stepping(v_minus: int, v_plus: int, measure, n: int,
                         n_samples: int, seed: int, t_max: int,
                         factor: LocalRule | None = None):
    """Entry times by explicit iteration of the gliders automaton on the
    same sampled cells as the walk route."""
    if v_minus == 0:
        raise ValueError("species '-' needs v- < 0")
    vm = -v_minus
    lo = min(0, -v_plus * (n + t_max))
    hi = vm * (n + t_max) + vm
    G = make_gliders(v_minus, v_plus)
    times = np.empty(n_samples, dtype=np.int64)
    censored = np.zeros(n_samples, dtype=bool)
    for i in range(n_samples):
        rng = rng_stream(seed, i)
        cells = _glider_cells(measure, hi - lo, rng, factor)
        c = Configuration(GLIDER_ALPHABET, cells, lo, lo, hi - 1)
        best = t_max + 1
        for t in range(1, n + t_max + 1):
            c = step(G, c)
            if t >= n and c.exact_lo <= 0 and c.exact_hi >= vm - 1:
                if (c.cells[-c.origin : vm - c.origin] == 0).any():
                    best = t - n
                    break
        times[i] = best
        censored[i] = best > t_max
    return times, censored


@dataclass
class EcdfReport:
    """Empirical law of T_n^-/n on a grid, against the arctan limit."""

    n: int
    alphas: np.ndarray
    ecdf: np.ndarray
    reference: np.ndarray
    ks: float
    n_samples: int
    censor_rate: float


def ecdf_report(times, censored, n, v_minus, v_plus, grid=None) -> EcdfReport:
    t_max = int(times[~censored].max()) if (~censored).any() else 0
    if grid is None:
        hi = max(t_max / n, 1e-9)
        grid = np.linspace(hi / 400, hi, 400)
    grid = np.asarray(grid, dtype=float)
    scaled = np.sort(times / n)
    ecdf = np.searchsorted(scaled, grid, side="right") / len(times)
    # censored samples sort above every grid point by construction
    ref = limit_cdf(grid, v_minus, v_plus)
    ks = float(np.abs(ecdf - ref).max())
    return EcdfReport(n, grid, ecdf, ref, ks, len(times),
                      float(censored.mean()))


def ks_between(rep_a: EcdfReport, rep_b: EcdfReport) -> float:
    if len(rep_a.alphas) != len(rep_b.alphas):
        raise ValueError("reports must share one grid")
    return float(np.abs(rep_a.ecdf - rep_b.ecdf).max())


# ---------------------------------------------------------------------------
# density decay and convergence rate


def density_minus(v_minus: int, v_plus: int, measure, t_grid, n_traj: int,
                  cells: int, seed: int, factor: LocalRule | None = None
                  ) -> dict[int, float]:
    """d^_-(t): frequency of -1 gliders at each grid time, from the walk.

    One window per trajectory serves every t in the grid; densities on a
    common trajectory are pathwise nonincreasing in t.
    """
    t_grid = sorted(int(t) for t in t_grid)
    t_top = t_grid[-1]
    lo = v_plus * t_top  # cells sampled left of coordinate 0; may be 0
    hi = cells + (-v_minus) * t_top + 1
    counts = {t: 0 for t in t_grid}
    for traj in range(n_traj):
        rng = rng_stream(seed, traj)
        cs = _glider_cells(measure, hi + lo, rng, factor)
        S = walk_sums(cs)  # index c -> S(c - lo)
        for t in t_grid:
            if t == 0:
                counts[t] += int((cs[lo : lo + cells] == 0).sum())
                continue
            w = (v_plus - v_minus) * t + 1
            base = lo - v_plus * t  # S-index of window start for j = 0
            m = sliding_min(S[base : base + cells + w - 1], w)
            a = lo + (-v_minus) * t + 1 + np.arange(cells)
            counts[t] += int((S[a] < m).sum())
    total = n_traj * cells
    return {t: counts[t] / total for t in t_grid}


def loglog_fit(ts, ys, weights=None) -> tuple[float, float]:
    """Weighted least squares of log y on log t; returns (slope, intercept)."""
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > 0
    x, y = np.log(ts[keep]), np.log(ys[keep])
    w = np.ones_like(x) if weights is None else np.asarray(weights)[keep]
    W = w.sum()
    xb, yb = (w * x).sum() / W, (w * y).sum() / W
    slope = (w * (x - xb) * (y - yb)).sum() / (w * (x - xb) ** 2).sum()
    return float(slope), float(yb - slope * xb)


@dataclass
class DecayReport:
    t_grid: list
    density: dict[int, float]
    slope: float
    intercept: float
    fit_range: tuple[int, int]


def density_decay(v_minus: int, v_plus: int, measure, t_grid, n_traj: int,
                  cells: int, seed: int, factor: LocalRule | None = None
                  ) -> DecayReport:
    """Densities over the grid plus an inverse-variance weighted log-log fit
    over the grid's upper half."""
    dens = density_minus(v_minus, v_plus, measure, t_grid, n_traj, cells,
                         seed, factor=factor)
    ts = sorted(dens)
    upper = [t for t in ts if t >= ts[len(ts) // 2] and t > 0]
    n_eff = n_traj * cells
    ws = [max(dens[t], 1e-12) * n_eff for t in upper]  # ~1/var of log density
    slope, inter = loglog_fit(upper, [dens[t] for t in upper], ws)
    return DecayReport(ts, dens, slope, inter, (upper[0], upper[-1]))


@dataclass
class ConvergenceReport:
    t_grid: list
    dm: dict[int, float]
    d_minus: dict[int, float]
    exponent: float
    envelope_ok: bool


def convergence_rate(v_minus: int, v_plus: int, measure, t_grid, max_len: int,
                     n_traj: int, cells: int, seed: int,
                     factor: LocalRule | None = None) -> ConvergenceReport:
    """Empirical d_M distance from the all-zero point mass along the grid,
    with the matching -1 density lower bound and a log-log exponent fit.

    envelope_ok reports whether, over the grid's upper half, the series stays
    between c1 t^-1/2 and c2 t^-1/4 calibrated at the midpoint.
    """
    from .measures import dirac_point, dm_distance, estimate_cylinders

    G = make_gliders(v_minus, v_plus)
    t_grid = sorted(int(t) for t in t_grid)
    if factor is None:
        emp = estimate_cylinders(G, measure, 0, max_len, n_traj, cells, seed,
                                 grid=tuple(t_grid))
    else:
        emp = _factored_cylinders(G, measure, factor, t_grid, max_len, n_traj,
                                  cells, seed)
    target = dirac_point(1, GLIDER_ALPHABET)
    dm = {t: dm_distance(emp[t], target, max_len) for t in t_grid}
    dmin = {t: float(emp[t].freqs(1)[0]) for t in t_grid}
    upper = [t for t in t_grid if t >= t_grid[len(t_grid) // 2] and t > 0]
    slope, inter = loglog_fit(upper, [dm[t] for t in upper])
    t_mid = upper[0]
    c1 = dm[t_mid] * t_mid ** 0.5
    c2 = dm[t_mid] * t_mid ** 0.25
    ok = all(0.5 * c1 * t ** -0.5 <= dm[t] <= 2.0 * c2 * t ** -0.25
             for t in upper)
    return ConvergenceReport(t_grid, dm, dmin, slope, ok)


def _factored_cylinders(G, measure, factor, t_grid, max_len, n_traj, cells,
                        seed):
    from .lattice import Configuration
    from .measures import EmpiricalCylinders

    t_top = max(t_grid)
    lo = -max(0, -G.min_off) * t_top
    hi = cells + max(0, G.max_off) * t_top
    out = {t: EmpiricalCylinders.empty(GLIDER_ALPHABET, max_len)
           for t in t_grid}
    for traj in range(n_traj):
        rng = rng_stream(seed, traj)
        cs = _glider_cells(measure, hi - lo, rng, factor)
        c = Configuration(GLIDER_ALPHABET, cs, lo, lo, hi - 1)
        for t in range(1, t_top + 1):
            c = step(G, c)
            if t in out:
                out[t].add_configuration(c)
        if 0 in out:
            out[0].add_configuration(
                Configuration(GLIDER_ALPHABET, cs, lo, lo, hi - 1))
    return out
