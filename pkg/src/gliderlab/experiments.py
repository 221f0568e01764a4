"""Experiment configs, reproducible runs, and space-time rendering.

Config files are line-oriented ``key = value`` pairs.  ``[section]`` lines
prefix subsequent keys with ``section.``; ``include path`` splices another
file (relative to the including file); ``#`` starts a comment.  Later keys
override earlier ones, so includes act as defaults.  The canonical form
(sorted ``key=value`` lines) is hashed into every output CSV and into the
run manifest, and a manifest can be re-executed to byte-identical CSVs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .lattice import Alphabet, BINARY, GLIDER_ALPHABET, rng_stream, window_sample
from .measures import (MeasureSpec, bernoulli, estimate_cylinders, periodic,
                       required_margin)
from .particles import (BUILTIN_SYSTEMS, CheckReport, FeasibilityError,
                        check_particle_system, trace_densities)
from .rules import (LocalRule, PCASpec, make_cyclic, make_elementary,
                    make_fates_pca, make_gliders, make_line_pca,
                    make_random_walk_ca, project, step, step_pca)
from .defects import (Decomposition, SFTSpec, classify_dislocations,
                      classify_interfaces, compute_period, defect_field,
                      union_defect_field)
from .walks import (density_decay, convergence_rate, ecdf_report, entry_times)


class ConfigError(ValueError):
    pass


class CheckFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration


def parse_config_text(text: str, base_dir: Path | None = None) -> dict:
    pairs: dict[str, str] = {}
    section = ""
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if line.startswith("include "):
            inc = line[len("include "):].strip()
            p = (base_dir / inc) if base_dir else Path(inc)
            if not p.exists():
                raise ConfigError(f"include not found: {p}")
            pairs.update(parse_config_text(p.read_text(), p.parent))
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got: {raw!r}")
        k, v = line.split("=", 1)
        key = f"{section}.{k.strip()}" if section else k.strip()
        pairs[key] = v.strip()
    return pairs


@dataclass
class ExperimentConfig:
    pairs: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        return cls(parse_config_text(p.read_text(), p.parent))

    def override(self, key: str, value: str) -> None:
        self.pairs[key] = value

    def get(self, key: str, default=None, required: bool = False) -> str:
        if key in self.pairs:
            return self.pairs[key]
        if required:
            raise ConfigError(f"missing required config key {key!r}")
        return default

    def getint(self, key, default=None, required=False) -> int:
        v = self.get(key, default, required)
        try:
            return int(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be an integer, got {v!r}")

    def getfloat(self, key, default=None, required=False) -> float:
        v = self.get(key, default, required)
        try:
            return float(v)
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be a number, got {v!r}")

    def getlist(self, key, default=None, required=False) -> list[str]:
        v = self.get(key, default, required)
        if v is None:
            return []
        if isinstance(v, (list, tuple)):
            return list(v)
        return [s.strip() for s in str(v).split(",") if s.strip()]

    def canonical_text(self) -> str:
        return "".join(f"{k}={self.pairs[k]}\n" for k in sorted(self.pairs))

    @property
    def hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def _dyadic(t_max: int) -> list[int]:
    out = [0]
    t = 1
    while t <= t_max:
        out.append(t)
        t *= 2
    return out


def parse_grid(spec: str) -> list[int]:
    if spec.startswith("dyadic:"):
        return _dyadic(int(spec.split(":", 1)[1]))
    return sorted(int(s) for s in spec.split(","))


# ---------------------------------------------------------------------------
# named objects


def resolve_rule(spec: str):
    """Named rule or PCA: elementary:184, cyclic:3, gliders:-1:0,
    random-walk, fates:0.75, line."""
    name, _, arg = spec.partition(":")
    try:
        if name == "elementary":
            return make_elementary(int(arg))
        if name == "cyclic":
            return make_cyclic(int(arg))
        if name == "gliders":
            vm, vp = (int(s) for s in arg.split(":"))
            return make_gliders(vm, vp)
        if name == "random-walk":
            return make_random_walk_ca()
        if name == "fates":
            return make_fates_pca(float(arg))
        if name == "line":
            return make_line_pca()
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad rule spec {spec!r}: {e}")
    raise ConfigError(f"unknown rule {spec!r}")


def resolve_measure(spec: str, alphabet: Alphabet) -> MeasureSpec:
    """bernoulli:p0,p1,... or periodic:word or uniform."""
    name, _, arg = spec.partition(":")
    try:
        if name == "uniform":
            return bernoulli((1.0 / alphabet.size,) * alphabet.size, alphabet)
        if name == "bernoulli":
            probs = tuple(float(s) for s in arg.split(","))
            return bernoulli(probs, alphabet)
        if name == "periodic":
            return periodic([int(ch) for ch in arg], alphabet)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"bad measure spec {spec!r}: {e}")
    raise ConfigError(f"unknown measure {spec!r}")


def resolve_system(name: str):
    if name not in BUILTIN_SYSTEMS:
        raise ConfigError(f"unknown particle system {name!r}; "
                          f"known: {', '.join(sorted(BUILTIN_SYSTEMS))}")
    return BUILTIN_SYSTEMS[name]()


def resolve_sft(spec: str, alphabet: Alphabet) -> SFTSpec:
    if spec == "checkerboard":
        return SFTSpec(BINARY, ((0, 0), (1, 1)), "checkerboard")
    if spec.startswith("forbidden:"):
        words = tuple(tuple(int(ch) for ch in w)
                      for w in spec.split(":", 1)[1].split(","))
        return SFTSpec(alphabet, words)
    raise ConfigError(f"unknown SFT {spec!r}")


# ---------------------------------------------------------------------------
# rendering


#: figure palette for up to 4 symbols: white, black, red, blue
PALETTE4 = ((255, 255, 255), (0, 0, 0), (255, 0, 0), (0, 0, 255))


def write_ppm(path, codes: np.ndarray, palette=PALETTE4) -> None:
    h, w = codes.shape
    img = np.asarray(palette, dtype=np.uint8)[codes]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def write_pgm(path, values: np.ndarray, vmax: int | None = None) -> None:
    h, w = values.shape
    vmax = int(values.max()) if vmax is None else vmax
    img = (values * (255 / max(vmax, 1))).clip(0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode())
        fh.write(img.tobytes())


def render_spacetime(rule_or_pca, measure: MeasureSpec, width: int,
                     height: int, seed: int) -> np.ndarray:
    """Rows = times 0..height-1 on the fixed exact columns [0, width)."""
    if measure.alphabet.size > len(PALETTE4):
        raise FeasibilityError("palette covers at most 4 symbols")
    lm, rm = required_margin(rule_or_pca, height - 1)
    rng = rng_stream(seed, "render")
    # the whole initial sample is exact; margins feed the light cone
    m = max(lm, rm)
    c = window_sample(measure, width + 2 * m, 0, rng, origin=-m)
    is_pca = isinstance(rule_or_pca, PCASpec)
    img = np.empty((height, width), dtype=np.uint8)
    for t in range(height):
        img[t] = c.cells[-c.origin: width - c.origin]
        if t + 1 < height:
            if is_pca:
                c, _, _ = step_pca(rule_or_pca, c, rng)
            else:
                c = step(rule_or_pca, c)
    return img


# ---------------------------------------------------------------------------
# qualitative monitor


@dataclass
class MonitorReport:
    """Density of each speed class over a time grid, plus the verdict:
    the class with > `share` of the final density, or "none" if the total
    final density is below `floor`."""

    t_grid: list[int]
    class_density: dict[int, dict[int, float]]   # speed -> {t: density}
    verdict: str
    total_final: float

    def to_csv(self, path, config_hash: str = "") -> None:
        speeds = sorted(self.class_density)
        with open(path, "w") as fh:
            fh.write("t," + ",".join(f"D_speed_{v:+d}" for v in speeds)
                     + ",D_total\n")
            for t in self.t_grid:
                row = [self.class_density[v][t] for v in speeds]
                fh.write(f"{t}," + ",".join(f"{x:.10g}" for x in row)
                         + f",{sum(row):.10g}\n")
            fh.write(f"# verdict={self.verdict}\n")
            fh.write(f"# config_hash={config_hash}\n")


def qualitative_monitor(ca, ps, measure: MeasureSpec, t_grid, n_traj: int,
                        cells: int, seed: int, share: float = 0.99,
                        floor: float = 1e-3) -> MonitorReport:
    """Track particle density per speed class; asymptotically at most one
    class survives."""
    t_grid = sorted(int(t) for t in t_grid)
    t_top = t_grid[-1]
    is_pca = isinstance(ca, PCASpec)
    lm, rm = required_margin(ca, t_top)
    mo = max(-ps.morphism.min_off, ps.morphism.max_off, 0)
    speeds = {code: ps.speeds.get(code, 0) for code in ps.particle_codes}
    classes = sorted(set(speeds.values()))
    acc = {v: {t: 0.0 for t in t_grid} for v in classes}
    for traj in range(n_traj):
        rng = rng_stream(seed, "monitor", traj)
        m = max(lm, rm) + mo
        # the whole initial sample is exact; the extra width feeds the cone
        c = window_sample(measure, cells + 2 * m, 0, rng, origin=-m)
        for t in range(t_top + 1):
            if t in acc[classes[0]]:
                pic = project(ps.morphism, c)
                win = pic.cells[-pic.origin: cells - pic.origin]
                for code, v in speeds.items():
                    acc[v][t] += np.count_nonzero(win == code) / cells
            if t < t_top:
                if is_pca:
                    c, _, _ = step_pca(ca, c, rng)
                else:
                    c = step(ca, c)
    for v in classes:
        for t in t_grid:
            acc[v][t] /= n_traj
    total = sum(acc[v][t_top] for v in classes)
    verdict = "none"
    if total >= floor:
        verdict = "undecided"
        for v in classes:
            if acc[v][t_top] / total > share:
                verdict = f"speed_{v:+d}"
    return MonitorReport(t_grid, acc, verdict, total)


# ---------------------------------------------------------------------------
# manifests and run dispatch


@dataclass
class RunManifest:
    config_hash: str
    config_text: str
    seed: int
    version: str
    wall_time_s: float
    outputs: list[str]
    summary: dict

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.__dict__, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path) as fh:
            return cls(**json.load(fh))


def _csv(path, header: list[str], rows, config_hash: str) -> None:
    def fmt(x):
        if isinstance(x, float):
            return f"{x:.10g}"
        return str(x)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")
        fh.write(f"# config_hash={config_hash}\n")


def run(cfg: ExperimentConfig) -> RunManifest:
    t0 = time.monotonic()
    kind = cfg.get("kind", required=True)
    seed = cfg.getint("seed", 0)
    out = cfg.get("out", "run")
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    runner = _RUNNERS.get(kind)
    if runner is None:
        raise ConfigError(f"unknown experiment kind {kind!r}; known: "
                          + ", ".join(sorted(_RUNNERS)))
    outputs, summary = runner(cfg, seed, out)
    man = RunManifest(cfg.hash, cfg.canonical_text(), seed, __version__,
                      round(time.monotonic() - t0, 3), outputs, summary)
    man.save(out + ".manifest.json")
    if kind == "check-system" and not summary["passed"]:
        raise CheckFailure(f"particle-system check failed; see {outputs[0]}")
    return man


def rerun(manifest_path) -> RunManifest:
    old = RunManifest.load(manifest_path)
    return run(ExperimentConfig(parse_config_text(old.config_text)))


def _rule_for(cfg) -> LocalRule | PCASpec:
    return resolve_rule(cfg.get("rule", required=True))


def _measure_for(cfg, alphabet) -> MeasureSpec:
    return resolve_measure(cfg.get("measure", "uniform"), alphabet)


def _run_simulate(cfg, seed, out):
    ca = _rule_for(cfg)
    mu = _measure_for(cfg, ca.alphabet)
    grid = parse_grid(cfg.get("grid", "dyadic:256"))
    words = cfg.getlist("words") or [str(a) for a in range(ca.alphabet.size)]
    max_len = max(len(w) for w in words)
    emp = estimate_cylinders(ca, mu, 0, max_len, cfg.getint("traj", 10),
                             cfg.getint("cells", 4096), seed,
                             grid=tuple(grid))
    rows = [[t] + [emp[t].freq([int(ch) for ch in w]) for w in words]
            for t in grid]
    path = out + "_freqs.csv"
    _csv(path, ["t"] + [f"freq_{w}" for w in words], rows, cfg.hash)
    return [path], {"t_max": grid[-1], "words": words}


def _run_render(cfg, seed, out):
    ca = _rule_for(cfg)
    mu = _measure_for(cfg, ca.alphabet)
    img = render_spacetime(ca, mu, cfg.getint("width", 400),
                           cfg.getint("height", 300), seed)
    path = out + ".ppm"
    write_ppm(path, img)
    return [path], {"shape": list(img.shape)}


def _run_check_system(cfg, seed, out):
    name = cfg.get("system", required=True)
    ca, ps = resolve_system(name)
    radius = ca.radius
    enum_len = cfg.getint("enum_len", ps.min_enum_len(radius))
    report = check_particle_system(ca, ps, enum_len)
    path = out + "_check.csv"
    rows = [[cond, int(res.passed), res.n_checked,
             " ".join(str(w) for w in res.witnesses[:1]).replace(",", ";")]
            for cond, res in report.conditions.items()]
    _csv(path, ["condition", "passed", "n_checked", "witness"], rows, cfg.hash)
    return [path], {"system": name, "enum_len": enum_len,
                    "passed": report.passed}


def _run_defects(cfg, seed, out):
    ca = _rule_for(cfg)
    mu = _measure_for(cfg, ca.alphabet)
    t = cfg.getint("t", 0)
    lm, rm = required_margin(ca, t)
    rng = rng_stream(seed, "defects")
    m = max(lm, rm) + 8
    c = window_sample(mu, cfg.getint("cells", 1024) + 2 * m, 0, rng,
                      origin=-m)
    is_pca = isinstance(ca, PCASpec)
    for _ in range(t):
        c = step_pca(ca, c, rng)[0] if is_pca else step(ca, c)
    mode = cfg.get("classify", "dislocations")
    if mode == "dislocations":
        sft = resolve_sft(cfg.get("sft", required=True), ca.alphabet)
        pd = compute_period(sft)
        reading = classify_dislocations(sft, pd, c)
        fld = defect_field(sft, c)
    elif mode == "interfaces":
        domains = tuple(resolve_sft(s, ca.alphabet)
                        for s in cfg.getlist("domains", required=True))
        dec = Decomposition(domains, cfg.getint("alpha", 2))
        reading = classify_interfaces(dec, c)
        fld = union_defect_field(domains, c)
    else:
        raise ConfigError(f"classify must be dislocations|interfaces, "
                          f"got {mode!r}")
    path = out + "_defects.csv"
    _csv(path, ["position", "left", "right"],
         [[p, a, b] for p, (a, b) in zip(reading.positions, reading.labels)],
         cfg.hash)
    outputs = [path]
    if cfg.get("field_pgm"):
        write_pgm(cfg.get("field_pgm"), fld.values[None, :])
        outputs.append(cfg.get("field_pgm"))
    return outputs, {"n_defects": len(reading.positions), "kind": reading.kind}


def _glider_params(cfg):
    vm = cfg.getint("v_minus", required=True)
    vp = cfg.getint("v_plus", required=True)
    if not vm < 0 <= vp:
        raise FeasibilityError("need v_minus < 0 <= v_plus")
    factor = None
    if cfg.get("factor_system"):
        _, ps = resolve_system(cfg.get("factor_system"))
        factor = ps.morphism
    return vm, vp, factor


def _run_entry_time(cfg, seed, out):
    vm, vp, factor = _glider_params(cfg)
    mu = _measure_for(cfg, factor.alphabet if factor else GLIDER_ALPHABET)
    if factor is None and mu.alphabet.size != 3:
        raise FeasibilityError("entry times need the 3-symbol glider alphabet")
    n = cfg.getint("n", 4096)
    n_samples = cfg.getint("samples", 10000)
    t_max = cfg.getint("tmax", 64 * n)
    species = cfg.get("species", "-")
    times, cens = entry_times(vm, vp, mu, n, n_samples, seed,
                              t_max=t_max, species=species, factor=factor)
    rep = ecdf_report(times, cens, n, vm, vp)
    p1 = out + "_samples.csv"
    _csv(p1, ["n", "T", "censored"],
         [[n, int(t), int(c)] for t, c in zip(times, cens)], cfg.hash)
    p2 = out + "_ecdf.csv"
    _csv(p2, ["alpha", "ecdf", "limit_cdf"],
         [[float(a), float(e), float(r)]
          for a, e, r in zip(rep.alphas, rep.ecdf, rep.reference)], cfg.hash)
    return [p1, p2], {"ks": rep.ks, "censor_rate": rep.censor_rate}


def _run_density(cfg, seed, out):
    vm, vp, factor = _glider_params(cfg)
    mu = _measure_for(cfg, factor.alphabet if factor else GLIDER_ALPHABET)
    grid = parse_grid(cfg.get("grid", "dyadic:4096"))
    rep = density_decay(vm, vp, mu, grid, cfg.getint("traj", 100),
                        cfg.getint("cells", 100000), seed, factor=factor)
    path = out + "_density.csv"
    _csv(path, ["t", "d_minus"], [[t, rep.density[t]] for t in rep.t_grid],
         cfg.hash)
    return [path], {"slope": rep.slope, "fit_range": list(rep.fit_range)}


def _run_convergence(cfg, seed, out):
    vm, vp, factor = _glider_params(cfg)
    mu = _measure_for(cfg, factor.alphabet if factor else GLIDER_ALPHABET)
    grid = parse_grid(cfg.get("grid", "dyadic:1024"))
    rep = convergence_rate(vm, vp, mu, [t for t in grid if t > 0],
                           cfg.getint("L", 6), cfg.getint("traj", 100),
                           cfg.getint("cells", 20000), seed, factor=factor)
    path = out + "_dm.csv"
    _csv(path, ["t", "d_M", "d_minus"],
         [[t, rep.dm[t], rep.d_minus[t]] for t in rep.t_grid], cfg.hash)
    return [path], {"exponent": rep.exponent, "envelope_ok": rep.envelope_ok}


def _run_monitor(cfg, seed, out):
    ca, ps = resolve_system(cfg.get("system", required=True))
    mu = _measure_for(cfg, ca.alphabet)
    grid = parse_grid(cfg.get("grid", "dyadic:4096"))
    rep = qualitative_monitor(ca, ps, mu, grid, cfg.getint("traj", 10),
                              cfg.getint("cells", 8192), seed,
                              share=cfg.getfloat("share", 0.99),
                              floor=cfg.getfloat("floor", 1e-3))
    path = out + "_monitor.csv"
    rep.to_csv(path, cfg.hash)
    return [path], {"verdict": rep.verdict, "total_final": rep.total_final}


_RUNNERS = {
    "simulate": _run_simulate,
    "render": _run_render,
    "check-system": _run_check_system,
    "defects": _run_defects,
    "entry-time": _run_entry_time,
    "density": _run_density,
    "convergence": _run_convergence,
    "qualitative-monitor": _run_monitor,
}
