import json

import numpy as np
import pytest

from gliderlab.cli import main
from gliderlab.experiments import (ConfigError, ExperimentConfig, PALETTE4,
                                   parse_config_text, parse_grid,
                                   qualitative_monitor, render_spacetime,
                                   rerun, resolve_measure, resolve_rule, run,
                                   write_pgm, write_ppm)
from gliderlab.lattice import BINARY
from gliderlab.measures import bernoulli
from gliderlab.particles import cyclic_system
from gliderlab.rules import PCASpec


def test_config_grammar(tmp_path):
    inc = tmp_path / "common.cfg"
    inc.write_text("cells = 100\n")
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# comment\n"
        "kind = simulate\n"
        f"include {inc}\n"
        "[sim]\n"
        "rule = elementary:184\n"
    )
    c = ExperimentConfig.from_file(cfg)
    assert c.get("kind") == "simulate"
    assert c.getint("cells") == 100
    assert c.get("sim.rule") == "elementary:184"
    with pytest.raises(ConfigError):
        parse_config_text("novalue\n")


def test_config_hash_is_canonical():
    a = ExperimentConfig({"b": "2", "a": "1"})
    b = ExperimentConfig({"a": "1", "b": "2"})
    assert a.hash == b.hash
    b.override("a", "3")
    assert a.hash != b.hash


def test_parse_grid():
    assert parse_grid("1,2,8") == [1, 2, 8]
    assert parse_grid("dyadic:8") == [0, 1, 2, 4, 8]


def test_resolvers():
    assert resolve_rule("elementary:184").name == "rule184"
    assert isinstance(resolve_rule("fates:0.75"), PCASpec)
    mu = resolve_measure("bernoulli:0.7,0.3", BINARY)
    assert mu.cylinder((0,)) == pytest.approx(0.7)
    with pytest.raises(ConfigError):
        resolve_rule("nonsense:1")
    with pytest.raises(ConfigError):
        resolve_measure("bernoulli:0.7", BINARY)


def test_render_and_image_formats(tmp_path):
    img = render_spacetime(resolve_rule("elementary:184"),
                           bernoulli((0.5, 0.5), BINARY), 40, 30, seed=1)
    assert img.shape == (30, 40)
    p = tmp_path / "x.ppm"
    write_ppm(p, img)
    data = p.read_bytes()
    assert data.startswith(b"P6\n40 30\n255\n")
    assert len(data) == len(b"P6\n40 30\n255\n") + 40 * 30 * 3
    g = tmp_path / "x.pgm"
    write_pgm(g, img.astype(np.int64))
    assert g.read_bytes().startswith(b"P5\n40 30\n255\n")


def test_monitor_small_grid():
    ca, ps = cyclic_system(3)
    mu = bernoulli((1 / 3, 1 / 3, 1 / 3), ca.alphabet)
    rep = qualitative_monitor(ca, ps, mu, (0, 4, 16), n_traj=4, cells=400,
                              seed=7)
    assert set(rep.class_density) == {-1, 0, 1}
    # annihilation only: class densities never grow along the grid
    for v, series in rep.class_density.items():
        ts = sorted(series)
        assert all(series[a] >= series[b] - 1e-9
                   for a, b in zip(ts, ts[1:]))
    assert rep.verdict in ("none", "undecided") or \
        rep.verdict.startswith("speed_")


def test_run_writes_manifest_and_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "den"
    cfg = ExperimentConfig({
        "kind": "density", "seed": "11", "out": str(out),
        "v_minus": "-1", "v_plus": "0",
        "measure": "bernoulli:0.5,0.0,0.5",
        "grid": "1,2,4,8", "traj": "5", "cells": "2000",
    })
    man = run(cfg)
    csv = tmp_path / "den_density.csv"
    first = csv.read_bytes()
    assert man.config_hash in first.decode()
    man_path = tmp_path / "den.manifest.json"
    assert man_path.exists()
    meta = json.loads(man_path.read_text())
    assert meta["config_hash"] == man.config_hash
    rerun(man_path)
    assert csv.read_bytes() == first


def test_cli_exit_codes(tmp_path):
    out = str(tmp_path / "r")
    ok = main(["render", "--seed", "1", "--out", out,
               "--override", "rule=elementary:110",
               "--override", "measure=bernoulli:0.5,0.5",
               "--override", "width=20", "--override", "height=10"])
    assert ok == 0
    bad_cfg = main(["render", "--seed", "1", "--out", out,
                    "--override", "rule=elementary:band"])
    assert bad_cfg == 2
    # the identity automaton has no -1 gliders to wait for
    infeasible = main(["entry-time", "--seed", "1", "--out", out,
                       "--override", "v_minus=0", "--override", "v_plus=0",
                       "--override", "n=8", "--override", "samples=4"])
    assert infeasible == 3


def test_cli_enum_bound_is_feasibility_error(tmp_path):
    # enum length below the soundness bound is a feasibility error (3)
    out = str(tmp_path / "c")
    rc = main(["check-system", "--seed", "0", "--out", out,
               "--override", "system=rule184", "--override", "enum_len=5"])
    assert rc == 3
