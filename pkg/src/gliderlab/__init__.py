"""Simulation laboratory for one-dimensional cellular automata organized by
particle-like defects: exact finite-window simulation, mechanical particle
axiom checking, defect classification, and quantitative asymptotics."""

__version__ = "0.1.0"

from .lattice import (Alphabet, BINARY, Configuration, GLIDER_ALPHABET,
                      freq, from_word, rng_stream, window_sample)
from .rules import (LocalRule, PCASpec, RuleLaw, iterate, make_cyclic,
                    make_elementary, make_fates_pca, make_gliders,
                    make_line_pca, make_one_sided_captive,
                    make_random_walk_ca, parry_law, project,
                    rule_from_function, rule_from_text, rule_to_text, step,
                    step_pca)
from .measures import (EmpiricalCylinders, MeasureSpec, bernoulli,
                       dirac_point, dm_distance, estimate_cylinders, markov,
                       periodic, product)
from .particles import (BUILTIN_SYSTEMS, CheckReport, DensityTrace,
                        FeasibilityError, ParticleSystem,
                        check_particle_system, classify_step, trace_densities)
from .defects import (Decomposition, DefectField, DefectReading, PeriodData,
                      SFTSpec, classify_dislocations, classify_interfaces,
                      compute_period, defect_field, union_defect_field)
from .walks import (DecayReport, EcdfReport, WalkProcess, convergence_rate,
                    density_decay, density_minus, ecdf_report, entry_times,
                    entry_times_stepping, ks_between, lemma_min_oracle,
                    limit_cdf, sliding_min, walk_of)
from .experiments import (CheckFailure, ConfigError, ExperimentConfig,
                          RunManifest, parse_config_text, qualitative_monitor,
                          render_spacetime, rerun, run, write_pgm, write_ppm)
