"""Which defect species survives?

Starting from product measures, each automaton's defect gas self-organizes:
collisions eliminate whole speed classes until at most one survives.  The
monitor tracks the density of each speed class on a dyadic time grid and
issues a verdict.

- rule 184 from Bernoulli(0.6, 0.4): the excess 00-dislocations (speed +1)
  survive, 11-dislocations die out;
- 3-state cyclic from uniform: left- and right-movers annihilate in pairs,
  both vanish and walls remain undecided at this horizon;
- 5-state cyclic from uniform: stationary walls take over almost surely.
"""

from gliderlab.experiments import qualitative_monitor
from gliderlab.lattice import BINARY
from gliderlab.measures import bernoulli
from gliderlab.particles import cyclic_system, rule184_system

GRID = (0, 16, 64, 256, 1024)


def show(label, ca, ps, mu, seed):
    rep = qualitative_monitor(ca, ps, mu, GRID, n_traj=4, cells=1024,
                              seed=seed)
    print(label)
    for v in sorted(rep.class_density):
        row = "  ".join(f"{rep.class_density[v][t]:.4f}" for t in GRID)
        print(f"  speed {v:+d}:  {row}")
    print(f"  verdict: {rep.verdict}\n")


def main():
    ca, ps = rule184_system()
    show("rule 184, Bernoulli(0.6, 0.4)", ca, ps,
         bernoulli((0.6, 0.4), BINARY), seed=1)
    for n in (3, 5):
        ca, ps = cyclic_system(n)
        mu = bernoulli((1.0 / n,) * n, ca.alphabet)
        show(f"{n}-state cyclic, uniform", ca, ps, mu, seed=n)


if __name__ == "__main__":
    main()
