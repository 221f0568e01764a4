"""Annihilating gliders thin out like t^(-1/2).

For the (-1,0)-glider automaton started from Bernoulli(1/2, 0, 1/2), the
surviving left-glider density is d_-(t) = P(strict new minimum at time t of
the associated random walk); at t=1 this is exactly 1/4 and asymptotically
d_-(t) ~ c t^(-1/2).  The same walk representation bounds the distance of
the whole process from the all-vacuum point mass between d_-(t) and a
constant multiple of it, so the measure converges at the same rate.
"""

from gliderlab.lattice import GLIDER_ALPHABET
from gliderlab.measures import bernoulli
from gliderlab.walks import convergence_rate, density_minus, loglog_fit


def main():
    mu = bernoulli((0.5, 0.0, 0.5), GLIDER_ALPHABET)
    grid = (1, 16, 64, 256, 1024)
    d = density_minus(-1, 0, mu, grid, n_traj=40, cells=40_000, seed=3)
    for t in grid:
        print(f"t={t:5d}  d_-(t)={d[t]:.5f}")
    fit = [t for t in grid if t >= 16]
    slope, _ = loglog_fit(fit, [d[t] for t in fit])
    print(f"log-log slope over t>=16: {slope:.3f}  (theory: -1/2)")

    rep = convergence_rate(-1, 0, mu, (4, 16, 64, 256), max_len=5,
                           n_traj=20, cells=4000, seed=4)
    print(f"\nd_M(mu_t, delta_vac) exponent: {rep.exponent:.3f}  "
          f"sandwich d_M > d_-/2 holds: {rep.envelope_ok}")


if __name__ == "__main__":
    main()
