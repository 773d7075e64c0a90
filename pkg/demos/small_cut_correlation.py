"""A caterpillar of cliques has only small sparse cuts: the certificate's
set ``S`` must cover each of them.

Run with ``python demos/small_cut_correlation.py`` (about 20 seconds).
"""

from balcut.driver import RunConfig, balcut
from balcut.graph import conductance
from balcut.reference import caterpillar_of_cliques


def main():
    gamma = 0.0019
    # each 2-clique leg hangs off the body by a bridge of conductance gamma/16
    weight = gamma / 16 * 2 / (1 - gamma / 16)
    g, legs = caterpillar_of_cliques(20, [2, 2, 2, 2], seed=0, bridge_weight=weight)
    print(f"body of 20 vertices with {len(legs)} legs; leg conductances "
          + ", ".join(f"{conductance(g, leg):.2e}" for leg in legs))

    out = balcut(g, RunConfig(b=0.5, gamma=gamma, sweep_constant=1.0))
    print(f"outcome: {out.kind} after {out.iterations} iterations, mu(S) = {g.mu[out.cut].sum():.3f}")
    for i, leg in enumerate(legs):
        share = g.mu[out.cut & leg].sum() / g.mu[leg].sum()
        print(f"leg {i}: share inside S {share:.2f}")


if __name__ == "__main__":
    main()
