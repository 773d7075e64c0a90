"""Certify that a random 3-regular graph has no sparse balanced cut.

Run with ``python demos/expander_certificate.py``.
"""

from balcut.driver import RunConfig, balcut, certify_no_balanced_cut
from balcut.expsketch import normalized_laplacian_spectrum
from balcut.reference import random_regular
from balcut.sdp import dual_value


def main():
    g = random_regular(128, 3, seed=0)
    gamma, b = 0.005, 0.5
    nu2 = normalized_laplacian_spectrum(g)[0][1]
    print(f"random 3-regular graph: n={g.n}, normalised spectral gap {nu2:.3f}")

    out = balcut(g, RunConfig(b=b, gamma=gamma))
    print(f"outcome: {out.kind} after {out.iterations} iterations")
    print(f"certified level gamma' = {out.gamma_certified:.4g}, dual value "
          f"{dual_value(out.dual, b):.4g}, smallest normalised eigenvalue {out.lambda_min:.3g}")
    interp = certify_no_balanced_cut(out, g, b, gamma)
    print(f"every cut of conductance <= {interp.conductance_threshold:.3g} has "
          f"mu <= {interp.balance_ceiling:.3g}")


if __name__ == "__main__":
    main()
