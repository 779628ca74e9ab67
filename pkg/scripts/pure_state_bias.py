"""Show how the raw eigenvalue estimate for a pure qubit approaches 1 as K grows.

The accumulated expectations are taken at perturbed vectors, so the top
eigenvalue estimate sits below 1 by roughly the mean of beta_k^2 and the
stopping rule keeps going to a second eigenvector.
"""

import argparse

import numpy as np

from sgqst.learner import LearnerConfig, learn_state
from sgqst.measurement import MeasurementDevice
from sgqst.metrics import infidelity, median
from sgqst.randgen import haar_random_pure, make_rng


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--ks", type=int, nargs="+", default=[100, 500, 2000])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    for k in args.ks:
        tops, ranks, infs = [], [], []
        for t in range(args.trials):
            psi = haar_random_pure(2, make_rng(args.seed, t, 0))
            rho = np.outer(psi, psi.conj())
            res = learn_state(MeasurementDevice(rho, 1, exact=True), LearnerConfig(d=2, N=1, K=k),
                              rng=make_rng(args.seed, t, 1))
            tops.append(res.raw_values[0])
            ranks.append(res.r_hat)
            infs.append(infidelity(rho, res.rho_hat))
        print(f"K={k:<6} median raw p1={median(tops):.5f}  r_hat=1 in {np.mean(np.array(ranks) == 1):.0%}  "
              f"median infidelity={median(infs):.3e}")


if __name__ == "__main__":
    main()
