"""Recover a planted shift and scale with the dual-descent estimator.

The fitted model aligns shifted samples with a scaled source:
y_j + mu ~ sigma * x. The source here is uniform on [-1, 1]^2, and the
base sink locations (+-4/3, 0) are chosen so their own best fit is
exactly (sigma, mu) = (1, 0). Planting y_j = sigma * z_j - mu on top of
those base points therefore makes the planted pair the true minimizer,
and the estimator should land within epsilon of it.
"""

import numpy as np

from boxot import (
    BoxDensity,
    Hyperrectangle,
    Instance,
    SampleSet,
    SolverConfig,
    estimate_parameters,
)

PLANTED_SIGMA = 1.3
PLANTED_MU = np.array([0.2, -0.4])


def main():
    box = Hyperrectangle([-1.0, -1.0], [1.0, 1.0])
    density = BoxDensity(dimension=2, boxes=((box, 0.25),))
    base_points = np.array([[-4.0 / 3.0, 0.0], [4.0 / 3.0, 0.0]])
    samples = SampleSet.uniform(PLANTED_SIGMA * base_points - PLANTED_MU)
    instance = Instance(density, samples)

    print(f"planted sigma = {PLANTED_SIGMA}, mu = {PLANTED_MU}")
    print(f"instance stats: {instance.stats}")

    config = SolverConfig(epsilon=0.02, eta=0.01, seed=0)
    result = estimate_parameters(instance, config)

    print(f"sigma_hat = {result.sigma_hat:.6f}")
    print(f"mu_hat    = {np.round(result.mu_hat, 6)}")
    print(f"rho       = {result.rho:.6f} (squared transport distance at the fit)")
    print(f"iterations = {result.trace.M_bar}, "
          f"stop = {result.trace.stop_reason!r}, "
          f"guarantee holds = {result.guarantee_holds}")

    sigma_err = abs(result.sigma_hat - PLANTED_SIGMA)
    mu_err = float(np.linalg.norm(result.mu_hat - PLANTED_MU))
    print(f"errors: |sigma_hat - sigma| = {sigma_err:.2e}, "
          f"||mu_hat - mu|| = {mu_err:.2e}")


if __name__ == "__main__":
    main()
