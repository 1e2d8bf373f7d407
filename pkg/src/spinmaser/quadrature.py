"""Branch-split Gauss-Legendre quadrature against a frequency density.

Used by the limit-cycle and stability modules so that the self-consistency
integrals and the characteristic-equation integrals share one quadrature
error.  The density's kinks (e.g. the root distribution's plateau edges) sit
on branch boundaries, preserving spectral accuracy per branch.
"""

from __future__ import annotations

import numpy as np

from .model import DiracComb, FrequencyDistribution, branches, density


def rho_quadrature(dist: FrequencyDistribution, n_per_branch: int = 200):
    """Nodes and weights such that sum(w * f(omega)) ~= integral rho*f domega.

    DiracComb returns its atoms exactly; the sum is then exact.
    """
    if isinstance(dist, DiracComb):
        return np.array(dist.freqs), np.array(dist.weights)
    x, w = np.polynomial.legendre.leggauss(n_per_branch)
    nodes = []
    weights = []
    for lo, hi in branches(dist):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        om = mid + half * x
        nodes.append(om)
        weights.append(half * w * density(dist, om))
    return np.concatenate(nodes), np.concatenate(weights)
