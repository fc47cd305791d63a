"""
Catalog of iterated random functions X_t = F(X_{t-1}, eps_t).

Every map works elementwise on numpy arrays so a block of independent
replicates can be advanced in one call.
"""
import numpy as np

from processes.models import Ar1Map, Arch1Map, HalvingBernoulliMap, MapRule, Tar1Map


class BaseMap:
    """Base class for catalog maps with shared iteration utilities."""

    name = 'base'

    def __init__(self, rule: MapRule):
        self.rule = rule

    def step(self, x: np.ndarray, eps: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def lipschitz(self, eps: np.ndarray) -> np.ndarray:
        """Lipschitz constant L_eps of x -> F(x, eps); E log L_eps < 0 for the catalog."""
        raise NotImplementedError

    def iterate(self, x0: np.ndarray | float, eps: np.ndarray) -> np.ndarray:
        """Run the recursion over the last axis of ``eps``.

        Args:
            x0: Starting state(s), broadcastable to ``eps[..., 0]``
            eps: Innovations, shape (..., steps)

        Returns:
            States after each step, same shape as ``eps``
        """
        out = np.empty_like(eps, dtype=np.float64)
        x = np.broadcast_to(np.asarray(x0, dtype=np.float64), eps.shape[:-1]).copy()
        for t in range(eps.shape[-1]):
            x = self.step(x, eps[..., t])
            out[..., t] = x
        return out


class Ar1(BaseMap):
    name = 'ar1'

    def step(self, x, eps):
        return self.rule.rho * x + eps

    def lipschitz(self, eps):
        return np.full_like(eps, abs(self.rule.rho), dtype=np.float64)


class HalvingBernoulli(BaseMap):
    """Dual of the doubling map; the stationary law is Uniform(0, 1)."""

    name = 'halving_bernoulli'

    def step(self, x, eps):
        return (x + eps) / 2.0

    def lipschitz(self, eps):
        return np.full_like(eps, 0.5, dtype=np.float64)


class Tar1(BaseMap):
    """Threshold AR(1) with separate slopes above and below zero."""

    name = 'tar1'

    def step(self, x, eps):
        return self.rule.phi_plus * np.maximum(x, 0.0) + self.rule.phi_minus * np.minimum(x, 0.0) + eps

    def lipschitz(self, eps):
        bound = max(abs(self.rule.phi_plus), abs(self.rule.phi_minus))
        return np.full_like(eps, bound, dtype=np.float64)


class Arch1(BaseMap):
    name = 'arch1'

    def step(self, x, eps):
        return eps * np.sqrt(self.rule.a0 + self.rule.a1 * x * x)

    def lipschitz(self, eps):
        return np.abs(eps) * np.sqrt(self.rule.a1)


_CATALOG: dict[type, type[BaseMap]] = {
    Ar1Map: Ar1,
    HalvingBernoulliMap: HalvingBernoulli,
    Tar1Map: Tar1,
    Arch1Map: Arch1,
}


def build_map(rule: MapRule) -> BaseMap:
    """Instantiate the catalog map for a validated map rule."""
    try:
        return _CATALOG[type(rule)](rule)
    except KeyError:
        raise ValueError(f"No catalog map for {type(rule).__name__}") from None
