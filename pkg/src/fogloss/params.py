"""Parameter containers shared by all engines."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class SystemParams:
    """Two-center fluid model: arrival rates, per-server service rates, scaled
    capacities, rerouting probabilities.

    Every formula depends on mu_i and c_i only through the products a_i = mu_i*c_i
    (the saturated service rates), exposed as properties.
    """

    lambda1: float
    lambda2: float
    mu1: float
    mu2: float
    c1: float
    c2: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "mu1", "mu2", "c1", "c2"):
            if not getattr(self, name) > 0:
                raise ValidationError(name, f"{name} must be > 0")
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(name, f"{name} must be in [0,1]")

    @property
    def a1(self) -> float:
        return self.mu1 * self.c1

    @property
    def a2(self) -> float:
        return self.mu2 * self.c2

    @property
    def S(self) -> float:
        # total rate constant appearing in the kernel polynomial
        return self.lambda1 + self.lambda2 + self.a1 + self.a2

    def swapped(self) -> SystemParams:
        """Exchange the roles of the two centers."""
        return SystemParams(
            lambda1=self.lambda2, lambda2=self.lambda1,
            mu1=self.mu2, mu2=self.mu1,
            c1=self.c2, c2=self.c1,
            p1=self.p2, p2=self.p1,
        )
