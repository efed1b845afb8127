"""Classic two-valued subjective-logic operators.

These back the SL* baseline: the assessment engine run with the classic
operators substituted for the three-valued ones.  In this formulation
an opinion carries only certain evidence,

    ω = ⟨positive, negative⟩ | base_rate

and the uncertain evidence mass is pinned at the constant 2, giving the
belief / disbelief / uncertainty masses

    b = positive / (positive + negative + 2)
    d = negative / (positive + negative + 2)
    u = 2 / (positive + negative + 2).

Because the uncertainty mass cannot grow, discounting *destroys*
certain evidence rather than conserving it, which is the behavioral
difference the three-valued model exists to fix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["SlOpinion", "sl_combine", "sl_discount", "sl_expected_belief"]

#: Fixed uncertain-evidence mass of every two-valued opinion.
UNCERTAINTY_MASS = 2.0


@dataclass(frozen=True)
class SlOpinion:
    """A two-valued opinion ⟨positive, negative⟩ | base_rate.

    The uncertain evidence amount is the model constant 2 and is not a
    field; see `uncertainty_mass`.
    """

    positive: float
    negative: float
    base_rate: float = 0.5

    def __post_init__(self) -> None:
        for name in ("positive", "negative"):
            value = float(getattr(self, name))
            if math.isnan(value) or math.isinf(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and nonnegative, got {value}")
            object.__setattr__(self, name, value)
        base_rate = float(self.base_rate)
        if math.isnan(base_rate) or not 0.0 <= base_rate <= 1.0:
            raise ValueError(f"base_rate must be in [0, 1], got {base_rate}")
        object.__setattr__(self, "base_rate", base_rate)

    @property
    def uncertainty_mass(self) -> float:
        return UNCERTAINTY_MASS

    def certain_total(self) -> float:
        return self.positive + self.negative

    def belief_masses(self) -> tuple[float, float, float]:
        """The (belief, disbelief, uncertainty) masses; they sum to 1."""
        denom = self.positive + self.negative + UNCERTAINTY_MASS
        return (self.positive / denom, self.negative / denom, UNCERTAINTY_MASS / denom)

    def __repr__(self) -> str:
        return f"SlOpinion({self.positive:g}, {self.negative:g} | {self.base_rate:g})"


def sl_combine(a: SlOpinion, b: SlOpinion) -> SlOpinion:
    """Fuse two independent opinions: evidence adds, base rates average."""
    return SlOpinion(
        a.positive + b.positive,
        a.negative + b.negative,
        (a.base_rate + b.base_rate) / 2.0,
    )


def sl_discount(a: SlOpinion, b: SlOpinion) -> SlOpinion:
    """Propagate opinion b through the recommender opinion a.

    With denominators D = (b.pos + b.neg + 2)(a.pos + a.neg + 2) and the
    renormalizer κ = 1 − (a.pos·b.pos + a.pos·b.neg) / D:

        positive = (a.pos · b.pos / D) · (2 / κ)
        negative = (a.pos · b.neg / D) · (2 / κ)

    and the base rate is taken from b.  κ > 0 always holds for finite
    nonnegative evidence; it is asserted defensively.
    """
    denom = (b.negative + b.positive + UNCERTAINTY_MASS) * (
        a.negative + a.positive + UNCERTAINTY_MASS
    )
    kappa = 1.0 - (a.positive * b.positive + a.positive * b.negative) / denom
    if kappa <= 0.0:
        raise ValueError(f"discount renormalizer must be positive, got {kappa}")
    scale = UNCERTAINTY_MASS / kappa
    return SlOpinion(
        (a.positive * b.positive / denom) * scale,
        (a.positive * b.negative / denom) * scale,
        b.base_rate,
    )


def sl_expected_belief(a: SlOpinion) -> float:
    """Scalar trust value E = b + base_rate · u over the mass mapping."""
    belief, _, uncertainty = a.belief_masses()
    value = belief + a.base_rate * uncertainty
    return min(max(value, 0.0), 1.0)
