"""Three-valued trust opinions and their algebra.

A trust opinion records raw evidence a trustor has collected about a
trustee, split over three states:

    ω = ⟨positive, negative, uncertain⟩ | base_rate

        positive:   observations where the trustee behaved as expected
        negative:   observations where it did not
        uncertain:  observations that were ambiguous, plus certain
                    evidence that was distorted by trust propagation
        base_rate:  prior probability of trustworthiness, used only
                    when mapping an opinion to a scalar trust value

Unlike the classic two-valued formulation (see `trustcalc.sl`), the
uncertain state is a real evidence count, not a constant.  That is what
lets propagation *conserve* evidence: discounting moves certain evidence
into the uncertain state instead of destroying it.

Two operators drive trust computation:

    discount(d, o):  propagation along a series path ("A trusts B, B
                     trusts C").  The first operand is the *distorting*
                     opinion, the second the *original* opinion.  The
                     result always carries exactly as much total
                     evidence as the original.
    combine(a, b):   fusion of independent parallel opinions about the
                     same trustee; evidence counts add.

Distorting opinions may be reused any number of times in a computation;
original opinions may be combined only once.  The engine in
`trustcalc.engine` relies on that distinction.

All values are immutable and all operations are pure functions, so the
whole module is safe for unrestricted concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from scipy import integrate, optimize, special

__all__ = [
    "Opinion",
    "CollapsedOpinion",
    "VacuousOpinionError",
    "certainty",
    "collapse",
    "combine",
    "combine_many",
    "discount",
    "expected_belief",
    "expected_probabilities",
]

# Absolute tolerance for the adaptive quadrature behind certainty().
_QUAD_ABS_TOL = 1e-8


class VacuousOpinionError(ValueError):
    """Raised when an operation is undefined on a zero-evidence opinion."""


def _validate_evidence(value: float, name: str) -> float:
    if not isinstance(value, (int, float)):
        raise TypeError(f"{name} must be a number, got {type(value).__name__}")
    value = float(value)
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if value < 0.0:
        raise ValueError(f"{name} must be nonnegative, got {value}")
    return value


def _validate_base_rate(value: float) -> float:
    value = float(value)
    if math.isnan(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"base_rate must be in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class Opinion:
    """A three-valued trust opinion ⟨positive, negative, uncertain⟩ | base_rate.

    Evidence counts are nonnegative reals, not integers: discounting
    produces fractional evidence even from integer inputs.  The
    zero-evidence opinion ⟨0, 0, 0⟩ is *vacuous*; it is the additive
    identity of combine() and the value returned by the assessment
    engine when its search depth is exhausted.

    Attributes:
        positive:  count of positive evidence (≥ 0)
        negative:  count of negative evidence (≥ 0)
        uncertain: count of uncertain evidence (≥ 0)
        base_rate: prior trust in [0, 1], default 0.5 (uninformative)
    """

    positive: float
    negative: float
    uncertain: float
    base_rate: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", _validate_evidence(self.positive, "positive"))
        object.__setattr__(self, "negative", _validate_evidence(self.negative, "negative"))
        object.__setattr__(self, "uncertain", _validate_evidence(self.uncertain, "uncertain"))
        object.__setattr__(self, "base_rate", _validate_base_rate(self.base_rate))

    @classmethod
    def vacuous(cls, base_rate: float = 0.5) -> "Opinion":
        """The zero-evidence opinion ⟨0, 0, 0⟩."""
        return cls(0.0, 0.0, 0.0, base_rate)

    def total(self) -> float:
        """Total amount of evidence across all three states."""
        return self.positive + self.negative + self.uncertain

    @property
    def is_vacuous(self) -> bool:
        return self.total() == 0.0

    def evidence(self) -> tuple[float, float, float]:
        """The evidence triple, without the base rate."""
        return (self.positive, self.negative, self.uncertain)

    def __repr__(self) -> str:
        return (
            f"Opinion({self.positive:g}, {self.negative:g}, "
            f"{self.uncertain:g} | {self.base_rate:g})"
        )


@dataclass(frozen=True)
class CollapsedOpinion:
    """A two-valued opinion left after dropping the uncertain state.

    Produced by collapse() as the first step of computing an expected
    belief: only certain evidence enters that computation.
    """

    positive: float
    negative: float
    base_rate: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "positive", _validate_evidence(self.positive, "positive"))
        object.__setattr__(self, "negative", _validate_evidence(self.negative, "negative"))
        object.__setattr__(self, "base_rate", _validate_base_rate(self.base_rate))

    def total(self) -> float:
        return self.positive + self.negative


def _unchecked_opinion(positive: float, negative: float, uncertain: float, base_rate: float) -> Opinion:
    # Construction bypass for operator results: inputs were validated, and
    # sums/products/quotients of finite nonnegative evidence stay valid, so
    # re-validating every intermediate would only burn time in the engine's
    # inner loop.
    op = object.__new__(Opinion)
    object.__setattr__(op, "positive", positive)
    object.__setattr__(op, "negative", negative)
    object.__setattr__(op, "uncertain", uncertain)
    object.__setattr__(op, "base_rate", base_rate)
    return op


def expected_probabilities(op: Opinion) -> tuple[float, float, float]:
    """Expected probabilities of the three behavior outcomes.

    Each state's probability is its share of the total evidence, the
    posterior-mean estimate under the evidence-counting model:

        (p_pos, p_neg, p_unc) = (positive, negative, uncertain) / total

    Raises:
        VacuousOpinionError: for a zero-evidence opinion, whose
            distribution is undefined.
    """
    total = op.total()
    if total == 0.0:
        raise VacuousOpinionError("undefined distribution: opinion has no evidence")
    return (op.positive / total, op.negative / total, op.uncertain / total)


def discount(distorting: Opinion, original: Opinion) -> Opinion:
    """Propagate an opinion along a series path.

    Given the distorting opinion d (the recommender's trust) and the
    original opinion o (the recommendation itself), the result is

        positive  = d.positive · o.positive / T_d
        negative  = d.positive · o.negative / T_d
        uncertain = ((d.negative + d.uncertain) · T_o
                     + d.positive · o.uncertain) / T_d

    with T_d, T_o the operands' total evidence.  Only the fraction of
    the distorting opinion that is positive survives as certain
    evidence; everything else is distorted into the uncertain state, so
    the result's total equals T_o exactly (evidence conservation).

    A zero-evidence distorting opinion means the recommender is wholly
    unknown, which forces full distortion: the result is ⟨0, 0, T_o⟩.

    The result keeps the original opinion's base rate, since the prior
    belongs to the trustee being recommended.
    """
    t_o = original.total()
    t_d = distorting.total()
    if t_d == 0.0:
        return _unchecked_opinion(0.0, 0.0, t_o, original.base_rate)
    positive = distorting.positive * original.positive / t_d
    negative = distorting.positive * original.negative / t_d
    uncertain = (
        (distorting.negative + distorting.uncertain) * t_o
        + distorting.positive * original.uncertain
    ) / t_d
    return _unchecked_opinion(positive, negative, uncertain, original.base_rate)


def combine(a: Opinion, b: Opinion) -> Opinion:
    """Fuse two independent opinions about the same trustee.

    Evidence counts add componentwise; the base rate is the mean of the
    operands'.  Callers must guarantee the two bodies of evidence are
    independent.  The assessment engine enforces this structurally by
    never combining two opinions derived from the same original opinion.
    """
    return _unchecked_opinion(
        a.positive + b.positive,
        a.negative + b.negative,
        a.uncertain + b.uncertain,
        (a.base_rate + b.base_rate) / 2.0,
    )


def combine_many(ops: Iterable[Opinion]) -> Opinion:
    """Left fold of combine() over a nonempty collection.

    Evidence sums are order-independent.  (The folded base rate is a
    repeated pairwise mean, so it is order-independent only when all
    inputs share one base rate, which is how the engine uses it.)
    """
    result: Opinion | None = None
    for op in ops:
        result = op if result is None else combine(result, op)
    if result is None:
        raise ValueError("combine_many requires at least one opinion")
    return result


def collapse(op: Opinion) -> CollapsedOpinion:
    """Drop the uncertain state, keeping certain evidence and base rate."""
    return CollapsedOpinion(op.positive, op.negative, op.base_rate)


def _log_beta_pdf(x: float, a: float, b: float) -> float:
    # log density of Beta(a, b) at interior x; a, b >= 1 always holds here.
    return (a - 1.0) * math.log(x) + (b - 1.0) * math.log1p(-x) - special.betaln(a, b)


def _unit_crossings(a: float, b: float) -> list[float]:
    """Points in (0, 1) where the Beta(a, b) density crosses 1.

    For a, b >= 1 the log density is concave, so the region where the
    density exceeds 1 is a single interval and there are at most two
    crossings.  Splitting the quadrature at them keeps the integrand
    smooth on every subinterval.
    """
    if a + b <= 2.0:  # uniform density, never crosses
        return []
    lo, hi = 1e-12, 1.0 - 1e-12
    mode = min(max((a - 1.0) / (a + b - 2.0), lo), hi)
    if _log_beta_pdf(mode, a, b) <= 0.0:
        return []
    crossings = []
    for bracket in ((lo, mode), (mode, hi)):
        left, right = bracket
        if _log_beta_pdf(left, a, b) * _log_beta_pdf(right, a, b) < 0.0:
            root = optimize.brentq(
                _log_beta_pdf, left, right, args=(a, b), xtol=1e-15, rtol=8.9e-16
            )
            crossings.append(root)
    return crossings


def certainty(c: CollapsedOpinion) -> float:
    """Certainty factor of a collapsed opinion, in [0, 1].

    Half the integral deviation of the opinion's posterior Beta density
    from the uniform density:

        certainty = ½ ∫₀¹ | Beta_pdf(x; positive + 1, negative + 1) − 1 | dx

    The +1 shift makes zero evidence yield the uniform density and a
    certainty of exactly 0; abundant or lopsided evidence drives the
    value toward 1.  Evaluated by adaptive quadrature (absolute
    tolerance 1e-8), split at the points where the density crosses 1 so
    the absolute value introduces no interior kinks.
    """
    a = c.positive + 1.0
    b = c.negative + 1.0
    if a == 1.0 and b == 1.0:
        return 0.0

    def deviation(x: float) -> float:
        if x <= 0.0 or x >= 1.0:
            return 1.0  # density is 0 or finite at the endpoints for a, b >= 1
        return abs(math.exp(_log_beta_pdf(x, a, b)) - 1.0)

    points = _unit_crossings(a, b)
    # Nonnegative evidence gives shape parameters >= 1, so the density has
    # no endpoint singularities; the extra splits guard the a < 1 or b < 1
    # case should evidence validation ever be relaxed.
    if a < 1.0 or b < 1.0:
        points = sorted({1e-9, 1.0 - 1e-9, *points})
    value, _ = integrate.quad(
        deviation, 0.0, 1.0, epsabs=_QUAD_ABS_TOL, limit=200, points=points or None
    )
    return min(max(0.5 * value, 0.0), 1.0)


def expected_belief(op: Opinion) -> float:
    """Scalar trust value of an opinion, in [0, 1].

    The certain-evidence ratio r = positive / (positive + negative) is
    blended with the base rate a according to the certainty factor c of
    the collapsed opinion:

        E = r·c + a·(1 − c)

    With no certain evidence, c = 0 and the value falls back to the
    base rate; with abundant evidence, c → 1 and the value approaches r.
    """
    collapsed = collapse(op)
    certain_total = collapsed.total()
    if certain_total == 0.0:
        return op.base_rate
    c = certainty(collapsed)
    r = collapsed.positive / certain_total
    value = r * c + op.base_rate * (1.0 - c)
    return min(max(value, 0.0), 1.0)
