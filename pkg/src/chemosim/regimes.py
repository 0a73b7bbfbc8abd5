"""Model parameters, critical-exponent algebra and regime classification.

The two diffusion exponents (m1, m2) are classified against the curves

    L1:  m1 m2 + 2 m1 / d = m1 + m2        (m1 in (m_c, d/2), m2 in (1, m_c))
    L2:  m1 m2 + 2 m2 / d = m1 + m2        (m1 in (1, m_c), m2 in (m_c, d/2))

which intersect at the point I = (m_c, m_c) with m_c = 2 - 2/d. Above either
curve diffusion wins (subcritical), below both the attraction wins
(supercritical).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InvalidParameterError, OutOfRangeError


class RegimeTag(str, enum.Enum):
    SUBCRITICAL = "Subcritical"
    SUPERCRITICAL = "Supercritical"
    CRITICAL_L1 = "CriticalL1"
    CRITICAL_L2 = "CriticalL2"
    CRITICAL_I = "CriticalI"


@dataclass(frozen=True)
class ModelParams:
    """Problem definition: dimension d >= 3 and diffusion exponents m1, m2 > 1."""

    d: int
    m1: float
    m2: float

    def __post_init__(self):
        if not isinstance(self.d, int) or self.d < 3:
            raise InvalidParameterError(f"dimension must be an integer >= 3, got {self.d!r}")
        if not (self.m1 > 1.0 and self.m2 > 1.0):
            raise InvalidParameterError(
                f"diffusion exponents must exceed 1, got m1={self.m1}, m2={self.m2}"
            )

    @property
    def m_c(self) -> float:
        return critical_exponent(self.d)

    @property
    def beta(self) -> float:
        """Space exponent of the scaling family, (m1 + m2 - m1 m2)/2."""
        return (self.m1 + self.m2 - self.m1 * self.m2) / 2.0

    def swapped(self) -> "ModelParams":
        return ModelParams(self.d, self.m2, self.m1)


@dataclass(frozen=True)
class Regime:
    """Classification result with the two signed slacks.

    slack1 = m1 m2 + 2 m1/d - (m1 + m2), slack2 the same with m2 in the
    numerator; positive slack means the corresponding curve is exceeded
    (diffusion-dominated side).
    """

    tag: RegimeTag
    slack1: float
    slack2: float


def critical_exponent(d: int) -> float:
    """The balance exponent m_c = 2 - 2/d."""
    if not isinstance(d, int) or d < 3:
        raise InvalidParameterError(f"dimension must be an integer >= 3, got {d!r}")
    return 2.0 - 2.0 / d


def regime_slacks(params: ModelParams) -> tuple[float, float]:
    m1, m2, d = params.m1, params.m2, params.d
    return (
        m1 * m2 + 2.0 * m1 / d - (m1 + m2),
        m1 * m2 + 2.0 * m2 / d - (m1 + m2),
    )


def classify(params: ModelParams, tol: float = 1e-12) -> Regime:
    """Classify (m1, m2) against L1, L2 and the crossing point.

    A slack within `tol` of zero counts as lying on the curve. Points meant
    to sit exactly on L1/L2 should be constructed with `l1_partner` so the
    slack vanishes to round-off rather than relying on a loose tolerance.
    """
    if tol <= 0:
        raise InvalidParameterError("classification tolerance must be positive")
    s1, s2 = regime_slacks(params)
    on1, on2 = abs(s1) <= tol, abs(s2) <= tol
    if on1 and on2:
        tag = RegimeTag.CRITICAL_I
    elif on1:
        tag = RegimeTag.CRITICAL_L1
    elif on2:
        tag = RegimeTag.CRITICAL_L2
    elif s1 > 0 or s2 > 0:
        tag = RegimeTag.SUBCRITICAL
    else:
        tag = RegimeTag.SUPERCRITICAL
    return Regime(tag=tag, slack1=s1, slack2=s2)


def l1_partner(m1: float, d: int) -> float:
    """The m2 that puts (m1, m2) exactly on L1: m2 = m1 (1 - 2/d)/(m1 - 1).

    Defined for m1 in (m_c, d/2); the partner then lies in (1, m_c). Points
    on L2 are obtained by swapping the pair.
    """
    m_c = critical_exponent(d)
    if not (m_c < m1 < d / 2.0):
        raise OutOfRangeError(
            f"no admissible partner on L1: need m1 in ({m_c:.6g}, {d / 2:.6g}), got {m1}"
        )
    return m1 * (1.0 - 2.0 / d) / (m1 - 1.0)


@dataclass(frozen=True)
class ScalingExponents:
    """Exponent bookkeeping of the family u -> lam^{m2} u(lam^beta x, lam^{m1} t).

    `mass_exponent_u` is m2 - beta d (and symmetrically for w); the induced
    mass factors are lam to those exponents.
    """

    lam: float
    space: float
    amplitude_u: float
    amplitude_w: float
    time_u: float
    time_w: float
    mass_exponent_u: float
    mass_exponent_w: float

    @property
    def mass_factor_u(self) -> float:
        return self.lam ** self.mass_exponent_u

    @property
    def mass_factor_w(self) -> float:
        return self.lam ** self.mass_exponent_w


def scaling_map(params: ModelParams, lam: float) -> ScalingExponents:
    """Exponents and mass factors of the scaling family at scale lam > 0."""
    if lam <= 0.0:
        raise InvalidParameterError(f"scale factor must be positive, got {lam}")
    beta = params.beta
    d = params.d
    return ScalingExponents(
        lam=lam,
        space=beta,
        amplitude_u=params.m2,
        amplitude_w=params.m1,
        time_u=params.m1,
        time_w=params.m2,
        mass_exponent_u=params.m2 - beta * d,
        mass_exponent_w=params.m1 - beta * d,
    )
