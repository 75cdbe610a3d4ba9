"""Physical link model: Rayleigh block-fading statistics, per-block power
accounting, and the estimation quality delivered by the pilot phase.

A coherence block spans ``m`` symbols. The first two carry one pilot each
(source, then relay); the remaining ``m - 2`` symbols are split into two
equal halves for the source and relay data phases, so each data vector has
``(m - 2) / 2`` entries. Every node always spends its full energy budget:
pilot energy ``delta * m * P`` plus expected data energy equals ``m * P``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Scheme(enum.Enum):
    """Relaying strategy used in the data phase."""

    AF = "af"
    DF_REPETITION = "df-rep"
    DF_PARALLEL = "df-par"


@dataclass(frozen=True)
class ChannelStats:
    """Fading standard deviations of the three links and the noise level.

    ``sigma_xy`` is the standard deviation of the zero-mean complex Gaussian
    coefficient of link x->y; ``n0`` is the receiver noise variance.
    """

    sigma_sd: float
    sigma_sr: float
    sigma_rd: float
    n0: float

    def __post_init__(self) -> None:
        for name in ("sigma_sd", "sigma_sr", "sigma_rd", "n0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class SystemConfig:
    """Block length, per-node power budgets, training fractions and scheme.

    ``m`` must be even and at least 6 so the data phase is a nonempty pair of
    equal halves. ``delta_s``/``delta_r`` may be 0 or 1; those degenerate
    splits simply drive the achievable rate to zero.
    """

    m: int
    p_s: float
    p_r: float
    delta_s: float
    delta_r: float
    scheme: Scheme

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or isinstance(self.m, bool):
            raise ValueError(f"m must be an integer, got {self.m!r}")
        if self.m < 6 or self.m % 2 != 0:
            raise ValueError(f"m must be even and >= 6, got {self.m}")
        for name in ("p_s", "p_r"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0.0):
                raise ValueError(f"{name} must be nonnegative and finite, got {value}")
        for name in ("delta_s", "delta_r"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not isinstance(self.scheme, Scheme):
            raise ValueError(f"scheme must be a Scheme member, got {self.scheme!r}")

    @property
    def data_symbols(self) -> int:
        """Length of each node's data vector, (m - 2) / 2."""
        return (self.m - 2) // 2


@dataclass(frozen=True)
class EstimationQuality:
    """Variance split of a fading coefficient after pilot-based MMSE estimation.

    ``var_estimate`` is the variance of the estimate, ``var_error`` the
    variance of the residual error; for the closed forms the two add up to
    the prior variance sigma^2 (orthogonal decomposition).
    """

    var_estimate: float
    var_error: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.var_estimate) and self.var_estimate >= 0.0):
            raise ValueError(f"var_estimate must be nonnegative, got {self.var_estimate}")
        if not (math.isfinite(self.var_error) and self.var_error >= 0.0):
            raise ValueError(f"var_error must be nonnegative, got {self.var_error}")


def mmse_quality(sigma: float, delta: float, m: int, p: float, n0: float) -> EstimationQuality:
    """Estimate/error variance split for a pilot of energy ``delta * m * p``.

    The receiver observes ``y = h * sqrt(delta*m*p) + n`` and forms the MMSE
    estimate of ``h ~ CN(0, sigma^2)``. Error variance is
    ``sigma^2 * n0 / (sigma^2 * delta*m*p + n0)``; estimate variance is the
    complement ``sigma^4 * delta*m*p / (sigma^2 * delta*m*p + n0)``.

    ``sigma = 0`` is accepted (deterministic zero channel, both variances 0);
    ``delta = 0`` means no pilot, so the estimate is the prior mean.
    """
    if not (math.isfinite(sigma) and sigma >= 0.0):
        raise ValueError(f"sigma must be nonnegative and finite, got {sigma}")
    if not (math.isfinite(n0) and n0 > 0.0):
        raise ValueError(f"n0 must be positive and finite, got {n0}")
    if not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if not (math.isfinite(p) and p >= 0.0):
        raise ValueError(f"p must be nonnegative and finite, got {p}")
    if m < 6:
        raise ValueError(f"m must be >= 6, got {m}")

    s2 = sigma * sigma
    pilot_energy = delta * m * p
    denom = s2 * pilot_energy + n0
    var_error = s2 * n0 / denom
    var_estimate = s2 * s2 * pilot_energy / denom
    return EstimationQuality(var_estimate=var_estimate, var_error=var_error)


def data_symbol_energy(delta: float, m: int, p: float) -> float:
    """Per-symbol energy of the (m-2)/2-dimensional data vector.

    Spending ``delta`` of the block budget on the pilot leaves
    ``(1 - delta) * m * p`` for the data half-block, i.e.
    ``2 * (1 - delta) * m * p / (m - 2)`` per symbol.
    """
    if not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if not (math.isfinite(p) and p >= 0.0):
        raise ValueError(f"p must be nonnegative and finite, got {p}")
    # m = 4 is tolerated here (single data symbol per half); SystemConfig is
    # stricter and requires m >= 6.
    if m < 4 or m % 2 != 0:
        raise ValueError(f"m must be even and >= 4, got {m}")
    return 2.0 * (1.0 - delta) * m * p / (m - 2.0)
