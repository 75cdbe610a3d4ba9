"""Worst-case achievable rates of the pilot-trained relay link.

All three schemes reduce to expectations of ``log(1 + ...)`` over the squared
magnitudes of normalized fading estimates, which are independent
exponential(1) variables. The expectation engine is deterministic: Monte
Carlo draws come from counter-based Philox streams keyed by (seed, role), so
identical seeds give identical draws for every scheme and every power split
(common random numbers), independent of any parallelism in the caller.
Gauss-Laguerre quadrature (whose weight is exactly the exponential density)
is available for 1-D and 2-D expectations as a high-accuracy alternative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

import numpy as np

from .channel import ChannelStats, Scheme, SystemConfig

# Stream tags for the three normalized fading magnitudes. Sharing a tag across
# schemes is what makes rate comparisons use common random numbers.
W_SD = 0
W_SR = 1
W_RD = 2

# Keys used in RateEstimate.parts for the two decode-and-forward constraints.
RELAY_DECODING = "relay_decoding"
COMBINING = "combining"


class Method(enum.Enum):
    """How a reported value was computed."""

    MONTE_CARLO = "mc"
    GAUSS_LAGUERRE = "gl"
    CLOSED_FORM = "closed"


@dataclass(frozen=True)
class ExpectationSpec:
    """Controls the expectation engine.

    ``dims`` is the number of independent exponential(1) variables the
    integrand takes. Quadrature is restricted to dims <= 2; the 3-D case
    (amplify-and-forward) is Monte Carlo only and is cross-checked against
    the matrix-form oracle instead of a tensor quadrature.
    """

    dims: int
    samples: int = 100_000
    seed: int = 0
    method: Method = Method.MONTE_CARLO
    nodes: int = 64

    def __post_init__(self) -> None:
        if self.dims not in (1, 2, 3):
            raise ValueError(f"dims must be 1, 2 or 3, got {self.dims}")
        if self.samples < 1:
            raise ValueError(f"samples must be positive, got {self.samples}")
        if not (0 <= self.seed < 2**64):
            raise ValueError(f"seed must fit in an unsigned 64-bit integer, got {self.seed}")
        if self.method is Method.GAUSS_LAGUERRE and self.dims > 2:
            raise ValueError("Gauss-Laguerre quadrature supports dims <= 2 only")
        if self.method is Method.CLOSED_FORM:
            raise ValueError("CLOSED_FORM tags results; it is not an expectation method")
        if self.nodes < 8:
            raise ValueError(f"nodes must be >= 8, got {self.nodes}")


@dataclass(frozen=True)
class RateEstimate:
    """A rate value in nats per channel use, with sampling metadata.

    ``parts`` carries the sub-rates of min-type expressions (the two
    decode-and-forward constraints) so callers can see which one binds.
    """

    value: float
    std_error: float
    samples: int
    method: Method
    parts: Mapping[str, "RateEstimate"] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"rate value must be nonnegative and finite, got {self.value}")
        if not (math.isfinite(self.std_error) and self.std_error >= 0.0):
            raise ValueError(f"std_error must be nonnegative, got {self.std_error}")
        if self.method is not Method.MONTE_CARLO and self.std_error != 0.0:
            raise ValueError("deterministic methods must report std_error = 0")

    @property
    def binding(self) -> str | None:
        """Name of the smallest sub-rate, or None when there are no parts."""
        if not self.parts:
            return None
        return min(self.parts, key=lambda k: self.parts[k].value)


def stream(seed: int, tag: int) -> np.random.Generator:
    """Counter-based generator for one (seed, role) pair."""
    key = np.array([seed, tag], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def exp_draws(seed: int, tag: int, n: int) -> np.ndarray:
    """n draws of |w|^2 for w ~ CN(0, 1), i.e. exponential(1).

    Inversion sampling consumes exactly one uniform per draw, so sample i of
    a given (seed, tag) stream is the same value in every context.
    """
    return stream(seed, tag).standard_exponential(n, method="inv")


@lru_cache(maxsize=8)
def _laguerre_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.laguerre.laggauss(nodes)
    return x, w


def expect_over_exponentials(
    integrand: Callable[..., np.ndarray],
    spec: ExpectationSpec,
    *,
    tags: tuple[int, ...] | None = None,
) -> tuple[float, float]:
    """Mean and standard error of ``integrand`` over exponential(1) inputs.

    The integrand receives ``spec.dims`` arrays and must evaluate
    elementwise. ``tags`` picks the Monte Carlo stream for each argument
    (defaults to 0..dims-1); quadrature ignores it.
    """
    if tags is not None and len(tags) != spec.dims:
        raise ValueError(f"expected {spec.dims} stream tags, got {len(tags)}")

    if spec.method is Method.MONTE_CARLO:
        if tags is None:
            tags = tuple(range(spec.dims))
        xs = [exp_draws(spec.seed, tag, spec.samples) for tag in tags]
        values = np.asarray(integrand(*xs), dtype=float)
        if values.shape != (spec.samples,):
            raise ValueError("integrand must map (n,) arrays to an (n,) array")
        mean = float(values.mean())
        if spec.samples > 1:
            std_error = float(values.std(ddof=1) / math.sqrt(spec.samples))
        else:
            std_error = 0.0
        return mean, std_error

    x, w = _laguerre_rule(spec.nodes)
    if spec.dims == 1:
        mean = float(np.sum(w * np.asarray(integrand(x), dtype=float)))
    else:
        xi = x[:, None]
        xj = x[None, :]
        values = np.asarray(integrand(np.broadcast_to(xi, (spec.nodes,) * 2),
                                      np.broadcast_to(xj, (spec.nodes,) * 2)), dtype=float)
        mean = float(w @ values @ w)
    return mean, 0.0


def snr_gain_g(a: float, b: float, c: float, n0: float, m: int, w_sq) -> np.ndarray | float:
    """Effective post-training SNR of one link, as a multiple of |w|^2.

    ``a`` is the training fraction, ``b`` the node power, ``c`` the fading
    standard deviation. Equals the per-symbol data energy times the estimate
    variance, divided by (data energy times error variance plus noise):

        2 a (1-a) m^2 b^2 c^4 |w|^2
        ---------------------------------------------
        2 (1-a) m b c^2 n0 + (m-2) (c^2 a m b + n0) n0
    """
    if not (0.0 <= a <= 1.0):
        raise ValueError(f"training fraction must lie in [0, 1], got {a}")
    if not (math.isfinite(b) and b >= 0.0):
        raise ValueError(f"power must be nonnegative and finite, got {b}")
    if not (math.isfinite(c) and c >= 0.0):
        raise ValueError(f"fading std must be nonnegative and finite, got {c}")
    if not (math.isfinite(n0) and n0 > 0.0):
        raise ValueError(f"n0 must be positive and finite, got {n0}")
    if m < 6:
        raise ValueError(f"m must be >= 6, got {m}")
    w_sq = np.asarray(w_sq, dtype=float)
    if np.any(w_sq < 0.0):
        raise ValueError("w_sq must be nonnegative")

    c2 = c * c
    num = 2.0 * a * (1.0 - a) * m * m * b * b * c2 * c2
    den = 2.0 * (1.0 - a) * m * b * c2 * n0 + (m - 2.0) * (c2 * a * m * b + n0) * n0
    out = (num / den) * w_sq
    return float(out) if out.ndim == 0 else out


def f_combiner(x, y):
    """End-to-end SNR of a two-hop amplified link: x*y / (1 + x + y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0.0) or np.any(y < 0.0):
        raise ValueError("f_combiner arguments must be nonnegative")
    out = x * y / (1.0 + x + y)
    return float(out) if out.ndim == 0 else out


def _prefactor(m: int) -> float:
    # two pilot symbols plus half-duplex halving
    return (m - 2.0) / (2.0 * m)


def _check_bounds(value: float, log_values: np.ndarray, prefactor: float) -> None:
    # Sanity bound per evaluation: the mean of log(1+g) cannot exceed its
    # largest sampled value, and everything must be finite.
    peak = float(np.max(log_values))
    if not (np.isfinite(peak) and 0.0 <= value <= prefactor * peak + 1e-12):
        raise ArithmeticError(
            f"rate {value} violates the [0, {prefactor * peak}] sanity bound"
        )


def _rate_from_logs(log_values: np.ndarray, m: int, spec: ExpectationSpec,
                    weights: np.ndarray | None = None) -> RateEstimate:
    pref = _prefactor(m)
    if weights is None:
        mean = float(log_values.mean())
        se = float(log_values.std(ddof=1) / math.sqrt(log_values.size)) if log_values.size > 1 else 0.0
        est = RateEstimate(pref * mean, pref * se, spec.samples, Method.MONTE_CARLO)
    else:
        mean = float(np.sum(weights * log_values))
        est = RateEstimate(pref * mean, 0.0, 0, Method.GAUSS_LAGUERRE)
    _check_bounds(est.value, log_values, pref)
    return est


def _gains(cfg: SystemConfig, stats: ChannelStats, gain_scale: float):
    """Per-link closed-form g evaluated at |w|^2 = 1 (coefficients)."""
    g_sd = snr_gain_g(cfg.delta_s, cfg.p_s, stats.sigma_sd, stats.n0, cfg.m, 1.0)
    g_sr = snr_gain_g(cfg.delta_s, cfg.p_s, stats.sigma_sr, stats.n0, cfg.m, 1.0)
    g_rd = snr_gain_g(cfg.delta_r, cfg.p_r, stats.sigma_rd, stats.n0, cfg.m, 1.0)
    return g_sd * gain_scale, g_sr * gain_scale, g_rd * gain_scale


def _require(cfg: SystemConfig, spec: ExpectationSpec, scheme: Scheme) -> None:
    if cfg.scheme is not scheme:
        raise ValueError(f"config scheme is {cfg.scheme}, expected {scheme}")
    if spec.method is Method.MONTE_CARLO and spec.dims != 3:
        raise ValueError("rate evaluation integrates over three fading magnitudes; use dims=3")


def af_rate(cfg: SystemConfig, stats: ChannelStats, spec: ExpectationSpec,
            *, gain_scale: float = 1.0) -> RateEstimate:
    """Worst-case amplify-and-forward rate.

    (m-2)/(2m) * E[ log(1 + g_sd + f(g_sr, g_rd)) ] over independent
    exponential draws of the three |w|^2 variables. Monte Carlo only; the
    3-D expectation has no quadrature route here (the matrix-form oracle is
    the cross-check). ``gain_scale`` multiplies every g and exists purely as
    a fault-injection hook for the verification harness.
    """
    _require(cfg, spec, Scheme.AF)
    if spec.method is not Method.MONTE_CARLO:
        raise ValueError("af_rate requires Monte Carlo (3-D expectation)")
    c_sd, c_sr, c_rd = _gains(cfg, stats, gain_scale)
    g_sd = c_sd * exp_draws(spec.seed, W_SD, spec.samples)
    g_sr = c_sr * exp_draws(spec.seed, W_SR, spec.samples)
    g_rd = c_rd * exp_draws(spec.seed, W_RD, spec.samples)
    logs = np.log1p(g_sd + f_combiner(g_sr, g_rd))
    return _rate_from_logs(logs, cfg.m, spec)


def _relay_decoding_rate(cfg, stats, spec, gain_scale) -> RateEstimate:
    """Source-to-relay decoding constraint, a 1-D expectation."""
    _, c_sr, _ = _gains(cfg, stats, gain_scale)
    if spec.method is Method.MONTE_CARLO:
        logs = np.log1p(c_sr * exp_draws(spec.seed, W_SR, spec.samples))
        return _rate_from_logs(logs, cfg.m, spec)
    x, w = _laguerre_rule(spec.nodes)
    return _rate_from_logs(np.log1p(c_sr * x), cfg.m, spec, weights=w)


def df_repetition_rate(cfg: SystemConfig, stats: ChannelStats, spec: ExpectationSpec,
                       *, gain_scale: float = 1.0) -> RateEstimate:
    """Decode-and-forward rate when the relay repeats the source codeword.

    min of the relay-decoding rate and the destination rate
    (m-2)/(2m) * E[ log(1 + g_sd + g_rd) ]; both appear in ``parts``.
    """
    _require(cfg, spec, Scheme.DF_REPETITION)
    if spec.method is Method.GAUSS_LAGUERRE and spec.dims != 2:
        raise ValueError("quadrature DF evaluation is 2-D; use dims=2")
    c_sd, _, c_rd = _gains(cfg, stats, gain_scale)
    i_relay = _relay_decoding_rate(cfg, stats, spec, gain_scale)
    if spec.method is Method.MONTE_CARLO:
        g_sd = c_sd * exp_draws(spec.seed, W_SD, spec.samples)
        g_rd = c_rd * exp_draws(spec.seed, W_RD, spec.samples)
        i_combine = _rate_from_logs(np.log1p(g_sd + g_rd), cfg.m, spec)
    else:
        x, w = _laguerre_rule(spec.nodes)
        logs = np.log1p(c_sd * x[:, None] + c_rd * x[None, :])
        i_combine = _rate_from_logs(logs, cfg.m, spec, weights=np.outer(w, w))
    return _min_rate(i_relay, i_combine, spec)


def df_parallel_rate(cfg: SystemConfig, stats: ChannelStats, spec: ExpectationSpec,
                     *, gain_scale: float = 1.0) -> RateEstimate:
    """Decode-and-forward rate with an independent relay codeword.

    The destination constraint becomes
    (m-2)/(2m) * E[ log(1 + g_sd) + log(1 + g_rd) ], which factors into two
    1-D expectations. Dominates the repetition scheme sample by sample,
    since (1 + x)(1 + y) >= 1 + x + y.
    """
    _require(cfg, spec, Scheme.DF_PARALLEL)
    if spec.method is Method.GAUSS_LAGUERRE and spec.dims != 2:
        raise ValueError("quadrature DF evaluation is 2-D; use dims=2")
    c_sd, _, c_rd = _gains(cfg, stats, gain_scale)
    i_relay = _relay_decoding_rate(cfg, stats, spec, gain_scale)
    if spec.method is Method.MONTE_CARLO:
        g_sd = c_sd * exp_draws(spec.seed, W_SD, spec.samples)
        g_rd = c_rd * exp_draws(spec.seed, W_RD, spec.samples)
        logs = np.log1p(g_sd) + np.log1p(g_rd)
        i_combine = _rate_from_logs(logs, cfg.m, spec)
    else:
        x, w = _laguerre_rule(spec.nodes)
        mean = float(np.sum(w * np.log1p(c_sd * x)) + np.sum(w * np.log1p(c_rd * x)))
        i_combine = RateEstimate(_prefactor(cfg.m) * mean, 0.0, 0, Method.GAUSS_LAGUERRE)
    return _min_rate(i_relay, i_combine, spec)


def _min_rate(i_relay: RateEstimate, i_combine: RateEstimate,
              spec: ExpectationSpec) -> RateEstimate:
    parts = {RELAY_DECODING: i_relay, COMBINING: i_combine}
    bound = min(parts.values(), key=lambda r: r.value)
    return RateEstimate(
        value=bound.value,
        std_error=bound.std_error,
        samples=bound.samples,
        method=bound.method,
        parts=parts,
    )
