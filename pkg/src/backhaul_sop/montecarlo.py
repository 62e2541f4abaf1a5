"""Direct channel simulation of the secrecy outage event.

Every trial ``i`` owns a fixed block of Philox counter space, so its random
draws depend only on ``(seed, i)``.  Any partition of the trial range into
batches or workers therefore yields the same outage count.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numpy.random import Philox

from .model import SystemParams
from .power import PowerAllocation

DEFAULT_SEED = 0x5EC0
DEFAULT_TRIALS = 1_000_000
DEFAULT_BATCH = 1 << 16

_Z95 = 1.959963984540054
_WORDS_PER_BLOCK = 4
_STREAM_SOP = 0
_STREAM_PRIMARY = 1


@dataclass(frozen=True)
class McConfig:
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    batch_size: int | None = None

    def __post_init__(self):
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.batch_size is None:
            object.__setattr__(self, "batch_size", min(self.trials, DEFAULT_BATCH))
        if not isinstance(self.batch_size, int) or not 1 <= self.batch_size <= self.trials:
            raise ValueError(f"batch_size must lie in [1, trials], got {self.batch_size!r}")


@dataclass(frozen=True)
class McEstimate:
    sop_hat: float
    std_err: float
    ci95: tuple[float, float]
    trials: int
    seed: int
    outages: int


class TrialDraws(NamedTuple):
    """Channel power gains and backhaul state of one trial (or a batch of them).

    ``sd_gains`` has the ``K`` S-D gains along its last axis.
    """

    sd_gains: np.ndarray
    backhaul_ok: np.ndarray
    td_gain: np.ndarray
    se_gain: np.ndarray
    te_gain: np.ndarray


def _uniforms(seed: int, stream: int, width: int, start: int, count: int) -> np.ndarray:
    """``count x width`` uniforms on (0, 1] for trials ``start .. start+count-1``."""
    blocks = -(-width // _WORDS_PER_BLOCK)
    gen = Philox(key=seed | (stream << 64), counter=start * blocks)
    raw = gen.random_raw(count * blocks * _WORDS_PER_BLOCK).reshape(count, blocks * _WORDS_PER_BLOCK)
    # 53 high bits, shifted by one ulp so that 0 is excluded and 1 included
    return ((raw[:, :width] >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53


def _exponential(u, rate):
    return -np.log(u) / rate


def draw_trials(params: SystemParams, seed: int, start: int, count: int) -> TrialDraws:
    K = params.secondary.K
    ch = params.channels
    u = _uniforms(seed, _STREAM_SOP, K + 4, start, count)
    return TrialDraws(
        sd_gains=_exponential(u[:, :K], ch.lambda_sd),
        backhaul_ok=u[:, K] <= params.secondary.reliability,
        td_gain=_exponential(u[:, K + 1], ch.lambda_td),
        se_gain=_exponential(u[:, K + 2], ch.lambda_se),
        te_gain=_exponential(u[:, K + 3], ch.lambda_te),
    )


def destination_eavesdropper_sinr(params: SystemParams, alloc: PowerAllocation, draws: TrialDraws):
    """SINRs at D (best transmitter, gated by its backhaul) and at E."""
    gamma_T = params.primary.gamma_T
    gamma_S = alloc.gamma_S
    best = np.max(draws.sd_gains, axis=-1)
    gamma_sd = np.where(draws.backhaul_ok, gamma_S * best / (gamma_T * draws.td_gain + 1.0), 0.0)
    gamma_se = gamma_S * draws.se_gain / (gamma_T * draws.te_gain + 1.0)
    return gamma_sd, gamma_se


def simulate_batch(params: SystemParams, alloc: PowerAllocation, draws: TrialDraws) -> np.ndarray:
    """Boolean outage indicator per trial."""
    if not alloc.gamma_S > 0:
        return np.ones(np.shape(draws.td_gain), dtype=bool)
    gamma_sd, gamma_se = destination_eavesdropper_sinr(params, alloc, draws)
    # C_S < R_th  <=>  1 + Gamma_SD < 2**R_th (1 + Gamma_SE)
    return np.log1p(gamma_sd) - np.log1p(gamma_se) < params.secondary.r_th * math.log(2.0)


def simulate_trial(params: SystemParams, alloc: PowerAllocation, sd_gains: Sequence[float],
                   backhaul_ok: bool, td_gain: float, se_gain: float, te_gain: float) -> int:
    """Outage indicator (1 or 0) of a single trial, written out step by step."""
    if not alloc.gamma_S > 0:
        return 1
    gamma_T = params.primary.gamma_T
    gamma_S = alloc.gamma_S
    selected = select_transmitter(sd_gains)
    gamma_sd = gamma_S * sd_gains[selected] / (gamma_T * td_gain + 1.0) if backhaul_ok else 0.0
    gamma_se = gamma_S * se_gain / (gamma_T * te_gain + 1.0)
    secrecy = max(math.log2(1.0 + gamma_sd) - math.log2(1.0 + gamma_se), 0.0)
    return int(secrecy < params.secondary.r_th)


def select_transmitter(sd_gains: Sequence[float]) -> int:
    """Index of the strongest S-D link; ties go to the lowest index."""
    best = 0
    for k in range(1, len(sd_gains)):
        if sd_gains[k] > sd_gains[best]:
            best = k
    return best


def _count_outages(params, alloc, seed, start, count):
    return int(np.count_nonzero(simulate_batch(params, alloc, draw_trials(params, seed, start, count))))


def estimate_sop(params: SystemParams, alloc: PowerAllocation, cfg: McConfig | None = None,
                 workers: int = 1) -> McEstimate:
    """Empirical outage frequency over ``cfg.trials`` independent trials.

    The result depends only on ``(seed, trials)``; ``batch_size`` and
    ``workers`` change memory use and wall time, not the estimate.
    """
    cfg = cfg or McConfig()
    n = cfg.trials
    if not alloc.gamma_S > 0:
        outages = n
    else:
        starts = range(0, n, cfg.batch_size)
        sizes = [min(cfg.batch_size, n - s) for s in starts]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                counts = pool.map(lambda job: _count_outages(params, alloc, cfg.seed, *job), zip(starts, sizes))
                outages = sum(counts)
        else:
            outages = sum(_count_outages(params, alloc, cfg.seed, s, c) for s, c in zip(starts, sizes))
    return summarize(outages, n, cfg.seed)


def summarize(outages: int, trials: int, seed: int) -> McEstimate:
    p = outages / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    if outages < 10:
        warnings.warn(
            f"only {outages} outages in {trials} trials; the normal-approximation CI is unreliable",
            stacklevel=2,
        )
    ci = (max(0.0, p - _Z95 * se), min(1.0, p + _Z95 * se))
    return McEstimate(sop_hat=p, std_err=se, ci95=ci, trials=trials, seed=seed, outages=outages)


def sample_sinrs(params: SystemParams, alloc: PowerAllocation, n: int, seed: int = DEFAULT_SEED,
                 start: int = 0):
    """``n`` samples of ``(Gamma_SD, Gamma_SE)`` from the same draws the estimator uses."""
    return destination_eavesdropper_sinr(params, alloc, draw_trials(params, seed, start, n))


def sample_gamma_r(params: SystemParams, alloc: PowerAllocation, n: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Primary receiver SINR samples with the allocated secondary interference."""
    ch = params.channels
    u = _uniforms(seed, _STREAM_PRIMARY, 2, 0, n)
    tr = _exponential(u[:, 0], ch.lambda_tr)
    sr = _exponential(u[:, 1], ch.lambda_sr)
    return params.primary.gamma_T * tr / (alloc.gamma_S * sr + 1.0)


def ks_distance(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between ``samples`` and a CDF on ``[0, inf)``.

    Samples equal to zero are treated as an atom: the CDF's value at 0 is
    compared with the fraction of zeros, and ``F(0-) = 0``.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    zeros = int(np.searchsorted(x, 0.0, side="right"))
    dist = abs(zeros / n - float(cdf(0.0))) if zeros else 0.0
    pos = x[zeros:]
    if pos.size:
        f = np.asarray(cdf(pos), dtype=float)
        j = np.arange(zeros + 1, n + 1)
        dist = max(dist, float(np.max(j / n - f)), float(np.max(f - (j - 1) / n)))
    return dist
