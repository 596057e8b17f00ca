"""Evaluation metrics and small-sample statistics.

Self-contained on purpose: the t-distribution CDF is computed from the
regularized incomplete beta function via Lentz's continued fraction, so the
statistical claims in reports do not depend on an external stats stack.
"""

from __future__ import annotations

import math
import sys
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import ComputationError, InputError

_MAX_CF_ITER = 300
_CF_TOL = 1e-10
_TINY = 1e-300


@dataclass(frozen=True)
class SummaryStats:
    """Per-group summary sufficient for a two-sample location test."""
    n: int
    mean: float
    std: float  # sample standard deviation (n-1 denominator)

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f"group size must be >= 2 for a t-test, got {self.n}")
        if self.std < 0 or not math.isfinite(self.std):
            raise InputError(f"std must be finite and >= 0, got {self.std}")
        if not math.isfinite(self.mean):
            raise InputError(f"mean must be finite, got {self.mean}")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "SummaryStats":
        n = len(values)
        if n < 2:
            raise InputError(f"need at least 2 values, got {n}")
        mean = sum(values) / n
        var = sum((v - mean) ** 2 for v in values) / (n - 1)
        return cls(n=n, mean=mean, std=math.sqrt(var))


@dataclass(frozen=True)
class TestResult:
    t_statistic: float
    df: float
    p_two_sided: float


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (Lentz's method)."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_CF_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ComputationError("incomplete beta continued fraction failed to converge")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise InputError(f"beta parameters must be positive, got a={a}, b={b}")
    if x < 0 or x > 1:
        raise InputError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log(1.0 - x))
    front = math.exp(ln_front)
    # Branch keeps the continued fraction in its fast-converging region.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_sf(t: float, df: float) -> float:
    """P(T >= t) for Student's t with df degrees of freedom."""
    if df <= 0:
        raise InputError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def student_t_cdf(t: float, df: float) -> float:
    return 1.0 - student_t_sf(t, df)


def welch_t_test(a: SummaryStats, b: SummaryStats) -> TestResult:
    """Two-sided Welch's t-test of mean_b - mean_a from summary statistics."""
    va = a.std ** 2 / a.n
    vb = b.std ** 2 / b.n
    diff = b.mean - a.mean
    if va + vb == 0.0:
        # Both groups constant. Equal means carry no evidence; unequal means
        # are detected with certainty, reported as the smallest positive p so
        # the result stays inside (0, 1].
        if diff == 0.0:
            return TestResult(t_statistic=0.0, df=float(a.n + b.n - 2), p_two_sided=1.0)
        return TestResult(t_statistic=math.copysign(math.inf, diff),
                          df=float(a.n + b.n - 2), p_two_sided=sys.float_info.min)
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va ** 2 / (a.n - 1) + vb ** 2 / (b.n - 1))
    p = min(1.0, 2.0 * student_t_sf(abs(t), df))
    if p <= 0.0:
        p = sys.float_info.min
    return TestResult(t_statistic=t, df=df, p_two_sided=p)


def sign_aggregate(deltas: Sequence[tuple[float, float]]) -> tuple[int, int, int]:
    """Per-seed (value_a, value_b) pairs -> (wins_a, wins_b, ties)."""
    if not deltas:
        raise InputError("sign_aggregate needs at least one pair")
    wins_a = sum(1 for a, b in deltas if a > b)
    wins_b = sum(1 for a, b in deltas if b > a)
    return wins_a, wins_b, len(deltas) - wins_a - wins_b


# -- sequence metrics ---------------------------------------------------------

def _bleu_tokens(seq) -> list:
    if hasattr(seq, "tokens"):
        return list(seq.tokens)
    if isinstance(seq, str):
        return seq.split()
    return list(seq)


def _char_tokens(seq) -> list:
    if hasattr(seq, "tokens"):
        return list(seq.tokens)
    return list(seq)


def char_accuracy(hypothesis, reference) -> float:
    """Positionwise matches divided by max(len_h, len_r)."""
    hyp = _char_tokens(hypothesis)
    ref = _char_tokens(reference)
    denom = max(len(hyp), len(ref))
    if denom == 0:
        return 1.0
    hits = sum(1 for h, r in zip(hyp, ref) if h == r)
    return hits / denom


def corpus_char_accuracy(hypotheses: Sequence, references: Sequence) -> float:
    """Micro-average: total positionwise matches / total max-length positions."""
    if len(hypotheses) != len(references):
        raise InputError(f"got {len(hypotheses)} hypotheses but {len(references)} references")
    if not references:
        raise InputError("empty corpus")
    hits = 0
    total = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = _char_tokens(hyp)
        ref = _char_tokens(ref)
        hits += sum(1 for h, r in zip(hyp, ref) if h == r)
        total += max(len(hyp), len(ref))
    return hits / total if total else 1.0


def _ngram_counts(tokens: Sequence, order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def corpus_bleu(hypotheses: Sequence, references: Sequence, max_n: int = 4) -> float:
    """Corpus BLEU on the 0-100 scale.

    Geometric mean of corpus-level modified n-gram precisions for orders
    1..max_n, add-one smoothing on the order >= 2 totals, brevity penalty
    min(1, e^(1 - r/c)). Plain strings are treated as whitespace-token lines.
    """
    if len(hypotheses) != len(references):
        raise InputError(f"got {len(hypotheses)} hypotheses but {len(references)} references")
    if not references:
        raise InputError("empty corpus")
    if max_n < 1:
        raise InputError(f"max_n must be >= 1, got {max_n}")
    matches = [0] * max_n
    possible = [0] * max_n
    ref_len = 0
    hyp_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = _bleu_tokens(hyp)
        ref = _bleu_tokens(ref)
        ref_len += len(ref)
        hyp_len += len(hyp)
        for k in range(1, max_n + 1):
            hyp_counts = _ngram_counts(hyp, k)
            if not hyp_counts:
                continue
            ref_counts = _ngram_counts(ref, k)
            possible[k - 1] += sum(hyp_counts.values())
            matches[k - 1] += sum(min(c, ref_counts.get(g, 0))
                                  for g, c in hyp_counts.items())
    if hyp_len == 0:
        return 0.0
    log_precisions = []
    for k in range(max_n):
        m, q = matches[k], possible[k]
        if k > 0:
            m, q = m + 1, q + 1
        if q == 0 or m == 0:
            return 0.0
        log_precisions.append(math.log(m / q))
    geo = math.exp(sum(log_precisions) / max_n)
    bp = min(1.0, math.exp(1.0 - ref_len / hyp_len))
    return 100.0 * bp * geo
