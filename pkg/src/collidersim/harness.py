"""End-to-end demonstrations: digit estimation and advice languages.

Two ways of pulling computational content out of collision timing.

The fixed-precision estimator reads digits of a parameter s embedded as
mu = 1/2 - eps/2 + s*eps with a manufacturing tolerance eps it cannot
shrink.  One budget choice makes the three outcome frequencies of a
repeated z = 1/2 query depend on s so that the statistic
X = 2*(lesser count) + (timeout count) has mean exactly (s + 1/2) per
trial regardless of the timeout window, and bounded variance; Chebyshev
then prices k digits at a trial count and error probability.

The membership harness decides words of an advice language by
bisection-measuring just enough digits of the mass that encodes the
advice function, decoding the needed prefix, and applying the language's
base rule.  Budgets follow from the guaranteed dyadic separation of
encoded masses, so no query ever times out and per-word cost grows
polynomially in log of the word length.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .advice import PrefixFunction, decode_advice, read_bound
from .collision import Outcome
from .oracle import CollisionOracle, ConfigError, PrecisionMode, WaitPolicy
from .procedures import (MeasurementReport, Schedule, bisection,
                         schedule_exponential)
from .sources import MassSource, affine_of_source


# ---------------------------------------------------------------------------
# trinomial outcome model for the embedded-parameter query


def embed_parameter(s_source: MassSource, epsilon) -> MassSource:
    """Mass mu = 1/2 - eps/2 + s*eps carrying the parameter s.

    The affine placement centers the reachable window: as s sweeps
    [0, 1], mu sweeps exactly the tolerance interval around 1/2 that an
    eps-noisy z = 1/2 projectile can reach.
    """
    eps = Fraction(epsilon)
    if not 0 < eps <= Fraction(1, 2):
        raise ValueError("epsilon must lie in (0, 1/2]")
    return affine_of_source(Fraction(1, 2) - eps / 2, eps, s_source,
                            kind="embedded-parameter")


def trinomial_probabilities(s, h) -> tuple[Fraction, Fraction, Fraction]:
    """Exact (lesser, greater, timeout) probabilities for the z = 1/2 query.

    s is the embedded parameter, h = eta/eps the timeout half-width in
    tolerance units.  Requires the timeout window to sit inside the
    draw interval, which holds for all s in [0, 1] once h <= 1/2.
    """
    s = Fraction(s)
    h = Fraction(h)
    if not 0 <= s <= 1:
        raise ValueError("s must lie in [0, 1]")
    if not 0 <= h <= Fraction(1, 2):
        raise ValueError("h must lie in [0, 1/2]")
    p = (s + Fraction(1, 2) - h) / 2
    q = (Fraction(3, 2) - s - h) / 2
    return p, q, h


def expected_statistic(s) -> Fraction:
    """Per-trial mean of X = 2*[lesser] + [timeout]: s + 1/2, h-free."""
    return Fraction(s) + Fraction(1, 2)


def statistic_variance(s, h) -> Fraction:
    """Per-trial variance of X = 2*[lesser] + [timeout]."""
    p, _, r = trinomial_probabilities(s, h)
    mean = 2 * p + r
    return 4 * p + r - mean * mean


def coin_amalgamation(n_lesser: int, n_greater: int, n_timeout: int,
                      isolate: Outcome = Outcome.LESSER) -> tuple[int, int]:
    """Collapse trinomial counts to a coin: one outcome against the rest.

    Timeouts are real observations here, not failures; lumping them
    with the opposite flag crossing is what turns the three-way tally
    into Bernoulli trials with an s-linear head probability.
    """
    counts = {Outcome.LESSER: n_lesser, Outcome.GREATER: n_greater,
              Outcome.TIMEOUT: n_timeout}
    if isolate not in counts:
        raise ValueError("isolate must be LESSER, GREATER, or TIMEOUT")
    heads = counts.pop(isolate)
    return heads, sum(counts.values())


def digit_accuracy(k: int) -> Fraction:
    """Estimate accuracy that pins k digits of a safely-separated s."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return Fraction(1, 1 << (k + 5))


def estimator_zeta(k: int, delta) -> int:
    """Trials making P(|X/zeta - (s+1/2)| >= 2**-(k+5)) <= delta.

    Chebyshev with the variance bound 3/4: any zeta exceeding
    3 * 2**(2k+10) / (4*delta) suffices.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    bound = 3 * (1 << (2 * k + 10)) / (4 * delta)
    return math.floor(bound) + 1


@dataclass
class DigitEstimate:
    """Outcome of one estimation run."""

    k: int
    delta: Fraction
    zeta: int
    n_lesser: int
    n_greater: int
    n_timeout: int
    statistic: int
    s_hat: Fraction
    digits: str
    engine: str
    elapsed_total: Fraction
    setup_total: Fraction

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "delta": str(self.delta),
            "zeta": self.zeta,
            "counts": {"lesser": self.n_lesser, "greater": self.n_greater,
                       "timeout": self.n_timeout},
            "statistic": self.statistic,
            "s_hat": f"{self.s_hat.numerator}/{self.s_hat.denominator}",
            "digits": self.digits,
            "engine": self.engine,
        }


def estimate_digits(oracle: CollisionOracle, k: int,
                    delta=Fraction(1, 4)) -> DigitEstimate:
    """Read the first k digits of the embedded parameter despite fixed noise.

    Fires zeta repetitions of the z = 1/2 word at budget 4K/eps, which
    pins the timeout half-width to exactly eps/4.  The oracle must bill
    full budgets (the procedure is a rendezvous, every trial waits the
    whole window) with exact fixed tolerance and no launch latency.
    """
    cfg = oracle.config
    if cfg.mode is not PrecisionMode.FIXED or cfg.epsilon is None:
        raise ConfigError("digit estimation is the fixed-tolerance procedure; "
                          "configure mode=FIXED with epsilon")
    if cfg.N != 0:
        raise ConfigError("digit estimation needs zero launch latency so the "
                          "timeout width is exact")
    if cfg.wait_policy is not WaitPolicy.FULL_BUDGET:
        raise ConfigError("digit estimation bills the full budget per trial")
    zeta = estimator_zeta(k, delta)
    budget = 4 * cfg.K / cfg.epsilon
    batch = oracle.batch_query("01", budget, zeta)
    x = 2 * batch.n_lesser + batch.n_timeout
    s_hat = Fraction(x, zeta) - Fraction(1, 2)
    clamped = min(max(s_hat, Fraction(0)), Fraction(1))
    val = min(math.floor(clamped * (1 << k)), (1 << k) - 1)
    return DigitEstimate(
        k=k, delta=Fraction(delta), zeta=zeta,
        n_lesser=batch.n_lesser, n_greater=batch.n_greater,
        n_timeout=batch.n_timeout, statistic=x, s_hat=s_hat,
        digits=format(val, f"0{k}b"), engine=batch.engine,
        elapsed_total=batch.elapsed_total, setup_total=batch.setup_total,
    )


# ---------------------------------------------------------------------------
# advice languages decided through the oracle


def pair_words(x: str, y: str) -> str:
    """Self-delimiting pairing: doubled bits of x, then 01, then doubled y."""
    if set(x + y) - {"0", "1"}:
        raise ValueError("pairing is defined on bit strings")
    return "".join(c + c for c in x) + "01" + "".join(c + c for c in y)


def unpair_words(w: str) -> tuple[str, str]:
    i = 0
    x = []
    while i + 1 < len(w) and w[i] == w[i + 1]:
        x.append(w[i])
        i += 2
    if w[i:i + 2] != "01":
        raise ValueError("missing pair delimiter")
    i += 2
    y = []
    while i < len(w):
        if i + 1 >= len(w) or w[i] != w[i + 1]:
            raise ValueError("second component is not doubled")
        y.append(w[i])
        i += 2
    return "".join(x), "".join(y)


class AdviceLanguage:
    """A base rule plus a length-indexed advice function.

    Membership of w consults rule(w, advice) where advice is the value
    of f at the power of two covering |w|; that is exactly the string a
    decoder recovers from the encoded mass knowing only |w|.
    """

    def __init__(self, rule: Callable[[str, str], bool], f: PrefixFunction,
                 descriptor: str = "advice-language"):
        self.rule = rule
        self.f = f
        self.descriptor = descriptor

    def covering_power(self, length: int) -> int:
        if length < 1:
            raise ValueError("words must be nonempty")
        return (length - 1).bit_length()

    def contains(self, word: str) -> bool:
        """Ground-truth membership, consulting f directly."""
        m = self.covering_power(len(word))
        return self.rule(word, self.f(1 << m))


def hidden_bit_language(hidden: str) -> AdviceLanguage:
    """Words whose length class points at a 1 in a hidden bit sequence.

    w is in the language iff hidden[floor(log2 |w|)] is 1 (0-indexed),
    i.e. membership depends on |w| only through its binary order of
    magnitude.  The advice f(n) is the hidden prefix of length
    floor(log2 n) + 1, so |f(2**j)| = j + 1: growth pair (1, 1).
    """
    if not hidden or set(hidden) - {"0", "1"}:
        raise ValueError("hidden must be a nonempty bit string")

    def fn(n: int) -> str:
        if n < 1:
            return ""
        need = n.bit_length()
        if need > len(hidden):
            return hidden
        return hidden[:need]

    f = PrefixFunction(fn, a=1, b=1,
                       stable_from=1 << (len(hidden) - 1),
                       descriptor=f"hidden[{len(hidden)} bits]")

    def rule(word: str, advice: str) -> bool:
        idx = len(word).bit_length()
        if idx > len(advice):
            raise ValueError("advice too short for this word length")
        return advice[idx - 1] == "1"

    return AdviceLanguage(rule, f, descriptor="hidden-bit")


@dataclass
class MembershipResult:
    word_length: int
    accepted: bool
    advice_bits: str
    digits_measured: int
    digits_consumed: int
    total_time: Fraction
    total_setup: Fraction


class MeasurementIncomplete(RuntimeError):
    """The advice measurement timed out; carries the partial report."""

    def __init__(self, report: MeasurementReport):
        super().__init__(f"measurement stopped: {report.status()}")
        self.report = report


def membership_schedule(K) -> Schedule:
    """Budget law under which every encoded advice mass is measurable.

    Encoded masses keep distance > 2**-(n+5) from stage-n dyadics, so
    arrivals stay below K * 2**(n+5); two extra doublings of headroom
    absorb per-query tolerance wobble half the gap wide.
    """
    return schedule_exponential(K, 6)


def decide_membership(oracle: CollisionOracle, word: str,
                      language: AdviceLanguage,
                      schedule: Optional[Schedule] = None) -> MembershipResult:
    """Decide one word by measuring, decoding, then applying the base rule.

    The oracle's hidden mass must encode the language's advice function;
    only the public growth pair (a, b) and the base rule are used here.
    """
    length = len(word)
    if length < 1:
        raise ValueError("words must be nonempty")
    a, b = language.f.a, language.f.b
    depth = read_bound(length, a, b)
    if schedule is None:
        schedule = membership_schedule(oracle.config.K)
    report = bisection(oracle, depth, schedule)
    if not report.complete:
        raise MeasurementIncomplete(report)
    advice_bits, consumed = decode_advice(report.digits, length, a, b)
    return MembershipResult(
        word_length=length,
        accepted=language.rule(word, advice_bits),
        advice_bits=advice_bits,
        digits_measured=depth,
        digits_consumed=consumed,
        total_time=report.total_time,
        total_setup=report.total_setup,
    )


def cost_slope(lengths: Sequence[int], times: Sequence) -> float:
    """Least-squares slope of log2(time) against log2(length)."""
    if len(lengths) != len(times) or len(lengths) < 2:
        raise ValueError("need matching samples, at least two")
    xs = [math.log2(n) for n in lengths]
    ys = [math.log2(float(t)) for t in times]
    return statistics.linear_regression(xs, ys).slope
