"""The scattering oracle: one mass comparison per query, under a clock.

A query submits a binary word naming a dyadic test mass z, plus a
waiting budget.  The apparatus manufactures a projectile of mass m*
(equal to z, or within a manufacturing tolerance of it, depending on
the precision mode), fires it at the hidden target mass, and waits.
If a detector flag fires strictly before the budget runs out the query
answers "lesser" or "greater"; otherwise it times out.  Equal masses
never answer at any budget.

Everything observable is collected into transcript records.  The hidden
mass never appears in a record; it only shapes answer/timeout patterns
and arrival times, which is exactly the information channel under
study.

Decisions are certified, never guessed.  For an exactly-known target
the arrival time is computed in closed form.  For a target known only
as a digit stream, the query reads just enough digits to prove the
arrival falls strictly before the deadline or at-or-after it; the
convention that a deadline-exact arrival counts as a timeout is what
makes this provable from a finite prefix of a non-dyadic target.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import rng
from .collision import Outcome
from .dyadic import Dyadic, word_to_dyadic, validate_word
from .sources import MassSource, distance_bracket


class PrecisionMode(enum.Enum):
    ERROR_FREE = "error-free"    # m* == z exactly
    ARBITRARY = "arbitrary"      # per-query tolerance, m* uniform in [z-eps, z+eps]
    FIXED = "fixed"              # one global tolerance for every query

    def __str__(self):
        return self.value


class WaitPolicy(enum.Enum):
    INTERRUPT = "interrupt"      # an answer stops the clock at arrival time
    FULL_BUDGET = "full-budget"  # the clock always runs the whole budget

    def __str__(self):
        return self.value


class TimeoutReaction(enum.Enum):
    RETURN = "return"            # timeouts come back as Outcome.TIMEOUT
    ABORT = "abort"              # timeouts raise TimeoutExceeded

    def __str__(self):
        return self.value


class ConfigError(ValueError):
    pass


class TimeoutExceeded(RuntimeError):
    """Raised under TimeoutReaction.ABORT; carries the offending record."""

    def __init__(self, record):
        super().__init__(f"query {record.index} ({record.word!r}) timed out")
        self.record = record


def _frac(x) -> Fraction:
    if isinstance(x, Dyadic):
        return x.as_fraction()
    return Fraction(x)


@dataclass
class OracleConfig:
    """Apparatus parameters shared by every query of a run.

    K: arrival-time constant; an answered query arrives at K/|m*-target|.
    N: jitter amplitude; each arrival is shifted by a uniform draw from
       [-N, N].  N = 0 switches jitter off entirely.
    mode/epsilon: manufacturing precision.  FIXED mode requires epsilon
       here; ARBITRARY mode takes a tolerance per query.  Error-prone
       draws are clipped into [0, 1]; the clip can only trigger when the
       tolerance window pokes outside the unit interval, and the
       endpoints themselves carry probability zero.
    wait_policy/timeout_reaction: accounting and control flow, above.
    c_setup: preparation cost per word digit (longer words take longer
       to set up), billed separately from the waiting time so budget
       arithmetic stays exact.
    timing: "protocol" uses the K/gap law; "kinematic" derives arrival
       times from the actual collision geometry (launch_speed,
       flag_distance), where the constant in front of 1/gap becomes the
       mass-dependent (m* + target) * flag_distance / launch_speed.
    probe_depth_cap: digit horizon when certifying against a digit
       stream; a comparison that cannot be settled within the horizon is
       reported as a timeout, mirroring a detector of finite resolution.
    """

    K: Fraction = Fraction(1)
    N: Fraction = Fraction(0)
    mode: PrecisionMode = PrecisionMode.ERROR_FREE
    epsilon: Optional[Fraction] = None
    wait_policy: WaitPolicy = WaitPolicy.INTERRUPT
    timeout_reaction: TimeoutReaction = TimeoutReaction.RETURN
    c_setup: Fraction = Fraction(1)
    timing: str = "protocol"
    launch_speed: Fraction = Fraction(1)
    flag_distance: Fraction = Fraction(1)
    seed: int = 0
    probe_depth_cap: int = 4096
    record_hidden: bool = False

    def __post_init__(self):
        self.K = _frac(self.K)
        self.N = _frac(self.N)
        self.c_setup = _frac(self.c_setup)
        self.launch_speed = _frac(self.launch_speed)
        self.flag_distance = _frac(self.flag_distance)
        if self.epsilon is not None:
            self.epsilon = _frac(self.epsilon)
        if self.K <= 0:
            raise ConfigError("K must be positive")
        if self.N < 0:
            raise ConfigError("N must be >= 0")
        if self.c_setup < 0:
            raise ConfigError("c_setup must be >= 0")
        if self.launch_speed <= 0 or self.flag_distance <= 0:
            raise ConfigError("launch_speed and flag_distance must be positive")
        if self.timing not in ("protocol", "kinematic"):
            raise ConfigError(f"unknown timing {self.timing!r}")
        if self.mode is PrecisionMode.FIXED:
            if self.epsilon is None or self.epsilon <= 0:
                raise ConfigError("FIXED mode needs a positive epsilon")
        if self.probe_depth_cap < 8:
            raise ConfigError("probe_depth_cap must be >= 8")


def _fmt(x) -> str:
    f = _frac(x)
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


@dataclass
class QueryRecord:
    index: int
    word: str
    z: Fraction
    z_length: int
    budget: Fraction
    outcome: Outcome
    elapsed: Fraction
    setup: Fraction
    epsilon: Optional[Fraction] = None
    probe_depth: Optional[int] = None
    # what the experimenter knows about the realized projectile mass:
    # a single point when error-free, the tolerance window otherwise
    mass_interval: tuple = ()
    hidden: dict = field(default_factory=dict, repr=False)

    @property
    def total_time(self) -> Fraction:
        return self.elapsed + self.setup

    def to_dict(self) -> dict:
        d = {
            "index": self.index,
            "z": self.word,
            "z_length": self.z_length,
            "budget": _fmt(self.budget),
            "answer": str(self.outcome),
            "elapsed": _fmt(self.elapsed),
            "setup": _fmt(self.setup),
        }
        if self.epsilon is not None:
            d["epsilon"] = _fmt(self.epsilon)
        return d


@dataclass
class BatchRecord:
    """Aggregate of zeta repetitions of one query at one budget."""

    index: int
    word: str
    z: Fraction
    z_length: int
    budget: Fraction
    zeta: int
    n_lesser: int
    n_greater: int
    n_timeout: int
    elapsed_total: Fraction
    setup_total: Fraction
    epsilon: Optional[Fraction] = None
    engine: str = "thresholds"

    @property
    def total_time(self) -> Fraction:
        return self.elapsed_total + self.setup_total

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "z": self.word,
            "z_length": self.z_length,
            "budget": _fmt(self.budget),
            "zeta": self.zeta,
            "answer": {
                "lesser": self.n_lesser,
                "greater": self.n_greater,
                "timeout": self.n_timeout,
            },
            "elapsed": _fmt(self.elapsed_total),
            "setup": _fmt(self.setup_total),
            "epsilon": _fmt(self.epsilon) if self.epsilon is not None else None,
            "engine": self.engine,
        }


class CollisionOracle:
    """Stateful query interface around one hidden mass source."""

    def __init__(self, source: MassSource, config: Optional[OracleConfig] = None):
        self.source = source
        self.config = config or OracleConfig()
        self.transcript: list = []

    # -- draws ------------------------------------------------------------

    def _draw_mass(self, z: Fraction, epsilon: Optional[Fraction], stream: int,
                   trial: int = 0) -> Fraction:
        cfg = self.config
        if cfg.mode is PrecisionMode.ERROR_FREE:
            return z
        if epsilon is None:
            raise ConfigError("this precision mode needs a tolerance")
        r = rng.raw64(cfg.seed, stream, 2 * trial)
        m_star = z - epsilon + 2 * epsilon * Fraction(r, 1 << 64)
        # clip at the domain boundary; only reachable when the tolerance
        # window leaves [0, 1], and boundary hits have probability zero
        if m_star < 0:
            return Fraction(0)
        if m_star > 1:
            return Fraction(1)
        return m_star

    def _draw_jitter(self, stream: int, trial: int = 0) -> Fraction:
        cfg = self.config
        if cfg.N == 0:
            return Fraction(0)
        r = rng.raw64(cfg.seed, stream, 2 * trial + 1)
        return -cfg.N + 2 * cfg.N * Fraction(r, 1 << 64)

    # -- single query -------------------------------------------------------

    def query(self, word: str, budget, epsilon=None):
        """Run one experiment; append and return its QueryRecord.

        Under TimeoutReaction.ABORT a timeout still appends its record
        before raising, so aborted transcripts stay complete.
        """
        cfg = self.config
        validate_word(word)
        z = word_to_dyadic(word).as_fraction()
        budget = _frac(budget)
        if budget <= 0:
            raise ConfigError("budget must be positive")
        if cfg.mode is PrecisionMode.FIXED:
            if epsilon is not None and _frac(epsilon) != cfg.epsilon:
                raise ConfigError("FIXED mode pins every query to the global epsilon")
            epsilon = cfg.epsilon
        elif epsilon is not None:
            epsilon = _frac(epsilon)
            if epsilon <= 0:
                raise ConfigError("epsilon must be positive")
        if cfg.mode is PrecisionMode.ARBITRARY and epsilon is None:
            raise ConfigError("ARBITRARY mode needs a per-query epsilon")

        index = len(self.transcript)
        m_star = self._draw_mass(z, epsilon, index)
        jitter = self._draw_jitter(index)
        need_arrival = cfg.wait_policy is WaitPolicy.INTERRUPT
        outcome, arrival, depth = self._decide(m_star, jitter, budget, need_arrival)

        if cfg.wait_policy is WaitPolicy.FULL_BUDGET or outcome is Outcome.TIMEOUT:
            elapsed = budget
        else:
            elapsed = arrival
        setup = cfg.c_setup * len(word)

        if cfg.mode is PrecisionMode.ERROR_FREE:
            interval = (z, z)
        else:
            interval = (max(Fraction(0), z - epsilon), min(Fraction(1), z + epsilon))
        record = QueryRecord(
            index=index, word=word, z=z, z_length=len(word), budget=budget,
            outcome=outcome, elapsed=elapsed, setup=setup,
            epsilon=epsilon if cfg.mode is not PrecisionMode.ERROR_FREE else None,
            probe_depth=depth, mass_interval=interval,
        )
        if cfg.record_hidden:
            record.hidden["m_star"] = m_star
            record.hidden["jitter"] = jitter
        self.transcript.append(record)
        if outcome is Outcome.TIMEOUT and cfg.timeout_reaction is TimeoutReaction.ABORT:
            raise TimeoutExceeded(record)
        return record

    # -- decision core ------------------------------------------------------

    def _decide(self, m_star: Fraction, jitter: Fraction, budget: Fraction,
                need_arrival: bool = True):
        """Outcome, arrival time (None on timeout), probe depth used.

        An answer requires arrival strictly before the deadline; an
        arrival exactly at the deadline is a timeout.  That strictness
        matches the threshold counting used by the batched engine, and
        it is the reason equality never has to be decided from an
        infinite digit tail.
        """
        cfg = self.config
        deadline = budget - jitter
        if deadline <= 0:
            return Outcome.TIMEOUT, None, None

        exact = self.source.exact_value
        if exact is not None:
            gap = abs(m_star - exact)
            if gap == 0:
                return Outcome.TIMEOUT, None, None
            t = self._arrival(m_star, exact, gap)
            if t + jitter < budget:
                side = Outcome.LESSER if m_star < exact else Outcome.GREATER
                return side, t + jitter, None
            return Outcome.TIMEOUT, None, None

        return self._decide_probed(m_star, jitter, budget, deadline, need_arrival)

    def _arrival(self, m_star: Fraction, mu: Fraction, gap: Fraction) -> Fraction:
        cfg = self.config
        if cfg.timing == "protocol":
            return cfg.K / gap
        return (cfg.flag_distance / cfg.launch_speed) * (m_star + mu) / gap

    def _decide_probed(self, m_star, jitter, budget, deadline, need_arrival=True):
        cfg = self.config
        protocol = cfg.timing == "protocol"
        c = cfg.flag_distance / cfg.launch_speed
        if protocol:
            g_star = cfg.K / deadline
            start = max(8, _inv_bits(g_star) + 2)
        else:
            # smallest conceivable gap that still answers, from arrival >= c*m*/gap
            g_floor = c * m_star / deadline
            start = max(8, _inv_bits(g_floor) + 2) if g_floor > 0 else 8
        depth = min(start, cfg.probe_depth_cap)
        while True:
            a, b, side = distance_bracket(self.source, m_star, depth)
            if protocol:
                if side != 0 and a > g_star:
                    arrival = self._reported_arrival(m_star, depth, jitter) if need_arrival else None
                    return (Outcome.LESSER if side < 0 else Outcome.GREATER,
                            arrival, depth)
                if b <= g_star:
                    return Outcome.TIMEOUT, None, depth
            else:
                lo, hi = self.source.interval(depth)
                if side != 0 and a > 0 and c * (m_star + hi) / a + jitter < budget:
                    arrival = self._reported_arrival(m_star, depth, jitter) if need_arrival else None
                    return (Outcome.LESSER if side < 0 else Outcome.GREATER,
                            arrival, depth)
                if b > 0 and c * (m_star + lo) / b + jitter >= budget:
                    return Outcome.TIMEOUT, None, depth
            if depth >= cfg.probe_depth_cap:
                return Outcome.TIMEOUT, None, depth
            depth = min(depth * 2, cfg.probe_depth_cap)

    _CLOCK_BITS = 48

    def _reported_arrival(self, m_star, depth_hint, jitter) -> Fraction:
        """Arrival time for the transcript when the target is a digit stream.

        The true arrival is irrational in general, so the clock reading
        is certified to 2**-48: the enclosure from deeper digit reads is
        narrowed until it fits inside one clock tick, then snapped to
        the tick grid.  Deterministic, so replays reproduce it exactly.
        """
        cfg = self.config
        tick = Fraction(1, 1 << self._CLOCK_BITS)
        depth = depth_hint
        while True:
            a, b, side = distance_bracket(self.source, m_star, depth)
            if side != 0 and a > 0:
                lo, hi = self.source.interval(depth)
                if cfg.timing == "protocol":
                    t_lo, t_hi = cfg.K / b, cfg.K / a
                else:
                    c = cfg.flag_distance / cfg.launch_speed
                    t_lo = c * (m_star + lo) / b
                    t_hi = c * (m_star + hi) / a
                if t_hi - t_lo < tick:
                    ticks = (t_lo.numerator << self._CLOCK_BITS) // t_lo.denominator
                    return Fraction(ticks, 1 << self._CLOCK_BITS) + jitter
            if depth >= cfg.probe_depth_cap * 4:
                raise RuntimeError("clock certification exceeded its digit horizon")
            depth *= 2

    # -- batched queries ------------------------------------------------------

    def batch_query(self, word: str, budget, zeta: int, epsilon=None) -> BatchRecord:
        """zeta independent repetitions of one query, reported as counts.

        Requires FULL_BUDGET accounting (each repetition bills the whole
        budget) and zero jitter with an exactly-known non-dyadic target
        for the threshold engine; anything else falls back to running
        the trials one-by-one through the certified decision path.
        """
        cfg = self.config
        validate_word(word)
        if zeta < 1:
            raise ConfigError("zeta must be >= 1")
        if cfg.wait_policy is not WaitPolicy.FULL_BUDGET:
            raise ConfigError("batched queries require WaitPolicy.FULL_BUDGET")
        z = word_to_dyadic(word).as_fraction()
        budget = _frac(budget)
        if budget <= 0:
            raise ConfigError("budget must be positive")
        if cfg.mode is PrecisionMode.FIXED:
            epsilon = cfg.epsilon
        elif cfg.mode is PrecisionMode.ARBITRARY:
            if epsilon is None:
                raise ConfigError("ARBITRARY mode needs a per-query epsilon")
            epsilon = _frac(epsilon)
        else:
            epsilon = None

        index = len(self.transcript)
        exact = self.source.exact_value
        usable_kernel = (
            epsilon is not None
            and cfg.N == 0
            and cfg.timing == "protocol"
            and exact is not None
            and self.source.non_dyadic
            and z - epsilon >= 0
            and z + epsilon <= 1
        )
        if usable_kernel:
            from . import kernels
            eta = cfg.K / budget
            n_less, n_great = kernels.count_outcomes(
                cfg.seed, index, zeta, z, epsilon, exact, eta)
            engine = kernels.engine_name()
        else:
            n_less = n_great = 0
            for trial in range(zeta):
                m_star = self._draw_mass(z, epsilon, index, trial)
                jitter = self._draw_jitter(index, trial)
                outcome, _, _ = self._decide(m_star, jitter, budget, need_arrival=False)
                if outcome is Outcome.LESSER:
                    n_less += 1
                elif outcome is Outcome.GREATER:
                    n_great += 1
            engine = "per-trial"

        setup_total = cfg.c_setup * len(word) * zeta
        record = BatchRecord(
            index=index, word=word, z=z, z_length=len(word), budget=budget,
            zeta=zeta, n_lesser=n_less, n_greater=n_great,
            n_timeout=zeta - n_less - n_great,
            elapsed_total=budget * zeta, setup_total=setup_total,
            epsilon=epsilon, engine=engine,
        )
        self.transcript.append(record)
        return record

    # -- bookkeeping ------------------------------------------------------

    @property
    def total_elapsed(self) -> Fraction:
        return sum((r.total_time for r in self.transcript), Fraction(0))

    def reset(self) -> None:
        self.transcript.clear()


def _inv_bits(x: Fraction) -> int:
    """Smallest d >= 1 with 2**-d <= x, i.e. enough digits to see gaps of size x."""
    if x <= 0:
        raise ValueError("positive value required")
    inv = 1 / x
    return max(1, (inv.numerator // inv.denominator).bit_length())


def timeout_window(config: OracleConfig, budget) -> Fraction:
    """Half-width of the mass window around the target that can time out.

    Inverting arrival = K/gap + jitter at the worst jitter: any realized
    mass with |m* - target| < K/(budget - N) may miss the deadline, and
    the window is symmetric because the arrival law sees only |m* - target|.
    With N = 0 this is the exact timeout half-width.
    """
    budget = _frac(budget)
    if budget <= config.N:
        raise ConfigError("budget must exceed the jitter bound")
    return config.K / (budget - config.N)
