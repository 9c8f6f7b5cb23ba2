"""Elastic collision kinematics, kept exact.

A projectile of mass m is launched at speed u toward a stationary target
of mass mu sitting at distance r from the launch point, with a detector
flag back at the launch point and another at 2r.  After a perfectly
elastic head-on collision the projectile either bounces back (m < mu),
stops dead (m == mu), or follows through (m > mu), and the time until a
flag fires encodes |m - mu|: the closer the masses, the slower whichever
particle has to limp to a flag.

Everything here is Fraction arithmetic on purpose.  The whole point of
the construction is that timing carries unbounded information, and that
claim dies the moment a float rounds a velocity.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction

from .dyadic import Dyadic


class Outcome(enum.Enum):
    """Verdict of one mass comparison."""

    LESSER = "lesser"        # test mass below the unknown
    GREATER = "greater"      # test mass above the unknown
    NO_RESULT = "no-result"  # equal masses: no flag ever fires
    TIMEOUT = "timeout"      # waiting budget exhausted first

    def __str__(self):
        return self.value


def _frac(x) -> Fraction:
    if isinstance(x, Dyadic):
        return x.as_fraction()
    return Fraction(x)


def post_collision_velocities(m, mu, u=1) -> tuple[Fraction, Fraction]:
    """Velocities (projectile, target) after the elastic collision.

    A zero-mass projectile is admitted as the limiting case: it reflects
    at full speed and leaves the target untouched.
    """
    m, mu, u = _frac(m), _frac(mu), _frac(u)
    if m < 0 or mu < 0:
        raise ValueError("masses must be nonnegative")
    s = m + mu
    if s == 0:
        raise ValueError("at least one mass must be positive")
    return (m - mu) / s * u, 2 * m / s * u


def momentum(m, v) -> Fraction:
    return _frac(m) * _frac(v)


def kinetic_energy(m, v) -> Fraction:
    v = _frac(v)
    return _frac(m) * v * v / 2


def experiment_time(m, mu, u=1, r=1):
    """Time from launch until a detector flag fires.

    The projectile travels r to the target, then the surviving motion
    covers another r back (bounce) or onward (follow-through) at speed
    |m - mu| / (m + mu) * u.  Equal masses freeze both particles' useful
    motion relative to the flags, so the answer is +infinity.
    """
    m, mu, u, r = _frac(m), _frac(mu), _frac(u), _frac(r)
    if m < 0 or mu < 0:
        raise ValueError("masses must be nonnegative")
    if u <= 0 or r <= 0:
        raise ValueError("launch speed and flag distance must be positive")
    if m == mu:
        return math.inf
    return (r / u) * (m + mu) / abs(m - mu)


def time_gap_product(m, mu, u=1, r=1) -> Fraction:
    """experiment_time * |m - mu|, which the kinematics fix at (m + mu) r / u.

    This is the exact tradeoff behind the whole protocol: resolving a
    mass gap of 2**-n costs time proportional to 2**n, no matter how the
    experiment is tuned, because this product cannot be reduced below
    (m + mu) r / u.
    """
    m, mu, u, r = _frac(m), _frac(mu), _frac(u), _frac(r)
    return (m + mu) * r / u


def time_bounds(gap, u=1, r=1, mass_low=0, mass_high=1) -> tuple[Fraction, Fraction]:
    """Range of possible experiment times given only |m - mu| = gap.

    With both masses confined to [mass_low, mass_high] the sum m + mu is
    pinned between max(gap, 2*mass_low) and 2*mass_high, so the time
    lands in [A/gap, B/gap] with A, B depending only on the apparatus.
    """
    gap, u, r = _frac(gap), _frac(u), _frac(r)
    lo, hi = _frac(mass_low), _frac(mass_high)
    if gap <= 0:
        raise ValueError("gap must be positive")
    if not 0 <= lo < hi:
        raise ValueError("need 0 <= mass_low < mass_high")
    s_min = max(gap, 2 * lo)
    s_max = 2 * hi
    return (r / u) * s_min / gap, (r / u) * s_max / gap


def classify_outcome(m, mu) -> Outcome:
    """Idealized unlimited-time verdict for exact masses."""
    m, mu = _frac(m), _frac(mu)
    if m < mu:
        return Outcome.LESSER
    if m > mu:
        return Outcome.GREATER
    return Outcome.NO_RESULT


def classify_source_outcome(m, src, depth_budget: int) -> Outcome:
    """Verdict against a digit-stream target, certified from its prefix.

    Returns NO_RESULT both when the masses are equal and when
    depth_budget digits cannot separate them, because the experiment
    cannot tell those situations apart either.
    """
    from .sources import gap_probe
    probe = gap_probe(src, _frac(m), depth_budget)
    if not probe.proven:
        return Outcome.NO_RESULT
    return Outcome.LESSER if probe.side < 0 else Outcome.GREATER


def uncertainty_product(m, mu, u=1, r=1) -> Fraction:
    """The literal product |m - mu| * experiment_time; demands distinct masses.

    Algebraically this collapses to (m + mu) * r / u; computing it as a
    product keeps the identity an observable fact rather than a
    definition.
    """
    m, mu = _frac(m), _frac(mu)
    if m == mu:
        raise ValueError("equal masses have no finite experiment time")
    return abs(m - mu) * experiment_time(m, mu, u=u, r=r)


def accuracy_time_floor(n: int, u=1, r=1, mass_low=0):
    """Minimum time any experiment needs to certify |m - mu| <= 2**-n.

    Distinguishing masses closer than 2**-n forces a run whose gap is at
    most 2**-n, and the product law then forces time >= A * 2**n where
    A = s_min * r / u.  Exponential cost per digit is structural, not an
    artifact of this simulator.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    floor, _ = time_bounds(Fraction(1, 1 << n), u=u, r=r, mass_low=mass_low)
    return floor
