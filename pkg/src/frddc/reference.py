"""Closed-loop reference models and reference families.

A reference model fixes the target closed-loop transfer function M; the
ideal-controller construction turns plant samples plus M into controller
samples.  Families hold several members for the uncertain variant, where
each frequency sample is paired with one member in round-robin order.

The delayed-oscillatory reference used for the transport plant is a
documented default of this repo (delay matched to the plant's transport lag,
a unit-DC oscillatory second-order factor, and a first-order roll-off
filter); it is a stand-in chosen to be trackable by that plant, not a value
taken from elsewhere.  The lag bounds the achievable loop bandwidth near
1/delay ~ 0.26 rad/s, so the oscillatory mode sits just below that and the
filter halves it again.
"""

from dataclasses import dataclass

import numpy as np

#: transport reference defaults; delay equals the plant's transport lag
#: x_m^2 with the default measurement point (1.9592**2)
TRANSPORT_DELAY = 3.8384464
TRANSPORT_OMEGA_N = 0.2
TRANSPORT_DAMPING = 0.25
TRANSPORT_FILTER_P = 0.1

#: uncertain transport case: filter pole swept linearly over this many members
TRANSPORT_FILTER_RANGE = (0.05, 0.2)
TRANSPORT_FAMILY_SIZE = 5


@dataclass(frozen=True)
class SecondOrderReference:
    """Critically damped unit-DC target ``M(s) = 1 / (s^2/p^2 + 2 s/p + 1)``."""

    p: float = 1.0

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        return 1.0 / (s**2 / self.p**2 + 2.0 * s / self.p + 1.0)

    def label(self) -> str:
        return f"second-order p={self.p:g}"


@dataclass(frozen=True)
class DelayedOscillatoryReference:
    """Delayed oscillatory unit-DC target with a first-order roll-off.

    ``M(s) = exp(-delay s) * wn^2/(s^2 + 2 zeta wn s + wn^2) * 1/(s/p + 1)``
    """

    delay: float = TRANSPORT_DELAY
    omega_n: float = TRANSPORT_OMEGA_N
    damping: float = TRANSPORT_DAMPING
    p: float = TRANSPORT_FILTER_P

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        osc = self.omega_n**2 / (s**2 + 2.0 * self.damping * self.omega_n * s
                                 + self.omega_n**2)
        return np.exp(-self.delay * s) * osc / (s / self.p + 1.0)

    def label(self) -> str:
        return (f"delayed-oscillatory delay={self.delay:g} wn={self.omega_n:g} "
                f"zeta={self.damping:g} p={self.p:g}")


def reference_eval(member, s):
    """Evaluate a reference member at complex s.

    Accepts the reference classes above or any callable (including rational
    model forms, which are callable).
    """
    if callable(member):
        return member(s)
    raise TypeError(f"unknown reference member {type(member).__name__}")


@dataclass(frozen=True)
class ReferenceFamily:
    """Ordered tuple of reference members; single-member families are the
    standard (non-uncertain) case."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a reference family needs at least one member")
        if not all(callable(m) for m in members):
            raise TypeError("family members must be evaluators")
        object.__setattr__(self, "members", members)

    @property
    def n_s(self) -> int:
        return len(self.members)

    def assign(self, n: int) -> np.ndarray:
        """Member index for each of n samples, round-robin: i -> i mod n_s."""
        return np.arange(n) % self.n_s

    def labels(self):
        return [m.label() if hasattr(m, "label") else repr(m) for m in self.members]


def second_order_family(p_values) -> ReferenceFamily:
    p_arr = np.atleast_1d(np.asarray(p_values, dtype=float))
    return ReferenceFamily(members=tuple(SecondOrderReference(p=p) for p in p_arr))


def transport_family(p_values=None, delay=TRANSPORT_DELAY, omega_n=TRANSPORT_OMEGA_N,
                     damping=TRANSPORT_DAMPING) -> ReferenceFamily:
    """Delayed-oscillatory family; default is the single standard member."""
    if p_values is None:
        p_arr = np.array([TRANSPORT_FILTER_P])
    else:
        p_arr = np.atleast_1d(np.asarray(p_values, dtype=float))
    members = tuple(DelayedOscillatoryReference(delay=delay, omega_n=omega_n,
                                                damping=damping, p=p)
                    for p in p_arr)
    return ReferenceFamily(members=members)


def transport_uncertain_p_values(n_members: int = TRANSPORT_FAMILY_SIZE) -> np.ndarray:
    lo, hi = TRANSPORT_FILTER_RANGE
    return np.linspace(lo, hi, n_members)
