"""Closed-form confidence bounds.

All logarithms are natural except the base-2 ones in the VC-dimension bounds.
Functions taking ``split`` spend their confidence budget ``delta`` on one of
``split`` events, i.e. they use ``L = ln(split / delta)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

GREEDY_RATIO = 1.0 - 1.0 / math.e
DEFAULT_VC_CONSTANT = 0.5


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")


def _check_m(m: float) -> None:
    if m < 1:
        raise ValueError(f"sample size must be >= 1, got {m}")


def _check_fraction(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


def self_bounding_tail(value: float, m: float, log_term: float) -> float:
    """Width ``sqrt((L/m)^2 + 2 value L / m) + L/m`` of a self-bounding upper tail."""
    lm = log_term / m
    return math.sqrt(lm * lm + 2.0 * value * lm) + lm


def xi(c_hat: float, m: float, delta: float, split: int = 5) -> float:
    """Gap between the greedy estimate and an upper bound on the optimum."""
    _check_fraction("c_hat", c_hat)
    _check_m(m)
    _check_delta(delta)
    return self_bounding_tail(c_hat / GREEDY_RATIO, m, math.log(split / delta))


def opt_upper_bound(c_hat: float, m: float, delta: float, split: int = 5) -> float:
    """Upper bound on the optimal set centrality from the greedy value ``c_hat``.

    ``split=1`` spends the whole budget on this event.
    """
    return c_hat / GREEDY_RATIO + xi(c_hat, m, delta, split)


@dataclass(frozen=True)
class EtaTerms:
    r_tilde: float
    r_cap: float
    nu: float
    eta: float


def eta(amcera: float, wimpy: float, t: int, m: float, delta: float, c_hat: float) -> EtaTerms:
    """Supremum-deviation bound from the AMCERA, five-way confidence split.

    ``r_tilde`` bounds the empirical Rademacher average, ``r_cap`` the
    Rademacher complexity, ``nu`` the optimum, and ``eta`` the deviation.
    """
    _check_delta(delta)
    _check_m(m)
    _check_fraction("c_hat", c_hat)
    if amcera < 0 or wimpy < 0 or t < 1:
        raise ValueError("amcera and wimpy must be >= 0 and t >= 1")
    L = math.log(5.0 / delta)
    r_tilde = amcera + math.sqrt(4.0 * wimpy * L / (t * m))
    r_cap = r_tilde + self_bounding_tail(r_tilde, m, L)
    nu = opt_upper_bound(c_hat, m, delta)
    value = 2.0 * r_cap + math.sqrt(2.0 * L * (nu + 4.0 * r_cap) / m) + L / (3.0 * m)
    return EtaTerms(r_tilde=r_tilde, r_cap=r_cap, nu=nu, eta=value)


def eta_optimistic(m: float, delta: float) -> float:
    """Deviation bound with no Rademacher signal and an optimum of 1.

    The empirical average term is 0 (so only its tail remains) and the
    optimum bound is 1; used to guess how many samples a target needs.
    """
    _check_delta(delta)
    _check_m(m)
    L = math.log(5.0 / delta)
    r_cap = self_bounding_tail(0.0, m, L)
    return 2.0 * r_cap + math.sqrt(2.0 * L * (1.0 + 4.0 * r_cap) / m) + L / (3.0 * m)


def sd_bound_union(n: int, k: int, m: float, delta: float) -> float:
    """Hoeffding deviation bound with a union bound over ``n^k`` node sets."""
    if n < 2 or k < 1:
        raise ValueError(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    _check_delta(delta)
    _check_m(m)
    return math.sqrt((k * math.log(n) + math.log(2.0 / delta)) / (2.0 * m))


def vc_dim_1_bound(b: int) -> int:
    """VC-dimension bound for single nodes when hyper-edges have at most ``b`` nodes."""
    if b < 1:
        raise ValueError(f"b must be >= 1, got {b}")
    # exact integer floor(log2(2b))
    return (2 * b).bit_length() - 1


def vc_dim_k_bound(d1: float, k: int) -> float:
    """VC-dimension bound for sets of at most ``k`` nodes, kept real-valued."""
    if d1 < 1 or k < 1:
        raise ValueError(f"need d1 >= 1 and k >= 1, got d1={d1}, k={k}")
    return 2.0 * d1 * k * math.log2(3 * k)


def sample_size_vc(dk: float, delta: float, eps: float, c_star_lower: float,
                   c_const: float = DEFAULT_VC_CONSTANT) -> int:
    """Samples sufficient for a (1 - 1/e - eps)-approximation via relative approximation."""
    _check_delta(delta)
    if dk < 0 or eps <= 0 or c_const <= 0 or not 0 < c_star_lower <= 1:
        raise ValueError("need dk >= 0, eps > 0, c_const > 0 and c_star_lower in (0, 1]")
    num = dk * math.log(1.0 / c_star_lower) + math.log(1.0 / delta)
    return math.ceil(4.0 * c_const * num / (eps * eps * c_star_lower))


def sd_bound_vc(dk: float, m: float, delta: float, c_const: float = DEFAULT_VC_CONSTANT) -> float:
    """Deviation bound of an eps-sample for a range space of VC-dimension ``dk``."""
    _check_delta(delta)
    _check_m(m)
    if dk < 0 or c_const <= 0:
        raise ValueError("need dk >= 0 and c_const > 0")
    return math.sqrt(c_const * (dk + math.log(1.0 / delta)) / m)


@dataclass
class BoundReport:
    """Every quantity of one bound evaluation.

    Rademacher fields are None for variants that do not compute them, as are
    the VC fields when no hyper-edge size bound is known.
    """

    m: int
    t: int
    k: int
    delta: float
    c_hat: float
    xi: float
    nu: float
    eta_ub: float | None = None
    amcera: float | None = None
    wimpy: float | None = None
    r_tilde: float | None = None
    r_cap: float | None = None
    eta: float | None = None
    eps_vc: float | None = None
    d1: int | None = None
    dk: float | None = None

    def check(self) -> None:
        """Raise AssertionError if an internal ordering invariant fails."""
        for name, value in asdict(self).items():
            assert value is None or value >= 0, f"{name} is negative"
        assert self.nu >= self.c_hat / GREEDY_RATIO
        if self.eta is not None:
            assert self.r_cap >= self.r_tilde >= self.amcera
            assert self.eta >= 2 * self.r_cap

    def to_dict(self) -> dict:
        return asdict(self)
