"""Progressive-sampling driver for set-centrality maximization.

Each iteration ``i`` grows the sample to ``m_i``, runs greedy coverage,
evaluates a supremum-deviation bound at confidence ``delta / 2^i`` and stops
once the bound certifies a ``(1 - 1/e - eps)``-approximation.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

from . import bounds
from .bounds import GREEDY_RATIO, BoundReport
from .graph import Graph, vertex_diameter_exact
from .greedy import greedy_cover
from .rademacher import RademacherState
from .sampler import ParallelSampler, Sample
from .streams import derive_seed

log = logging.getLogger(__name__)

VARIANTS = ("centra", "centra-vc", "hedge-p", "fixed-m")
# Safety cap when no VC-derived limit is available; keeps degenerate graphs
# (no internal nodes anywhere) from sampling forever.
DEFAULT_M_CAP = 10**8
_BISECT_ITERS = 64
_BISECT_RTOL = 1e-6

RULES = {
    "centra": "(1-1/e)*((1-1/e-eps)*xi + eta) <= eps*c_hat",
    "centra-vc": "(1-1/e)*((1-1/e-eps)*xi + eps_vc) <= eps*c_hat",
    "hedge-p": "2*eta_ub <= eps*max(0, c_hat - eta_ub)",
    "fixed-m": "(1-1/e)*((1-1/e-eps)*xi + eta) <= eps*c_hat",
}


@dataclass(frozen=True)
class RunConfig:
    k: int
    eps: float
    delta: float = 0.05
    t: int = 100
    variant: str = "centra"
    seed: int = 0
    alpha: float = 1.2
    m_max: int | None = None
    b: int | None = None
    c_star_lower: float | None = None
    c_const: float = bounds.DEFAULT_VC_CONSTANT
    workers: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not 0 < self.eps < GREEDY_RATIO:
            raise ValueError(f"eps must lie in (0, 1 - 1/e), got {self.eps}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.t < 1:
            raise ValueError(f"t must be >= 1, got {self.t}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {VARIANTS}")
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if self.m_max is not None and self.m_max < 1:
            raise ValueError(f"m_max must be >= 1, got {self.m_max}")
        if self.b is not None and self.b < 0:
            raise ValueError(f"b must be >= 0, got {self.b}")
        if self.c_star_lower is not None and not 0 < self.c_star_lower <= 1:
            raise ValueError("c_star_lower must lie in (0, 1]")
        if self.c_const <= 0:
            raise ValueError("c_const must be > 0")
        if self.variant == "fixed-m" and self.m_max is None:
            raise ValueError("the fixed-m variant needs m_max as its sample size")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Iteration:
    i: int
    m: int
    delta_i: float
    report: BoundReport
    sd_bound: float
    stopped: bool
    seconds: float
    nodes: tuple[int, ...]


@dataclass
class RunResult:
    nodes: tuple[int, ...]
    c_hat: float
    variant: str
    total_samples: int
    budget_exhausted: bool
    stopping_rule: str
    config: RunConfig
    trace: list[Iteration] = field(default_factory=list)
    m_max: int | None = None
    vertex_diameter: int | None = None

    @property
    def certified(self) -> bool:
        return not self.budget_exhausted

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "nodes": list(self.nodes),
            "c_hat": self.c_hat,
            "total_samples": self.total_samples,
            "budget_exhausted": self.budget_exhausted,
            "certified": self.certified,
            "stopping_rule": self.stopping_rule,
            "m_max": self.m_max,
            "vertex_diameter": self.vertex_diameter,
            "config": self.config.to_dict(),
            "trace": [
                {"iter": it.i, "m": it.m, "delta_i": it.delta_i, "sd_bound": it.sd_bound,
                 "stopped": it.stopped, "seconds": it.seconds, "nodes": list(it.nodes),
                 "report": it.report.to_dict()}
                for it in self.trace
            ],
        }


TRACE_COLUMNS = ("iter", "m", "delta_i", "amcera", "wimpy", "r_tilde", "r_cap",
                 "nu", "xi", "eta", "c_hat", "stopped", "seconds")


def trace_rows(result: RunResult) -> list[dict]:
    """CSV rows; ``eta`` holds the SD bound of the variant that was run."""
    rows = []
    for it in result.trace:
        r = it.report
        rows.append({"iter": it.i, "m": it.m, "delta_i": it.delta_i, "amcera": r.amcera,
                     "wimpy": r.wimpy, "r_tilde": r.r_tilde, "r_cap": r.r_cap, "nu": r.nu,
                     "xi": r.xi, "eta": it.sd_bound, "c_hat": r.c_hat,
                     "stopped": int(it.stopped), "seconds": round(it.seconds, 6)})
    return rows


def stopping_condition(c_hat: float, xi: float, eta: float, eps: float) -> bool:
    """Greedy output is a (1-1/e-eps)-approximation once this holds."""
    return GREEDY_RATIO * ((GREEDY_RATIO - eps) * xi + eta) <= eps * c_hat


def union_stopping_condition(c_hat: float, eta_ub: float, eps: float) -> bool:
    """Two-sided uniform deviation ``eta_ub``: ``c_hat - eta_ub`` lower-bounds the optimum."""
    return 2.0 * eta_ub <= eps * max(0.0, c_hat - eta_ub)


def _smallest_m(holds: Callable[[float], bool], lo: float) -> int | None:
    """Smallest integer ``m > lo`` with ``holds(m)``, for ``holds`` monotone in ``m``.

    Bisects on a log scale. Returns None when no ``m`` up to 2^62 satisfies it.
    """
    lo = max(lo, 1.0)
    if holds(lo):
        return math.floor(lo)
    hi = 2.0 * lo
    while not holds(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 2.0**62:
            return None
    for _ in range(_BISECT_ITERS):
        if hi - lo <= max(1.0, _BISECT_RTOL * lo):
            break
        mid = math.sqrt(lo * hi)
        if holds(mid):
            hi = mid
        else:
            lo = mid
    # hi satisfies the test and hi - lo is small, so this scan is short
    m = max(math.ceil(lo), 1)
    while not holds(m):
        m += 1
    return m


class _Bounder:
    """Evaluates the configured variant's SD bound and stopping test."""

    def __init__(self, g: Graph, cfg: RunConfig, dk: float | None):
        self.n = g.n
        self.cfg = cfg
        self.dk = dk

    def xi_split(self) -> int:
        return 2 if self.cfg.variant == "centra-vc" else 5

    def optimistic_sd(self, m: float, delta_i: float) -> float:
        v = self.cfg.variant
        if v == "centra-vc":
            return bounds.sd_bound_vc(self.dk, m, delta_i / 2, self.cfg.c_const)
        if v == "hedge-p":
            return bounds.sd_bound_union(max(self.n, 2), self.cfg.k, m, delta_i)
        return bounds.eta_optimistic(m, delta_i)

    def holds(self, c_hat: float, xi: float, sd: float) -> bool:
        if self.cfg.variant == "hedge-p":
            return union_stopping_condition(c_hat, sd, self.cfg.eps)
        return stopping_condition(c_hat, xi, sd, self.cfg.eps)

    def first_m(self, delta_1: float) -> int:
        target = self.cfg.eps / 2
        m = _smallest_m(lambda x: self.optimistic_sd(x, delta_1) <= target, 1.0)
        return 1 if m is None else max(1, m)

    def next_m(self, prev_m: int, c_est: float, delta_i: float) -> int:
        geometric = max(math.ceil(self.cfg.alpha * prev_m), prev_m + 1)

        def borderline(x: float) -> bool:
            xi = bounds.xi(c_est, x, delta_i, self.xi_split())
            return self.holds(c_est, xi, self.optimistic_sd(x, delta_i))

        m_opt = _smallest_m(borderline, float(prev_m))
        if m_opt is None:
            return geometric
        return max(geometric, m_opt)


def sampling_schedule(prev_m: int, c_est: float, delta_i: float, g: Graph, cfg: RunConfig,
                      dk: float | None = None) -> int:
    """Sample size for the iteration run at confidence ``delta_i``.

    ``prev_m = 0`` gives the first size, where the optimistic SD bound meets
    ``eps / 2``. Later sizes take the larger of the geometric step and the
    smallest size at which the stopping test could pass if ``c_est`` stayed
    put and no Rademacher signal were present.
    """
    b = _Bounder(g, cfg, dk)
    if prev_m <= 0:
        return b.first_m(delta_i)
    return b.next_m(prev_m, c_est, delta_i)


def _vc_dims(b: int, k: int) -> tuple[int, float]:
    d1 = bounds.vc_dim_1_bound(max(b, 1))
    return d1, bounds.vc_dim_k_bound(d1, k)


def evaluate_bounds(sample: Sample, state: RademacherState | None, n: int, k: int,
                    delta: float, dk_info: tuple[int, float] | None = None,
                    c_const: float = bounds.DEFAULT_VC_CONSTANT,
                    xi_split: int = 5) -> tuple[BoundReport, tuple[int, ...]]:
    """Greedy set and every available bound on one sample at confidence ``delta``."""
    res = greedy_cover(k, sample)
    c_hat = res.coverage
    m = sample.m
    xi = bounds.xi(c_hat, m, delta, xi_split)
    report = BoundReport(m=m, t=state.t if state else 0, k=k, delta=delta, c_hat=c_hat,
                         xi=xi, nu=c_hat / GREEDY_RATIO + xi,
                         eta_ub=bounds.sd_bound_union(max(n, 2), k, m, delta))
    if state is not None:
        amc, w = state.amcera(k), state.wimpy_variance(k)
        terms = bounds.eta(amc, w, state.t, m, delta, c_hat)
        report.amcera, report.wimpy = amc, w
        report.r_tilde, report.r_cap, report.eta = terms.r_tilde, terms.r_cap, terms.eta
    if dk_info is not None:
        report.d1, report.dk = dk_info
        report.eps_vc = bounds.sd_bound_vc(report.dk, m, delta, c_const)
    return report, res.nodes


def run(g: Graph, cfg: RunConfig) -> RunResult:
    """Progressive sampling until the variant's stopping test passes or the budget ends."""
    variant = cfg.variant
    vd = cfg.b
    if vd is None and variant == "centra-vc":
        vd = vertex_diameter_exact(g)
    dk_info = _vc_dims(vd, cfg.k) if vd is not None else None
    dk = dk_info[1] if dk_info else None

    if variant == "fixed-m":
        m_max = cfg.m_max
    elif cfg.m_max is not None:
        m_max = cfg.m_max
    elif dk is not None and cfg.c_star_lower is not None:
        m_max = bounds.sample_size_vc(dk, cfg.delta, cfg.eps, cfg.c_star_lower, cfg.c_const)
    else:
        m_max = DEFAULT_M_CAP

    bounder = _Bounder(g, cfg, dk)
    sample_seed = derive_seed(cfg.seed, 1)
    sign_seed = derive_seed(cfg.seed, 2)
    sample = Sample(n=g.n)
    use_rademacher = variant in ("centra", "fixed-m")
    state = RademacherState(cfg.t, seed=sign_seed) if use_rademacher else None
    trace: list[Iteration] = []
    nodes: tuple[int, ...] = ()
    c_hat = 0.0
    stopped = False

    with ParallelSampler(g, sample_seed, workers=cfg.workers) as sampler:
        i = 0
        while True:
            i += 1
            delta_i = cfg.delta / 2**i
            if variant == "fixed-m":
                m_i = m_max
            else:
                m_i = sampling_schedule(sample.m, c_hat if i > 1 else 1.0, delta_i, g, cfg, dk)
                m_i = min(max(m_i, sample.m + 1), m_max)
            t0 = time.perf_counter()
            batch = sampler.draw(sample.m, m_i - sample.m)
            if state is not None:
                state.extend(batch, sample.m)
            sample.extend(batch)
            report, nodes = evaluate_bounds(sample, state, g.n, cfg.k, delta_i,
                                            dk_info, cfg.c_const, bounder.xi_split())
            c_hat = report.c_hat
            if variant in ("centra", "fixed-m"):
                sd = report.eta
            elif variant == "centra-vc":
                sd = bounds.sd_bound_vc(dk, m_i, delta_i / 2, cfg.c_const)
            else:
                sd = report.eta_ub
            stopped = bounder.holds(c_hat, report.xi, sd)
            seconds = time.perf_counter() - t0
            trace.append(Iteration(i=i, m=m_i, delta_i=delta_i, report=report, sd_bound=sd,
                                   stopped=stopped, seconds=seconds, nodes=nodes))
            log.info("iter %d m=%d c_hat=%.5f sd=%.5g stop=%s", i, m_i, c_hat, sd, stopped)
            if stopped or m_i >= m_max or variant == "fixed-m":
                break

    if not stopped:
        log.warning("sample budget %d exhausted; guarantee not certified", m_max)
    return RunResult(nodes=nodes, c_hat=c_hat, variant=variant, total_samples=sample.m,
                     budget_exhausted=not stopped, stopping_rule=RULES[variant], config=cfg,
                     trace=trace, m_max=m_max, vertex_diameter=vd)


def bound_report(g: Graph, m: int, k: int, delta: float = 0.05, t: int = 100, seed: int = 0,
                 b: int | None = None, c_const: float = bounds.DEFAULT_VC_CONSTANT,
                 workers: int = 1) -> BoundReport:
    """All bounds on one shared sample of size ``m``, each at confidence ``delta``.

    Pass ``b`` to get the VC bound; otherwise it is left empty.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    sample, state = draw_sample(g, m, t, seed, workers)
    dk_info = _vc_dims(b, k) if b is not None else None
    report, _ = evaluate_bounds(sample, state, g.n, k, delta, dk_info, c_const)
    return report


def draw_sample(g: Graph, m: int, t: int, seed: int = 0,
                workers: int = 1) -> tuple[Sample, RademacherState]:
    """Sample and sign table exactly as ``run`` would build them for ``seed``."""
    with ParallelSampler(g, derive_seed(seed, 1), workers=workers) as sampler:
        batch = sampler.draw(0, m)
    state = RademacherState(t, seed=derive_seed(seed, 2)).extend(batch, 0)
    return Sample.from_edges(batch, g.n), state
