"""Parameter schedule and analysis-side bounds derived from (n, d, l).

Single source of truth for every constant the diagnostics use. Logarithms
without an explicit base are natural; log_d and log_{d-1} are explicit-base.
All bound values are order-of-magnitude guides evaluated with unit constants,
not certified quantities.

Field guide for DerivedParams:
  r_g     choice spacing: 1 in dense mode, ceil(2*log_{d-1} ln n) in sparse.
  gamma   sqrt(log_d n) in dense mode, sqrt(log_d n / r_g) in sparse.
  k       number of walk segments used by the witness construction,
          max(4, floor(l / gamma)).
  delta   segment margin floor(floor(l/k)/4); 0 disables rho-dependent
          machinery but never blocks a simulation.
  rho     load drop allowed per branch step, ceil(C*log_d n/delta^2) with
          C = rho_constant (6 by default, 8 as a variant).
  h       witness tree depth, ceil(ln ln n / ln(k-2)).
  tau     reference multiplicity for the pigeonhole lower bound,
          log_d n / (6*l*r_g).
  ndelta_threshold     per-subpath multiplicity cap 6*log_{d-1} n / delta.
  ndelta_threshold_pb  the 12*log_{d-1} n / delta variant used when both
                       endpoint margins are charged together.
  n1_fraction          reference horizon fraction 1/(6*e*alpha) with the
                       analytical alpha = 22(l+1)/l; the empirical alpha
                       lives in metrics.estimate_uniformity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

RHO_CONSTANTS = (6, 8)


@dataclass(frozen=True)
class DerivedParams:
    n: int
    d: int
    l: int
    mode: str
    log_d_n: float
    gamma: float
    r_g: int
    k: int
    delta: int
    rho: int | None
    h: int
    n1_fraction: float
    tau: float
    ndelta_threshold: float | None
    ndelta_threshold_pb: float | None
    rho_constant: int = 6
    degenerate: bool = False          # delta == 0
    sparse_degree_ok: bool | None = None

    def n1(self) -> int:
        return int(self.n1_fraction * self.n)


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bound guides for one parameter point.

    regime I: l below 4*gamma, guide log_d n * lnln n / (r_g * l^2).
    regime II: l at or above 4*gamma, guide lnln n / ln(l/gamma).
    The lower guide is log_d n / (r_g * l^2) in both regimes.
    """

    regime: str
    upper_bound: float
    lower_bound: float
    threshold_load: int | None
    available: bool
    note: str | None = None


def derive(n: int, d: int, l: int, mode: str = "dense",
           rho_constant: int = 6) -> DerivedParams:
    """Compute the full schedule; degenerate cases flag instead of raising."""
    if n < 4:
        raise ValueError("n must be >= 4")
    if d < 3:
        raise ValueError("d must be >= 3")
    if l < 2:
        raise ValueError("l must be >= 2")
    if mode not in ("dense", "sparse"):
        raise ValueError(f"unknown mode {mode!r}")
    if rho_constant not in RHO_CONSTANTS:
        raise ValueError(f"rho_constant must be one of {RHO_CONSTANTS}")

    log_d_n = math.log(n) / math.log(d)
    sparse_degree_ok: bool | None = None
    if mode == "sparse":
        r_g = math.ceil(2 * math.log(math.log(n)) / math.log(d - 1))
        r_g = max(1, r_g)
        gamma = math.sqrt(log_d_n / r_g)
        # the analysis wants d = O(log n); 2 is an arbitrary desk-scale constant
        sparse_degree_ok = d <= 2 * math.log(n)
    else:
        r_g = 1
        gamma = math.sqrt(log_d_n)

    k = max(4, math.floor(l / gamma))
    delta = (l // k) // 4
    degenerate = delta == 0
    if degenerate:
        rho = None
        ndelta_threshold = None
        ndelta_threshold_pb = None
    else:
        rho = math.ceil(rho_constant * log_d_n / delta ** 2)
        ndelta_threshold = 6 * math.log(n) / math.log(d - 1) / delta
        ndelta_threshold_pb = 2 * ndelta_threshold
    h = max(1, math.ceil(math.log(math.log(n)) / math.log(k - 2)))
    alpha_ref = 22 * (l + 1) / l
    n1_fraction = 1.0 / (6 * math.e * alpha_ref)
    tau = log_d_n / (6 * l * r_g)
    return DerivedParams(
        n=n, d=d, l=l, mode=mode,
        log_d_n=log_d_n, gamma=gamma, r_g=r_g, k=k, delta=delta, rho=rho,
        h=h, n1_fraction=n1_fraction, tau=tau,
        ndelta_threshold=ndelta_threshold,
        ndelta_threshold_pb=ndelta_threshold_pb,
        rho_constant=rho_constant,
        degenerate=degenerate,
        sparse_degree_ok=sparse_degree_ok,
    )


def bounds(p: DerivedParams, c: int = 1) -> BoundReport:
    """Classify the regime and evaluate the bound guides with unit constants.

    The boundary l == 4*gamma belongs to regime II. With degenerate params the
    threshold load is unavailable and the report is marked accordingly.
    """
    loglog = math.log(math.log(p.n))
    if p.l >= 4 * p.gamma:
        regime = "II"
        upper = loglog / math.log(p.l / p.gamma)
    else:
        regime = "I"
        upper = p.log_d_n * loglog / (p.r_g * p.l ** 2)
    lower = p.log_d_n / (p.r_g * p.l ** 2)
    note = None
    if 0.5 <= p.l / p.gamma <= 2.0:
        note = "l is near gamma: expected maximum load scale is lnln n"
    if p.degenerate:
        return BoundReport(regime=regime, upper_bound=upper, lower_bound=lower,
                           threshold_load=None, available=False, note=note)
    return BoundReport(regime=regime, upper_bound=upper, lower_bound=lower,
                       threshold_load=p.h * p.rho + c + 1, available=True,
                       note=note)
