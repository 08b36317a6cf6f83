"""Conservative kinetic wealth-exchange Monte Carlo.

Agents meet pairwise and trade a random fraction of their unsaved wealth:
with saving propensities lam_i, lam_j and eps ~ U(0,1),

    dx   = (1 - eps) (1 - lam_i) x_i - eps (1 - lam_j) x_j
    x_i' = x_i - dx,   x_j' = (x_i + x_j) - x_i'

The pairwise-sum form plus an error-free carry ledger (see _exchange_chunk)
keeps the total money bit-identical under math.fsum across any number of
exchanges.  Realizations are independent, seeded from a spawned
SeedSequence, and merged in index order, so results are reproducible and
independent of the thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numba
import numpy as np

from .errors import DomainError
from .inequality import empirical_gini

__all__ = [
    "AgentState",
    "SimConfig",
    "WealthHistogram",
    "SimResult",
    "exchange_step",
    "run",
    "total_money",
    "gini_now",
    "log_binned_histogram",
]

_LAMBDA_MAX = 1.0 - 1e-6  # cap keeps near-unity savers from freezing numerically
_CHUNK = 2_000_000        # exchanges per pregenerated random block


@dataclass
class AgentState:
    """Wealth and saving-propensity vectors, plus the conservation carry.

    ``carry`` holds the sub-ulp rounding residual of the exchange updates,
    folded back into the next update: math.fsum([*wealth, carry]) is
    bit-identical to the initial total, and fsum(wealth) alone matches it
    whenever the starting total is exactly representable (as in run()).
    """

    wealth: np.ndarray
    lam: np.ndarray
    carry: float = 0.0

    def __post_init__(self):
        self.wealth = np.asarray(self.wealth, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        if self.wealth.ndim != 1 or self.wealth.shape != self.lam.shape:
            raise DomainError("wealth and lam must be 1-D arrays of equal length")
        if self.wealth.size < 2:
            raise DomainError("need at least 2 agents")
        if not np.all(np.isfinite(self.wealth)) or np.any(self.wealth < 0.0):
            raise DomainError("wealth must be finite and nonnegative")
        if np.any(self.lam < 0.0) or np.any(self.lam >= 1.0):
            raise DomainError("saving propensities must lie in [0, 1)")


@dataclass
class SimConfig:
    """Run parameters; JSON round-trippable via to_json/from_json.

    lambda_mode: "homogeneous" (all agents at lambda_value), "uniform"
    (lambda_i ~ U[0,1) capped at lambda_max, redrawn per realization unless
    fix_lambdas), or "custom" (lambda_vector used as-is).  n_exchanges
    counts single pairwise trades, not sweeps.  One histogram snapshot is
    taken every snapshot_every sweeps (1 sweep = n_agents exchanges) after
    the thermalization fraction is discarded.
    """

    n_agents: int = 1000
    mean_money: float = 1.0
    n_exchanges: int = 10_000_000
    n_realizations: int = 100
    lambda_mode: str = "uniform"
    lambda_value: float = 0.0
    lambda_vector: list | None = None
    seed: int = 0
    thermalization_fraction: float = 0.5
    snapshot_every: int = 1
    n_bins: int = 60
    x_min: float | None = None
    x_max: float | None = None
    max_pooled: int = 2_000_000
    fix_lambdas: bool = False
    lambda_max: float = _LAMBDA_MAX
    n_threads: int = 1

    def __post_init__(self):
        if self.n_agents < 2:
            raise DomainError("n_agents must be >= 2")
        if not self.mean_money > 0.0:
            raise DomainError("mean_money must be positive")
        if self.n_exchanges < 1 or self.n_realizations < 1:
            raise DomainError("n_exchanges and n_realizations must be >= 1")
        if not 0.0 <= self.thermalization_fraction < 1.0:
            raise DomainError("thermalization_fraction must lie in [0, 1)")
        if self.lambda_mode not in ("homogeneous", "uniform", "custom"):
            raise DomainError(f"unknown lambda_mode {self.lambda_mode!r}")
        if not 0.0 <= self.lambda_value < 1.0:
            raise DomainError("lambda_value must lie in [0, 1)")
        if self.lambda_mode == "custom":
            v = np.asarray(self.lambda_vector, dtype=float)
            if v.shape != (self.n_agents,):
                raise DomainError("lambda_vector must have length n_agents")
            if np.any(v < 0.0) or np.any(v >= 1.0):
                raise DomainError("lambda_vector entries must lie in [0, 1)")
        if self.snapshot_every < 1 or self.n_bins < 1:
            raise DomainError("snapshot_every and n_bins must be >= 1")

    def histogram_range(self) -> tuple[float, float]:
        lo = self.mean_money * 1e-3 if self.x_min is None else self.x_min
        hi = self.mean_money * 1e3 if self.x_max is None else self.x_max
        if not (0.0 < lo < hi):
            raise DomainError("need 0 < x_min < x_max")
        return lo, hi

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        return cls(**json.loads(text))


@dataclass
class WealthHistogram:
    """Log-binned wealth density.

    density[i] = counts[i] / (n_total * (edges[i+1] - edges[i])), so
    sum(density * widths) == 1 exactly; n_total counts in-range samples
    only, with out-of-range tallies reported in underflow/overflow.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0
    density: np.ndarray = field(init=False)
    n_total: int = field(init=False)

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.bin_edges.size != self.counts.size + 1:
            raise DomainError("need len(bin_edges) == len(counts) + 1")
        self.n_total = int(self.counts.sum())
        widths = np.diff(self.bin_edges)
        if self.n_total > 0:
            self.density = self.counts / (self.n_total * widths)
        else:
            self.density = np.zeros_like(widths)

    @property
    def bin_centers(self) -> np.ndarray:
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# x_min={float(self.bin_edges[0])!r} "
                     f"x_max={float(self.bin_edges[-1])!r} "
                     f"n_bins={self.counts.size} underflow={self.underflow} "
                     f"overflow={self.overflow}\n")
            fh.write("bin_center,density,count\n")
            for c, d, k in zip(self.bin_centers, self.density, self.counts):
                fh.write(f"{c:.15g},{d:.15g},{k}\n")

    @classmethod
    def from_csv(cls, path) -> "WealthHistogram":
        with open(path) as fh:
            header = fh.readline()
            if not header.startswith("#"):
                raise DomainError(f"{path}: missing histogram header line")
            meta = dict(tok.split("=") for tok in header[1:].split())
            fh.readline()  # column names
            counts = [int(line.rsplit(",", 1)[1]) for line in fh if line.strip()]
        n_bins = int(meta["n_bins"])
        if len(counts) != n_bins:
            raise DomainError(f"{path}: expected {n_bins} rows, got {len(counts)}")
        edges = np.geomspace(float(meta["x_min"]), float(meta["x_max"]), n_bins + 1)
        return cls(edges, np.array(counts), int(meta["underflow"]),
                   int(meta["overflow"]))


@dataclass
class SimResult:
    histogram: WealthHistogram
    final_wealth: np.ndarray      # (n_realizations, n_agents)
    final_lambdas: np.ndarray
    pooled_samples: np.ndarray    # thinned post-thermalization snapshots
    totals_initial: np.ndarray
    totals_final: np.ndarray
    wall_time_s: float
    config: SimConfig


@numba.njit(cache=True, nogil=True)
def _exchange_chunk(wealth, lam, ii, jj, eps, carry, do_hist,
                    x_min, x_max, log_xmin, inv_dlog, counts, flows,
                    pool, pool_cap, state, snap_every, snap_thin):
    # state: [steps_until_snapshot, snapshot_index, pool_fill]
    n = wealth.shape[0]
    nbins = counts.shape[0]
    for k in range(ii.shape[0]):
        i = ii[k]
        j = jj[k]
        if j >= i:
            j += 1
        xi = wealth[i]
        xj = wealth[j]
        e = eps[k]
        dx = (1.0 - e) * (1.0 - lam[i]) * xi - e * (1.0 - lam[j]) * xj

        # Pairwise-sum update with exact error accounting: TwoSum residuals
        # of (xi + xj) and (s - xi') join the running carry, which is folded
        # into the larger updated wealth; sum(wealth) + carry is invariant.
        s = xi + xj
        t = s - xi
        e0 = (xi - (s - t)) + (xj - t)
        xi2 = xi - dx
        xj2 = s - xi2
        t = xj2 - s
        e2 = (s - (xj2 - t)) + ((-xi2) - t)
        r = (e0 + e2) + carry
        if xi2 < 0.0:   # sub-ulp negatives from dx rounding
            r += xi2
            xi2 = 0.0
        if xj2 < 0.0:
            r += xj2
            xj2 = 0.0
        if xi2 >= xj2:
            f = xi2 + r
            t = f - xi2
            carry = (xi2 - (f - t)) + (r - t)
            xi2 = f
        else:
            f = xj2 + r
            t = f - xj2
            carry = (xj2 - (f - t)) + (r - t)
            xj2 = f
        wealth[i] = xi2
        wealth[j] = xj2

        if do_hist:
            state[0] -= 1
            if state[0] == 0:
                state[0] = snap_every
                sidx = state[1]
                state[1] = sidx + 1
                for a in range(n):
                    x = wealth[a]
                    if x < x_min:
                        flows[0] += 1
                    elif x > x_max:
                        flows[1] += 1
                    else:
                        b = int((np.log(x) - log_xmin) * inv_dlog)
                        if b >= nbins:
                            b = nbins - 1
                        counts[b] += 1
                if sidx % snap_thin == 0 and state[2] + n <= pool_cap:
                    base = state[2]
                    for a in range(n):
                        pool[base + a] = wealth[a]
                    state[2] = base + n
    return carry


def exchange_step(state: AgentState, rng: np.random.Generator) -> AgentState:
    """One pairwise trade, in place; same arithmetic as the compiled kernel."""
    n = state.wealth.size
    ii = rng.integers(0, n, size=1, dtype=np.int64)
    jj = rng.integers(0, n - 1, size=1, dtype=np.int64)  # kernel shifts j past i
    eps = rng.random(1)
    state.carry = _exchange_chunk(
        state.wealth, state.lam, ii, jj, eps, state.carry,
        False, 0.0, 1.0, 0.0, 1.0, np.zeros(1, dtype=np.int64),
        np.zeros(2, dtype=np.int64), np.zeros(1), 0,
        np.zeros(3, dtype=np.int64), 1, 1)
    return state


def total_money(state: AgentState) -> float:
    """Exact (fsum) total wealth."""
    return math.fsum(state.wealth)


def gini_now(state: AgentState) -> float:
    """Empirical Gini of the current wealth vector."""
    return empirical_gini(state.wealth)


def _draw_lambdas(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    if config.lambda_mode == "homogeneous":
        return np.full(config.n_agents, config.lambda_value)
    if config.lambda_mode == "custom":
        return np.asarray(config.lambda_vector, dtype=float)
    return np.minimum(rng.random(config.n_agents), config.lambda_max)


def _run_one(config: SimConfig, seed_seq, lam_fixed, edges, pool_cap):
    n = config.n_agents
    rng = np.random.default_rng(seed_seq)
    lam = lam_fixed if lam_fixed is not None else _draw_lambdas(config, rng)
    wealth = np.full(n, config.mean_money)
    t0 = math.fsum(wealth)

    therm = int(config.thermalization_fraction * config.n_exchanges)
    sample = config.n_exchanges - therm
    snap_every = config.snapshot_every * n
    n_snap = sample // snap_every
    if n_snap < 1:
        raise DomainError(
            "config yields no post-thermalization snapshots; increase "
            "n_exchanges or lower thermalization_fraction")
    snap_thin = max(1, -(-(n_snap * n) // pool_cap))  # ceil division

    counts = np.zeros(config.n_bins, dtype=np.int64)
    flows = np.zeros(2, dtype=np.int64)
    pool = np.empty(pool_cap)
    kstate = np.zeros(3, dtype=np.int64)
    kstate[0] = snap_every
    x_min, x_max = edges[0], edges[-1]
    log_xmin = np.log(x_min)
    inv_dlog = config.n_bins / (np.log(x_max) - log_xmin)

    carry = 0.0
    for phase, todo in ((False, therm), (True, sample)):
        done = 0
        while done < todo:
            m = min(_CHUNK, todo - done)
            ii = rng.integers(0, n, size=m, dtype=np.int64)
            jj = rng.integers(0, n - 1, size=m, dtype=np.int64)
            eps = rng.random(m)
            carry = _exchange_chunk(
                wealth, lam, ii, jj, eps, carry, phase, x_min, x_max,
                log_xmin, inv_dlog, counts, flows, pool, pool_cap,
                kstate, snap_every, snap_thin)
            done += m

    return (wealth, lam, counts, flows, pool[: kstate[2]].copy(),
            t0, math.fsum(wealth))


def run(config: SimConfig) -> SimResult:
    """Run the full ensemble; deterministic given config (incl. seed)."""
    import time

    t_start = time.perf_counter()
    root = np.random.SeedSequence(config.seed)
    seqs = root.spawn(config.n_realizations + 1)

    lam_fixed = None
    if config.fix_lambdas or config.lambda_mode == "custom":
        lam_fixed = _draw_lambdas(config, np.random.default_rng(seqs[-1]))

    lo, hi = config.histogram_range()
    edges = np.geomspace(lo, hi, config.n_bins + 1)
    pool_cap = max(config.n_agents,
                   config.max_pooled // config.n_realizations)

    # warm the JIT cache before dispatching threads
    _exchange_chunk(np.ones(2), np.zeros(2), np.zeros(1, dtype=np.int64),
                    np.zeros(1, dtype=np.int64), np.full(1, 0.5), 0.0, False,
                    lo, hi, np.log(lo), 1.0, np.zeros(1, dtype=np.int64),
                    np.zeros(2, dtype=np.int64), np.zeros(2), 2,
                    np.array([9, 0, 0], dtype=np.int64), 9, 1)

    jobs = [(config, seqs[r], lam_fixed, edges, pool_cap)
            for r in range(config.n_realizations)]
    if config.n_threads > 1:
        with ThreadPoolExecutor(max_workers=config.n_threads) as ex:
            results = list(ex.map(lambda a: _run_one(*a), jobs))
    else:
        results = [_run_one(*a) for a in jobs]

    counts = np.zeros(config.n_bins, dtype=np.int64)
    under = over = 0
    pools = []
    n_r = config.n_realizations
    final_wealth = np.empty((n_r, config.n_agents))
    final_lam = np.empty((n_r, config.n_agents))
    tot_i = np.empty(n_r)
    tot_f = np.empty(n_r)
    for r, (w, lam, c, fl, pool, t0, t1) in enumerate(results):
        final_wealth[r] = w
        final_lam[r] = lam
        counts += c
        under += int(fl[0])
        over += int(fl[1])
        pools.append(pool)
        tot_i[r] = t0
        tot_f[r] = t1

    hist = WealthHistogram(edges, counts, under, over)
    return SimResult(hist, final_wealth, final_lam, np.concatenate(pools),
                     tot_i, tot_f, time.perf_counter() - t_start, config)


def log_binned_histogram(samples, n_bins: int, x_min: float | None = None,
                         x_max: float | None = None) -> WealthHistogram:
    """Log-spaced histogram of nonnegative samples.

    Samples below x_min (including exact zeros) land in the underflow
    tally, samples above x_max in the overflow tally; defaults cover the
    positive sample range exactly.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    if not np.all(np.isfinite(x)) or np.any(x < 0.0):
        raise DomainError("samples must be finite and nonnegative")
    pos = x[x > 0.0]
    if pos.size == 0:
        raise DomainError("no positive samples to bin")
    if x_min is None:
        x_min = pos.min() * (1.0 - 1e-12)
    if x_max is None:
        x_max = pos.max() * (1.0 + 1e-12)
    if not (0.0 < x_min < x_max):
        raise DomainError("need 0 < x_min < x_max")
    edges = np.geomspace(x_min, x_max, n_bins + 1)
    under = int(np.count_nonzero(x < x_min))
    over = int(np.count_nonzero(x > x_max))
    inside = pos[(pos >= x_min) & (pos <= x_max)]
    counts, _ = np.histogram(np.log(inside), bins=np.log(edges))
    return WealthHistogram(edges, counts, under, over)
