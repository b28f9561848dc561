"""Discrete-event simulation of switch/controller feedback, the model's oracle.

The simulator reproduces the real forwarding semantics rather than any queueing
abstraction: packets arrive at their entry node as a Poisson stream, each is
independently marked "new flow" with that node's q_nf on arrival, every switch
visit is one FIFO exponential service, a new-flow packet goes from its first
switch service to the controller's FIFO queue, receives one exponential service
there, re-enters its entry node's queue for a second, freshly drawn service and
only then proceeds downstream.  A packet visits the controller at most once
(asserted on every visit).

Engine design, fixed for reproducibility:

* future-event list: binary heap keyed by (event_time, sequence number); the
  monotonically increasing sequence number breaks time ties deterministically;
* one named random stream per stochastic source (per-node arrivals, per-node
  switch services, per-node flow marking, controller services), all spawned
  from the master seed, so a parameter change in one source never shifts the
  draws of another;
* per replication, arrivals stop once ``packets_per_replication`` packets have
  been admitted and the system drains; the first ``warmup_fraction`` of
  departures is discarded from statistics;
* retained sojourn samples are capped per run at 10**6 by uniform reservoir
  sampling with its own streams.

Identical (seed, config, parameters) give bit-identical results.  Replications
run sequentially and are merged by replication index, so output never depends
on scheduling.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass

import numpy as np

from .analytic import ChainModel, ControllerParams, NodeParams

_BLOCK = 1 << 14
SAMPLE_CAP = 1_000_000
_Z95 = 1.96


@dataclass(frozen=True)
class SimConfig:
    """Replication plan for one experiment."""

    seed: int = 12345
    packets_per_replication: int = 200_000
    replications: int = 5
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned int, got {self.seed}")
        if self.packets_per_replication < 10_000:
            raise ValueError("packets_per_replication must be >= 10000, got "
                             f"{self.packets_per_replication}")
        if self.replications < 2:
            raise ValueError("need >= 2 replications for a confidence interval, "
                             f"got {self.replications}")
        if not 0.0 <= self.warmup_fraction < 0.5:
            raise ValueError("warmup_fraction must be in [0, 0.5), got "
                             f"{self.warmup_fraction}")


@dataclass(eq=False)
class SimResult:
    """Replication statistics for one traffic class (or the aggregate).

    mean_sojourn               mean of the per-replication means (seconds)
    ci_halfwidth               1.96 * s / sqrt(R) over replication means
                               (normal 95% interval)
    per_replication_means      one mean per replication, in replication order
    empirical_ccdf             sorted retained sojourn samples (reservoir-
                               capped at SAMPLE_CAP across the whole run)
    controller_visit_fraction  measured fraction of packets that visited the
                               controller
    """

    mean_sojourn: float
    ci_halfwidth: float
    per_replication_means: tuple[float, ...]
    empirical_ccdf: np.ndarray
    controller_visit_fraction: float


@dataclass(eq=False)
class ChainSimResult:
    """Per-class results (class i enters at node i) plus the aggregate."""

    per_class: tuple[SimResult, ...]
    aggregate: SimResult


class _Reservoir:
    """Uniform reservoir of at most ``cap`` samples, fed in a fixed order."""

    __slots__ = ("cap", "rng", "seen", "items")

    def __init__(self, cap: int, rng: np.random.Generator):
        self.cap = cap
        self.rng = rng
        self.seen = 0
        self.items: list[float] = []

    def extend(self, values: list[float]) -> None:
        items = self.items
        cap = self.cap
        start = 0
        if len(items) < cap:
            take = min(cap - len(items), len(values))
            items.extend(values[:take])
            self.seen += take
            start = take
        m = len(values) - start
        if m <= 0:
            return
        # Algorithm R, vectorized: sample i (0-based global index `seen`)
        # replaces a random slot with probability cap / (seen + 1).
        idx = self.seen + np.arange(1, m + 1, dtype=np.float64)
        slots = (self.rng.random(m) * idx).astype(np.int64)
        mask = slots < cap
        arr = np.asarray(items)
        arr[slots[mask]] = np.asarray(values[start:], dtype=np.float64)[mask]
        self.items = arr.tolist()
        self.seen += m

    def sorted_array(self) -> np.ndarray:
        return np.sort(np.asarray(self.items, dtype=np.float64))


def run_single_node(node: NodeParams, ctrl: ControllerParams, cfg: SimConfig,
                    audit: bool = False) -> SimResult:
    """Simulate one node with its controller; returns the aggregate statistics.

    Equivalent to a 1-node :func:`run_chain` (same seed gives the identical
    sample path).  No stability requirement: saturated runs are allowed and
    simply show growing delays.
    """
    chain = ChainModel(nodes=(node,), controller=ctrl)
    return _run_experiment(chain, cfg, audit).aggregate


def run_chain(chain: ChainModel, cfg: SimConfig, audit: bool = False) -> ChainSimResult:
    """Simulate a tandem chain sharing one controller.

    External class-i packets enter node i; new-flow marking applies only at a
    packet's entry node; controller returns rejoin the entry node's queue and
    then transit every downstream node with one FIFO exponential service each.
    """
    return _run_experiment(chain, cfg, audit)


def _run_experiment(chain: ChainModel, cfg: SimConfig, audit: bool) -> ChainSimResult:
    n = len(chain.nodes)
    reps = cfg.replications
    root = np.random.SeedSequence(cfg.seed)
    children = root.spawn(reps + n + 1)
    rep_seeds = children[:reps]
    class_reservoirs = [_Reservoir(SAMPLE_CAP, np.random.default_rng(children[reps + i]))
                        for i in range(n)]
    agg_reservoir = _Reservoir(SAMPLE_CAP, np.random.default_rng(children[reps + n]))

    cutoff = int(cfg.warmup_fraction * cfg.packets_per_replication)
    class_rep_means: list[list[float]] = [[] for _ in range(n)]
    agg_rep_means: list[float] = []
    class_counts = [0] * n
    class_visits = [0] * n
    agg_count = 0
    agg_visits = 0

    for r in range(reps):
        (c_sums, c_counts, c_visits, c_samples, all_samples
         ) = _run_replication(chain, cfg.packets_per_replication, cutoff,
                              rep_seeds[r], audit)
        for i in range(n):
            class_rep_means[i].append(c_sums[i] / c_counts[i] if c_counts[i] else float("nan"))
            class_counts[i] += c_counts[i]
            class_visits[i] += c_visits[i]
            class_reservoirs[i].extend(c_samples[i])
        measured = sum(c_counts)
        agg_rep_means.append(sum(c_sums) / measured if measured else float("nan"))
        agg_count += measured
        agg_visits += sum(c_visits)
        agg_reservoir.extend(all_samples)

    def _result(means: list[float], reservoir: _Reservoir, visits: int,
                count: int) -> SimResult:
        arr = np.asarray(means, dtype=np.float64)
        mean = float(np.mean(arr))
        ci = float(_Z95 * np.std(arr, ddof=1) / np.sqrt(len(arr)))
        return SimResult(
            mean_sojourn=mean,
            ci_halfwidth=ci,
            per_replication_means=tuple(means),
            empirical_ccdf=reservoir.sorted_array(),
            controller_visit_fraction=visits / count if count else float("nan"),
        )

    per_class = tuple(_result(class_rep_means[i], class_reservoirs[i],
                              class_visits[i], class_counts[i]) for i in range(n))
    aggregate = _result(agg_rep_means, agg_reservoir, agg_visits, agg_count)
    return ChainSimResult(per_class=per_class, aggregate=aggregate)


def _run_replication(chain: ChainModel, n_packets: int, cutoff: int,
                     seed_seq: np.random.SeedSequence, audit: bool):
    """One replication; returns per-class sums/counts/visits/samples and the
    departure-ordered measured sojourn list."""
    n = len(chain.nodes)
    lams = [nd.lam for nd in chain.nodes]
    qs = [nd.q_nf for nd in chain.nodes]
    switch_scales = [1.0 / nd.mu_switch for nd in chain.nodes]
    ctrl_scale = 1.0 / chain.controller.mu_controller

    streams = seed_seq.spawn(3 * n + 1)
    arr_rngs = [np.random.default_rng(streams[3 * i]) for i in range(n)]
    svc_rngs = [np.random.default_rng(streams[3 * i + 1]) for i in range(n)]
    mark_rngs = [np.random.default_rng(streams[3 * i + 2]) for i in range(n)]
    ctrl_rng = np.random.default_rng(streams[3 * n])

    arr_scales = [1.0 / l for l in lams]
    arr_bufs = [arr_rngs[i].exponential(arr_scales[i], _BLOCK).tolist() for i in range(n)]
    arr_idx = [0] * n
    svc_bufs = [svc_rngs[i].exponential(switch_scales[i], _BLOCK).tolist() for i in range(n)]
    svc_idx = [0] * n
    mark_bufs = [mark_rngs[i].random(_BLOCK).tolist() for i in range(n)]
    mark_idx = [0] * n
    ctrl_buf = ctrl_rng.exponential(ctrl_scale, _BLOCK).tolist()
    ctrl_idx = 0

    heap: list[tuple[float, int, int]] = []
    push = heapq.heappush
    pop = heapq.heappop
    seq = 0

    switch_q: list[deque[int]] = [deque() for _ in range(n)]
    sw_busy = [-1] * n
    ctrl_q: deque[int] = deque()
    ct_busy = -1

    arr_t: list[float] = []
    entry: list[int] = []
    newflow: list[bool] = []
    visits: list[int] = []

    admitted = 0
    departed = 0

    c_sums = [0.0] * n
    c_counts = [0] * n
    c_visits = [0] * n
    c_samples: list[list[float]] = [[] for _ in range(n)]
    all_samples: list[float] = []

    if audit:
        # FIFO audit: every join of a station's queue gets a per-station stamp;
        # service starts must consume stamps in increasing order.
        stamp_q: list[deque[int]] = [deque() for _ in range(n + 1)]  # last is controller
        enq_counter = [0] * (n + 1)
        last_started = [-1] * (n + 1)

    # kick off one pending arrival per class
    for i in range(n):
        push(heap, (arr_bufs[i][0], seq, i))
        arr_idx[i] = 1
        seq += 1

    two_n = 2 * n
    while departed < n_packets:
        t, _, code = pop(heap)
        if code < n:
            # external arrival at node `code`
            i = code
            if admitted < n_packets:
                pid = admitted
                admitted += 1
                arr_t.append(t)
                entry.append(i)
                visits.append(0)
                j = mark_idx[i]
                if j == _BLOCK:
                    mark_bufs[i] = mark_rngs[i].random(_BLOCK).tolist()
                    j = 0
                newflow.append(mark_bufs[i][j] < qs[i])
                mark_idx[i] = j + 1
                if sw_busy[i] < 0:
                    sw_busy[i] = pid
                    j = svc_idx[i]
                    if j == _BLOCK:
                        svc_bufs[i] = svc_rngs[i].exponential(switch_scales[i], _BLOCK).tolist()
                        j = 0
                    push(heap, (t + svc_bufs[i][j], seq, n + i))
                    svc_idx[i] = j + 1
                    seq += 1
                    if audit:
                        enq_counter[i] += 1
                        assert enq_counter[i] > last_started[i]
                        last_started[i] = enq_counter[i]
                else:
                    switch_q[i].append(pid)
                    if audit:
                        enq_counter[i] += 1
                        stamp_q[i].append(enq_counter[i])
                if admitted < n_packets:
                    j = arr_idx[i]
                    if j == _BLOCK:
                        arr_bufs[i] = arr_rngs[i].exponential(arr_scales[i], _BLOCK).tolist()
                        j = 0
                    push(heap, (t + arr_bufs[i][j], seq, i))
                    arr_idx[i] = j + 1
                    seq += 1
        elif code < two_n:
            # switch service completion at node i
            i = code - n
            pid = sw_busy[i]
            if newflow[pid] and visits[pid] == 0 and entry[pid] == i:
                # first pass at the entry node of a new flow: to the controller
                assert visits[pid] == 0, "packet would visit the controller twice"
                visits[pid] = 1
                if ct_busy < 0:
                    ct_busy = pid
                    j = ctrl_idx
                    if j == _BLOCK:
                        ctrl_buf = ctrl_rng.exponential(ctrl_scale, _BLOCK).tolist()
                        j = 0
                    push(heap, (t + ctrl_buf[j], seq, two_n))
                    ctrl_idx = j + 1
                    seq += 1
                    if audit:
                        enq_counter[n] += 1
                        assert enq_counter[n] > last_started[n]
                        last_started[n] = enq_counter[n]
                else:
                    ctrl_q.append(pid)
                    if audit:
                        enq_counter[n] += 1
                        stamp_q[n].append(enq_counter[n])
            elif i + 1 < n:
                # continue downstream
                k = i + 1
                if sw_busy[k] < 0:
                    sw_busy[k] = pid
                    j = svc_idx[k]
                    if j == _BLOCK:
                        svc_bufs[k] = svc_rngs[k].exponential(switch_scales[k], _BLOCK).tolist()
                        j = 0
                    push(heap, (t + svc_bufs[k][j], seq, n + k))
                    svc_idx[k] = j + 1
                    seq += 1
                    if audit:
                        enq_counter[k] += 1
                        assert enq_counter[k] > last_started[k]
                        last_started[k] = enq_counter[k]
                else:
                    switch_q[k].append(pid)
                    if audit:
                        enq_counter[k] += 1
                        stamp_q[k].append(enq_counter[k])
            else:
                # departure
                idx = departed
                departed += 1
                if idx >= cutoff:
                    soj = t - arr_t[pid]
                    cls = entry[pid]
                    c_sums[cls] += soj
                    c_counts[cls] += 1
                    c_visits[cls] += visits[pid]
                    c_samples[cls].append(soj)
                    all_samples.append(soj)
            if switch_q[i]:
                nxt = switch_q[i].popleft()
                sw_busy[i] = nxt
                j = svc_idx[i]
                if j == _BLOCK:
                    svc_bufs[i] = svc_rngs[i].exponential(switch_scales[i], _BLOCK).tolist()
                    j = 0
                push(heap, (t + svc_bufs[i][j], seq, n + i))
                svc_idx[i] = j + 1
                seq += 1
                if audit:
                    stamp = stamp_q[i].popleft()
                    assert stamp > last_started[i], "switch FIFO order violated"
                    last_started[i] = stamp
            else:
                sw_busy[i] = -1
        else:
            # controller service completion: back to the entry node's queue
            pid = ct_busy
            i = entry[pid]
            if sw_busy[i] < 0:
                sw_busy[i] = pid
                j = svc_idx[i]
                if j == _BLOCK:
                    svc_bufs[i] = svc_rngs[i].exponential(switch_scales[i], _BLOCK).tolist()
                    j = 0
                push(heap, (t + svc_bufs[i][j], seq, n + i))
                svc_idx[i] = j + 1
                seq += 1
                if audit:
                    enq_counter[i] += 1
                    assert enq_counter[i] > last_started[i]
                    last_started[i] = enq_counter[i]
            else:
                switch_q[i].append(pid)
                if audit:
                    enq_counter[i] += 1
                    stamp_q[i].append(enq_counter[i])
            if ctrl_q:
                nxt = ctrl_q.popleft()
                ct_busy = nxt
                j = ctrl_idx
                if j == _BLOCK:
                    ctrl_buf = ctrl_rng.exponential(ctrl_scale, _BLOCK).tolist()
                    j = 0
                push(heap, (t + ctrl_buf[j], seq, two_n))
                ctrl_idx = j + 1
                seq += 1
                if audit:
                    stamp = stamp_q[n].popleft()
                    assert stamp > last_started[n], "controller FIFO order violated"
                    last_started[n] = stamp
            else:
                ct_busy = -1
        if audit:
            in_system = (sum(len(qd) for qd in switch_q) + len(ctrl_q)
                         + sum(1 for b in sw_busy if b >= 0) + (1 if ct_busy >= 0 else 0))
            assert admitted == departed + in_system, "packet conservation violated"

    return c_sums, c_counts, c_visits, c_samples, all_samples
