"""Discrete-event simulation of a cluster of limited-processor-sharing servers.

Jobs arrive as a Poisson stream; each job draws a task count from a Zipf
law and one task size from a heavy-tailed size distribution, is expanded by
the cluster-wide rate r into n = floor(r k) coded tasks, and is dispatched
to the n servers currently holding the fewest tasks (ties to the lowest
index). Up to ``ps_limit`` tasks time-share a server at equal rates; the
rest of that server's tasks wait FCFS. A job departs at its k-th task
completion and its n - k outstanding copies are removed immediately.

Processor sharing is simulated exactly by server-local virtual time (rate
1/m while m tasks are resident), so no time quanta are involved. A run is
deterministic for a given seed.

Every 50th arrival (configurable) is a probe job of fixed shape whose
latency (departure - arrival) and cost (summed service occupancy of its
copies; queueing time excluded by default) are the run's measurements.
"""

from __future__ import annotations

import heapq
import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .distributions import TaskDist, TruncatedPareto
from .errors import DomainError, InstabilityError
from .monte_carlo import EmpiricalMetrics, QUANTILE_GRID

__all__ = [
    "ZipfTaskCount",
    "ProbeClass",
    "ClusterConfig",
    "ClusterResult",
    "run_cluster",
    "export_exec_samples",
    "config_from_file",
]

DEFAULT_TARGET_LOAD = 0.3


@dataclass(frozen=True)
class ZipfTaskCount:
    """Task-count law Pr{K = k} proportional to k**-exponent on 1..max_k."""

    max_k: int = 100
    exponent: float = 1.5

    def __post_init__(self):
        if self.max_k < 1:
            raise DomainError(f"max_k must be >= 1, got {self.max_k}")
        if self.exponent <= 0:
            raise DomainError(f"exponent must be > 0, got {self.exponent}")

    def pmf(self) -> np.ndarray:
        w = np.arange(1, self.max_k + 1, dtype=float) ** (-self.exponent)
        return w / w.sum()

    def mean(self) -> float:
        return float(np.dot(self.pmf(), np.arange(1, self.max_k + 1)))


@dataclass(frozen=True)
class ProbeClass:
    """The measured job class, injected as every ``every``-th arrival."""

    k: int = 20
    size: float = 1.0
    every: int = 50

    def __post_init__(self):
        if self.k < 1 or self.size <= 0 or self.every < 1:
            raise DomainError("probe requires k >= 1, size > 0, every >= 1")


@dataclass(frozen=True)
class ClusterConfig:
    num_servers: int = 40
    ps_limit: int = 1
    arrival_rate: float | None = None  # None: sized for load 0.3 at r = 1
    task_size_dist: TaskDist = TruncatedPareto(1.0, 1e10, 1.1)
    task_count_dist: ZipfTaskCount = ZipfTaskCount(max_k=20)
    expansion_rate: float = 1.0
    probe_job: ProbeClass = ProbeClass()
    horizon_jobs: int | None = 6000  # number of arrivals to inject
    horizon_time: float | None = None
    warmup_jobs: int = 1500  # probes among the first warmup_jobs arrivals are not measured
    max_tasks_in_system: int = 500_000
    cost_includes_queue_wait: bool = False

    def __post_init__(self):
        if self.num_servers < 1 or self.ps_limit < 1:
            raise DomainError("need num_servers >= 1 and ps_limit >= 1")
        if self.expansion_rate < 1.0:
            raise DomainError(f"expansion_rate must be >= 1, got {self.expansion_rate}")
        if self.arrival_rate is not None and self.arrival_rate <= 0:
            raise DomainError(f"arrival_rate must be > 0, got {self.arrival_rate}")
        if self.horizon_jobs is None and self.horizon_time is None:
            raise DomainError("set horizon_jobs or horizon_time")
        biggest = max(self.task_count_dist.max_k, self.probe_job.k)
        if math.floor(self.expansion_rate * biggest) > self.num_servers:
            raise DomainError(
                "num_servers must accommodate floor(r * max task count) "
                f"({math.floor(self.expansion_rate * biggest)} > {self.num_servers})"
            )

    def effective_arrival_rate(self) -> float:
        if self.arrival_rate is not None:
            return self.arrival_rate
        work_per_job = self.task_count_dist.mean() * self.task_size_dist.mean()
        return DEFAULT_TARGET_LOAD * self.num_servers / work_per_job


def config_from_file(path) -> ClusterConfig:
    """Load a ClusterConfig from a JSON or TOML file."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib  # py >= 3.11
        except ImportError:  # pragma: no cover - depends on interpreter
            import tomli as tomllib
        data = tomllib.loads(text)
    else:
        data = json.loads(text)
    return _config_from_dict(data)


_SIZE_KINDS = {"truncated_pareto", "pareto", "exp", "sexp"}


def _config_from_dict(data: dict) -> ClusterConfig:
    from . import distributions as d

    kwargs = dict(data)
    if "task_size_dist" in kwargs:
        spec = dict(kwargs["task_size_dist"])
        kind = spec.pop("kind")
        if kind not in _SIZE_KINDS:
            raise DomainError(f"unknown task_size_dist kind {kind!r}")
        cls = {
            "truncated_pareto": d.TruncatedPareto,
            "pareto": d.Pareto,
            "exp": d.Exp,
            "sexp": d.SExp,
        }[kind]
        kwargs["task_size_dist"] = cls(**spec)
    if "task_count_dist" in kwargs:
        kwargs["task_count_dist"] = ZipfTaskCount(**kwargs["task_count_dist"])
    if "probe_job" in kwargs:
        kwargs["probe_job"] = ProbeClass(**kwargs["probe_job"])
    return ClusterConfig(**kwargs)


@dataclass(frozen=True)
class ClusterResult:
    probe_metrics: EmpiricalMetrics
    task_exec_samples: tuple
    utilization: float
    jobs_completed: int

    def summary_dict(self) -> dict:
        return {
            "probe_metrics": self.probe_metrics.to_dict(),
            "utilization": self.utilization,
            "jobs_completed": self.jobs_completed,
            "num_exec_samples": len(self.task_exec_samples),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary_dict(), indent=2)


def export_exec_samples(result: ClusterResult, path) -> None:
    """One execution time per line; readable by empirical_from_file."""
    if not result.task_exec_samples:
        raise DomainError("no execution-time samples to export")
    with open(path, "w") as fh:
        for v in result.task_exec_samples:
            fh.write(f"{v!r}\n")


# ---------------------------------------------------------------------------
# simulator internals


class _Task:
    __slots__ = ("job", "server", "size", "enter_service", "vfinish", "state")
    WAITING, RUNNING, DONE, REMOVED = 0, 1, 2, 3

    def __init__(self, job, size):
        self.job = job
        self.server = None
        self.size = size
        self.enter_service = None
        self.vfinish = None
        self.state = _Task.WAITING


class _Job:
    __slots__ = ("k", "arrival", "completed", "tasks", "is_probe", "done", "cost",
                 "arrival_index")

    def __init__(self, k, arrival, is_probe):
        self.k = k
        self.arrival = arrival
        self.completed = 0
        self.tasks = []
        self.is_probe = is_probe
        self.done = False
        self.cost = 0.0


class _Server:
    __slots__ = ("index", "ps_limit", "vtime", "t_last", "m", "heap", "queue",
                 "busy_time", "n_tasks", "event_version", "seq")

    def __init__(self, index, ps_limit, seq):
        self.index = index
        self.ps_limit = ps_limit
        self.vtime = 0.0
        self.t_last = 0.0
        self.m = 0  # residents sharing the processor
        self.heap = []  # (vfinish, seq, task); lazy deletion via task.state
        self.queue = deque()
        self.busy_time = 0.0
        self.n_tasks = 0  # residents + queued, the dispatch load metric
        self.event_version = 0
        self.seq = seq

    def advance(self, now):
        if now > self.t_last:
            if self.m > 0:
                self.vtime += (now - self.t_last) / self.m
                self.busy_time += now - self.t_last
            self.t_last = now

    def enter_service(self, task, now):
        task.state = _Task.RUNNING
        task.enter_service = now
        task.vfinish = self.vtime + task.size
        heapq.heappush(self.heap, (task.vfinish, next(self.seq), task))
        self.m += 1

    def peek_next(self):
        while self.heap and self.heap[0][2].state != _Task.RUNNING:
            heapq.heappop(self.heap)
        return self.heap[0] if self.heap else None

    def next_completion_time(self):
        head = self.peek_next()
        if head is None:
            return None
        return self.t_last + (head[0] - self.vtime) * self.m

    def fill_from_queue(self, now):
        while self.queue and self.m < self.ps_limit:
            task = self.queue.popleft()
            if task.state != _Task.WAITING:
                continue  # removed while queued
            self.enter_service(task, now)


class _Sim:
    def __init__(self, config: ClusterConfig, seed: int):
        self.config = config
        self.rng = np.random.default_rng(seed)
        self.seq = itertools.count()
        self.servers = [_Server(i, config.ps_limit, self.seq) for i in range(config.num_servers)]
        self.loads = np.zeros(config.num_servers, dtype=np.int64)
        self.indices = np.arange(config.num_servers)
        self.events = []  # (time, seq, kind, payload)
        self.now = 0.0
        self.rate = config.effective_arrival_rate()
        self.zipf_cdf = np.cumsum(config.task_count_dist.pmf())
        self.arrivals = 0
        self.jobs_completed = 0
        self.tasks_in_system = 0
        self.exec_samples = []
        self.probe_lat = []
        self.probe_cost = []

    # -- event plumbing

    def push(self, time, kind, payload):
        heapq.heappush(self.events, (time, next(self.seq), kind, payload))

    def schedule_server(self, server):
        server.event_version += 1
        t = server.next_completion_time()
        if t is not None:
            self.push(t, "complete", (server.index, server.event_version))

    # -- arrivals

    def draw_job(self):
        idx = self.arrivals + 1
        probe = self.config.probe_job
        if idx % probe.every == 0:
            return probe.k, probe.size, True
        u = self.rng.random()
        k = int(np.searchsorted(self.zipf_cdf, u, side="right")) + 1
        k = min(k, self.config.task_count_dist.max_k)
        size = float(self.config.task_size_dist.sample_array(self.rng, None))
        return k, size, False

    def handle_arrival(self):
        if self.tasks_in_system > self.config.max_tasks_in_system:
            raise InstabilityError(
                "cluster backlog exceeded the configured threshold",
                report={
                    "tasks_in_system": self.tasks_in_system,
                    "time": self.now,
                    "arrivals": self.arrivals,
                    "threshold": self.config.max_tasks_in_system,
                },
            )
        k, size, is_probe = self.draw_job()
        self.arrivals += 1
        job = _Job(k, self.now, is_probe)
        job.arrival_index = self.arrivals
        n = min(math.floor(self.config.expansion_rate * k), self.config.num_servers)
        chosen = self.pick_servers(n)
        for sid in chosen:
            server = self.servers[sid]
            task = _Task(job, size)
            task.server = sid
            job.tasks.append(task)
            server.n_tasks += 1
            self.loads[sid] += 1
            self.tasks_in_system += 1
            server.advance(self.now)
            if server.m < server.ps_limit:
                server.enter_service(task, self.now)
                self.schedule_server(server)
            else:
                server.queue.append(task)
        # next arrival
        if self.more_arrivals():
            self.push(self.now + self.rng.exponential(1.0 / self.rate), "arrival", None)

    def more_arrivals(self) -> bool:
        if self.config.horizon_jobs is not None and self.arrivals >= self.config.horizon_jobs:
            return False
        if self.config.horizon_time is not None and self.now >= self.config.horizon_time:
            return False
        return True

    def pick_servers(self, n):
        if n >= self.config.num_servers:
            return range(self.config.num_servers)
        if n == 1 and self.config.num_servers == 1:
            return (0,)
        order = np.lexsort((self.indices, self.loads))
        return order[:n]

    # -- completions and removals

    def handle_completion(self, sid, version):
        server = self.servers[sid]
        if version != server.event_version:
            return  # superseded by a later reschedule
        server.advance(self.now)
        head = server.peek_next()
        if head is None:
            return
        heapq.heappop(server.heap)
        task = head[2]
        task.state = _Task.DONE
        server.m -= 1
        server.n_tasks -= 1
        self.loads[sid] -= 1
        self.tasks_in_system -= 1
        span = self.now - task.enter_service
        job = task.job
        # execution time in the SCHEDULE->FINISH sense: the task is scheduled
        # onto its server at dispatch, so server-local queueing is part of it
        self.exec_samples.append(self.now - job.arrival)
        job.cost += span
        if self.config.cost_includes_queue_wait:
            job.cost += task.enter_service - job.arrival
        job.completed += 1
        if not job.done and job.completed >= job.k:
            self.finish_job(job)
        server.fill_from_queue(self.now)
        self.schedule_server(server)

    def finish_job(self, job):
        job.done = True
        self.jobs_completed += 1
        touched = set()
        for task in job.tasks:
            if task.state == _Task.WAITING:
                task.state = _Task.REMOVED
                sid = task.server
                self.servers[sid].n_tasks -= 1
                self.loads[sid] -= 1
                self.tasks_in_system -= 1
                if self.config.cost_includes_queue_wait:
                    job.cost += self.now - job.arrival
            elif task.state == _Task.RUNNING:
                sid = task.server
                server = self.servers[sid]
                server.advance(self.now)
                task.state = _Task.REMOVED
                server.m -= 1
                server.n_tasks -= 1
                self.loads[sid] -= 1
                self.tasks_in_system -= 1
                job.cost += self.now - task.enter_service
                if self.config.cost_includes_queue_wait:
                    job.cost += task.enter_service - job.arrival
                touched.add(sid)
        for sid in touched:
            server = self.servers[sid]
            server.fill_from_queue(self.now)
            self.schedule_server(server)
        if job.is_probe and job.arrival_index > self.config.warmup_jobs:
            self.probe_lat.append(self.now - job.arrival)
            self.probe_cost.append(job.cost)

    # -- main loop

    def run(self) -> ClusterResult:
        self.push(self.rng.exponential(1.0 / self.rate), "arrival", None)
        while self.events:
            time, _, kind, payload = heapq.heappop(self.events)
            self.now = time
            if kind == "arrival":
                self.handle_arrival()
            else:
                self.handle_completion(*payload)
        for server in self.servers:
            server.advance(self.now)
        lat = np.asarray(self.probe_lat)
        cost = np.asarray(self.probe_cost)
        if lat.size == 0:
            raise DomainError("no probe jobs completed; extend the horizon")
        metrics = EmpiricalMetrics(
            trials=int(lat.size),
            latency_mean=float(lat.mean()),
            latency_se=_se(lat),
            cost_cancel_mean=float(cost.mean()),
            cost_cancel_se=_se(cost),
            cost_nocancel_mean=float(cost.mean()),
            cost_nocancel_se=_se(cost),
            latency_quantiles={p: float(np.quantile(lat, p)) for p in QUANTILE_GRID},
        )
        elapsed = self.now if self.now > 0 else 1.0
        util = sum(s.busy_time for s in self.servers) / (self.config.num_servers * elapsed)
        return ClusterResult(
            probe_metrics=metrics,
            task_exec_samples=tuple(self.exec_samples),
            utilization=util,
            jobs_completed=self.jobs_completed,
        )


def _se(x: np.ndarray) -> float:
    if x.size < 2:
        return math.nan
    return float(x.std(ddof=1) / math.sqrt(x.size))


def run_cluster(config: ClusterConfig, seed: int = 42) -> ClusterResult:
    """Run one cluster simulation to completion (arrivals then drain)."""
    return _Sim(config, seed).run()
