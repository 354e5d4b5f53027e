"""Random instances, benchmark grids and the minimal-tuple conjecture scanner.

Every trial draws from its own generator seeded by (seed, p, n, trial), so
serial and pooled runs produce identical records in the same order.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .descent import TrackedTuple, decide, descend, is_minimal
from .exact import Mat2, ValidationError, require_prime
from .isometry import Isometry, evaluate_word
from .tree import check_pingpong

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenConfig:
    p: int
    N: int
    n: int
    seed: int

    def __post_init__(self):
        require_prime(self.p)
        if self.N < 1:
            raise ValidationError("N must be >= 1")
        if self.n < 1:
            raise ValidationError("n must be >= 1")


def trial_rng(seed: int, p: int, n: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed & (2 ** 64 - 1), spawn_key=(p, n, trial)))


def _ppow(p: int, k: int) -> Fraction:
    return Fraction(p ** k) if k >= 0 else Fraction(1, p ** (-k))


def random_hyperbolic(cfg: GenConfig, rng: np.random.Generator, stats: Optional[dict] = None) -> Isometry:
    """[[a p^e, b p^f], [c p^g, d]] with a..g uniform on [-N, N] and det 1.

    Draws with a = 0 or an elliptic result are rejected and redrawn.
    """
    p, N = cfg.p, cfg.N
    while True:
        a, b, c, e, f, g = (int(x) for x in rng.integers(-N, N, size=6, endpoint=True))
        if a == 0:
            if stats is not None:
                stats["zero_a"] = stats.get("zero_a", 0) + 1
            continue
        top_left = a * _ppow(p, e)
        d = (1 + b * c * _ppow(p, f + g)) / top_left
        A = Isometry(Mat2(top_left, b * _ppow(p, f), c * _ppow(p, g), d), p)
        if A.length == 0:
            if stats is not None:
                stats["elliptic"] = stats.get("elliptic", 0) + 1
            continue
        return A


def random_tuple(cfg: GenConfig, trial: int = 0) -> List[Isometry]:
    rng = trial_rng(cfg.seed, cfg.p, cfg.n, trial)
    stats = {}
    out = [random_hyperbolic(cfg, rng, stats) for _ in range(cfg.n)]
    if stats:
        log.debug("trial %d rejections: %s", trial, stats)
    return out


def length_bound(p: int, N: int) -> int:
    """Largest translation length the generator can produce: 2(3N + floor(log_p N))."""
    k = 0
    while p ** (k + 1) <= N:
        k += 1
    return 2 * (3 * N + k)


@dataclass
class TrialRecord:
    p: int
    N: int
    n: int
    seed: int
    trial: int
    initial_L: int
    iterations: int
    result: str
    wall_s: float
    digest: str

    def to_json(self):
        return asdict(self)


def _digest(cert) -> str:
    payload = json.dumps(
        {"trace": [s.to_json() for s in cert.trace], "witness": list(cert.witness.word) if cert.witness else None},
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def run_trial(cfg: GenConfig, trial: int) -> TrialRecord:
    gens = random_tuple(cfg, trial)
    start = time.perf_counter()
    cert = decide([g.matrix for g in gens], cfg.p)
    wall = time.perf_counter() - start
    return TrialRecord(cfg.p, cfg.N, cfg.n, cfg.seed, trial, cert.initial_L, len(cert.trace), cert.result, wall, _digest(cert))


def _run_trial_args(args):
    return run_trial(*args)


def _pool_map(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


@dataclass
class BenchCell:
    p: int
    n: int
    mean_s: float
    p50_s: float
    max_s: float
    free_count: int
    elliptic_count: int
    trials: int


def run_bench(
    grid: Iterable[Tuple[int, int]],
    N: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> Tuple[List[TrialRecord], List[BenchCell]]:
    records: List[TrialRecord] = []
    cells: List[BenchCell] = []
    for p, n in sorted(set(grid)):
        cfg = GenConfig(p, N, n, seed)
        recs = _pool_map(_run_trial_args, [(cfg, t) for t in range(trials)], workers)
        times = [r.wall_s for r in recs]
        free = sum(r.result == "free_discrete" for r in recs)
        cells.append(
            BenchCell(p, n, statistics.fmean(times), statistics.median(times), max(times), free, len(recs) - free, len(recs))
        )
        records.extend(recs)
    return records, cells


CELL_COLUMNS = ["p", "n", "mean_s", "p50_s", "free_count", "elliptic_count"]


def cells_csv(cells: Sequence[BenchCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CELL_COLUMNS)
    for c in cells:
        w.writerow([c.p, c.n, f"{c.mean_s:.6f}", f"{c.p50_s:.6f}", c.free_count, c.elliptic_count])
    return buf.getvalue()


def grid_csv(cells: Sequence[BenchCell]) -> str:
    """Rows p, columns n (mean seconds), then per-n free/elliptic counts."""
    ns = sorted({c.n for c in cells})
    ps = sorted({c.p for c in cells})
    by = {(c.p, c.n): c for c in cells}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p"] + [str(n) for n in ns] + [f"free_{n}" for n in ns] + [f"elliptic_{n}" for n in ns])
    for p in ps:
        row = [p]
        row += [f"{by[p, n].mean_s:.6f}" if (p, n) in by else "" for n in ns]
        row += [by[p, n].free_count if (p, n) in by else "" for n in ns]
        row += [by[p, n].elliptic_count if (p, n) in by else "" for n in ns]
        w.writerow(row)
    return buf.getvalue()


def records_jsonl(records: Sequence[TrialRecord]) -> str:
    return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in records)


@dataclass
class ScanReport:
    n: int
    primes: List[int]
    N: int
    seed: int
    trials: int = 0
    minimal_count: int = 0
    elliptic_count: int = 0
    pingpong_count: int = 0
    indeterminate_count: int = 0
    violations: List[dict] = field(default_factory=list)

    def to_json(self):
        return asdict(self)


@dataclass
class _ScanOutcome:
    outcome: str  # "elliptic", "pingpong", "indeterminate", "violation"
    minimal: bool
    detail: Optional[dict] = None


def scan_trial(n: int, p: int, N: int, seed: int, trial: int, strict: bool = False) -> _ScanOutcome:
    cfg = GenConfig(p, N, n, seed)
    gens = random_tuple(cfg, trial)
    X = TrackedTuple.from_matrices([g.matrix for g in gens], p)
    run = descend(X, stop_on_elliptic=False)
    Y = run.tuple
    minimal = is_minimal(Y)
    if any(e.length == 0 for e in Y.elements):
        for e in Y.elements:
            if e.length == 0 and evaluate_word(e.word, Y.generators) != e.matrix:
                raise AssertionError(f"witness word mismatch at seed={seed} p={p} trial={trial}")
        return _ScanOutcome("elliptic", minimal)
    report = check_pingpong(Y.isometries, strict=strict)
    if report.status == "pass":
        return _ScanOutcome("pingpong", minimal)
    if report.status == "indeterminate":
        return _ScanOutcome("indeterminate", minimal)
    detail = {
        "seed": seed,
        "p": p,
        "n": n,
        "N": N,
        "trial": trial,
        "generators": [g.matrix.to_json() for g in gens],
        "diagnostics": report.diagnostics,
    }
    return _ScanOutcome("violation", minimal, detail)


def _scan_trial_args(args):
    return scan_trial(*args)


def conjecture_scan(
    n: int,
    p: Union[int, Sequence[int]],
    N: int,
    trials: int,
    seed: int,
    workers: int = 1,
    strict: bool = False,
) -> ScanReport:
    """Descend random n-tuples to minimal ones and test: some g_i elliptic, or Ping-Pong holds.

    With several primes, trial k uses primes[k % len(primes)].
    """
    if n < 2:
        raise ValidationError("conjecture_scan needs n >= 2")
    primes = [p] if isinstance(p, int) else list(p)
    for q in primes:
        require_prime(q)
    jobs = [(n, primes[k % len(primes)], N, seed, k, strict) for k in range(trials)]
    outcomes = _pool_map(_scan_trial_args, jobs, workers)
    report = ScanReport(n, primes, N, seed)
    for o in outcomes:
        report.trials += 1
        report.minimal_count += o.minimal
        if o.outcome == "elliptic":
            report.elliptic_count += 1
        elif o.outcome == "pingpong":
            report.pingpong_count += 1
        elif o.outcome == "indeterminate":
            report.indeterminate_count += 1
        else:
            report.violations.append(o.detail)
    return report
