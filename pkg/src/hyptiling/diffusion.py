"""Leafwise diffusion on the tiled half-plane.

The driving process is half-plane Brownian motion run in logarithmic height:
with u = ln y the height obeys du = dW - dt/2 exactly, so the Euler chain
u_{k+1} = u_k + sqrt(dt) * xi - dt/2 has the true law at every step and the
terminal displacement is N(-T/2, T) with no discretization error.  The
horizontal coordinate is kept in tile-relative form, column plus fractional
offset, because raw x loses all precision once the walk is thousands of rows
below the start; the fractional increment exp(u - row*ln2) * sqrt(dt) * xi
is always O(sqrt(dt)).

Two execution modes share one noise array per path and agree bit for bit:
"fast" vectorizes the height chain and row occupancy, "full" walks step by
step and also tracks the column as an arbitrary-precision integer through
the doubling/halving renormalization at each row crossing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import CapError, DomainError, SizeError
from .geometry import tile_containing_point
from .measures import TRIANGLE, ergodic_measure_count
from .symbolic import as_model, block_type_counts

LN2 = math.log(2.0)

MAX_STEPS = 10**8


@dataclass(frozen=True)
class DiffusionConfig:
    model: object
    dt: float = 1e-3
    horizon: float = 2000.0
    paths: int = 50
    seed: int = 0
    track_position: bool = False
    trace_stride: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", as_model(self.model))
        if not (self.dt > 0) or not math.isfinite(self.dt):
            raise DomainError(f"step size {self.dt} must be positive")
        if self.horizon < 0 or not math.isfinite(self.horizon):
            raise DomainError(f"horizon {self.horizon} must be nonnegative")
        if self.paths < 1:
            raise DomainError(f"need at least one path, got {self.paths}")
        if self.trace_stride < 0:
            raise DomainError("trace stride must be nonnegative")
        if self.n_steps > MAX_STEPS:
            raise SizeError(
                f"{self.n_steps} steps exceeds the {MAX_STEPS} step cap"
            )

    @property
    def n_steps(self) -> int:
        ratio = self.horizon / self.dt
        return max(0, math.ceil(ratio - 1e-9 * max(1.0, abs(ratio))))


@dataclass(frozen=True)
class LeafState:
    """Walker position: log-height plus tile-relative horizontal data."""

    u: float
    row: int
    col: int
    x_frac: float

    def __post_init__(self):
        if not math.isfinite(self.u):
            raise DomainError(f"log-height {self.u} is not finite")
        if math.floor(self.u / LN2) != self.row:
            raise DomainError(
                f"row {self.row} disagrees with log-height {self.u}"
            )
        if not (0.0 <= self.x_frac < 1.0):
            raise DomainError(f"tile offset {self.x_frac} outside [0, 1)")

    @classmethod
    def from_point(cls, x: float, y: float) -> "LeafState":
        tile = tile_containing_point(x, y)
        scaled = math.ldexp(x, -tile.row)
        return cls(
            u=math.log(y),
            row=tile.row,
            col=tile.col,
            x_frac=scaled - tile.col,
        )

    def point(self) -> tuple:
        # Reconstruction only works while the column still fits in a float.
        if abs(self.row) > 900 or abs(self.col) > 2**900:
            raise DomainError("position magnitude exceeds float range")
        return (math.ldexp(self.col + self.x_frac, self.row), math.exp(self.u))


def default_start() -> LeafState:
    return LeafState(u=math.log(1.5), row=0, col=0, x_frac=0.5)


@dataclass(frozen=True)
class PathResult:
    path_index: int
    mode: str
    dt: float
    n_steps: int
    steps_used: int
    partial: bool
    u0: float
    u_final: float
    row_final: int
    min_row: int
    max_row: int
    row_crossings: int
    row_steps: dict  # row -> integer step count, over step-start states
    stop_row: object = None  # the uncolorable row that truncated the path
    col_final: object = None  # int in full mode
    x_frac_final: object = None
    trace: tuple = ()

    @property
    def displacement(self) -> float:
        return self.u_final - self.u0

    @property
    def time_elapsed(self) -> float:
        return self.steps_used * self.dt

    def letter_steps(self, model_like) -> dict:
        """Integer step counts regrouped by row color."""
        model = as_model(model_like)
        out = {}
        for row, steps in self.row_steps.items():
            letter = model.letter(row)
            out[letter] = out.get(letter, 0) + steps
        return out

    def block_steps(self, model_like, q: int) -> dict:
        """Step counts regrouped by the level-q block label of each row."""
        model = as_model(model_like)
        length = model.level_length(q)
        out = {}
        for row, steps in self.row_steps.items():
            label = model.block_letter(q, row // length)
            out[label] = out.get(label, 0) + steps
        return out


def _path_noise(config: DiffusionConfig, path_index: int):
    """One (n, 2) standard-normal block per path, identical in every mode."""
    seq = np.random.SeedSequence(entropy=config.seed, spawn_key=(path_index,))
    rng = np.random.Generator(np.random.Philox(seq))
    draws = rng.standard_normal((config.n_steps, 2))
    sqrt_dt = math.sqrt(config.dt)
    du = draws[:, 0] * sqrt_dt - config.dt / 2.0
    dx = draws[:, 1] * sqrt_dt
    return du, dx


class _LetterTable:
    """Memoized row -> color lookup; None marks rows the model cannot color."""

    def __init__(self, model):
        self.model = model
        self.cache = {}

    def get(self, row: int):
        if row not in self.cache:
            try:
                self.cache[row] = self.model.letter(row)
            except CapError:
                self.cache[row] = None
        return self.cache[row]


def _trace_indices(steps_used: int, stride: int):
    if stride <= 0:
        return ()
    return tuple(range(0, steps_used + 1, stride))


def simulate_path(config: DiffusionConfig, start: LeafState = None,
                  path_index: int = 0, mode: str = None) -> PathResult:
    """Run one path.  Modes produce bit-identical height and occupancy data.

    The path is truncated, with the partial flag set, at the first step whose
    starting row the model cannot color.
    """
    if mode is None:
        mode = "full" if config.track_position else "fast"
    if mode not in ("fast", "full"):
        raise DomainError(f"unknown mode {mode!r}")
    if start is None:
        start = default_start()
    if mode == "fast":
        return _simulate_fast(config, start, path_index)
    return _simulate_full(config, start, path_index)


def _simulate_fast(config: DiffusionConfig, start: LeafState,
                   path_index: int) -> PathResult:
    n = config.n_steps
    du, _ = _path_noise(config, path_index)
    chain = np.empty(n + 1, dtype=np.float64)
    chain[0] = start.u
    chain[1:] = du
    u_path = np.cumsum(chain)
    rows = np.floor(u_path / LN2).astype(np.int64)

    table = _LetterTable(config.model)
    steps_used = n
    partial = False
    stop_row = None
    if n > 0:
        lo = int(rows.min())
        hi = int(rows.max())
        defined = np.array(
            [table.get(r) is not None for r in range(lo, hi + 1)], dtype=bool
        )
        bad = ~defined[rows[:n] - lo]
        if bad.any():
            steps_used = int(np.argmax(bad))
            partial = True
            stop_row = int(rows[steps_used])

    occupied = rows[:steps_used]
    if steps_used > 0:
        base = int(occupied.min())
        counts = np.bincount(occupied - base)
        row_steps = {
            base + i: int(c) for i, c in enumerate(counts) if c
        }
        crossings = int(
            np.sum(np.abs(np.diff(rows[: steps_used + 1])))
        )
        min_row = base
        max_row = int(occupied.max())
    else:
        row_steps = {}
        crossings = 0
        min_row = max_row = start.row

    trace = tuple(
        (int(k), float(u_path[k]), int(rows[k]))
        for k in _trace_indices(steps_used, config.trace_stride)
    )
    return PathResult(
        path_index=path_index,
        mode="fast",
        dt=config.dt,
        n_steps=n,
        steps_used=steps_used,
        partial=partial,
        u0=start.u,
        u_final=float(u_path[steps_used]),
        row_final=int(rows[steps_used]),
        min_row=min_row,
        max_row=max_row,
        row_crossings=crossings,
        row_steps=row_steps,
        stop_row=stop_row,
        trace=trace,
    )


def _simulate_full(config: DiffusionConfig, start: LeafState,
                   path_index: int) -> PathResult:
    n = config.n_steps
    du, dx = _path_noise(config, path_index)
    table = _LetterTable(config.model)

    u = start.u
    row = start.row
    col = start.col
    frac = start.x_frac
    row_steps = {}
    crossings = 0
    min_row = max_row = row
    partial = False
    stop_row = None
    steps_used = n
    trace = []
    stride = config.trace_stride

    for k in range(n):
        if stride > 0 and k % stride == 0:
            trace.append((k, u, row))
        if table.get(row) is None:
            steps_used = k
            partial = True
            stop_row = row
            break
        row_steps[row] = row_steps.get(row, 0) + 1
        if row < min_row:
            min_row = row
        elif row > max_row:
            max_row = row

        u_next = u + du[k]
        # Horizontal Gaussian move at midpoint height, in current tile widths.
        frac = frac + math.exp(0.5 * (u + u_next) - row * LN2) * dx[k]
        carry = math.floor(frac)
        if carry != 0:
            col += int(carry)
            frac -= carry

        u = u_next
        new_row = math.floor(u / LN2)
        if new_row != row:
            crossings += abs(new_row - row)
            while row > new_row:  # descending: tiles halve, columns double
                frac *= 2.0
                if frac >= 1.0:
                    col = 2 * col + 1
                    frac -= 1.0
                else:
                    col = 2 * col
                row -= 1
            while row < new_row:  # ascending: adjacent columns merge
                if col % 2 == 0:
                    col //= 2
                    frac /= 2.0
                else:
                    col = (col - 1) // 2
                    frac = (1.0 + frac) / 2.0
                row += 1
    if stride > 0 and not partial and n % stride == 0:
        trace.append((n, u, row))

    if steps_used == 0:
        min_row = max_row = start.row
    return PathResult(
        path_index=path_index,
        mode="full",
        dt=config.dt,
        n_steps=n,
        steps_used=steps_used,
        partial=partial,
        u0=start.u,
        u_final=u,
        row_final=row,
        min_row=min_row,
        max_row=max_row,
        row_crossings=crossings,
        row_steps=row_steps,
        stop_row=stop_row,
        col_final=col,
        x_frac_final=frac,
        trace=tuple(trace),
    )


def run_paths(config: DiffusionConfig, mode: str = None) -> list:
    return [
        simulate_path(config, None, index, mode) for index in range(config.paths)
    ]


# ---------------------------------------------------------------------------
# Height-law statistics


def log_height_samples(results) -> np.ndarray:
    """Drift-compensated terminal displacements, one per complete path.

    Each sample is u_T - u_0 + T/2 and is exactly N(0, T) in law.
    """
    vals = [
        r.displacement + r.steps_used * r.dt / 2.0 for r in results if not r.partial
    ]
    return np.asarray(vals, dtype=np.float64)


def log_height_stats(results) -> dict:
    samples = log_height_samples(results)
    if len(samples) < 30:
        raise DomainError(
            f"need at least 30 complete paths, got {len(samples)}"
        )
    horizon = max(r.time_elapsed for r in results if not r.partial)
    mean = float(np.mean(samples))
    var = float(np.var(samples, ddof=1)) if len(samples) > 1 else 0.0
    return {
        "paths": int(len(samples)),
        "horizon": horizon,
        "mean": mean,
        "variance": var,
        "expected_mean": 0.0,
        "expected_variance": horizon,
    }


def height_law_test(results) -> tuple:
    """Kolmogorov-Smirnov statistic and p-value of the compensated samples
    against N(0, T)."""
    from scipy import stats

    samples = log_height_samples(results)
    if len(samples) < 30:
        raise DomainError(
            f"need at least 30 complete paths for the distribution test, "
            f"got {len(samples)}"
        )
    horizon = max(r.time_elapsed for r in results if not r.partial)
    if horizon <= 0:
        raise DomainError("zero horizon has a degenerate law")
    outcome = stats.kstest(samples, "norm", args=(0.0, math.sqrt(horizon)))
    return float(outcome.statistic), float(outcome.pvalue)


# ---------------------------------------------------------------------------
# Occupancy versus predicted frequencies


def expected_block_fractions(model_like, q: int, scheme: str = TRIANGLE,
                             tol: float = 1e-10, max_level: int = 80) -> tuple:
    """Limit fractions of level-q block labels, when a single limit exists.

    Deepens the exact per-label block counts inside one level-Q word until
    the normalized vector stops moving; valid only under a unique measure.
    """
    model = as_model(model_like)
    prev = None
    for big in range(q + 1, max_level + 1):
        counts = block_type_counts(model, q, big, 1)
        total = sum(counts)
        cur = tuple(Fraction(c, total) for c in counts)
        cur_f = tuple(float(x) for x in cur)
        if prev is not None and max(
            abs(a - b) for a, b in zip(prev, cur_f)
        ) < tol:
            return cur_f
        prev = cur_f
    raise DomainError(f"block fractions did not settle within {max_level} levels")


def garnett_compare(config: DiffusionConfig, q: int = 0,
                    scheme: str = TRIANGLE, results=None) -> dict:
    """Empirical time fractions per level-q block label, with expectations.

    Per-path fractions give a plain Monte Carlo band of 1.96 * sd / sqrt(P).
    When the measure count is not one there is no single expected vector and
    the comparison columns are left empty with an explanatory note.
    """
    model = config.model
    if results is None:
        results = run_paths(config)
    complete = [r for r in results if not r.partial]
    if not complete:
        rows = sorted({r.stop_row for r in results})
        raise CapError(
            f"every path stopped at an uncolorable row (rows {rows}); "
            "raise the model's filling-depth cap"
        )

    r_letters = model.r
    per_path = []
    totals = [0] * r_letters
    grand_total = 0
    for res in complete:
        steps = res.block_steps(model, q)
        used = sum(steps.values())
        frac = [steps.get(i, 0) / used if used else 0.0 for i in range(1, r_letters + 1)]
        per_path.append(frac)
        for i in range(1, r_letters + 1):
            totals[i - 1] += steps.get(i, 0)
        grand_total += used

    empirical = [t / grand_total for t in totals]
    arr = np.asarray(per_path, dtype=np.float64)
    if len(complete) > 1:
        bands = (1.96 * np.std(arr, axis=0, ddof=1) / math.sqrt(len(complete))).tolist()
    else:
        bands = [math.inf] * r_letters

    count = ergodic_measure_count(model, scheme)
    unique = count.status == "stabilized" and count.count == 1
    note = ""
    expected = None
    if unique:
        expected = list(expected_block_fractions(model, q, scheme))
    elif count.status != "stabilized":
        note = "measure count not certified; no expected fractions"
    else:
        note = "non-uniquely-ergodic: no single expectation"

    rows = []
    for i in range(r_letters):
        entry = {
            "label": i + 1,
            "empirical": empirical[i],
            "band": bands[i],
            "expected": expected[i] if expected is not None else None,
        }
        if expected is not None:
            entry["within_band"] = abs(empirical[i] - expected[i]) <= max(
                bands[i], 1e-12
            )
        rows.append(entry)

    return {
        "level": q,
        "paths": len(results),
        "complete_paths": len(complete),
        "partial_paths": len(results) - len(complete),
        "dt": config.dt,
        "horizon": config.horizon,
        "total_steps": grand_total,
        "unique_measure": unique,
        "note": note,
        "labels": rows,
    }
