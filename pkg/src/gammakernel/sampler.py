"""Exact sampling of window restrictions of the determinantal processes.

A symmetric window kernel with spectrum in [0, 1] defines a point process on
the window whose correlation functions are the principal minors of the
kernel.  Sampling is spectral: each eigenvector independently joins a random
projection with probability its eigenvalue, and the projection is then
sampled one point at a time — the diagonal of the current projection is the
selection density, and each selected point conditions the remainder through
a Schur-complement update.

Batches are reproducible: a documented 64-bit seed feeds a counter-based
generator, and work is split into fixed-size chunks with seeds derived by
``numpy.random.SeedSequence.spawn``, so the output is bit-identical for any
worker count and chunks can be reduced in any order.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .lattice import FiniteConfig, HalfInt
from .kernels import NonConvergenceError, WindowKernel
from .fredholm import TestFunction, phi_eval

__all__ = [
    "Estimate",
    "SampleBatch",
    "jsonl_lines",
    "sample_underline_then_involute",
    "sample_window",
    "write_jsonl",
]

ALGORITHM = "spectral projection mixture + Schur-complement chain"
RNG = "numpy Philox (counter-based), 64-bit seed, SeedSequence chunk spawn"
CLAMP_LIMIT = 1e-4
_CHUNK = 4096


class Estimate(NamedTuple):
    """A Monte Carlo estimate with its standard error."""

    value: float
    se: float


@dataclass(frozen=True)
class SampleBatch:
    """A reproducible batch of window configurations with estimators.

    ``configs`` are subsets of the window points; ``diagonal`` holds the
    per-point occupation frequencies with standard errors; ``max_clamp`` is
    the largest spectral correction applied to push eigenvalues into [0, 1].
    """

    N: int
    seed: int
    kind: str
    count: int
    points: tuple[HalfInt, ...]
    configs: tuple[FiniteConfig, ...]
    diagonal: tuple[tuple[HalfInt, Estimate], ...]
    max_clamp: float
    algorithm: str = ALGORITHM
    rng: str = RNG

    def rho1(self, x) -> Estimate:
        """Empirical one-point function at a window point."""
        x = HalfInt.make(x)
        for pt, est in self.diagonal:
            if pt == x:
                return est
        raise KeyError(f"{x} outside window [-{self.N}, {self.N}]")

    def pair_frequency(self, x, y) -> Estimate:
        """Empirical two-point function (frequency both points occupied)."""
        x, y = HalfInt.make(x), HalfInt.make(y)
        if x == y:
            raise ValueError("two-point estimator needs distinct points")
        hits = sum(1 for c in self.configs if x in c and y in c)
        return _bernoulli(hits, self.count)

    def avoidance(self, pts: Iterable) -> Estimate:
        """Empirical probability that the configuration misses every point."""
        targets = {HalfInt.make(t) for t in pts}
        hits = sum(1 for c in self.configs if not (targets & set(c.points)))
        return _bernoulli(hits, self.count)

    def mean_count(self) -> Estimate:
        """Empirical mean number of points per configuration."""
        return _mean([len(c.points) for c in self.configs])

    def phi_mean(self, f: TestFunction) -> Estimate:
        """Empirical mean of the multiplicative functional Phi_f."""
        return _mean([phi_eval(f, c) for c in self.configs])

    def balance_frequency(self) -> Estimate:
        """Frequency of configurations with equally many points on each side
        of zero."""
        hits = sum(
            1 for c in self.configs if len(c.positives) == len(c.negatives)
        )
        return _bernoulli(hits, self.count)


def _bernoulli(hits: int, n: int) -> Estimate:
    p = hits / n
    return Estimate(p, math.sqrt(p * (1.0 - p) / n))


def _mean(values: list[float]) -> Estimate:
    arr = np.asarray(values, dtype=float)
    se = arr.std(ddof=1) / math.sqrt(len(arr)) if len(arr) > 1 else 0.0
    return Estimate(float(arr.mean()), float(se))


def _check_sampleable(kernel: WindowKernel) -> None:
    if not kernel.kind.startswith("underline_"):
        raise ValueError(
            "sampling needs a symmetric kernel with spectrum in [0, 1]; "
            f"got kind {kernel.kind!r} (J-transformed kernels are not symmetric)"
        )
    if not np.allclose(kernel.values, kernel.values.T, atol=1e-10):
        raise ValueError("kernel matrix is not symmetric")


def _spectrum(kernel: WindowKernel) -> tuple[np.ndarray, np.ndarray, float]:
    w, vecs = np.linalg.eigh(kernel.values)
    max_clamp = float(max(0.0, -w.min(initial=0.0), w.max(initial=0.0) - 1.0))
    if max_clamp > CLAMP_LIMIT:
        raise NonConvergenceError(
            "spectral clamp while sampling", max_clamp, CLAMP_LIMIT, len(w)
        )
    return np.clip(w, 0.0, 1.0), vecs, max_clamp


def _sample_chunk(
    w: np.ndarray, vecs: np.ndarray, count: int, rng: np.random.Generator
) -> list[tuple[int, ...]]:
    d = len(w)
    out: list[tuple[int, ...]] = []
    for _ in range(count):
        sel = rng.random(d) < w
        k = int(sel.sum())
        if k == 0:
            out.append(())
            continue
        proj = vecs[:, sel] @ vecs[:, sel].T
        chosen: list[int] = []
        for _step in range(k):
            p = np.clip(np.diag(proj), 0.0, None)
            p = p / p.sum()
            i = int(rng.choice(d, p=p))
            chosen.append(i)
            proj = proj - np.outer(proj[:, i], proj[i, :]) / proj[i, i]
        out.append(tuple(sorted(chosen)))
    return out


def _make_batch(
    kernel: WindowKernel,
    kind: str,
    seed: int,
    configs: tuple[FiniteConfig, ...],
    max_clamp: float,
) -> SampleBatch:
    pts = kernel.points
    count = len(configs)
    diag = tuple(
        (x, _bernoulli(sum(1 for c in configs if x in c), count)) for x in pts
    )
    return SampleBatch(
        N=kernel.N,
        seed=seed,
        kind=kind,
        count=count,
        points=pts,
        configs=configs,
        diagonal=diag,
        max_clamp=max_clamp,
    )


def sample_window(
    kernel: WindowKernel, count: int, seed: int, workers: int = 1
) -> SampleBatch:
    """Draw exact determinantal samples of the window restriction.

    Chunk boundaries and chunk seeds depend only on (count, seed), so the
    batch is bit-identical for any ``workers``; eigenvalues outside [0, 1]
    are clamped, and a clamp beyond 1e-4 aborts.
    """
    _check_sampleable(kernel)
    count = int(count)
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    w, vecs, max_clamp = _spectrum(kernel)
    sizes = [_CHUNK] * (count // _CHUNK)
    if count % _CHUNK:
        sizes.append(count % _CHUNK)
    seeds = np.random.SeedSequence(int(seed)).spawn(len(sizes))

    def run(args: tuple[int, np.random.SeedSequence]) -> list[tuple[int, ...]]:
        n, ss = args
        return _sample_chunk(w, vecs, n, np.random.Generator(np.random.Philox(ss)))

    jobs = list(zip(sizes, seeds))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(run, jobs))
    else:
        chunks = [run(j) for j in jobs]
    pts = kernel.points
    configs = tuple(
        FiniteConfig(pts[i] for i in idxs) for chunk in chunks for idxs in chunk
    )
    return _make_batch(kernel, kernel.kind, int(seed), configs, max_clamp)


def sample_underline_then_involute(
    kernel: WindowKernel, count: int, seed: int, workers: int = 1
) -> SampleBatch:
    """Sample the symmetric process, then flip occupancy on the negative half
    of the window.

    The flipped configurations follow the process whose correlation minors
    come from the J-transformed kernel, so their statistics cross-check that
    kernel's minors.
    """
    base = sample_window(kernel, count, seed, workers=workers)
    negatives = frozenset(x for x in kernel.points if x.twice < 0)
    flipped = tuple(
        FiniteConfig((set(c.points) - negatives) | (negatives - set(c.points)))
        for c in base.configs
    )
    return _make_batch(
        kernel, kernel.kind + "+involution", int(seed), flipped, base.max_clamp
    )


def jsonl_lines(batch: SampleBatch) -> Iterator[str]:
    """One JSON array per configuration, points as sorted "n/2" strings."""
    for c in batch.configs:
        yield json.dumps([str(x) for x in c.points])


def write_jsonl(batch: SampleBatch, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for line in jsonl_lines(batch):
            fh.write(line + "\n")
