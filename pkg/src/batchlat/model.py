"""Domain types for master/worker systems with redundant batch assignment.

The system under study: a data set of ``n_blocks`` equal-size blocks is
grouped into ``n_batches`` batches, each batch is assigned to one or more of
``n_workers`` machines, every machine computes over its batch and reports to
a master. Worker service times are i.i.d. exponential with rate ``rate``.

All types here are immutable after construction and safe to share across
concurrent simulation workers. Block and worker ids are 0-based dense
integers everywhere, including external formats.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum


class BatchlatError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BatchlatError, ValueError):
    """An argument lies outside an operation's domain."""


class NonPositiveError(DomainError):
    """A parameter that must be strictly positive is zero or negative."""


class NonDivisibleError(DomainError):
    """A required divisibility between system parameters does not hold."""


class UncoveredBatchError(BatchlatError):
    """The job cannot complete: some batch is held by no finished worker."""


class ComplexityGuardError(BatchlatError):
    """Exact computation refused because the instance exceeds its size guard.

    Callers should fall back to Monte Carlo estimation.
    """


class NoCoverageError(BatchlatError):
    """Every simulated trial was uncovered, so no completion time exists."""


class BatchingKind(str, Enum):
    """How batches relate to each other on the block set."""

    NON_OVERLAPPING = "non-overlapping"
    OVERLAPPING = "overlapping"
    #: Validate only the requirements shared by both batching kinds.
    ANY = "any"


def _require_positive_int(value: object, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if value <= 0:
        raise NonPositiveError(f"{name} must be positive, got {value}")
    return value


def _require_positive_real(value: object, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{name} must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out) or out <= 0:
        raise NonPositiveError(f"{name} must be positive and finite, got {value}")
    return out


def _require_seed(value: object, name: str = "seed") -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return value


@dataclass(frozen=True)
class SystemParams:
    """System shape: N workers, S data blocks, B batches, per-worker rate.

    Positivity is enforced at construction; divisibility requirements depend
    on the batching kind and are checked by :func:`validate_params`.
    """

    n_workers: int
    n_blocks: int
    n_batches: int
    rate: float = 1.0

    def __post_init__(self) -> None:
        _require_positive_int(self.n_workers, "n_workers")
        _require_positive_int(self.n_blocks, "n_blocks")
        _require_positive_int(self.n_batches, "n_batches")
        if not (isinstance(self.rate, (int, float)) and not isinstance(self.rate, bool)):
            raise DomainError(f"rate must be a number, got {self.rate!r}")
        if not math.isfinite(self.rate) or self.rate <= 0:
            raise NonPositiveError(f"rate must be positive and finite, got {self.rate}")

    @property
    def batch_size(self) -> int:
        """Blocks per batch (meaningful once validate_params passed)."""
        return self.n_blocks // self.n_batches

    @property
    def replication(self) -> int:
        """Workers per batch under uniform assignment, N/B."""
        return self.n_workers // self.n_batches


def validate_params(params: SystemParams, kind: BatchingKind | str) -> None:
    """Check the divisibility/shape invariants for the given batching kind.

    Both kinds require B | S (integral batch size). Overlapping batching
    additionally requires S = N (one batch per worker) and B | N (uniform
    replication factor N/B). ``BatchingKind.ANY`` checks only the shared
    requirements.

    Raises NonPositiveError, NonDivisibleError, or DomainError.
    """
    kind = BatchingKind(kind)
    for name in ("n_workers", "n_blocks", "n_batches"):
        _require_positive_int(getattr(params, name), name)
    if not math.isfinite(params.rate) or params.rate <= 0:
        raise NonPositiveError(f"rate must be positive and finite, got {params.rate}")
    if params.n_blocks % params.n_batches != 0:
        raise NonDivisibleError(
            f"n_batches={params.n_batches} must divide n_blocks={params.n_blocks}"
        )
    if kind is BatchingKind.OVERLAPPING:
        if params.n_blocks != params.n_workers:
            raise DomainError(
                "overlapping batching requires n_blocks == n_workers, got "
                f"S={params.n_blocks}, N={params.n_workers}"
            )
        if params.n_workers % params.n_batches != 0:
            raise NonDivisibleError(
                f"n_batches={params.n_batches} must divide n_workers={params.n_workers} "
                "for overlapping batching"
            )


@dataclass(frozen=True)
class AssignmentVector:
    """Per-batch worker counts for non-overlapping batching.

    Entry i is the number of workers holding batch i. Zero entries are legal
    (a random draw may leave a batch unselected) but such a vector cannot
    complete the job; see :attr:`covers_all_batches`.
    """

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(self.counts)
        if len(counts) == 0:
            raise DomainError("assignment vector must have at least one batch")
        for c in counts:
            if isinstance(c, bool) or not isinstance(c, int):
                raise DomainError(f"counts must be integers, got {c!r}")
            if c < 0:
                raise DomainError(f"counts must be non-negative, got {c}")
        object.__setattr__(self, "counts", counts)

    @property
    def n_workers(self) -> int:
        return sum(self.counts)

    @property
    def n_batches(self) -> int:
        return len(self.counts)

    @property
    def covers_all_batches(self) -> bool:
        """True when every batch has at least one worker, so the job can finish."""
        return all(c >= 1 for c in self.counts)


@dataclass(frozen=True)
class BatchLayout:
    """Per-worker block sets for overlapping batching.

    ``batches[w]`` is the set of block ids held by worker w. Construction
    enforces: equal batch sizes, batch size dividing ``n_blocks``, ids in
    range, no duplicate block within a batch, and a uniform replication
    factor (every block held by exactly ``n_workers * batch_size / n_blocks``
    workers).
    """

    batches: tuple[frozenset[int], ...]
    n_blocks: int

    def __post_init__(self) -> None:
        _require_positive_int(self.n_blocks, "n_blocks")
        raw = tuple(self.batches)
        if len(raw) == 0:
            raise DomainError("layout must have at least one worker batch")
        norm: list[frozenset[int]] = []
        for w, batch in enumerate(raw):
            items = list(batch)
            fs = frozenset(items)
            if len(fs) != len(items):
                raise DomainError(f"batch of worker {w} contains a duplicate block")
            if not fs:
                raise DomainError(f"batch of worker {w} is empty")
            for b in fs:
                if isinstance(b, bool) or not isinstance(b, int):
                    raise DomainError(f"block ids must be integers, got {b!r}")
                if not 0 <= b < self.n_blocks:
                    raise DomainError(f"block id {b} out of range [0, {self.n_blocks})")
            norm.append(fs)
        sizes = {len(fs) for fs in norm}
        if len(sizes) != 1:
            raise DomainError(f"all batches must have equal size, got sizes {sorted(sizes)}")
        size = sizes.pop()
        if self.n_blocks % size != 0:
            raise NonDivisibleError(
                f"batch size {size} must divide n_blocks={self.n_blocks}"
            )
        replication, rem = divmod(len(norm) * size, self.n_blocks)
        if rem != 0:
            raise NonDivisibleError(
                "total block slots must be a multiple of n_blocks "
                f"(got {len(norm)} batches of size {size} over {self.n_blocks} blocks)"
            )
        counts = [0] * self.n_blocks
        for fs in norm:
            for b in fs:
                counts[b] += 1
        if any(c != replication for c in counts):
            raise DomainError(
                f"every block must appear in exactly {replication} batches, "
                f"got counts {counts}"
            )
        object.__setattr__(self, "batches", tuple(norm))

    @property
    def n_workers(self) -> int:
        return len(self.batches)

    @property
    def batch_size(self) -> int:
        return len(self.batches[0])

    @property
    def n_batches(self) -> int:
        """Number of distinct batch positions, S / batch_size."""
        return self.n_blocks // self.batch_size

    @property
    def replication(self) -> int:
        """How many workers hold each block."""
        return self.n_workers * self.batch_size // self.n_blocks


@dataclass(frozen=True)
class RecoveryStructure:
    """Worker groups defining job completion for overlapping batching.

    The job completes as soon as every worker of some group has finished.
    For a structure to be meaningful against a layout, each group's batches
    must exactly partition the block set; check with
    :meth:`validate_partitions`.
    """

    groups: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        raw = tuple(self.groups)
        if len(raw) == 0:
            raise DomainError("recovery structure must have at least one group")
        norm: list[frozenset[int]] = []
        for i, group in enumerate(raw):
            fs = frozenset(group)
            if not fs:
                raise DomainError(f"group {i} is empty")
            for w in fs:
                if isinstance(w, bool) or not isinstance(w, int) or w < 0:
                    raise DomainError(f"worker ids must be non-negative integers, got {w!r}")
            norm.append(fs)
        object.__setattr__(self, "groups", tuple(norm))

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def workers(self) -> frozenset[int]:
        """All workers referenced by at least one group."""
        out: set[int] = set()
        for g in self.groups:
            out |= g
        return frozenset(out)

    def unused_workers(self, n_workers: int) -> frozenset[int]:
        """Workers in no group: dead weight, permitted but worth flagging."""
        return frozenset(range(n_workers)) - self.workers()

    def validate_partitions(self, layout: BatchLayout) -> None:
        """Require each group's batches to exactly partition the block set.

        Raises DomainError when some group has overlapping batches or fails
        to cover every block.
        """
        full = frozenset(range(layout.n_blocks))
        for i, group in enumerate(self.groups):
            seen: set[int] = set()
            total = 0
            for w in group:
                if not 0 <= w < layout.n_workers:
                    raise DomainError(f"group {i} references unknown worker {w}")
                batch = layout.batches[w]
                total += len(batch)
                seen |= batch
            if total != len(seen):
                raise DomainError(f"group {i} has overlapping batches")
            if seen != full:
                raise DomainError(f"group {i} does not cover every block")


@dataclass(frozen=True)
class ServiceSample:
    """One realization of the N worker service times."""

    times: tuple[float, ...]

    def __post_init__(self) -> None:
        times = tuple(float(t) for t in self.times)
        if len(times) == 0:
            raise DomainError("service sample must be non-empty")
        for t in times:
            if not math.isfinite(t) or t <= 0:
                raise DomainError(f"service times must be positive and finite, got {t}")
        object.__setattr__(self, "times", times)

    @property
    def n_workers(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class CompletionEstimate:
    """Monte Carlo summary of job completion time.

    ``coverage_rate`` is the fraction of trials in which the job was
    completable; it is 1.0 for deterministic assignment policies. The mean
    and confidence interval are taken over covered trials only.
    """

    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    n_samples: int
    seed: int
    coverage_rate: float = 1.0

    def __post_init__(self) -> None:
        _require_positive_int(self.n_samples, "n_samples")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not (self.ci95_low <= self.mean <= self.ci95_high):
            raise DomainError(
                f"confidence interval [{self.ci95_low}, {self.ci95_high}] "
                f"must contain the mean {self.mean}"
            )
        if self.std_error < 0:
            raise DomainError(f"std_error must be non-negative, got {self.std_error}")
        if not 0.0 <= self.coverage_rate <= 1.0:
            raise DomainError(f"coverage_rate must lie in [0, 1], got {self.coverage_rate}")

    def contains(self, value: float) -> bool:
        """Whether the 95% confidence interval contains ``value``."""
        return self.ci95_low <= value <= self.ci95_high


def _as_counts(vector: AssignmentVector | Sequence[int]) -> tuple[int, ...]:
    """Coerce an assignment vector or plain sequence to a tuple of counts."""
    if isinstance(vector, AssignmentVector):
        return vector.counts
    return AssignmentVector(tuple(vector)).counts


def _as_groups(
    structure: RecoveryStructure | Iterable[Iterable[int]],
) -> tuple[frozenset[int], ...]:
    """Coerce a recovery structure or iterable of worker sets to groups."""
    if isinstance(structure, RecoveryStructure):
        return structure.groups
    return RecoveryStructure(tuple(frozenset(g) for g in structure)).groups
