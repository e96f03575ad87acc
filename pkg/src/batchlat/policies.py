"""Constructors and validators for batch-to-worker assignment policies.

Two families. Non-overlapping batching splits the data set into B disjoint
batches and assigns each worker exactly one of them; such a policy is fully
described by an AssignmentVector of per-batch replica counts. Overlapping
batching gives each worker a window of blocks that may intersect other
workers' windows; completion is then governed by a RecoveryStructure of
worker groups whose batches partition the block set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    AssignmentVector,
    BatchingKind,
    BatchLayout,
    ComplexityGuardError,
    DomainError,
    NonDivisibleError,
    RecoveryStructure,
    SystemParams,
    _require_positive_int,
    validate_params,
)

__all__ = [
    "PolicyKind",
    "PolicySpec",
    "MAX_REPLICATED_GROUPS",
    "balanced_assignment",
    "random_cc_assignment",
    "cyclic_layout",
    "shared_pair_layout",
    "replicated_nonoverlap_layout",
    "validate_policy",
    "resolve_counts",
    "resolve_groups",
]

#: Refuse to materialize replicated-layout recovery structures beyond this
#: many groups; the assignment-vector form covers those cases compactly.
MAX_REPLICATED_GROUPS = 4096


class PolicyKind(str, Enum):
    """The policy families accepted by the simulator and the CLI."""

    BALANCED = "balanced"
    EXPLICIT_VECTOR = "explicit-vector"
    RANDOM_CC = "random-cc"
    CYCLIC = "cyclic"
    GROUPED_OVERLAP = "grouped-overlap"
    EXPLICIT_STRUCTURE = "explicit-structure"


#: Kinds whose completion semantics are a max over batches of replica minima.
VECTOR_KINDS = frozenset({PolicyKind.BALANCED, PolicyKind.EXPLICIT_VECTOR, PolicyKind.RANDOM_CC})

#: Kinds whose completion semantics are a min over recovery groups.
GROUP_KINDS = frozenset(
    {PolicyKind.CYCLIC, PolicyKind.GROUPED_OVERLAP, PolicyKind.EXPLICIT_STRUCTURE}
)


@dataclass(frozen=True)
class PolicySpec:
    """A policy kind plus the payload that kind needs.

    ``explicit-vector`` carries ``vector`` (per-batch replica counts) and
    ``explicit-structure`` carries ``groups`` (worker-id sets); every other
    kind is fully determined by the system parameters and takes no payload.
    """

    kind: PolicyKind
    vector: tuple[int, ...] | None = None
    groups: tuple[frozenset[int], ...] | None = None

    def __post_init__(self) -> None:
        try:
            kind = PolicyKind(self.kind)
        except ValueError:
            raise DomainError(
                f"unknown policy kind {self.kind!r}; expected one of "
                f"{sorted(k.value for k in PolicyKind)}"
            ) from None
        object.__setattr__(self, "kind", kind)
        if kind is PolicyKind.EXPLICIT_VECTOR:
            if self.vector is None:
                raise DomainError("explicit-vector policy requires a replica-count vector")
            object.__setattr__(self, "vector", AssignmentVector(tuple(self.vector)).counts)
        elif self.vector is not None:
            raise DomainError(f"policy kind {kind.value!r} takes no vector payload")
        if kind is PolicyKind.EXPLICIT_STRUCTURE:
            if self.groups is None:
                raise DomainError("explicit-structure policy requires recovery groups")
            structure = RecoveryStructure(tuple(frozenset(g) for g in self.groups))
            object.__setattr__(self, "groups", structure.groups)
        elif self.groups is not None:
            raise DomainError(f"policy kind {kind.value!r} takes no groups payload")


def balanced_assignment(n_workers: int, n_batches: int) -> AssignmentVector:
    """The unique balanced vector: every one of the B batches gets N/B workers."""
    _require_positive_int(n_workers, "n_workers")
    _require_positive_int(n_batches, "n_batches")
    if n_workers % n_batches != 0:
        raise NonDivisibleError(
            f"balanced assignment needs n_batches={n_batches} dividing n_workers={n_workers}"
        )
    return AssignmentVector((n_workers // n_batches,) * n_batches)


def random_cc_assignment(
    n_workers: int, n_batches: int, rng: np.random.Generator
) -> AssignmentVector:
    """Each worker draws a batch uniformly with replacement; returns the counts.

    Entries may be zero: there is a non-zero probability that some batch is
    never drawn, in which case the resulting vector cannot complete a job.
    The caller owns the generator; this function draws exactly n_workers
    uniforms from it.
    """
    _require_positive_int(n_workers, "n_workers")
    _require_positive_int(n_batches, "n_batches")
    # floor(u * B) with the top value clipped; u < 1, so the clip only
    # guards the rounding edge of the multiply.
    ids = np.minimum(
        (rng.random(n_workers) * n_batches).astype(np.int64), n_batches - 1
    )
    counts = np.bincount(ids, minlength=n_batches)
    return AssignmentVector(tuple(int(c) for c in counts))


def cyclic_layout(n_workers: int, n_batches: int) -> tuple[BatchLayout, RecoveryStructure]:
    """Cyclic overlapping batching over S = N blocks.

    Worker w holds the window of N/B consecutive blocks starting at block w,
    wrapping modulo N. The N/B recovery groups are the stride-N/B worker
    sets {r, r + N/B, r + 2N/B, ...}; each group's windows tile the block
    set exactly.
    """
    params = SystemParams(n_workers, n_workers, n_batches)
    validate_params(params, BatchingKind.OVERLAPPING)
    size = n_workers // n_batches
    batches = tuple(
        frozenset((w + j) % n_workers for j in range(size)) for w in range(n_workers)
    )
    groups = tuple(
        frozenset(r + i * size for i in range(n_batches)) for r in range(size)
    )
    return BatchLayout(batches, n_blocks=n_workers), RecoveryStructure(groups)


def shared_pair_layout() -> tuple[BatchLayout, RecoveryStructure]:
    """Fixed six-worker overlapping layout with a shared trailing block pair.

    Workers 4 and 5 hold the identical batch {4, 5}, so the four recovery
    groups all route through one of them; workers 0..3 hold the wrapped
    windows over blocks 0..3. Expected completion time sits strictly between
    the cyclic layout and the replicated non-overlapping layout on the same
    six workers.
    """
    batches = (
        frozenset({0, 1}),
        frozenset({1, 2}),
        frozenset({2, 3}),
        frozenset({3, 0}),
        frozenset({4, 5}),
        frozenset({4, 5}),
    )
    groups = (
        frozenset({0, 2, 4}),
        frozenset({0, 2, 5}),
        frozenset({1, 3, 4}),
        frozenset({1, 3, 5}),
    )
    return BatchLayout(batches, n_blocks=6), RecoveryStructure(groups)


def replicated_nonoverlap_layout(
    n_workers: int, n_batches: int
) -> tuple[BatchLayout, RecoveryStructure]:
    """Non-overlapping batching expressed as a layout over S = N blocks.

    Workers come in runs of N/B holding an identical batch of N/B
    consecutive blocks. The recovery groups are every pick of one replica
    per batch, (N/B)^B of them, so completion coincides with the balanced
    assignment vector: each batch needs at least one finished replica.
    Materializing the groups is refused beyond MAX_REPLICATED_GROUPS; use
    the assignment-vector form for larger systems.
    """
    params = SystemParams(n_workers, n_workers, n_batches)
    validate_params(params, BatchingKind.OVERLAPPING)
    replication = n_workers // n_batches
    size = n_workers // n_batches
    batches = tuple(
        frozenset(range((w // replication) * size, (w // replication + 1) * size))
        for w in range(n_workers)
    )
    n_groups = replication**n_batches
    if n_groups > MAX_REPLICATED_GROUPS:
        raise ComplexityGuardError(
            f"replicated layout would need {n_groups} recovery groups "
            f"(> {MAX_REPLICATED_GROUPS}); use the balanced AssignmentVector instead"
        )
    groups = tuple(
        frozenset(b * replication + pick[b] for b in range(n_batches))
        for pick in itertools.product(range(replication), repeat=n_batches)
    )
    return BatchLayout(batches, n_blocks=n_workers), RecoveryStructure(groups)


def validate_policy(spec: PolicySpec, params: SystemParams) -> None:
    """Check that a policy is usable with the given system parameters.

    Raises DomainError (or a subclass) when shapes do not line up, for
    example a vector of the wrong length or an overlapping policy on a
    system with S != N.
    """
    if not isinstance(spec, PolicySpec):
        raise DomainError(f"expected a PolicySpec, got {spec!r}")
    if not isinstance(params, SystemParams):
        raise DomainError(f"expected SystemParams, got {params!r}")
    kind = spec.kind
    if kind is PolicyKind.BALANCED:
        validate_params(params, BatchingKind.NON_OVERLAPPING)
        if params.n_workers % params.n_batches != 0:
            raise NonDivisibleError(
                f"balanced assignment needs n_batches={params.n_batches} "
                f"dividing n_workers={params.n_workers}"
            )
    elif kind is PolicyKind.EXPLICIT_VECTOR:
        validate_params(params, BatchingKind.NON_OVERLAPPING)
        assert spec.vector is not None
        if len(spec.vector) != params.n_batches:
            raise DomainError(
                f"vector has {len(spec.vector)} entries but the system has "
                f"{params.n_batches} batches"
            )
        if sum(spec.vector) != params.n_workers:
            raise DomainError(
                f"vector assigns {sum(spec.vector)} workers but the system has "
                f"{params.n_workers}"
            )
    elif kind is PolicyKind.RANDOM_CC:
        validate_params(params, BatchingKind.NON_OVERLAPPING)
    elif kind in (PolicyKind.CYCLIC, PolicyKind.GROUPED_OVERLAP):
        validate_params(params, BatchingKind.OVERLAPPING)
        if kind is PolicyKind.GROUPED_OVERLAP and (
            params.n_workers != 6 or params.n_batches != 3
        ):
            raise DomainError(
                "the grouped-overlap policy is a fixed six-worker, three-batch instance"
            )
    elif kind is PolicyKind.EXPLICIT_STRUCTURE:
        validate_params(params, BatchingKind.ANY)
        assert spec.groups is not None
        for g in spec.groups:
            if max(g) >= params.n_workers:
                raise DomainError(
                    f"group {sorted(g)} references a worker >= {params.n_workers}"
                )
    else:  # pragma: no cover - PolicyKind is closed
        raise DomainError(f"unhandled policy kind {kind!r}")


def resolve_counts(spec: PolicySpec, params: SystemParams) -> tuple[int, ...]:
    """Per-batch replica counts for the deterministic vector-based kinds."""
    if spec.kind is PolicyKind.BALANCED:
        return balanced_assignment(params.n_workers, params.n_batches).counts
    if spec.kind is PolicyKind.EXPLICIT_VECTOR:
        assert spec.vector is not None
        return spec.vector
    raise DomainError(f"policy kind {spec.kind.value!r} has no fixed assignment vector")


def resolve_groups(spec: PolicySpec, params: SystemParams) -> tuple[frozenset[int], ...]:
    """Recovery groups for the group-based kinds."""
    if spec.kind is PolicyKind.CYCLIC:
        return cyclic_layout(params.n_workers, params.n_batches)[1].groups
    if spec.kind is PolicyKind.GROUPED_OVERLAP:
        return shared_pair_layout()[1].groups
    if spec.kind is PolicyKind.EXPLICIT_STRUCTURE:
        assert spec.groups is not None
        return spec.groups
    raise DomainError(f"policy kind {spec.kind.value!r} has no recovery structure")
