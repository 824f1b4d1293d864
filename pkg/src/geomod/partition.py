"""Disjoint covers of a node set by community labels."""

from __future__ import annotations

from typing import Iterable, Mapping

from .errors import ConsistencyError, DomainError


class Partition:
    """Node -> community assignment with a consistent membership index.

    Community ids are arbitrary integers; two partitions compare equal only
    if they agree label for label. Use :meth:`same_grouping` to compare the
    groupings themselves, or :meth:`canonical` to relabel by smallest member.
    """

    __slots__ = ("_assign", "_members")

    def __init__(self, assignment: Mapping[int, int]):
        self._assign = {int(u): int(c) for u, c in sorted(assignment.items())}
        members: dict[int, list[int]] = {}
        for u, c in self._assign.items():
            members.setdefault(c, []).append(u)
        self._members = {c: frozenset(ms) for c, ms in sorted(members.items())}

    @classmethod
    def from_communities(cls, communities: Iterable[Iterable[int]]) -> "Partition":
        assign = {}
        for c, members in enumerate(communities):
            members = list(members)
            if not members:
                raise DomainError("communities must be non-empty")
            for u in members:
                if u in assign:
                    raise DomainError(f"node {u} appears in two communities")
                assign[u] = c
        return cls(assign)

    @classmethod
    def singletons(cls, nodes: Iterable[int]) -> "Partition":
        return cls({u: i for i, u in enumerate(sorted(nodes))})

    @classmethod
    def whole(cls, nodes: Iterable[int]) -> "Partition":
        return cls({u: 0 for u in nodes})

    @property
    def assignment(self) -> dict[int, int]:
        return dict(self._assign)

    @property
    def communities(self) -> dict[int, frozenset]:
        return dict(self._members)

    def community_of(self, u: int) -> int:
        return self._assign[u]

    def members(self, c: int) -> frozenset:
        return self._members[c]

    def nodes(self) -> list[int]:
        return list(self._assign)

    def __len__(self) -> int:
        """Number of communities."""
        return len(self._members)

    def __contains__(self, u) -> bool:
        return u in self._assign

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self._assign == other._assign

    def __hash__(self):
        return hash(tuple(self._assign.items()))

    def __repr__(self) -> str:
        return f"Partition({len(self._assign)} nodes, {len(self._members)} communities)"

    def canonical(self) -> "Partition":
        """Relabel communities 0..q-1 in order of their smallest member."""
        order = sorted(self._members.values(), key=min)
        return Partition.from_communities(sorted(ms) for ms in order)

    def same_grouping(self, other: "Partition") -> bool:
        return set(self._members.values()) == set(other._members.values())

    def relabel(self, mapping: Mapping[int, int]) -> "Partition":
        if len(set(mapping[c] for c in self._members)) != len(self._members):
            raise DomainError("relabeling must be injective")
        return Partition({u: mapping[c] for u, c in self._assign.items()})

    def with_move(self, u: int, c: int) -> "Partition":
        """Copy of this partition with node ``u`` placed in community ``c``."""
        assign = dict(self._assign)
        assign[u] = c
        return Partition(assign)

    def check_covers(self, node_ids: Iterable[int]) -> None:
        ids = set(node_ids)
        if ids != set(self._assign):
            extra = sorted(set(self._assign) - ids)[:5]
            missing = sorted(ids - set(self._assign))[:5]
            raise ConsistencyError(
                f"partition does not cover the graph (missing {missing}, unknown {extra})")

    def labels(self, node_ids) -> list[int]:
        """Community label of each id in ``node_ids``, in that order."""
        return [self._assign[u] for u in node_ids]
