"""Counterbalanced assignment of translators to chunk positions: each
translator gets one from-scratch chunk and one post-editing chunk per model,
with every condition appearing exactly once per row and per column."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

FROM_SCRATCH_KIND = "from_scratch"
POST_EDIT_KIND = "post_edit"

# Label used for the translate-from-scratch condition in tables and exports.
HT_LABEL = "HT"


class CountMismatch(ValueError):
    """Translator count must equal model count + 1."""


@dataclass(frozen=True)
class Condition:
    kind: str
    model_id: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in (FROM_SCRATCH_KIND, POST_EDIT_KIND):
            raise ValueError(f"unknown condition kind {self.kind!r}")
        if (self.kind == POST_EDIT_KIND) != (self.model_id is not None):
            raise ValueError("model_id is required exactly when kind is post_edit")

    @property
    def label(self) -> str:
        return HT_LABEL if self.kind == FROM_SCRATCH_KIND else str(self.model_id)

    def to_json(self) -> dict:
        payload: dict = {"kind": self.kind}
        if self.model_id is not None:
            payload["model_id"] = self.model_id
        return payload

    @classmethod
    def from_json(cls, payload: Mapping) -> "Condition":
        return cls(kind=payload["kind"], model_id=payload.get("model_id"))


FROM_SCRATCH = Condition(FROM_SCRATCH_KIND)


def post_edit(model_id: str) -> Condition:
    return Condition(POST_EDIT_KIND, model_id)


@dataclass(frozen=True)
class RotationPlan:
    """Latin square over conditions: rows are translators, columns are chunk
    positions (position k maps to chunk k)."""

    translators: tuple[str, ...]
    conditions: tuple[Condition, ...]
    rows: tuple[tuple[Condition, ...], ...]

    def condition_for(self, translator: str, position: int) -> Condition:
        i = self.translators.index(translator)
        return self.rows[i][position]

    @property
    def n_positions(self) -> int:
        return len(self.conditions)

    def to_json(self) -> dict:
        return {
            "translators": list(self.translators),
            "conditions": [c.to_json() for c in self.conditions],
            "matrix": {
                t: [c.to_json() for c in row]
                for t, row in zip(self.translators, self.rows)
            },
        }

    @classmethod
    def from_json(cls, payload: Mapping) -> "RotationPlan":
        translators = tuple(payload["translators"])
        conditions = tuple(Condition.from_json(c) for c in payload["conditions"])
        rows = tuple(
            tuple(Condition.from_json(c) for c in payload["matrix"][t]) for t in translators
        )
        return cls(translators=translators, conditions=conditions, rows=rows)


def generate_rotation(
    translators: Sequence[str], models: Sequence[str], seed: int
) -> RotationPlan:
    """Build a seeded Latin square over {from-scratch} + one post-edit
    condition per model.

    The square is cyclic with seed-derived row, column, and symbol
    permutations, so output is deterministic per (inputs, seed) and always
    valid. Requires len(translators) == len(models) + 1.
    """
    n = len(translators)
    if len(set(translators)) != n:
        raise ValueError("translator ids must be unique")
    if len(set(models)) != len(models):
        raise ValueError("model ids must be unique")
    if n != len(models) + 1:
        raise CountMismatch(
            f"{n} translators cannot rotate over {len(models) + 1} conditions "
            f"({len(models)} models + from-scratch)"
        )
    conditions = (FROM_SCRATCH,) + tuple(post_edit(m) for m in models)
    rng = random.Random(seed)
    row_perm = rng.sample(range(n), n)
    col_perm = rng.sample(range(n), n)
    sym_perm = rng.sample(range(n), n)
    rows = tuple(
        tuple(conditions[sym_perm[(row_perm[i] + col_perm[j]) % n]] for j in range(n))
        for i in range(n)
    )
    return RotationPlan(translators=tuple(translators), conditions=conditions, rows=rows)


@dataclass(frozen=True)
class RotationViolation:
    scope: str  # "row" | "column" | "shape"
    where: str
    message: str


def validate_rotation(plan: RotationPlan) -> list[RotationViolation]:
    """Check the Latin-square properties; empty list iff the plan is valid."""
    violations: list[RotationViolation] = []
    n = len(plan.conditions)
    expected = set(plan.conditions)
    if len(plan.translators) != n:
        violations.append(
            RotationViolation(
                "shape", "plan",
                f"{len(plan.translators)} translators vs {n} conditions",
            )
        )
    for t, row in zip(plan.translators, plan.rows):
        if len(row) != n:
            violations.append(
                RotationViolation("row", t, f"has {len(row)} positions, expected {n}")
            )
            continue
        for cond in expected:
            count = row.count(cond)
            if count != 1:
                violations.append(
                    RotationViolation(
                        "row", t, f"condition {cond.label} appears {count} times"
                    )
                )
    if all(len(row) == n for row in plan.rows):
        for j in range(n):
            column = [row[j] for row in plan.rows]
            for cond in expected:
                count = column.count(cond)
                if count != 1:
                    violations.append(
                        RotationViolation(
                            "column", str(j),
                            f"condition {cond.label} appears {count} times",
                        )
                    )
    return violations
