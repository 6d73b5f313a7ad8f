"""Synthetic scalability benchmark for the proof search.

The generated knowledge base mixes one solvable goal (a fact chain reaching a
principle-style rule), one unsolvable goal, relevant-but-unused rules whose
heads weakly unify with chain predicates but dead-end, and bulk filler
facts/rules on orthogonal vocabulary.  Timing covers ``prove_all_goals``
only; generation is excluded.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingStore
from .logic import (
    Atom,
    Constant,
    GoalSpec,
    KnowledgeBase,
    MoralViolation,
    PRINCIPLE,
    Rule,
    Variable,
)
from .prover import SolverConfig, prove_all_goals

DEFAULT_SEED = 20240901
_CHAIN_DEPTH = 5


@dataclass(frozen=True)
class BenchReport:
    rule_count: int
    runs: int
    times_seconds: tuple[float, ...]
    median_seconds: float
    proof_found: bool
    proof_score: float

    def to_dict(self) -> dict:
        return {
            "rule_count": self.rule_count,
            "runs": self.runs,
            "times_seconds": list(self.times_seconds),
            "median_seconds": self.median_seconds,
            "proof_found": self.proof_found,
            "proof_score": self.proof_score,
        }


def generate(rule_count: int, seed: int = DEFAULT_SEED) -> tuple[KnowledgeBase, EmbeddingStore]:
    """A KB of exactly ``rule_count`` rules plus a matching synthetic store."""
    if rule_count < 1:
        raise ValueError(f"rule_count must be >= 1: {rule_count}")
    rng = np.random.default_rng(seed)
    dim = 48
    vectors: dict[str, np.ndarray] = {}
    axis = iter(range(dim))

    def basis() -> np.ndarray:
        v = np.zeros(dim)
        v[next(axis)] = 1.0
        return v

    x, y = Variable("X"), Variable("Y")
    action, patient = Constant("action"), Constant("patient")
    rules: list[Rule] = []

    def add(rule_id: str, head: Atom, body: tuple[Atom, ...] = (), score: float = 1.0) -> None:
        rules.append(Rule(head=head, body=body, score=score, id=rule_id, origin=PRINCIPLE))

    # Solvable chain: goal -> chain0 .. chainN -> ground fact, plus patient kind.
    chain = [f"chain{i}" for i in range(_CHAIN_DEPTH)]
    for name in chain + ["kind0", "kind1"]:
        vectors[name] = basis()
    add("root", Atom("violate_care_physical", (x, y)), (Atom(chain[0], (x,)), Atom("kind0", (y,))))
    for i in range(len(chain) - 1):
        add(f"c{i}", Atom(chain[i], (x,)), (Atom(chain[i + 1], (x,)),))
    add("cfact", Atom(chain[-1], (action,)))
    add("k0", Atom("kind0", (y,)), (Atom("kind1", (y,)),))
    add("kfact", Atom("kind1", (patient,)))
    # Unsolvable goal support: a rule whose body has no facts anywhere.
    add("blocked", Atom("violate_liberty", (x, y)), (Atom("blocked0", (x,)), Atom("blocked1", (y,))))
    vectors["blocked0"] = basis()
    vectors["blocked1"] = basis()

    # Relevant-but-unused: heads near chain predicates (cosine 0.8) that either
    # dead-end or complete at a lower score than the exact chain.
    remaining = rule_count - len(rules)
    near_budget = max(0, min(remaining // 20, 2 * len(chain)))
    jitter_dims = [basis() for _ in range(2)]
    for i in range(near_budget):
        target = chain[i % len(chain)]
        near = 0.8 * vectors[target] + 0.6 * jitter_dims[i % 2]
        name = f"near{i}"
        vectors[name] = near
        if i % 2 == 0:
            add(f"n{i}", Atom(name, (x,)), (Atom(f"neardead{i}", (x,)),))
        else:
            add(f"n{i}", Atom(name, (action,)))
    remaining = rule_count - len(rules)
    if remaining < 0:
        raise ValueError(f"rule_count {rule_count} too small for the benchmark scaffold")

    # Bulk fillers: orthogonal to the chain, half facts, half one-hop rules.
    filler_dirs = rng.normal(size=(max(remaining, 1), dim - 24))
    for i in range(remaining):
        vec = np.zeros(dim)
        vec[24:] = filler_dirs[i]
        vec /= np.linalg.norm(vec)
        name = f"fill{i}"
        vectors[name] = vec
        if i % 2 == 0:
            add(f"f{i}", Atom(name, (action,)))
        else:
            add(f"f{i}", Atom(name, (x,)), (Atom(f"fill{i - 1}", (x,)),))

    goals = (
        GoalSpec(MoralViolation.CARE, Atom("violate_care_physical", (action, patient))),
        GoalSpec(MoralViolation.LIBERTY, Atom("violate_liberty", (action, patient))),
    )
    store = EmbeddingStore(dim, vectors)
    return KnowledgeBase(tuple(rules), goals), store


def run_bench(
    rule_count: int,
    runs: int = 10,
    seed: int = DEFAULT_SEED,
    config: SolverConfig = SolverConfig(),
) -> BenchReport:
    kb, store = generate(rule_count, seed)
    times = []
    outcome = None
    for _ in range(runs):
        start = time.perf_counter()
        outcome = prove_all_goals(kb, kb.goals, store, config)
        times.append(time.perf_counter() - start)
    return BenchReport(
        rule_count=rule_count,
        runs=runs,
        times_seconds=tuple(times),
        median_seconds=statistics.median(times),
        proof_found=outcome is not None,
        proof_score=outcome[1].proof_score if outcome else 0.0,
    )
