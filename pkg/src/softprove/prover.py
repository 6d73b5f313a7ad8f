"""Depth-limited backward chaining with weak unification and product scoring.

A proof scores the running product, in depth-first pre-order, of
``unification_score * rule_score`` over its steps.  Because every factor is
at most 1.0, partial branches whose running product is already below the
proof threshold can be pruned without changing the best complete proof.

The enumeration is exhaustive up to ``max_depth`` and fully deterministic:
rules are tried in knowledge-base order and ties between equal-scoring proofs
break by fewer steps, then by lexicographically smallest sorted rule-id set.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional, Sequence

from .embeddings import EmbeddingStore, weak_unify_score
from .logic import (
    Atom,
    Constant,
    EMPTY_SUBSTITUTION,
    GoalSpec,
    KnowledgeBase,
    MoralViolation,
    OriginKind,
    Rule,
    Substitution,
    Term,
    Variable,
    apply_substitution,
    apply_term,
    compose,
)


class Aggregation(Enum):
    PRODUCT = "product"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    """Search thresholds and limits; defaults follow the tuned configuration."""

    unify_threshold: float = 0.5
    proof_threshold: float = 0.13
    max_depth: int = 10
    max_proofs_per_goal: int = 10_000
    aggregation: Aggregation = Aggregation.PRODUCT
    # Extensions beyond the core knobs: weak constant matching, a strict `>`
    # proof-threshold mode, and a pruning toggle kept for invariant testing.
    weak_constants: bool = False
    strict_threshold: bool = False
    prune: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.unify_threshold <= 1.0):
            raise ConfigError(f"unify_threshold must be in (0, 1]: {self.unify_threshold}")
        if not (0.0 < self.proof_threshold <= 1.0):
            raise ConfigError(f"proof_threshold must be in (0, 1]: {self.proof_threshold}")
        if self.max_depth < 1:
            raise ConfigError(f"max_depth must be >= 1: {self.max_depth}")
        if self.max_proofs_per_goal < 1:
            raise ConfigError(f"max_proofs_per_goal must be >= 1: {self.max_proofs_per_goal}")


@dataclass(frozen=True)
class ProofStep:
    """One rule application: the resolved goal, the rule used, its unify score."""

    goal_atom: Atom
    rule_id: str
    unification_score: float
    children: tuple["ProofStep", ...] = ()

    def walk(self) -> Iterator["ProofStep"]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class ProofResult:
    violation: MoralViolation
    proof: ProofStep
    proof_score: float
    used_rule_ids: frozenset[str]
    budget_exceeded: bool = False


def weak_unify_atoms(
    a: Atom,
    b: Atom,
    theta: Substitution,
    store: EmbeddingStore,
    config: SolverConfig,
) -> Optional[tuple[Substitution, float]]:
    """Unify goal atom ``a`` with rule head ``b`` under ``theta``.

    Predicates match exactly (score 1.0) or by embedding similarity at or
    above the unify threshold.  Arguments match structurally; constants
    require string equality unless ``weak_constants`` is set, in which case
    their pair scores multiply into the returned score.
    """
    if a.arity != b.arity:
        return None
    if a.predicate == b.predicate:
        score = 1.0
    else:
        score = weak_unify_score(store, a.predicate, b.predicate)
        if score < config.unify_threshold:
            return None
    for raw_left, raw_right in zip(a.args, b.args):
        left = apply_term(theta, raw_left)
        right = apply_term(theta, raw_right)
        if isinstance(left, Constant) and isinstance(right, Constant):
            if left.symbol == right.symbol:
                continue
            if not config.weak_constants:
                return None
            const_score = weak_unify_score(store, left.symbol, right.symbol)
            if const_score < config.unify_threshold:
                return None
            score = score * const_score
            continue
        if isinstance(left, Variable) and isinstance(right, Variable):
            if left.name == right.name:
                continue
            # Bind the rule-side variable so goal naming survives in output.
            theta = compose(theta, Substitution({right.name: left}))
        elif isinstance(left, Variable):
            theta = compose(theta, Substitution({left.name: right}))
        else:
            theta = compose(theta, Substitution({right.name: left}))
    return theta, score


@dataclass
class _RawNode:
    goal_atom: Atom
    rule_id: str
    unification_score: float
    children: tuple["_RawNode", ...]


@dataclass
class _Candidate:
    score: float
    steps: int
    rule_ids: tuple[str, ...]
    node: _RawNode
    theta: Substitution


class _Search:
    def __init__(self, kb: KnowledgeBase, store: EmbeddingStore, config: SolverConfig) -> None:
        self.kb = kb
        self.store = store
        self.config = config
        self._fresh = 0
        self._reserved = set()

    def _fresh_variable(self) -> Variable:
        while True:
            name = f"V{self._fresh}"
            self._fresh += 1
            if name not in self._reserved:
                return Variable(name)

    def _rename(self, rule: Rule) -> tuple[Atom, tuple[Atom, ...]]:
        mapping: dict[str, Variable] = {}

        def fresh(term: Term) -> Term:
            if isinstance(term, Variable):
                if term.name not in mapping:
                    mapping[term.name] = self._fresh_variable()
                return mapping[term.name]
            return term

        head = Atom(rule.head.predicate, tuple(fresh(t) for t in rule.head.args))
        body = tuple(Atom(a.predicate, tuple(fresh(t) for t in a.args)) for a in rule.body)
        return head, body

    def _pruned(self, running: float) -> bool:
        if not self.config.prune:
            return False
        if self.config.strict_threshold:
            return running <= self.config.proof_threshold
        return running < self.config.proof_threshold

    def solve(
        self, goal_atom: Atom, theta: Substitution, depth: int, running: float
    ) -> Iterator[tuple[Substitution, _RawNode, float]]:
        if depth > self.config.max_depth:
            return
        for rule in self.kb.rules:
            if rule.head.arity != goal_atom.arity:
                continue
            head, body = self._rename(rule)
            unified = weak_unify_atoms(goal_atom, head, theta, self.store, self.config)
            if unified is None:
                continue
            theta1, unify = unified
            factor = unify * rule.score
            running1 = running * factor
            if self._pruned(running1):
                continue
            for theta2, children, running2 in self._solve_body(body, theta1, depth, running1):
                node = _RawNode(goal_atom, rule.id, unify, children)
                yield theta2, node, running2

    def _solve_body(
        self, atoms: tuple[Atom, ...], theta: Substitution, depth: int, running: float
    ) -> Iterator[tuple[Substitution, tuple[_RawNode, ...], float]]:
        if not atoms:
            yield theta, (), running
            return
        first, rest = atoms[0], atoms[1:]
        for theta1, node, running1 in self.solve(first, theta, depth + 1, running):
            for theta2, tail, running2 in self._solve_body(rest, theta1, depth, running1):
                yield theta2, (node,) + tail, running2

    def run(self, spec: GoalSpec) -> Optional[ProofResult]:
        self._reserved = {v.name for v in spec.goal_atom.variables()}
        accepts = self._accepts
        best: Optional[_Candidate] = None
        complete = 0
        truncated = False
        for theta, node, score in self.solve(spec.goal_atom, EMPTY_SUBSTITUTION, 1, 1.0):
            complete += 1
            if complete > self.config.max_proofs_per_goal:
                truncated = True
                break
            if not accepts(score):
                continue
            candidate = _Candidate(
                score=score,
                steps=self._count(node),
                rule_ids=tuple(sorted(self._collect_ids(node))),
                node=node,
                theta=theta,
            )
            if best is None or self._better(candidate, best):
                best = candidate
        if best is None:
            return None
        root = self._materialize(best.node, best.theta)
        return ProofResult(
            violation=spec.violation,
            proof=root,
            proof_score=best.score,
            used_rule_ids=frozenset(best.rule_ids),
            budget_exceeded=truncated,
        )

    def _accepts(self, score: float) -> bool:
        if self.config.strict_threshold:
            return score > self.config.proof_threshold
        return score >= self.config.proof_threshold

    @staticmethod
    def _better(candidate: _Candidate, best: _Candidate) -> bool:
        if candidate.score != best.score:
            return candidate.score > best.score
        if candidate.steps != best.steps:
            return candidate.steps < best.steps
        return candidate.rule_ids < best.rule_ids

    @classmethod
    def _count(cls, node: _RawNode) -> int:
        return 1 + sum(cls._count(child) for child in node.children)

    @classmethod
    def _collect_ids(cls, node: _RawNode, into: Optional[set] = None) -> set:
        into = set() if into is None else into
        into.add(node.rule_id)
        for child in node.children:
            cls._collect_ids(child, into)
        return into

    def _materialize(self, node: _RawNode, theta: Substitution) -> ProofStep:
        return ProofStep(
            goal_atom=apply_substitution(node.goal_atom, theta),
            rule_id=node.rule_id,
            unification_score=node.unification_score,
            children=tuple(self._materialize(child, theta) for child in node.children),
        )


def prove_goal(
    kb: KnowledgeBase,
    goal: GoalSpec,
    store: EmbeddingStore,
    config: SolverConfig = SolverConfig(),
) -> Optional[ProofResult]:
    """Best-scoring complete proof of one goal, or None if nothing clears the bar."""
    return _Search(kb, store, config).run(goal)


def prove_all_goals(
    kb: KnowledgeBase,
    goals: Sequence[GoalSpec],
    store: EmbeddingStore,
    config: SolverConfig = SolverConfig(),
) -> Optional[tuple[MoralViolation, ProofResult]]:
    """Try each goal in order; the globally best proof names the hypothesis.

    Ties across goals go to the earlier goal in ``goals``.  If any per-goal
    search hit the proof budget, the winning result is flagged as possibly
    non-optimal.
    """
    if not goals:
        raise ConfigError("prove_all_goals needs at least one goal")
    best: Optional[tuple[MoralViolation, ProofResult]] = None
    any_truncated = False
    for spec in goals:
        result = prove_goal(kb, spec, store, config)
        if result is None:
            continue
        any_truncated = any_truncated or result.budget_exceeded
        if best is None or result.proof_score > best[1].proof_score:
            best = (spec.violation, result)
    if best is not None and any_truncated and not best[1].budget_exceeded:
        best = (best[0], replace(best[1], budget_exceeded=True))
    return best


def facts_in_proof(result: ProofResult, kb: KnowledgeBase) -> set[str]:
    """Ids of the explanation facts whose formalized rules appear in the proof."""
    ids: set[str] = set()
    for step in result.proof.walk():
        rule = kb.rule_by_id(step.rule_id)
        if rule.origin.kind is OriginKind.GENERATED_FACT:
            ids.add(rule.origin.nl_fact_id)  # type: ignore[arg-type]
    return ids


def render_proof(result: ProofResult) -> str:
    """Indented text tree: score header, one rule application per line."""
    lines = [f"{result.proof_score:.5f} {result.proof.goal_atom.predicate}"]

    def walk(step: ProofStep, depth: int) -> None:
        indent = "  " * depth
        lines.append(f"{indent}{step.goal_atom} <= {step.rule_id}  [unify {step.unification_score:.5f}]")
        for child in step.children:
            walk(child, depth + 1)

    walk(result.proof, 1)
    return "\n".join(lines)


def proof_to_dict(result: ProofResult) -> dict:
    """JSON-ready form of a proof result."""

    def step_dict(step: ProofStep) -> dict:
        return {
            "goal": str(step.goal_atom),
            "rule_id": step.rule_id,
            "unification_score": step.unification_score,
            "children": [step_dict(c) for c in step.children],
        }

    return {
        "violation": result.violation.value,
        "proof_score": result.proof_score,
        "budget_exceeded": result.budget_exceeded,
        "steps": [step_dict(result.proof)],
    }
