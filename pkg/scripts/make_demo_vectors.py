#!/usr/bin/env python3
"""Regenerate src/softprove/data/demo_vectors.txt.

The demo vocabulary is synthetic: tokens sit on dedicated basis axes except
for a handful of engineered directions that give the solver its intended
weak-unification signals (pushing_force closest to physical_harm, then
compression, then crush; leave_without_permission close enough to leave).
Every symbol pair the bundled demos can consult is checked here: pairs are
either an intended signal, a known benign overlap, or kept safely below the
0.5 unification threshold.
"""

from __future__ import annotations

import itertools
import math
import sys
from pathlib import Path

import numpy as np

DIM = 100
OUT = Path(__file__).resolve().parent.parent / "src" / "softprove" / "data" / "demo_vectors.txt"

# Tokens that share an axis-aligned unit vector each.
PLAIN_TOKENS = [
    "care", "fairness", "loyalty", "sanctity", "liberty",
    "animal", "frog", "i",
    "emotional", "human",
    "cheating", "free", "riding", "reducing", "equality",
    "public", "behavior", "threaten", "group", "reputation",
    "family", "country", "sports", "team", "school", "company",
    "disobedience", "disrespect", "figure", "institution",
    "boss", "judge", "teacher", "parent", "courthouse", "government",
    "sexually", "deviant", "degrading", "disgusting",
    "coercive", "person", "in", "power", "reduce", "freedom", "of", "choice",
    "husband", "social", "leader",
    "leave", "without", "permission",
    "breach", "rules", "challenge", "to", "justice", "system",
    "checking", "out", "safety", "procedure",
    "legal", "detain", "established", "by", "criminals",
]
# Tokens scaled below unit norm to pull shared-token symbol pairs under the
# unification threshold (they appear inside many multiword symbols).
SCALED_TOKENS = {"violate": 0.8, "authority": 0.8, "prison": 0.8, "act": 0.8, "the": 0.6}


def build() -> dict[str, np.ndarray]:
    axes = iter(range(DIM))

    def axis(scale: float = 1.0) -> np.ndarray:
        v = np.zeros(DIM)
        v[next(axes)] = scale
        return v

    vectors: dict[str, np.ndarray] = {}
    physical = axis()
    harm = axis()
    vectors["physical"] = physical
    vectors["harm"] = harm
    hdir = (physical + harm) / np.linalg.norm(physical + harm)

    def toward_harm(cosine: float) -> np.ndarray:
        return cosine * hdir + math.sqrt(1.0 - cosine * cosine) * axis()

    vectors["compression"] = toward_harm(0.77)
    vectors["crush"] = toward_harm(0.67)
    pf_mean = toward_harm(0.82)
    jitter = axis(0.3)
    vectors["pushing"] = pf_mean + jitter
    vectors["force"] = pf_mean - jitter

    for token in PLAIN_TOKENS:
        vectors[token] = axis()
    for token, scale in SCALED_TOKENS.items():
        vectors[token] = axis(scale)
    return vectors


def check(vectors: dict[str, np.ndarray]) -> None:
    def embed(symbol: str) -> np.ndarray | None:
        hits = [vectors[t] for t in symbol.split("_") if t in vectors]
        return None if not hits else np.mean(np.stack(hits), axis=0)

    def score(a: str, b: str) -> float:
        if a == b:
            return 1.0
        va, vb = embed(a), embed(b)
        if va is None or vb is None:
            return 0.0
        denom = np.linalg.norm(va) * np.linalg.norm(vb)
        return 0.0 if denom == 0 else max(0.0, float(np.dot(va, vb) / denom))

    # Every predicate or multiword constant the bundled demos can consult.
    symbols = [
        "violate_care_physical", "violate_care_emotional", "violate_fairness",
        "violate_loyalty", "violate_authority", "violate_sanctity", "violate_liberty",
        "emotional_harm", "physical_harm", "human", "animal",
        "cheating", "free_riding", "reducing_equality",
        "public_behavior", "threaten_group_reputation", "group",
        "family", "country", "sports_team", "school", "company",
        "disobedience", "disrespect", "authority_figure", "authority_institution",
        "boss", "judge", "teacher", "parent", "courthouse", "government",
        "sexually_deviant_act", "degrading_act", "disgusting_act",
        "coercive_act", "person_in_power", "reduce_freedom_of_choice",
        "husband", "social_leader",
        "crush", "compression", "pushing_force", "frog", "the_frog", "i",
        "leave", "the_prison", "prison", "checking_out", "safety_procedure",
        "breach_of_prison_rules", "leave_without_permission",
        "challenge_to_justice_system", "established_by_government",
        "legal_power_to_detain",
    ]

    ordering = [
        score("physical_harm", "pushing_force"),
        score("physical_harm", "compression"),
        score("physical_harm", "crush"),
    ]
    assert ordering[0] > ordering[1] > ordering[2] >= 0.55, ordering
    assert score("leave_without_permission", "leave") >= 0.55

    benign = {
        frozenset(p)
        for p in [
            ("violate_care_physical", "violate_care_emotional"),
            ("established_by_government", "government"),
            ("the_frog", "frog"),
            ("the_prison", "prison"),
            ("compression", "pushing_force"),
            ("crush", "pushing_force"),
            ("crush", "compression"),
            ("physical_harm", "emotional_harm"),
            ("threaten_group_reputation", "group"),
            ("physical_harm", "pushing_force"),
            ("physical_harm", "compression"),
            ("physical_harm", "crush"),
            ("leave_without_permission", "leave"),
        ]
    }
    unexpected = []
    for a, b in itertools.combinations(symbols, 2):
        s = score(a, b)
        if s >= 0.45 and frozenset((a, b)) not in benign:
            unexpected.append((a, b, s))
    assert not unexpected, f"unexpected near-threshold pairs: {unexpected}"

    print("signal  physical_harm~pushing_force  %.5f" % ordering[0])
    print("signal  physical_harm~compression    %.5f" % ordering[1])
    print("signal  physical_harm~crush          %.5f" % ordering[2])
    print("signal  leave_without_permission~leave %.5f" % score("leave_without_permission", "leave"))


def main() -> int:
    vectors = build()
    check(vectors)
    lines = [
        token + " " + " ".join("%.5f" % x for x in vec)
        for token, vec in vectors.items()
    ]
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(lines)} tokens, dim {DIM})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
