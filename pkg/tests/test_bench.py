import pytest

from softprove.bench import generate, run_bench
from softprove.prover import SolverConfig, prove_all_goals


def test_generate_exact_rule_count():
    for count in (40, 100, 250):
        kb, _ = generate(count)
        assert len(kb.rules) == count


def test_generated_kb_is_solvable_and_unsolvable():
    kb, store = generate(120)
    outcome = prove_all_goals(kb, kb.goals, store, SolverConfig())
    assert outcome is not None
    violation, result = outcome
    assert violation.value == "care"
    assert result.proof_score >= 0.13
    liberty_goal = kb.goals[1]
    from softprove.prover import prove_goal

    assert prove_goal(kb, liberty_goal, store, SolverConfig()) is None


def test_generation_is_seed_deterministic():
    kb_a, _ = generate(80, seed=5)
    kb_b, _ = generate(80, seed=5)
    assert kb_a.rules == kb_b.rules


def test_run_bench_reports_positive_times():
    report = run_bench(30, runs=2)
    assert report.proof_found
    assert report.runs == 2
    assert all(t > 0 for t in report.times_seconds)
    assert report.median_seconds > 0


@pytest.mark.slow
def test_scaling_250_500_1000_is_roughly_monotone():
    medians = {n: run_bench(n, runs=5).median_seconds for n in (250, 500, 1000)}
    # Doubling the rule count never cuts the median by more than noise.
    assert medians[500] >= medians[250] * 0.5
    assert medians[1000] >= medians[500] * 0.5
