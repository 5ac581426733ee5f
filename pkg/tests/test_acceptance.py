"""Acceptance suite: one test per criterion at its stated tolerance and runtime budget.

The whole suite runs once per module (criterion 11 audits every run made by
the earlier criteria).  Each test prints its one-line PASS/FAIL summary.
"""
import pytest

from hybridsim.cli.acceptance import CRITERION_IDS, run_acceptance


@pytest.fixture(scope="module")
def results():
    lines = []
    res = run_acceptance(echo=lines.append)
    print("\n" + "\n".join(lines))
    return {r.id: r for r in res}


@pytest.mark.parametrize("cid", CRITERION_IDS, ids=[f"criterion_{i:02d}" for i in CRITERION_IDS])
def test_criterion(results, cid):
    r = results[cid]
    print(r.line())
    for c in r.checks:
        print(f"    [{'ok' if c.passed else 'XX'}] {c.name}: {c.detail}")
    assert r.passed, r.line()
