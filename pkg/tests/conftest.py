import time
from typing import Any, NamedTuple

import pytest

from fixtures import skewed_weak_hopf
from weakhopf.examples import GROUPS, function_algebra, groupoid_algebra, transitive_groupoid
from weakhopf.larson_sweedler import full_pipeline

# acceptance lines collected during the run and echoed in the summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


class Case(NamedTuple):
    name: str
    A: Any
    D: Any
    eps: Any          # closed-form counit, None when there is none
    S: Any            # closed-form antipode, None when there is none
    result: Any
    objects: int
    group: str
    kind: str         # "groupoid", "dual" or "skewed"


def _run(kind, k, g):
    G = transitive_groupoid(k, g)
    build = groupoid_algebra if kind == "groupoid" else function_algebra
    A, D, eps, S = build(G)
    return A, D, eps, S, full_pipeline(A, D)


@pytest.fixture(scope="session")
def groupoid_cases():
    """The 15 groupoid algebras (pair groupoid on 1..3 objects times a group)
    with their pipeline results and the total pipeline time."""
    cases = []
    start = time.perf_counter()
    for k in (1, 2, 3):
        for g in sorted(GROUPS):
            A, D, eps, S, res = _run("groupoid", k, g)
            cases.append(Case(f"groupoid {k}x{g}", A, D, eps, S, res, k, g, "groupoid"))
    elapsed = time.perf_counter() - start
    return cases, elapsed


@pytest.fixture(scope="session")
def dual_cases():
    """Function algebras of the same groupoids, up to dimension 18."""
    cases = []
    for k in (1, 2, 3):
        for g in sorted(GROUPS):
            if k * k * GROUPS[g].order > 18:
                continue
            A, D, eps, S, res = _run("dual", k, g)
            cases.append(Case(f"functions {k}x{g}", A, D, eps, S, res, k, g, "dual"))
    return cases


@pytest.fixture(scope="session")
def skewed_case():
    A, D = skewed_weak_hopf()
    return Case("skewed M2⊗M2°", A, D, None, None, full_pipeline(A, D), 0, "", "skewed")


@pytest.fixture(scope="session")
def all_cases(groupoid_cases, dual_cases, skewed_case):
    return groupoid_cases[0] + dual_cases + [skewed_case]


@pytest.fixture
def acceptance():
    """record(n, ok, detail) appends one PASS/FAIL line for criterion n."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record
