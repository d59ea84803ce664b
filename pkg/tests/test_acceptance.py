"""Acceptance matrix: one test per criterion, each at its stated tolerance.

Every test prints a single pass/fail line; the lines are repeated in the
terminal summary.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import pytest

from hartree_decay.acceptance import CRITERIA

BY_NUMBER = {c.number: c for c in CRITERIA}


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(BY_NUMBER), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, acceptance_context, criterion_lines):
    result = BY_NUMBER[number].run(acceptance_context)
    line = result.line()
    criterion_lines.append(line)
    print(line)
    failed = [k for k, v in result.parts.items() if not v]
    assert result.passed, f"{line}; metrics: { {k: v for k, v in result.metrics.items() if k in failed or not failed} }"
