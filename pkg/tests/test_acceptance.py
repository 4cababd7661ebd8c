"""End-to-end acceptance suite.

Each criterion is a self-contained check of the library's headline claims
(decoupling-order scaling, pulse-count formulas, operation-set invariants,
Lie closures, pulse-shaping orders, and the conjugation-robustness property).
One line per criterion is printed with the measured values.
"""

import pytest

from ddkit.acceptance import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda fn: fn.__name__)
def test_criterion(criterion):
    result = criterion()
    print(f"[{'PASS' if result.passed else 'FAIL'}] "
          f"{result.number:2d}. {result.name}: {result.details}")
    assert result.passed, f"criterion {result.number} ({result.name}): {result.details}"
