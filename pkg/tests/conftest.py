from __future__ import annotations

from fractions import Fraction

import pytest

from cmfrag.degseq import DegreeModel


def family_model(nu: float, c: float = 0.05) -> DegreeModel:
    """lambda_3 = c with lambda_1, lambda_2 solved for the target nu."""
    lam2 = (nu + 2 * nu * c - 6 * c) / (2 - nu)
    return DegreeModel({1: 1 - lam2 - c, 2: lam2, 3: c})


@pytest.fixture
def model_half() -> DegreeModel:
    # nu = (0.4 + 0.24) / (0.76 + 0.4 + 0.12) = 0.5
    return DegreeModel({1: 0.76, 2: 0.2, 3: 0.04})


@pytest.fixture
def model_exact() -> DegreeModel:
    # nu = 4/5 exactly
    return DegreeModel({1: Fraction(3, 5), 2: Fraction(3, 10), 3: Fraction(1, 10)})


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
