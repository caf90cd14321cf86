"""Shared fixtures plus the acceptance summary lines.

Tests in test_acceptance.py carry an `acceptance(slug)` marker; after the
run one `ACCEPTANCE <slug>: PASS/FAIL` line per criterion is written to
the terminal summary so the release gate is readable at a glance.
"""

import numpy as np
import pytest

from robest import ParamVectorSpec, log_norm

_ACCEPTANCE: dict[str, bool] = {}
_NOTES: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call":
        _ACCEPTANCE[marker.args[0]] = rep.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_line("")
    for slug, ok in _ACCEPTANCE.items():
        note = f" ({_NOTES[slug]})" if slug in _NOTES else ""
        terminalreporter.write_line(
            f"ACCEPTANCE {slug}: {'PASS' if ok else 'FAIL'}{note}"
        )


@pytest.fixture
def acceptance_note(request):
    """Attach a short detail string to this test's ACCEPTANCE line."""
    marker = request.node.get_closest_marker("acceptance")

    def note(text: str) -> None:
        if marker:
            _NOTES[marker.args[0]] = text

    return note


def random_hurwitz(rng, n: int, margin: float = 0.5) -> np.ndarray:
    """Uniform random matrix shifted so its log-norm is exactly -margin."""
    A = rng.uniform(-1.0, 1.0, (n, n))
    return A - (log_norm(A).mu + margin) * np.eye(n)


@pytest.fixture
def spec1() -> ParamVectorSpec:
    return ParamVectorSpec(("theta1",), (0.5,))


@pytest.fixture
def spec2() -> ParamVectorSpec:
    return ParamVectorSpec(("theta1", "theta2"), (0.5, 0.5))
