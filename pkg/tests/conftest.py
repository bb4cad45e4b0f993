from __future__ import annotations

import pytest

from semtraj.synth import BehaviorProfile, builtin_script, generate_episode

# criterion number -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {detail}")


@pytest.fixture(scope="session")
def cutting_script():
    return builtin_script("cutting")


@pytest.fixture(scope="session")
def cutting_clean(cutting_script):
    """Noise-free cutting episode and its ground truth."""
    return generate_episode(cutting_script, BehaviorProfile(seed=7))
