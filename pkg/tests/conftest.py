from __future__ import annotations

from hypothesis import settings

# the first call into a numba kernel includes compilation time
settings.register_profile("pgcirc", deadline=None, max_examples=60)
settings.load_profile("pgcirc")


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS, TITLES

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(TITLES):
        terminalreporter.write_line(RESULTS.get(k, f"criterion {k} [NOT RUN] {TITLES[k]}"))
