from pathlib import Path

import pytest

from abmomentum.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def run_cli(tmp_path, capsys):
    """Run ``abm`` in-process; returns (exit code, output dir, stderr)."""

    def run(*argv, out=None):
        out = out or tmp_path / "out"
        code = main([str(a) for a in argv] + ["--out", str(out)])
        return code, out, capsys.readouterr().err

    return run


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[number])
