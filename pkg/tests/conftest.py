import numpy as np
import pytest

ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance(request):
    """Record one summary line per acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_LINES]

    def record(number, title, ok, detail, elapsed, budget):
        within = elapsed < budget
        status = "PASS" if ok and within else "FAIL"
        line = (f"ACCEPTANCE {number:>2} {status}  {title}: {detail} "
                f"[{elapsed:.1f} s of {budget:.0f} s]")
        lines.append(line)
        print(line)
        return ok and within

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
