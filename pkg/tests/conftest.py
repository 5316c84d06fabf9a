import pytest

from magbose.spectrum import GridSpec, get_spectrum


@pytest.fixture(scope="session")
def spec_l6():
    """L=6, omega=1, n=32 symmetric-gauge spectrum shared across modules."""
    return get_spectrum(6.0, 1.0, GridSpec(32))


@pytest.fixture(scope="session")
def spec_l8():
    return get_spectrum(8.0, 1.0, GridSpec(48))


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip the long L-sweep tests")


def pytest_collection_modifyitems(config, items):
    if not config.getoption("--skip-slow"):
        return
    skip = pytest.mark.skip(reason="--skip-slow given")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


SWEEP_L = (6.0, 8.0, 10.0, 12.0)


@pytest.fixture(scope="session")
def sweep_spectra():
    """Central and +-h spectra at omega=1, n=48 for the L-sweep; keys are L."""
    from magbose.canonical import default_h_omega

    h = default_h_omega(1.0)
    g = GridSpec(48)
    return {L: tuple(get_spectrum(L, w, g) for w in (1.0, 1.0 - h, 1.0 + h)) for L in SWEEP_L}


_ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    """Store one acceptance outcome; printed in the terminal summary."""

    def record(number, title, passed, detail):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  ({detail})")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {title}: {detail}")
