import pytest
from hypothesis import HealthCheck, settings

from atlasforge import bundles, fixtures
from atlasforge.atlas import maximal_closure
from atlasforge.cats import build_atlas_category

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def pc4_atlas():
    return fixtures.pc4_atlas()


@pytest.fixture(scope="session")
def pc4_max(pc4_atlas):
    return maximal_closure(pc4_atlas, name="maxPC4")


@pytest.fixture(scope="session")
def pc4_cat(pc4_atlas, pc4_max):
    return build_atlas_category([pc4_atlas, pc4_max])


@pytest.fixture(scope="session")
def triv():
    return fixtures.triv_atlas()


@pytest.fixture(scope="session")
def mobius():
    return fixtures.mobius_atlas()


@pytest.fixture(scope="session")
def triv_max(triv):
    return bundles.bundle_maximal_closure(triv, name="maxTRIV")


@pytest.fixture(scope="session")
def mobius_max(mobius):
    return bundles.bundle_maximal_closure(mobius, name="maxMOBIUS")


@pytest.fixture(scope="session")
def bundle_cat(triv_max, mobius_max):
    return bundles.fiber_bundle_category([triv_max, mobius_max])


@pytest.fixture(scope="session")
def mobius_cat(bundle_cat, mobius_max):
    """Endomorphism category of the maximal Moebius atlas, cut out of ``bundle_cat``."""
    arrows = [bundles.BundleMorphism(*a.payload, a.dom, a.cod) for a in bundle_cat.hom(mobius_max, mobius_max)]
    return bundles.bundle_category([mobius_max], arrows)


# one summary line per acceptance criterion

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, label): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, label = mark.args
    if rep.failed:
        _CRITERIA[num] = (label, "FAIL")
    elif rep.when == "call" and rep.passed and _CRITERIA.get(num, (label, "PASS"))[1] != "FAIL":
        _CRITERIA[num] = (label, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(_CRITERIA):
        label, status = _CRITERIA[num]
        terminalreporter.write_line(f"{status}  criterion {num}: {label}")
