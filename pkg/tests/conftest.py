import pytest

from helpers import TABLE_I, table1_plan

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def plan3():
    return table1_plan()


@pytest.fixture
def table1():
    return TABLE_I.copy()


class Checks:
    """Named comparisons collected so every sub-check is reported, then asserted together."""

    def __init__(self):
        self.rows = []

    def close(self, name, value, target, tol):
        ok = bool(abs(value - target) <= tol)
        self.rows.append((ok, f"{name}={value:.6g} (target {target:g} +/- {tol:g})"))
        return ok

    def within(self, name, value, lo, hi):
        ok = bool(lo <= value <= hi)
        self.rows.append((ok, f"{name}={value:.6g} (range [{lo:g}, {hi:g}])"))
        return ok

    def at_most(self, name, value, bound):
        ok = bool(value <= bound)
        self.rows.append((ok, f"{name}={value:.6g} (<= {bound:g})"))
        return ok

    def require(self, name, ok, detail=""):
        self.rows.append((bool(ok), f"{name}{': ' + detail if detail else ''}"))
        return ok

    def note(self, name, value):
        self.rows.append((None, f"{name}={value:.6g}"))

    def assert_all(self):
        bad = [d for ok, d in self.rows if ok is False]
        assert not bad, f"{len(bad)} of {len(self.rows)} checks failed: " + "; ".join(bad)


@pytest.fixture
def checks(request):
    c = Checks()
    request.node._checks = c
    return c


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call":
        return
    c = getattr(item, "_checks", None)
    rows = c.rows if c else []
    _ACCEPTANCE.append((mark.args[0], mark.args[1], rep.passed, rows, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, title, passed, rows, dur in sorted(_ACCEPTANCE, key=lambda a: a[0]):
        status = "PASS" if passed else "FAIL"
        graded = [ok for ok, _ in rows if ok is not None]
        tr.write_line(f"{status} criterion {number:>2}: {title} [{sum(graded)}/{len(graded)} checks, {dur:.1f}s]")
        tags = {True: "ok  ", False: "MISS", None: "info"}
        for ok, d in rows:
            tr.write_line(f"         {tags[ok]} {d}")
