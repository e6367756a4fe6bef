import pytest

_CRITERIA = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion listed in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        detail = dict(item.user_properties).get("detail", "")
        if rep.failed and call.excinfo is not None:
            msg = call.excinfo.exconly().splitlines()[0]
            detail = f"{detail}; {msg}" if detail else msg
        _CRITERIA.append((mark.args[0], mark.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid, text, ok, detail in sorted(_CRITERIA, key=lambda c: int(c[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{cid:>2}] {text} :: {detail}")
    n_ok = sum(c[2] for c in _CRITERIA)
    terminalreporter.write_line(f"{n_ok}/{len(_CRITERIA)} criteria passed")
