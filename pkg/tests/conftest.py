import re

PROPERTY_MODULES = ("test_symcore_properties.py", "test_transform_properties.py")
OUTCOMES = {}      # property test nodeid -> passed?
ACCEPTANCE = {}    # criterion number -> (passed?, detail)


def pytest_collection_modifyitems(items):
    # acceptance runs last so it can reuse the property-suite outcomes of this session
    items.sort(key=lambda it: it.nodeid.startswith("tests/test_acceptance.py")
               or "test_acceptance.py" in it.nodeid)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if any(m in report.nodeid for m in PROPERTY_MODULES):
        OUTCOMES[report.nodeid] = report.passed
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if m:
        detail = dict(report.user_properties).get("detail", "")
        if report.failed and not detail:
            detail = report.longrepr.reprcrash.message if hasattr(report.longrepr, "reprcrash") else "error"
        ACCEPTANCE[int(m.group(1))] = (report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
