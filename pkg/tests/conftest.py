from hypothesis import HealthCheck, settings

settings.register_profile("feyninv", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("feyninv")


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
