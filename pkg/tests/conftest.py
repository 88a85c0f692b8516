from hypothesis import HealthCheck, settings

settings.register_profile(
    "cantorlab",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("cantorlab")


def pytest_terminal_summary(terminalreporter):
    import sys

    for mod in list(sys.modules.values()):
        verdicts = getattr(mod, "VERDICTS", None)
        if isinstance(verdicts, dict) and verdicts and getattr(mod, "__name__", "").endswith("test_acceptance"):
            terminalreporter.section("acceptance criteria")
            for k in sorted(verdicts):
                terminalreporter.write_line(verdicts[k])
            return
