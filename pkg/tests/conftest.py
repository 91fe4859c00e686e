import hypothesis

hypothesis.settings.register_profile("default", max_examples=150, deadline=None)
hypothesis.settings.register_profile(
    "acceptance", max_examples=1000, deadline=None, print_blob=False
)
hypothesis.settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "properties: randomized invariant tests (re-run at 1000 examples by acceptance)"
    )
