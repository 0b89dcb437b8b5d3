import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "axiblow",
    max_examples=int(os.environ.get("AXIBLOW_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("axiblow")
