import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from isingmin.model import SpinSystem  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def build(raw, clamped=None):
    n, h, edges, offset = raw
    return SpinSystem(n, h, edges, offset=offset, clamped=clamped)


def triangle():
    return SpinSystem(3, edges=[((0, 1), -1.0), ((1, 2), -1.0), ((0, 2), -1.0)])


def ferro_pair():
    return SpinSystem(2, edges=[((0, 1), 1.0)])
