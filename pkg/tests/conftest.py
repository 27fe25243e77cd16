import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from trafficcast import TrafficEngine, load_config

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_PATH = os.path.join(ROOT, "helsinki.json")
FIXTURES = os.path.join(ROOT, "fixtures")


@pytest.fixture(scope="session")
def config():
    return load_config(CONFIG_PATH)


@pytest.fixture(scope="session")
def engine(config):
    return TrafficEngine(config)


@pytest.fixture(scope="session")
def slow(engine):
    return engine.forecast("slow")


@pytest.fixture(scope="session")
def rapid(engine):
    return engine.forecast("rapid")
