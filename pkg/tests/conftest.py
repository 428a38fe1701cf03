import functools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from lpext.config import build_instance, load_config
from lpext.verifier import run_ledger

settings.register_profile("default", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"
SHIPPED = ("disc_weighted", "polydisc", "ball")


@functools.lru_cache(maxsize=None)
def instance(name, p=None, degree=None):
    return build_instance(load_config(CONFIGS / f"{name}.cfg"), p=p, degree=degree)


@functools.lru_cache(maxsize=None)
def ledger(name, p=None):
    keep = {}
    led = run_ledger(instance(name, p), keep=keep)
    return led, keep


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def configs_dir():
    return CONFIGS


ACCEPTANCE_LINES = []


def report_criterion(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
