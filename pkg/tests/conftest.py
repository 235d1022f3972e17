import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from skyfeed.frames import Layout, YuvFrame  # noqa: E402


def random_frame(rng, width, height, layout=Layout.PLANAR_420, **meta):
    data = rng.integers(0, 256, width * height * 3 // 2, dtype=np.uint8).tobytes()
    from skyfeed.frames import Resolution
    return YuvFrame.from_bytes(Resolution(width, height), layout, data, **meta)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
