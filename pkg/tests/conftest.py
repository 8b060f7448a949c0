from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from uniform_augment.imageio import encode_image


def random_image(rng, max_side=64, min_side=1):
    h, w = rng.integers(min_side, max_side + 1, size=2)
    kind = rng.integers(3)
    if kind == 0:
        return rng.integers(0, 256, (h, w, 3), dtype=np.uint8)
    if kind == 1:
        # smooth gradient plus noise, closer to natural images
        yy, xx = np.mgrid[0:h, 0:w]
        base = (xx[..., None] * rng.uniform(0, 8, 3) + yy[..., None] * rng.uniform(0, 8, 3))
        noise = rng.normal(0, 12, (h, w, 3))
        return np.clip(base + noise + rng.uniform(0, 120, 3), 0, 255).astype(np.uint8)
    lo = rng.integers(0, 200)
    return rng.integers(lo, lo + rng.integers(1, 56), (h, w, 3)).astype(np.uint8)


def image_corpus(n=100, seed=1234, max_side=64):
    rng = np.random.default_rng(seed)
    return [random_image(rng, max_side) for _ in range(n)]


@pytest.fixture(scope="session")
def corpus():
    return image_corpus()


images = hnp.arrays(
    np.uint8,
    st.tuples(st.integers(1, 24), st.integers(1, 24), st.just(3)),
    elements=st.integers(0, 255),
)


def write_dataset(root, n, seed=0, size=32, classes=("cat", "dog", "frog")):
    """Write ``n`` PNG images into class subdirectories under ``root``."""
    rng = np.random.default_rng(seed)
    root = Path(root)
    for i in range(n):
        label = classes[i % len(classes)]
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        img = random_image(rng, max_side=size, min_side=size)
        (d / f"img_{i:05d}.png").write_bytes(encode_image(img))
    return root


def tree_bytes(root):
    root = Path(root)
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


# one summary line per acceptance criterion ----------------------------------

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        number, title = marker.args
        _ACCEPTANCE.append((number, title, report.passed, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, duration in sorted(_ACCEPTANCE):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title} ({duration:.2f}s)")
