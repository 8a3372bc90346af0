import numpy as np
import pytest

import uigc

_ACCEPTANCE: list[tuple[int, str, bool]] = []


@pytest.fixture(scope="session")
def acceptance_log():
    def record(criterion: int, detail: str, passed: bool):
        _ACCEPTANCE.append((criterion, detail, passed))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, detail, passed in sorted(_ACCEPTANCE):
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {criterion:2d}: {verdict} - {detail}")


# --------------------------------------------------------- deterministic images

def flat_region_image(seed: int, size: int = 96, regions: int = 5) -> np.ndarray:
    """Piecewise-flat color image: smooth enough that edges stay sparse."""
    rng = np.random.default_rng(seed)
    sites = rng.random((regions, 2)) * size
    colors = rng.integers(30, 226, size=(regions, 3))
    rows = np.arange(size)[:, None, None]
    cols = np.arange(size)[None, :, None]
    dist = (rows - sites[:, 0]) ** 2 + (cols - sites[:, 1]) ** 2
    return colors[np.argmin(dist, axis=2)].astype(np.uint8)


def gradient_image(seed: int, size: int = 96) -> np.ndarray:
    rng = np.random.default_rng(seed)
    lo = rng.integers(0, 80, 3)
    hi = rng.integers(150, 256, 3)
    t = np.linspace(0.0, 1.0, size)
    img = lo[None, None, :] + (hi - lo)[None, None, :] * (
        0.5 * t[:, None, None] + 0.5 * t[None, :, None]
    )
    return img.astype(np.uint8)


def desk_suite(count: int = 20, size: int = 96) -> list[np.ndarray]:
    """Mixed deterministic suite used across codec-level tests."""
    out = []
    for s in range(count):
        if s % 2 == 0:
            out.append(flat_region_image(s, size, regions=4 + s % 4))
        else:
            out.append(gradient_image(s, size))
    return out


@pytest.fixture(scope="session")
def trained_setup():
    """Codebook + priors shared by codec-level tests (K=16, patch 8)."""
    images = desk_suite(8, size=96)
    codebook = uigc.train_codebook(images, k=16, patch=8, iterations=6, seed=3)
    maps = [uigc.tokenize(img, codebook) for img in images]
    mst = uigc.train_prior(maps, variant="mst", window=18, mask_trials=3, seed=5)
    rt = uigc.train_prior(maps, variant="rt", window=18, mask_trials=3, seed=5)
    return {"images": images, "codebook": codebook, "mst": mst, "rt": rt}
