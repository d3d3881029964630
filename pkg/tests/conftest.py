import pytest

from neptune import _kernels
from neptune.pipeline import RunConfig, train
from neptune.synth import render

from corpus import SMALL_SCENE

KERNEL_NAMES = ("kmeans_dp", "label_components", "mine_rules", "nearest_points")
BACKENDS = sorted(_kernels.available())


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per kernel implementation."""
    mod = _kernels.available()[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(_kernels, name, getattr(mod, name))
    return mod


@pytest.fixture(scope="session")
def small_scene():
    return render(SMALL_SCENE)


@pytest.fixture(scope="session")
def small_model(small_scene):
    frames, labels = small_scene
    model, per_length = train(frames, labels, RunConfig(fps=SMALL_SCENE.fps))
    return model, per_length


# -- acceptance report ----------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
