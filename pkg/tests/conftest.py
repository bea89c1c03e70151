from __future__ import annotations

import numpy as np
import pytest

from compound_mac.channel import Channel, CompoundChannel, paper_example


def parallel_channel() -> CompoundChannel:
    """Noiseless ``Z = (X, Y)`` with binary inputs."""
    w = np.zeros((2, 2, 4))
    for x in range(2):
        for y in range(2):
            w[x, y, 2 * x + y] = 1.0
    return CompoundChannel.single(Channel(w, "clean"))


def ignores_y_channel() -> CompoundChannel:
    """Binary symmetric channel from ``X`` with ``Y`` unused."""
    w = np.zeros((2, 2, 2))
    for x in range(2):
        w[x, :, x] = 0.9
        w[x, :, 1 - x] = 0.1
    return CompoundChannel.single(Channel(w, "bsc-x"))


def random_channel(rng: np.random.Generator, sizes=(2, 2, 2), states: int = 1,
                   labels=None, name: str = "R") -> CompoundChannel:
    chans = [Channel(rng.dirichlet(np.ones(sizes[2]), size=sizes[:2]), f"{name}{s}") for s in range(states)]
    if labels is None:
        return CompoundChannel.no_csit(chans)
    t1, t2 = labels
    return CompoundChannel(tuple(chans), t1, t2)


@pytest.fixture(scope="session")
def paper():
    return paper_example()


@pytest.fixture(scope="session")
def parallel():
    return parallel_channel()


@pytest.fixture(scope="session")
def ignores_y():
    return ignores_y_channel()


def random_plans(count: int, seed: int, max_code: int = 4096):
    """Feasible ``(plan, inputs)`` pairs from random rates, capacities and CSIT sizes."""
    from compound_mac.conferencing import build_plan
    from compound_mac.errors import BlocklengthTooSmall, InfeasiblePlan

    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(2, 13))
        r1, r2 = rng.uniform(0, 0.8, 2)
        c1, c2 = (0.0 if rng.random() < 0.2 else float(v) for v in rng.uniform(0.05, 1.0, 2))
        t1, t2 = (int(v) for v in rng.integers(1, 3, 2))
        if 2.0 ** (n * (r1 + r2)) > max_code:
            continue
        try:
            plan = build_plan(n, r1, r2, c1, c2, t1, t2)
        except (BlocklengthTooSmall, InfeasiblePlan):
            continue
        out.append((plan, (n, r1, r2, c1, c2, t1, t2)))
    return out


def cell_channel(t1: int, t2: int, seed: int = 0) -> CompoundChannel:
    """One random binary state per joint CSIT cell."""
    rng = np.random.default_rng(seed)
    labels = [(f"a{i}", f"b{j}") for i in range(t1) for j in range(t2)]
    chans = [Channel(rng.dirichlet(np.ones(2), size=(2, 2)), f"S{i}") for i in range(len(labels))]
    return CompoundChannel(tuple(chans), tuple(l[0] for l in labels), tuple(l[1] for l in labels))


# --- acceptance summary ------------------------------------------------------------

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records one summary line for acceptance criterion ``k``."""
    def record(k: int, ok: bool, detail: str) -> None:
        _CRITERIA[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[k])
