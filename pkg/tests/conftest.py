from __future__ import annotations

import pytest

from dctforge import corpus
from dctforge.circuit import make_state_spec
from dctforge.engine import ExploreConfig, Mode


@pytest.fixture(scope="session")
def ima():
    return corpus.load("ima.snl")


@pytest.fixture(scope="session")
def ima_trojan():
    return corpus.load("ima_trojan.snl")


@pytest.fixture(scope="session")
def counter():
    return corpus.load("counter.snl")


@pytest.fixture(scope="session")
def ima_gate():
    return corpus.load("ima_gate.blif")


def config_for(circuit, state_regs, depth=7, mode=Mode.BFS_PRUNE,
               monitored=None, **kw):
    spec = make_state_spec(circuit, state_regs)
    if monitored is None:
        monitored = tuple(n for n, _, _ in circuit.outputs)
    return ExploreConfig(state_spec=spec, depth=depth, mode=mode,
                         monitored_outputs=tuple(monitored), **kw)


@pytest.fixture(scope="session")
def ima_cfg(ima):
    return config_for(ima, ["pcmSq"])


@pytest.fixture(scope="session")
def counter_cfg(counter):
    return config_for(counter, ["cnt"], depth=8)
