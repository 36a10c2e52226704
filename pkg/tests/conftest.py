import math

import numpy as np
import pytest

from epr_witness.gaussian_core import ModeMoments, TwoModeMoments, beam_splitter


def random_gaussian_states(count: int = 10, seed: int = 7) -> list[TwoModeMoments]:
    """서로 다른 한 모드 입력을 섞은 일반 가우시안 두 모드 상태"""
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        modes = []
        for _ in range(2):
            nbar = rng.uniform(0.05, 0.6)
            bound = math.sqrt(nbar * (nbar + 1))
            modes.append(ModeMoments(nbar, rng.uniform(-bound, bound)))
        states.append(beam_splitter(*modes))
    return states


@pytest.fixture
def random_states() -> list[TwoModeMoments]:
    return random_gaussian_states()


@pytest.fixture
def config_home(tmp_path, monkeypatch):
    """설정 파일 / 환경변수 격리"""
    monkeypatch.delenv("EPRW_DEFAULT_CUTOFF", raising=False)
    monkeypatch.setattr("epr_witness.config.CONFIG_PATH", str(tmp_path / "eprw-config.json"))
    return tmp_path
