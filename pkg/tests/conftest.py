import hypothesis
import pytest

from signguard.codes import CodeParams, enumerate_codebook

hypothesis.settings.register_profile(
    "repro", derandomize=True, deadline=None, max_examples=60
)
hypothesis.settings.load_profile("repro")


@pytest.fixture(scope="session")
def code735():
    return CodeParams(7, 3, 5, 8)


@pytest.fixture(scope="session")
def code753():
    return CodeParams(7, 5, 3, 8)


@pytest.fixture(scope="session")
def small_code():
    # full space 8^4 = 4096 words: exact enumeration stays fast
    return CodeParams(4, 2, 3, 8)


@pytest.fixture(scope="session")
def codebook735(code735):
    return enumerate_codebook(code735)
