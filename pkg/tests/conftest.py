import pytest

from fplab import engine, generators


@pytest.fixture(scope="session")
def g5_params():
    return generators.gn_params(5, 2)


@pytest.fixture(scope="session")
def g5(g5_params):
    return generators.build_gn(g5_params)


@pytest.fixture(scope="session")
def g5_run(g5):
    """Reference run: G_5, k=2, T=10^7, start (1,1), lowest-index ties."""
    recorder = engine.Recorder("default")
    state = engine.init(g5, engine.FPConfig())
    engine.run(state, 10**7, recorder)
    return state, recorder


@pytest.fixture
def report(capsys, request):
    """Print a single status line straight to the terminal, bypassing capture."""

    def emit(label, ok, detail=""):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else ""))

    return emit
