import time
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])


def _rows(name):
    out = []
    for line in (DATA / name).read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        out.append(line.split("\t"))
    return out


def _rep(text):
    return tuple(int(v) for v in text.split())


@pytest.fixture(scope="session")
def table6():
    """Reference degree-6 rows: (coeff, rep, size)."""
    return [(int(c), _rep(r), int(s)) for c, r, s in _rows("table_deg6.tsv")]


@pytest.fixture(scope="session")
def table9():
    """Reference degree-9 rows as printed: (coeff, rep, size)."""
    return [(int(c), _rep(r), int(s)) for c, r, s in _rows("table_deg9.tsv")]


@pytest.fixture(scope="session")
def table12():
    """Reference degree-12 rows: (i12, i12prime, rep, size)."""
    return [(int(a), int(b), _rep(r), int(s)) for a, b, r, s in _rows("table_deg12.tsv")]


def _fresh(fn, *args, **kwargs):
    """Run ``fn`` with the basis and orbit caches cleared; returns (result, seconds)."""
    from trilinvar import monomials, symmetry

    monomials._weight_zero.cache_clear()
    monomials._higher_weight.cache_clear()
    symmetry.orbit_decomposition.cache_clear()
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def fresh():
    return _fresh


@pytest.fixture(scope="session")
def I6():
    from trilinvar.pipeline import compute_I6
    return compute_I6()


@pytest.fixture(scope="session")
def I9():
    from trilinvar.pipeline import compute_I9
    return compute_I9()


@pytest.fixture(scope="session")
def I12_timed():
    """The degree-12 pair computed from cold caches, with its wall time."""
    from trilinvar.pipeline import compute_I12_pair
    return _fresh(compute_I12_pair)


@pytest.fixture(scope="session")
def I12_pair(I12_timed):
    return I12_timed[0]


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records the PASS/FAIL line for criterion n."""
    def record(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        ACCEPTANCE[n] = line
        print(line)
        return ok
    return record
