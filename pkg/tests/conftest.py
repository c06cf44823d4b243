import numpy as np
import pytest


def random_db(rng, n, m, alphabet):
    return rng.integers(0, alphabet, size=(n, m))


def oracle_lengths(db, q):
    """Sorted (descending) LCCS lengths of every string against q, by brute force."""
    from lccs_lsh.csa import lccs_bruteforce

    return sorted((lccs_bruteforce(t, q)[0] for t in db), reverse=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
