import random

import pytest

from sturmian.cf import CFStream, evaluate, word

# Periodic entry patterns whose approximants stay numerically resolvable at V in {4.5, 5, 8}.
CORPUS = {
    "fibonacci": (1,),
    "2112": (2, 1, 1, 2),
    "12": (1, 2),
    "21": (2, 1),
    "112": (1, 1, 2),
}

# Twenty streams for the word-recursion checks.
WORD_PATTERNS = [
    (1,), (2,), (3,), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (1, 1, 2), (2, 1, 1, 2),
    (1, 2, 3), (3, 2, 1), (2, 2, 1), (1, 1, 1, 2), (1, 2, 1, 1), (1, 4), (2, 1, 3), (1, 3, 1, 2),
    (5, 1), (1, 1, 3),
]


def stream(pattern):
    return CFStream.periodic(pattern)


@pytest.fixture
def fib():
    return CFStream.fibonacci()


@pytest.fixture
def s2112():
    return CFStream.periodic((2, 1, 1, 2))


def random_words(n, seed, max_entry=3, q_max=200, max_depth=7):
    """``n`` distinct proper words with entries ``<= max_entry`` and denominator ``<= q_max``."""
    rng = random.Random(seed)
    seen = set()
    while len(seen) < n:
        k = rng.randint(1, max_depth)
        e = tuple(rng.randint(1, max_entry) for _ in range(k))
        if evaluate(word(*e)).q <= q_max:
            seen.add(e)
    return [word(*e) for e in sorted(seen)]


# Acceptance results, filled by test_acceptance.py and printed after the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
