import itertools
import random
from pathlib import Path

import pytest

from concord.model import (
    Ballot,
    Choice,
    Participant,
    Profile,
    ValidatedProfile,
    validate_profile,
)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def make_profile(rankings, permits, choice_ids=None) -> ValidatedProfile:
    """Build a validated profile from plain ranking lists and permit counts."""
    if choice_ids is None:
        choice_ids = sorted(rankings[0])
    choices = tuple(Choice(id=c, label=f"Choice {c}") for c in choice_ids)
    participants = tuple(
        Participant(
            id=f"p{i + 1}",
            display_name=f"Participant {i + 1}",
            ballot=Ballot(ranking=tuple(r), permit_count=k),
        )
        for i, (r, k) in enumerate(zip(rankings, permits))
    )
    return validate_profile(Profile(choices=choices, participants=participants))


def random_profile(rng: random.Random, max_n=5, max_m=4) -> ValidatedProfile:
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    ids = [chr(ord("a") + i) for i in range(n)]
    rankings = []
    permits = []
    for _ in range(m):
        r = ids[:]
        rng.shuffle(r)
        rankings.append(r)
        permits.append(rng.randint(1, n))
    return make_profile(rankings, permits, choice_ids=ids)


# ---------------------------------------------------------------------------
# Independent oracles (deliberately naive)

def bubble_sort_swaps(sequence) -> int:
    """Literal bubble sort counting swaps; quadratic, test-only."""
    items = list(sequence)
    swaps = 0
    for i in range(len(items)):
        for j in range(len(items) - 1 - i):
            if items[j] > items[j + 1]:
                items[j], items[j + 1] = items[j + 1], items[j]
                swaps += 1
    return swaps


def pairwise_discordance(a, b) -> int:
    """Count pairs ordered oppositely by the two rankings."""
    pos_a = {c: i for i, c in enumerate(a)}
    pos_b = {c: i for i, c in enumerate(b)}
    count = 0
    for x, y in itertools.combinations(a, 2):
        if (pos_a[x] - pos_a[y]) * (pos_b[x] - pos_b[y]) < 0:
            count += 1
    return count


def kemeny_optima(vp: ValidatedProfile):
    """Brute-force orders minimizing total pairwise discordance to all ballots."""
    best = None
    best_total = None
    for perm in itertools.permutations(vp.choice_ids):
        total = 0
        for p in vp.participants:
            total += pairwise_discordance(list(p.ballot.ranking), list(perm))
        if best_total is None or total < best_total:
            best_total = total
            best = [perm]
        elif total == best_total:
            best.append(perm)
    return set(best), best_total


@pytest.fixture(scope="session")
def trio():
    from concord.model import load_profile

    return load_profile(FIXTURES / "trio.json")


@pytest.fixture(scope="session")
def quartet():
    from concord.model import load_profile

    return load_profile(FIXTURES / "quartet.json")


@pytest.fixture(scope="session")
def aligned():
    from concord.model import load_profile

    return load_profile(FIXTURES / "aligned.json")


@pytest.fixture(scope="session")
def divided():
    from concord.model import load_profile

    return load_profile(FIXTURES / "divided.json")
