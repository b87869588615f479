import io
import itertools
import random

import pytest
from hypothesis import strategies as st

from punctrobust.tree import Sentence, Token

# "John , 27 , likes jazz ." with its Stanford-style heads
APPOSITIVE_CONLL = """\
1\tJohn\tJohn\tPROPN\tNNP\t_\t5\tnsubj\t_\t_
2\t,\t,\tPUNCT\t,\t_\t1\tpunct\t_\t_
3\t27\t27\tNUM\tCD\t_\t1\tamod\t_\t_
4\t,\t,\tPUNCT\t,\t_\t3\tpunct\t_\t_
5\tlikes\tlike\tVERB\tVBZ\t_\t0\troot\t_\t_
6\tjazz\tjazz\tNOUN\tNN\t_\t5\tdobj\t_\t_
7\t.\t.\tPUNCT\t.\t_\t5\tpunct\t_\t_

"""

PUNCT_UPOS = {".": "PUNCT", ",": "PUNCT", "!": "PUNCT", "?": "PUNCT"}


def make_sentence(forms, heads, deprels=None, upos=None):
    deprels = deprels or ["punct" if f in PUNCT_UPOS else "dep" for f in forms]
    upos = upos or [PUNCT_UPOS.get(f, "X") for f in forms]
    return Sentence(
        [
            Token(id=i, form=f, upos=u, head=h, deprel=d)
            for i, (f, h, d, u) in enumerate(zip(forms, heads, deprels, upos), start=1)
        ]
    )


@pytest.fixture
def appositive():
    from punctrobust.conll import read_conll

    return read_conll(io.BytesIO(APPOSITIVE_CONLL.encode())).sentences[0]


def random_heads(n, rng):
    """Uniform-ish random tree: attach nodes in random order to already placed ones."""
    order = list(range(1, n + 1))
    rng.shuffle(order)
    heads = [0] * (n + 1)
    placed = [order[0]]
    for node in order[1:]:
        heads[node] = rng.choice(placed)
        placed.append(node)
    return heads[1:]


def random_sentence(n, rng, punct_rate=0.2):
    heads = random_heads(n, rng)
    forms = []
    for i in range(n):
        if heads[i] != 0 and rng.random() < punct_rate:
            forms.append(rng.choice([".", ",", "!"]))
        else:
            forms.append(f"w{rng.randrange(50)}")
    return make_sentence(forms, heads)


def all_trees(n):
    """Every single-rooted tree over n tokens, by brute-force head enumeration."""
    for heads in itertools.product(range(n + 1), repeat=n):
        if sum(h == 0 for h in heads) != 1 or any(h == i for i, h in enumerate(heads, start=1)):
            continue
        ok = True
        for start in range(1, n + 1):
            seen, node = set(), start
            while node:
                if node in seen:
                    ok = False
                    break
                seen.add(node)
                node = heads[node - 1]
            if not ok:
                break
        if ok:
            yield list(heads)


def dominates(heads, a, b):
    """True iff a is an ancestor-or-self of b; 0 dominates everything."""
    node = b
    while True:
        if node == a:
            return True
        if node == 0:
            return False
        node = heads[node - 1]


def projective_by_dominance(heads):
    """Oracle: every word between a head and its dependent is dominated by the head."""
    for d, h in enumerate(heads, start=1):
        lo, hi = min(h, d), max(h, d)
        for between in range(lo + 1, hi):
            if not dominates(heads, h, between):
                return False
    return True


def crossing_pairs_by_interiors(heads):
    """Oracle: arcs cross iff each arc's open interior holds exactly one endpoint of the other."""
    arcs = [(h, d) for d, h in enumerate(heads, start=1)]
    found = set()
    for a, b in itertools.combinations(arcs, 2):
        inside_a = set(range(min(a) + 1, max(a)))
        inside_b = set(range(min(b) + 1, max(b)))
        if len(inside_a & set(b)) == 1 and len(inside_b & set(a)) == 1:
            found.add(frozenset([a, b]))
    return found


@st.composite
def sentences(draw, min_size=1, max_size=15, punct_rate=0.25, word_root=True):
    """Random valid trees with some punctuation tokens."""
    n = draw(st.integers(min_size, max_size))
    rng = random.Random(draw(st.integers(0, 2**32 - 1)))
    heads = random_heads(n, rng)
    forms = []
    for i in range(n):
        if (heads[i] != 0 or not word_root) and rng.random() < punct_rate:
            forms.append(rng.choice([".", ",", "!"]))
        else:
            forms.append(rng.choice(["a", "b", "c", "dog", "ran", "the"]))
    labels = [rng.choice(["nsubj", "obj", "det", "amod"]) if f not in PUNCT_UPOS else "punct" for f in forms]
    labels = ["root" if h == 0 else l for h, l in zip(heads, labels)]
    return make_sentence(forms, heads, labels)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
