"""Generator for small English-like treebanks with conventional punctuation.

Commas mark clause and appositive boundaries and attach to their left
neighbour; sentence-final dots attach to the root token. Several verbs
are optionally transitive, so a missing comma after a fronted clause
creates a real attachment ambiguity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .tree import Sentence, Token

NAMES = ["John", "Mary", "Sue", "Bill", "Anna", "Peter", "Maria", "Tom", "Kim", "Lee"]
NOUNS = ["dog", "cat", "man", "woman", "teacher", "student", "child", "farmer", "doctor",
         "car", "house", "book", "song", "game", "ball", "letter", "city", "park", "river", "team"]
ADJS = ["big", "old", "young", "small", "happy", "new", "red", "quiet", "tall", "angry"]
DETS = ["the", "a", "this", "every"]
PREPS = ["in", "near", "behind", "with", "after", "under"]
ADVS = ["quickly", "often", "yesterday", "slowly", "again", "today"]
NUMS = ["27", "42", "19", "63", "35", "8"]
MARKS = ["when", "because", "if", "after", "while", "although"]
CCONJ = ["and", "but", "or"]
# optionally transitive: the source of comma-resolved ambiguity
AMBI_VERBS = ["left", "watched", "ate", "read", "called", "visited", "won", "played", "sang", "studied"]
TRANS_VERBS = ["likes", "saw", "found", "bought", "sold", "wrote", "painted", "helped"]
INTRANS_VERBS = ["slept", "laughed", "arrived", "smiled", "ran", "cried", "waited"]


@dataclass
class _Item:
    form: str
    upos: str
    head: object = None  # local index, "LEFT", "ROOT" or None for the phrase head
    deprel: str | None = None


@dataclass
class Phrase:
    items: list[_Item] = field(default_factory=list)
    head: int = 0

    @classmethod
    def word(cls, form: str, upos: str) -> Phrase:
        return cls([_Item(form, upos)], 0)

    def attach(self, child: Phrase, deprel: str, right: bool) -> Phrase:
        """Attach child's head to this phrase's head, on the given side."""
        if right:
            offset_self, offset_child = 0, len(self.items)
        else:
            offset_self, offset_child = len(child.items), 0
        items = [None] * (len(self.items) + len(child.items))
        for i, it in enumerate(self.items):
            items[i + offset_self] = _shift(it, offset_self)
        for i, it in enumerate(child.items):
            it = _shift(it, offset_child)
            if i == child.head:
                it = _Item(it.form, it.upos, self.head + offset_self, deprel)
            items[i + offset_child] = it
        return Phrase(items, self.head + offset_self)

    def punct(self, form: str, right: bool = True) -> Phrase:
        head = "ROOT" if form == "." else "LEFT"
        p = _Item(form, "PUNCT", head, "punct")
        if right:
            return Phrase(self.items + [p], self.head)
        return Phrase([p] + [_shift(it, 1) for it in self.items], self.head + 1)


def _shift(it: _Item, offset: int) -> _Item:
    head = it.head + offset if isinstance(it.head, int) else it.head
    return _Item(it.form, it.upos, head, it.deprel)


class Generator:
    def __init__(self, seed: int = 0):
        self.rng = random.Random(seed)

    def p(self, prob: float) -> bool:
        return self.rng.random() < prob

    def choice(self, seq):
        return self.rng.choice(seq)

    def noun_phrase(self, allow_modifiers: bool = True) -> Phrase:
        if self.p(0.35):
            return Phrase.word(self.choice(NAMES), "PROPN")
        np_ = Phrase.word(self.choice(NOUNS), "NOUN")
        if self.p(0.4):
            np_ = np_.attach(Phrase.word(self.choice(ADJS), "ADJ"), "amod", right=False)
        np_ = np_.attach(Phrase.word(self.choice(DETS), "DET"), "det", right=False)
        if allow_modifiers and self.p(0.15):
            np_ = np_.attach(self.prep_phrase(), "nmod", right=True)
        return np_

    def prep_phrase(self) -> Phrase:
        obj = self.noun_phrase(allow_modifiers=False)
        return obj.attach(Phrase.word(self.choice(PREPS), "ADP"), "case", right=False)

    def subject(self) -> Phrase:
        subj = self.noun_phrase()
        r = self.rng.random()
        if r < 0.15:
            # "John , 27 ,"
            subj = subj.punct(",")
            subj = subj.attach(Phrase.word(self.choice(NUMS), "NUM").punct(","), "appos", right=True)
        elif r < 0.25:
            rel = self.clause(relative=True).punct(",")
            subj = subj.punct(",").attach(rel, "acl:relcl", right=True)
        return subj

    def object_phrase(self) -> Phrase:
        obj = self.noun_phrase()
        if self.p(0.12):
            second = self.noun_phrase(allow_modifiers=False)
            third = self.noun_phrase(allow_modifiers=False)
            third = third.attach(Phrase.word(self.choice(CCONJ[:2]), "CCONJ"), "cc", right=False)
            obj = obj.attach(second.punct(",", right=False), "conj", right=True)
            obj = obj.attach(third, "conj", right=True)
        return obj

    def clause(self, relative: bool = False) -> Phrase:
        r = self.rng.random()
        if r < 0.45:
            verb = Phrase.word(self.choice(AMBI_VERBS), "VERB")
            transitive = self.p(0.5)
        elif r < 0.8:
            verb = Phrase.word(self.choice(TRANS_VERBS), "VERB")
            transitive = True
        else:
            verb = Phrase.word(self.choice(INTRANS_VERBS), "VERB")
            transitive = False
        if transitive:
            verb = verb.attach(self.object_phrase() if not relative else self.noun_phrase(False), "obj", right=True)
        if self.p(0.2):
            verb = verb.attach(self.prep_phrase(), "obl", right=True)
        if self.p(0.15):
            verb = verb.attach(Phrase.word(self.choice(ADVS), "ADV"), "advmod", right=True)
        if relative:
            return verb.attach(Phrase.word("who", "PRON"), "nsubj", right=False)
        return verb.attach(self.subject() if self.p(0.5) else self.noun_phrase(), "nsubj", right=False)

    def sentence_phrase(self) -> Phrase:
        main = self.clause()
        r = self.rng.random()
        if r < 0.3:
            sub = self.clause().attach(Phrase.word(self.choice(MARKS), "SCONJ"), "mark", right=False)
            main = main.attach(sub.punct(","), "advcl", right=False)
        elif r < 0.5:
            second = self.clause().attach(Phrase.word(self.choice(CCONJ), "CCONJ"), "cc", right=False)
            main = main.attach(second.punct(",", right=False), "conj", right=True)
        if self.p(0.95):
            main = main.punct(".")
        return main

    def sentence(self, max_length: int = 40) -> Sentence:
        while True:
            phrase = self.sentence_phrase()
            if len(phrase.items) <= max_length:
                return _to_sentence(phrase)


def _to_sentence(phrase: Phrase) -> Sentence:
    root = phrase.head + 1
    tokens = []
    for i, it in enumerate(phrase.items, start=1):
        if i == root:
            head, deprel = 0, "root"
        elif it.head == "ROOT":
            head, deprel = root, it.deprel
        elif it.head == "LEFT":
            head, deprel = (i - 1 if i > 1 else root), it.deprel
        else:
            head, deprel = it.head + 1, it.deprel
        lemma = it.form.lower()
        tokens.append(Token(id=i, form=it.form, upos=it.upos, head=head, deprel=deprel,
                            lemma=lemma, xpos=it.upos))
    return Sentence(tokens)


def generate(n_sentences: int, seed: int = 0, max_length: int = 40) -> list[Sentence]:
    gen = Generator(seed)
    out = []
    for i in range(n_sentences):
        s = gen.sentence(max_length)
        out.append(Sentence(s.tokens, (f"# sent_id = synth-{seed}-{i + 1}",)))
    return out
