"""Deterministic linguistic layer.

Tokenization with a lexicon-driven tagger, rule-based lemmatization,
clause splitting on discourse connectives, subject/verb/object triples,
sentence type and pattern, negation, and the stop-word/lemma preprocessing
used ahead of the sequence model.  No statistical models are involved, so
every output is reproducible byte for byte.
"""

import re
from dataclasses import dataclass
from functools import lru_cache

from nltk.stem.porter import PorterStemmer

from .errors import NoVerbFoundError, UndeterminedError, ValidationError
from .tables import bundled_rows

POS_TAGS = ("noun", "verb", "aux-verb", "adj", "pronoun", "det", "conj-sub",
            "conj-coord", "other")
NEGATIONS = frozenset({"not", "n't", "never", "no"})
WH_WORDS = frozenset({"who", "whom", "what", "which", "whoever"})
PERSONAL_PRONOUNS = frozenset({"he", "she", "it", "they", "him", "her",
                               "them", "his", "its", "their", "we", "us",
                               "i", "me", "you"})
SENTENCE_TYPES = ("simple", "compound", "complex", "compound-complex")

_CLITICS = {"s", "re", "ve", "ll", "d", "m"}
_RAW = re.compile(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*|[^\sA-Za-z0-9]")
_ADJ_SUFFIXES = ("ous", "ful", "ive", "able", "ible", "al", "ic", "less",
                 "ish", "ant", "ent")
_VOWELS = set("aeiou")


@lru_cache(maxsize=None)
def _lexicon():
    return {r[0]: tuple(r[1].split(",")) for r in bundled_rows("lexicon.tsv")}


@lru_cache(maxsize=None)
def _irregular():
    return {r[0]: r[1] for r in bundled_rows("lemmas.tsv")}


@lru_cache(maxsize=None)
def connective_table():
    """connective -> (kind, reverses_polarity); kind is 'sub' or 'coord'."""
    return {r[0]: (r[1], r[2] == "1") for r in bundled_rows("connectives.tsv")}


@lru_cache(maxsize=None)
def stop_words():
    return frozenset(r[0] for r in bundled_rows("stopwords.txt"))


_stemmer = PorterStemmer()


def stem(word):
    return _stemmer.stem(word.lower())


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str
    index: int
    is_word: bool = True

    @property
    def lower(self):
        return self.surface.lower()

    def __str__(self):
        return f"{self.surface}-{self.pos}"


@dataclass(frozen=True)
class SemanticTriple:
    verb: Token
    subject: Token = None
    object: Token = None
    negated_subject_clause: bool = False
    negated_verb: bool = False
    linked_verb: Token = None
    clause: int = 0

    def __post_init__(self):
        if (self.subject is None and self.object is None
                and self.linked_verb is None):
            raise ValidationError("triple needs a subject, an object or a "
                                  "linked verb")

    @property
    def is_link(self):
        return self.linked_verb is not None

    @property
    def negated(self):
        return self.negated_verb or self.negated_subject_clause

    def as_strings(self):
        if self.is_link:
            return (str(self.verb), str(self.linked_verb))
        return tuple(None if t is None else str(t)
                     for t in (self.subject, self.verb, self.object))


@dataclass(frozen=True)
class Clause:
    words: tuple
    connective: Token = None

    @property
    def has_verb(self):
        return any(t.pos in ("verb", "aux-verb") for t in self.words)


@dataclass(frozen=True)
class SentenceShape:
    sentence_type: str
    pattern: str


# -- tokenization -----------------------------------------------------------

def _split_raw(text):
    out = []
    for m in _RAW.finditer(text.replace("’", "'")):
        w = m.group(0)
        low = w.lower()
        if len(w) > 3 and low.endswith("n't"):
            out += [w[:-3], w[-3:]]
        elif "'" in w:
            base, rest = w.split("'", 1)
            if rest.lower() in _CLITICS and base:
                out += [base, "'" + rest]
            else:
                out.append(w)
        else:
            out.append(w)
    return out


def _known_base(word, pos=None):
    lex = _lexicon()
    opts = lex.get(word)
    if opts is None:
        return False
    return pos is None or pos in opts


def _verb_base(w):
    if _known_base(w, "verb") or _known_base(w, "aux-verb"):
        return w
    cands = []
    if w.endswith("ied") or w.endswith("ies"):
        cands.append(w[:-3] + "y")
    if w.endswith("ed"):
        cands += [w[:-1], w[:-2]]
        if len(w) > 4 and w[-3] == w[-4]:
            cands.append(w[:-3])
    if w.endswith("ing"):
        cands += [w[:-3], w[:-3] + "e"]
        if len(w) > 5 and w[-4] == w[-5]:
            cands.append(w[:-4])
    if w.endswith("es"):
        cands.append(w[:-2])
    if w.endswith("s") and not w.endswith("ss"):
        cands.append(w[:-1])
    for c in cands:
        if _known_base(c, "verb"):
            return c
    return None


def _noun_base(w):
    if _known_base(w, "noun"):
        return w
    cands = []
    if w.endswith("ies"):
        cands.append(w[:-3] + "y")
    if w.endswith("es"):
        cands.append(w[:-2])
    if w.endswith("s") and not w.endswith("ss"):
        cands.append(w[:-1])
    for c in cands:
        if _known_base(c, "noun"):
            return c
    return None


def _adj_base(w):
    if _known_base(w, "adj"):
        return w
    for suffix in ("est", "er"):
        if w.endswith(suffix):
            stem_ = w[:-len(suffix)]
            for c in (stem_, stem_ + "e", stem_[:-1] + "y" if stem_.endswith("i") else None,
                      stem_[:-1] if len(stem_) > 2 and stem_[-1] == stem_[-2] else None):
                if c and _known_base(c, "adj"):
                    return c
    return None


def _guess_options(surface, first):
    w = surface.lower()
    lex = _lexicon()
    if w in lex:
        return lex[w]
    irr = _irregular().get(w)
    if irr is not None and irr in lex:
        return lex[irr]
    opts = []
    if _verb_base(w):
        opts.append("verb")
    if _noun_base(w):
        opts.append("noun")
    if _adj_base(w):
        opts.append("adj")
    if opts:
        # plural -s forms read as nouns before verbs
        if w.endswith("s") and "noun" in opts:
            opts.remove("noun")
            opts.insert(0, "noun")
        return tuple(opts)
    if surface[0].isupper() and not first:
        return ("noun",)
    if w.endswith("ly"):
        return ("other",)
    if w.endswith("ed") or w.endswith("ing"):
        return ("verb",)
    if w.endswith(_ADJ_SUFFIXES):
        return ("adj",)
    if w.isdigit():
        return ("other",)
    return ("noun",)


def _choose(opts, prev, prev_lemma):
    if len(opts) == 1:
        return opts[0]
    if prev is None:
        return opts[0]
    if prev in ("det", "adj") and "noun" in opts:
        return "noun"
    if prev_lemma == "be" and "adj" in opts:
        return "adj"
    if prev_lemma == "to" and "verb" in opts:
        return "verb"
    if prev in ("pronoun", "noun", "aux-verb") and "verb" in opts:
        return "verb"
    if prev == "verb" and "noun" in opts:
        return "noun"
    return opts[0]


def lemmatize(surface, pos):
    w = surface.lower()
    irr = _irregular().get(w)
    if irr is not None:
        return irr
    base = None
    if pos == "verb":
        base = _verb_base(w)
        if base is None:
            if w.endswith("ied"):
                base = w[:-3] + "y"
            elif w.endswith("ed") and len(w) > 4:
                base = w[:-3] if w[-3] == w[-4] and w[-3] not in _VOWELS | {"l", "s"} else w[:-2]
            elif w.endswith("ing") and len(w) > 5:
                base = w[:-3]
            elif w.endswith("s") and not w.endswith("ss"):
                base = w[:-1]
    elif pos == "noun":
        base = _noun_base(w)
        if base is None:
            if w.endswith("ies") and len(w) > 4:
                base = w[:-3] + "y"
            elif w.endswith(("ses", "xes", "ches", "shes", "zes")):
                base = w[:-2]
            elif w.endswith("s") and not w.endswith(("ss", "us", "is")) and len(w) > 3:
                base = w[:-1]
    elif pos == "adj":
        base = _adj_base(w)
    return base or w


def tokenize(text):
    """Split text into tokens with POS tags and lemmas.

    Punctuation becomes separate tokens with ``is_word=False``.
    """
    if not text or not text.strip():
        raise ValueError("tokenize needs non-empty text")
    raw = _split_raw(text)
    tags = []
    prev = prev_lemma = None
    first = True
    for surface in raw:
        if not (surface[0].isalnum() or surface.startswith("'")):
            tags.append(("other", surface, False))
            continue
        if surface.startswith("'"):
            pos = "aux-verb" if prev in ("pronoun",) else "other"
            is_word = pos == "aux-verb"
            lemma = _irregular().get(surface.lower(), surface.lower()) \
                if is_word else surface.lower()
            tags.append((pos, lemma, is_word))
            prev, prev_lemma = (pos if is_word else prev), lemma
            continue
        opts = _guess_options(surface, first)
        pos = _choose(opts, prev, prev_lemma)
        lemma = lemmatize(surface, pos)
        tags.append((pos, lemma, True))
        prev, prev_lemma, first = pos, lemma, False
    # 'her' etc. not followed by a nominal is a pronoun
    for i, (pos, lemma, is_word) in enumerate(tags):
        if pos == "det" and lemma in PERSONAL_PRONOUNS:
            nxt = next((t for t in tags[i + 1:] if t[2]), None)
            if nxt is None or nxt[0] not in ("noun", "adj"):
                tags[i] = ("pronoun", lemma, is_word)
    return [Token(s, lemma, pos, i, is_word)
            for i, (s, (pos, lemma, is_word)) in enumerate(zip(raw, tags))]


def word_tokens(tokens):
    return [t for t in tokens if t.is_word]


# -- clauses and sentence shape --------------------------------------------

def _is_verbal(t):
    return t.pos in ("verb", "aux-verb")


def split_clauses(tokens):
    """Split a token list into clauses at clause-linking connectives.

    A connective only splits when a verb occurs on both of its sides (up to
    the next connective), so "the man and the woman" stays one clause.  A
    sentence-initial subordinator opens a clause that runs to the first
    comma.
    """
    conn = connective_table()
    words = word_tokens(tokens)
    if not words:
        return []
    lead = None
    if words[0].lower in conn and conn[words[0].lower][0] == "sub":
        comma = next((t.index for t in tokens if t.surface == ","), None)
        if comma is not None:
            first = [t for t in words[1:] if t.index < comma]
            rest = [t for t in words if t.index > comma]
            if any(map(_is_verbal, first)) and any(map(_is_verbal, rest)):
                lead = Clause(tuple(first), words[0])
                words = rest
    cand = [i for i, t in enumerate(words)
            if t.pos in ("conj-sub", "conj-coord") and t.lower in conn]
    clauses = []
    start, pending = 0, None
    for j, c in enumerate(cand):
        if c < start:
            continue
        stop = cand[j + 1] if j + 1 < len(cand) else len(words)
        left = words[start:c]
        right = words[c + 1:stop]
        if left and any(map(_is_verbal, left)) and any(map(_is_verbal, right)):
            clauses.append(Clause(tuple(left), pending))
            pending = words[c]
            start = c + 1
    clauses.append(Clause(tuple(words[start:]), pending))
    if lead is not None:
        clauses.insert(0, lead)
    return clauses


def classify_sentence(text):
    tokens = tokenize(text)
    clauses = split_clauses(tokens)
    conn = connective_table()
    kinds = {conn[c.connective.lower][0] for c in clauses
             if c.connective is not None}
    if kinds == {"sub"}:
        kind = "complex"
    elif kinds == {"coord"}:
        kind = "compound"
    elif kinds:
        kind = "compound-complex"
    else:
        kind = "simple"
    parts = []
    for c in clauses:
        if c.connective is not None:
            parts.append(c.connective.lower)
        parts.append("SV")
    return SentenceShape(kind, " ".join(parts))


# -- triples ----------------------------------------------------------------

def _np_head(words, j):
    """Head of the nominal run starting at words[j] (last noun of the run)."""
    if words[j].pos == "pronoun":
        return j
    k = j
    while k + 1 < len(words) and words[k + 1].pos == "noun":
        k += 1
    return k


def _np_start(words, head):
    k = head
    while k - 1 >= 0 and words[k - 1].pos in ("noun", "adj", "det"):
        k -= 1
    return k


def _clause_triple(words, clause_no):
    words = list(words)
    main = next((i for i, t in enumerate(words) if t.pos == "verb"), None)
    copular = False
    if main is None:
        main = next((i for i, t in enumerate(words) if t.pos == "aux-verb"),
                    None)
        copular = True
    if main is None:
        return None
    nominal = ("noun", "pronoun")
    subj = obj = None
    subj_np = [i for i in range(main) if words[i].pos in nominal]
    if subj_np:
        subj = _np_head(words, subj_np[0])
        later = [i for i in subj_np if i > subj]
        if words[subj].lower in WH_WORDS and later:
            # "whom did the cat catch": the wh-word is the object
            obj = subj
            subj = _np_head(words, later[0])
    if obj is None:
        allowed = nominal + (("adj",) if copular else ())
        after = [i for i in range(main + 1, len(words))
                 if words[i].pos in allowed]
        if after:
            obj = after[0] if words[after[0]].pos == "adj" \
                else _np_head(words, after[0])
    if subj is None and obj is None:
        return None
    lo = (subj + 1) if subj is not None and subj < main else 0
    hi = obj if obj is not None and obj > main else len(words)
    if copular or obj is None:
        span = range(lo, hi)
    else:
        span = range(lo, main + 1)
    negated_verb = any(words[i].lower in NEGATIONS for i in span
                       if i != obj)
    negated_subject = False
    if subj is not None:
        start = _np_start(words, subj)
        negated_subject = (any(words[i].lower == "no"
                               for i in range(start, subj + 1))
                           or words[subj].lower in ("nobody", "nothing"))
    return SemanticTriple(
        verb=words[main],
        subject=None if subj is None else words[subj],
        object=None if obj is None else words[obj],
        negated_subject_clause=negated_subject,
        negated_verb=negated_verb,
        clause=clause_no)


def _annotated_triples(tokens, annotation):
    n = len(tokens)
    pos = annotation.get("pos")
    if pos is not None:
        if len(pos) != n:
            raise ValidationError(f"annotation has {len(pos)} POS tags for "
                                  f"{n} tokens")
        bad = [p for p in pos if p not in POS_TAGS]
        if bad:
            raise ValidationError(f"unknown POS tag(s) {bad}")
        tokens = [Token(t.surface, t.lemma, p, t.index, t.is_word)
                  for t, p in zip(tokens, pos)]

    def tok(i):
        if i is None:
            return None
        if not isinstance(i, int) or not 0 <= i < n:
            raise ValidationError(f"token index {i!r} out of range 0..{n - 1}")
        return tokens[i]

    out = []
    for rec in annotation.get("triples", []):
        out.append(SemanticTriple(
            verb=tok(rec["verb"]), subject=tok(rec.get("subject")),
            object=tok(rec.get("object")),
            negated_subject_clause=bool(rec.get("negated_subject_clause",
                                                False)),
            negated_verb=bool(rec.get("negated_verb", False)),
            linked_verb=tok(rec.get("linked_verb")),
            clause=int(rec.get("clause", 0))))
    return out


def extract_triples(text, annotation=None):
    """Subject/verb/object triples plus clause-to-clause verb links.

    ``annotation`` is a dict ``{"triples": [...], "pos": [...]}`` with token
    indices into ``tokenize(text)``; when given it is validated and returned
    as is.
    """
    tokens = tokenize(text)
    if annotation is not None:
        return _annotated_triples(tokens, annotation)
    clauses = split_clauses(tokens)
    triples = []
    per_clause = []
    for i, clause in enumerate(clauses):
        t = _clause_triple(clause.words, i)
        per_clause.append(t)
        if t is not None:
            triples.append(t)
    if not triples:
        raise NoVerbFoundError(f"no verb found in {text!r}")
    for i in range(1, len(per_clause)):
        cur, prev = per_clause[i], per_clause[i - 1]
        if cur is not None and prev is not None:
            triples.append(SemanticTriple(verb=cur.verb, linked_verb=prev.verb,
                                          clause=i))
    return triples


def scope_triples(triples, scope):
    plain = [t for t in triples if not t.is_link]
    if scope == "candidates-clause":
        owning = [t for t in plain
                  if any(p is not None and p.pos == "noun"
                         for p in (t.subject, t.object))]
        if not owning:
            return []
        first = min(t.clause for t in owning)
        return [t for t in owning if t.clause == first]
    if scope == "pronoun-clause":
        return [t for t in plain
                if any(p is not None and p.pos == "pronoun"
                       for p in (t.subject, t.object))]
    raise ValueError(f"unknown scope {scope!r}")


def detect_negation(triples, scope):
    """True when a negation marker governs the requested clause.

    Raises UndeterminedError when no triple covers the scope.
    """
    selected = scope_triples(triples, scope)
    if not selected:
        raise UndeterminedError(f"no triple covers the {scope}")
    return any(t.negated for t in selected)


# -- sequence preprocessing -------------------------------------------------

def preprocess_sequence(sentence):
    """Lemmas of the non-stop-word tokens, in sentence order."""
    stops = stop_words()
    return [t.lemma for t in word_tokens(tokenize(sentence))
            if t.lower not in stops and t.lemma not in stops]
