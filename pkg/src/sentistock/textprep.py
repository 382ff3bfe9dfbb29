"""Text cleaning, tokenization, and stop-word removal.

The cleaner is deliberately byte-simple: lowercase ASCII letters, digits,
and apostrophes survive; everything else (URLs first, then punctuation,
emoji, non-ASCII letters) becomes whitespace.  Apostrophes are kept inside
tokens so negation contractions survive for sentiment, but stripped at
token edges.
"""

from __future__ import annotations

import re
from importlib import resources

_URL_RE = re.compile(r"(?:https?://|www\.)\S*")
_NON_TOKEN_RE = re.compile(r"[^a-z0-9'\s]+")
_WS_RE = re.compile(r"\s+")


def clean_text(raw: str) -> str:
    """Normalize raw text: lowercase, drop URLs, keep only [a-z0-9'] words.

    Idempotent, and does not touch stop words (see remove_stopwords).
    """
    text = raw.lower()
    text = _URL_RE.sub(" ", text)
    text = _NON_TOKEN_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Split cleaned text on whitespace, order preserved.

    Uncleaned input is cleaned first so the token character invariant
    always holds.  Edge apostrophes are stripped ("'don't'" -> "don't");
    tokens that were only apostrophes vanish.
    """
    tokens = []
    for piece in clean_text(text).split():
        token = piece.strip("'")
        if token:
            tokens.append(token)
    return tokens


def remove_stopwords(tokens: list[str], stoplist: set[str]) -> list[str]:
    """Drop stoplist members; survivors keep their relative order."""
    return [t for t in tokens if t not in stoplist]


def load_stoplist(path=None) -> set[str]:
    """Load a stoplist file (one token per line, '#' comments, UTF-8).

    Without a path, the packaged 127-word default is used.
    """
    if path is None:
        text = resources.files("sentistock.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    stoplist = set()
    for line in text.splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            stoplist.add(word.lower())
    return stoplist
