"""Cleaning and tokenization contracts, including idempotence and the
token character-set invariant over randomized inputs."""

import random
import re
import string

from sentistock.textprep import clean_text, load_stoplist, remove_stopwords, tokenize

TOKEN_RE = re.compile(r"^[a-z0-9']+$")


def test_clean_text_examples():
    assert clean_text("Hello, World! Visit http://a.co now") == "hello world visit now"
    assert clean_text("") == ""
    assert clean_text("$NVDA to the MOON!!! \U0001F680\U0001F680") == "nvda to the moon"


def test_clean_text_removes_www_urls():
    assert clean_text("see www.example.com/page?x=1 for more") == "see for more"


def test_clean_text_keeps_interior_apostrophes():
    assert clean_text("Don't PANIC") == "don't panic"


def _random_strings(seed, count):
    rng = random.Random(seed)
    pool = (string.ascii_letters + string.digits + string.punctuation + " \t\n"
            + "éüñ中文🚀'…—")
    out = []
    for _ in range(count):
        s = "".join(rng.choice(pool) for _ in range(rng.randint(0, 80)))
        if rng.random() < 0.3:
            s += " http://x.io/" + "".join(rng.choice(string.ascii_lowercase) for _ in range(5))
        if rng.random() < 0.2:
            s += " www.site.org/path"
        out.append(s)
    return out


def test_clean_text_idempotent_on_random_strings():
    for s in _random_strings(seed=101, count=500):
        once = clean_text(s)
        assert clean_text(once) == once


def test_tokens_satisfy_charset_invariant_on_random_strings():
    for s in _random_strings(seed=202, count=500):
        for token in tokenize(clean_text(s)):
            assert TOKEN_RE.match(token), (s, token)
            assert not token.startswith("'") and not token.endswith("'")


def test_tokenize_examples():
    assert tokenize("nvda beats earnings") == ["nvda", "beats", "earnings"]
    assert tokenize("") == []
    assert tokenize("a  b") == ["a", "b"]


def test_tokenize_strips_edge_apostrophes_only():
    assert tokenize("'don't' ''' 'x") == ["don't", "x"]


def test_tokenize_cleans_raw_input():
    assert tokenize("Hello, World!") == ["hello", "world"]


def test_remove_stopwords_examples():
    assert remove_stopwords(["the", "stock", "is", "up"], {"the", "is"}) == ["stock", "up"]
    assert remove_stopwords(["the", "is"], {"the", "is"}) == []
    assert remove_stopwords(["a", "b"], set()) == ["a", "b"]


def test_remove_stopwords_is_order_preserving_membership_filter():
    rng = random.Random(7)
    vocab = [f"w{i}" for i in range(30)]
    for _ in range(100):
        tokens = [rng.choice(vocab) for _ in range(rng.randint(0, 40))]
        stop = set(rng.sample(vocab, rng.randint(0, 30)))
        survivors = remove_stopwords(tokens, stop)
        assert survivors == [t for t in tokens if t not in stop]


def test_default_stoplist_has_127_words():
    stop = load_stoplist()
    assert len(stop) == 127
    assert "the" in stop and "not" in stop


def test_stoplist_file_comments_and_case(tmp_path):
    path = tmp_path / "stop.txt"
    path.write_text("# comment line\nThe\n\nand\n", encoding="utf-8")
    assert load_stoplist(path) == {"the", "and"}
