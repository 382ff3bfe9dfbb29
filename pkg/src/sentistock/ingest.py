"""Readers for the four raw data formats plus normalization into Documents.

CSV inputs are comma-separated, double-quote quoted, UTF-8, with a header
row.  Malformed rows are skipped with a `file:line: message` diagnostic on
stderr rather than aborting the read; scraped exports are dirty and one bad
row should not sink a run.  Structural problems (missing columns, duplicate
OHLCV dates) abort.
"""

from __future__ import annotations

import csv
import datetime as dt
import re
import sys
from dataclasses import dataclass
from html.parser import HTMLParser

from .errors import (
    DuplicateDateError,
    DuplicateDocIdError,
    InputError,
    MissingColumnError,
    SelectorSyntaxError,
)

SOURCE_REDDIT = "Reddit"
SOURCE_NEWS = "News"
SOURCE_HEADLINE = "Headline"
SOURCES = (SOURCE_REDDIT, SOURCE_NEWS, SOURCE_HEADLINE)

_TICKER_RE = re.compile(r"^[A-Z0-9]+$")


@dataclass
class RawComment:
    text: str
    upvotes: int
    date: dt.date
    company: str


@dataclass
class NewsItem:
    title: str
    summary: str
    date: dt.date
    company: str


@dataclass
class HeadlineItem:
    headline: str
    date: dt.date
    company: str


@dataclass
class OhlcvBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: int


@dataclass
class Document:
    id: str
    source: str
    company: str
    date: dt.date
    combined_text: str
    engagement: int


@dataclass
class BadRow:
    """One skipped input row: where it was and why it was dropped."""

    path: str
    line: int
    cause: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.cause}"


def _report(bad: BadRow) -> None:
    print(str(bad), file=sys.stderr)


def _parse_date(value: str) -> dt.date:
    return dt.date.fromisoformat(value.strip())


def _parse_ticker(value: str) -> str:
    ticker = value.strip()
    if not _TICKER_RE.match(ticker):
        raise ValueError(f"bad ticker {value!r} (expected uppercase alphanumeric)")
    return ticker


def _open_csv(path, required: list[str]):
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot open {path}: {exc}") from exc
    reader = csv.DictReader(fh)
    fields = reader.fieldnames or []
    for col in required:
        if col not in fields:
            fh.close()
            raise MissingColumnError(str(path), col)
    return fh, reader


def read_reddit_csv(path) -> tuple[list[RawComment], list[BadRow]]:
    """Parse `text,upvotes,date,company` rows; bad rows are skipped and returned."""
    fh, reader = _open_csv(path, ["text", "upvotes", "date", "company"])
    rows: list[RawComment] = []
    skipped: list[BadRow] = []
    with fh:
        for rec in reader:
            try:
                upvotes = int(rec["upvotes"])
                if upvotes < 0:
                    raise ValueError(f"negative upvotes {upvotes}")
                rows.append(RawComment(rec["text"], upvotes, _parse_date(rec["date"]),
                                       _parse_ticker(rec["company"])))
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                _report(bad)
    return rows, skipped


def read_news_csv(path) -> tuple[list[NewsItem], list[BadRow]]:
    fh, reader = _open_csv(path, ["title", "summary", "date", "company"])
    rows: list[NewsItem] = []
    skipped: list[BadRow] = []
    with fh:
        for rec in reader:
            try:
                title, summary = rec["title"] or "", rec["summary"] or ""
                if not title.strip() and not summary.strip():
                    raise ValueError("both title and summary empty")
                rows.append(NewsItem(title, summary, _parse_date(rec["date"]),
                                     _parse_ticker(rec["company"])))
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                _report(bad)
    return rows, skipped


def read_headlines_csv(path) -> tuple[list[HeadlineItem], list[BadRow]]:
    fh, reader = _open_csv(path, ["headline", "date", "company"])
    rows: list[HeadlineItem] = []
    skipped: list[BadRow] = []
    with fh:
        for rec in reader:
            try:
                headline = rec["headline"] or ""
                if not headline.strip():
                    raise ValueError("empty headline")
                rows.append(HeadlineItem(headline, _parse_date(rec["date"]),
                                         _parse_ticker(rec["company"])))
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                _report(bad)
    return rows, skipped


def read_ohlcv_csv(path) -> tuple[list[OhlcvBar], list[BadRow]]:
    """Parse daily bars, enforce price invariants, and sort ascending by date.

    A duplicated date means the export itself is corrupt, so it aborts the
    read instead of being skipped.
    """
    fh, reader = _open_csv(path, ["date", "open", "high", "low", "close", "volume"])
    rows: list[OhlcvBar] = []
    skipped: list[BadRow] = []
    seen: set[dt.date] = set()
    with fh:
        for rec in reader:
            try:
                date = _parse_date(rec["date"])
                o, h, lo, c = (float(rec[k]) for k in ("open", "high", "low", "close"))
                volume = int(rec["volume"])
                if min(o, h, lo, c) <= 0:
                    raise ValueError("non-positive price")
                if volume < 0:
                    raise ValueError(f"negative volume {volume}")
                if lo > min(o, c):
                    raise ValueError(f"low {lo} above min(open, close)")
                if h < max(o, c):
                    raise ValueError(f"high {h} below max(open, close)")
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                _report(bad)
                continue
            if date in seen:
                raise DuplicateDateError(str(path), date)
            seen.add(date)
            rows.append(OhlcvBar(date, o, h, lo, c, volume))
    rows.sort(key=lambda bar: bar.date)
    return rows, skipped


_SELECTOR_RE = re.compile(r"^([a-zA-Z][a-zA-Z0-9]*)(?:\.([A-Za-z0-9_][A-Za-z0-9_-]*))?$")
_ISO_DATE_RE = re.compile(r"\b(\d{4}-\d{2}-\d{2})\b")
_REL_SAMEDAY_RE = re.compile(r"\b\d+\s+(?:minute|minutes|hour|hours)\s+ago\b")
_REL_DAYS_RE = re.compile(r"\b(\d+)\s+days?\s+ago\b")
_YESTERDAY_RE = re.compile(r"\byesterday\b")


def resolve_snapshot_date(text: str, snapshot_date: dt.date) -> dt.date:
    """Pull a publication date out of scraped element text.

    Absolute ISO dates win; then `N minutes/hours ago` (same day),
    `N days ago`, and `yesterday`; anything else falls back to the
    snapshot's own date.
    """
    for candidate in _ISO_DATE_RE.findall(text):
        try:
            return dt.date.fromisoformat(candidate)
        except ValueError:
            continue
    lowered = text.lower()
    if _REL_SAMEDAY_RE.search(lowered):
        return snapshot_date
    match = _REL_DAYS_RE.search(lowered)
    if match:
        return snapshot_date - dt.timedelta(days=int(match.group(1)))
    if _YESTERDAY_RE.search(lowered):
        return snapshot_date - dt.timedelta(days=1)
    return snapshot_date


class _SnapshotParser(HTMLParser):
    """Collect the text content of every element matching `tag` / `tag.class`."""

    def __init__(self, tag: str, cls: str | None):
        super().__init__(convert_charrefs=True)
        self.tag = tag.lower()
        self.cls = cls
        self.stack: list[list[str] | None] = []
        self.texts: list[str] = []

    def _matches(self, attrs) -> bool:
        if self.cls is None:
            return True
        for name, value in attrs:
            if name == "class" and value and self.cls in value.split():
                return True
        return False

    def handle_starttag(self, tag, attrs):
        if tag == self.tag:
            self.stack.append([] if self._matches(attrs) else None)

    def handle_startendtag(self, tag, attrs):
        if tag == self.tag and self._matches(attrs):
            self.texts.append("")

    def handle_endtag(self, tag):
        if tag == self.tag and self.stack:
            buf = self.stack.pop()
            if buf is not None:
                self.texts.append("".join(buf))

    def handle_data(self, data):
        for buf in self.stack:
            if buf is not None:
                buf.append(data)

    def close(self):
        super().close()
        while self.stack:  # unclosed elements in dirty snapshots still count
            buf = self.stack.pop()
            if buf is not None:
                self.texts.append("".join(buf))


def parse_headline_snapshot(html: str, selector: str, snapshot_date: dt.date,
                            company: str) -> list[HeadlineItem]:
    """Extract one HeadlineItem per selector match from a saved page.

    Inner markup is stripped, entity references decoded, and whitespace
    collapsed; elements whose text collapses to nothing are dropped.  No
    match at all yields an empty list, not an error.
    """
    match = _SELECTOR_RE.match(selector)
    if not match:
        raise SelectorSyntaxError(selector)
    parser = _SnapshotParser(match.group(1), match.group(2))
    parser.feed(html)
    parser.close()
    items = []
    for raw in parser.texts:
        text = " ".join(raw.split())
        if not text:
            continue
        items.append(HeadlineItem(text, resolve_snapshot_date(text, snapshot_date), company))
    return items


def to_documents(comments: list[RawComment], news: list[NewsItem],
                 headlines: list[HeadlineItem]) -> list[Document]:
    """Normalize the three text sources into one Document list.

    combined_text is the text field for Reddit, `title + " " + summary`
    for news, and the headline for headlines.  Ids are deterministic in
    (source, input index), so identical inputs give identical corpora.
    """
    docs: list[Document] = []
    for i, c in enumerate(comments):
        docs.append(Document(f"reddit-{i}", SOURCE_REDDIT, c.company, c.date, c.text, c.upvotes))
    for i, n in enumerate(news):
        docs.append(Document(f"news-{i}", SOURCE_NEWS, n.company, n.date,
                             n.title + " " + n.summary, 0))
    for i, h in enumerate(headlines):
        docs.append(Document(f"headline-{i}", SOURCE_HEADLINE, h.company, h.date, h.headline, 0))
    return docs


def write_reddit_csv(path, rows: list[RawComment]) -> None:
    _write_csv(path, ["text", "upvotes", "date", "company"],
               ([r.text, r.upvotes, r.date.isoformat(), r.company] for r in rows))


def write_news_csv(path, rows: list[NewsItem]) -> None:
    _write_csv(path, ["title", "summary", "date", "company"],
               ([r.title, r.summary, r.date.isoformat(), r.company] for r in rows))


def write_headlines_csv(path, rows: list[HeadlineItem]) -> None:
    _write_csv(path, ["headline", "date", "company"],
               ([r.headline, r.date.isoformat(), r.company] for r in rows))


def write_ohlcv_csv(path, rows: list[OhlcvBar]) -> None:
    _write_csv(path, ["date", "open", "high", "low", "close", "volume"],
               ([r.date.isoformat(), repr(r.open), repr(r.high), repr(r.low),
                 repr(r.close), r.volume] for r in rows))


def write_documents_csv(path, docs: list[Document]) -> None:
    _write_csv(path, ["id", "source", "company", "date", "combined_text", "engagement"],
               ([d.id, d.source, d.company, d.date.isoformat(), d.combined_text,
                 d.engagement] for d in docs))


def read_documents_csv(path) -> tuple[list[Document], list[BadRow]]:
    """Read back a normalized document store written by write_documents_csv."""
    fh, reader = _open_csv(path, ["id", "source", "company", "date", "combined_text",
                                  "engagement"])
    docs: list[Document] = []
    skipped: list[BadRow] = []
    seen: set[str] = set()
    with fh:
        for rec in reader:
            try:
                if rec["source"] not in SOURCES:
                    raise ValueError(f"unknown source {rec['source']!r}")
                engagement = int(rec["engagement"])
                if engagement < 0:
                    raise ValueError(f"negative engagement {engagement}")
                doc = Document(rec["id"], rec["source"], _parse_ticker(rec["company"]),
                               _parse_date(rec["date"]), rec["combined_text"], engagement)
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                _report(bad)
                continue
            if doc.id in seen:
                raise DuplicateDocIdError(str(path), doc.id)
            seen.add(doc.id)
            docs.append(doc)
    return docs, skipped


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
