"""Parsers for CERT-style activity logs and the auxiliary lookup tables.

Five activity kinds are supported (web, email, logon, file, device), each a
header-first CSV with a fixed column set.  Dates use the CERT convention
``MM/DD/YYYY HH:MM:SS`` in a single company-local timezone.  Month indices
are counted from January 2010 (index 0), the epoch all corpus files share.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

from .errors import (
    DanglingSupervisor,
    DuplicateUser,
    MalformedRow,
    SchemaMismatch,
    UnknownCategory,
    Unparseable,
    ValenceOutOfRange,
)

EPOCH_YEAR = 2010

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)
# Sakamoto's congruence, offsets for Jan..Dec, result 0=Sunday.
_SAKAMOTO = (0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4)


def days_in_month(year, month):
    if month == 2 and (year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)):
        return 29
    return _DAYS_IN_MONTH[month - 1]


_DATE_CACHE = {}


def _parse_date(text):
    if (text[2] != "/" or text[5] != "/"
            or not (text[:2] + text[3:5] + text[6:10]).isdigit()):
        raise ValueError(f"bad timestamp {text!r}")
    month = int(text[0:2])
    day = int(text[3:5])
    year = int(text[6:10])
    if not (1 <= month <= 12 and 1 <= day <= days_in_month(year, month)):
        raise ValueError(f"bad timestamp {text!r}")
    return year, month, day


class Timestamp:
    """Minute-level instant in the fixed ``MM/DD/YYYY HH:MM:SS`` format."""

    __slots__ = ("year", "month", "day", "hour", "minute", "second")

    def __init__(self, year, month, day, hour=0, minute=0, second=0):
        self.year = year
        self.month = month
        self.day = day
        self.hour = hour
        self.minute = minute
        self.second = second

    @classmethod
    def parse(cls, text):
        """Parse the exact 19-character format; raises ValueError otherwise."""
        if (
            len(text) != 19
            or text[10] != " " or text[13] != ":" or text[16] != ":"
        ):
            raise ValueError(f"bad timestamp {text!r}")
        # date prefixes repeat heavily in chronological logs; cache them
        date = _DATE_CACHE.get(text[:10])
        if date is None:
            date = _parse_date(text)
            _DATE_CACHE[text[:10]] = date
        year, month, day = date
        if not (text[11:13] + text[14:16] + text[17:19]).isdigit():
            raise ValueError(f"bad timestamp {text!r}")
        hour = int(text[11:13])
        minute = int(text[14:16])
        second = int(text[17:19])
        if hour > 23 or minute > 59 or second > 59:
            raise ValueError(f"bad timestamp {text!r}")
        return cls(year, month, day, hour, minute, second)

    def format(self):
        return (
            f"{self.month:02d}/{self.day:02d}/{self.year:04d}"
            f" {self.hour:02d}:{self.minute:02d}:{self.second:02d}"
        )

    def weekday(self):
        """0=Monday .. 6=Sunday (matches datetime.weekday)."""
        y, m = self.year, self.month
        if m < 3:
            y -= 1
        dow_sun0 = (y + y // 4 - y // 100 + y // 400 + _SAKAMOTO[m - 1] + self.day) % 7
        return (dow_sun0 + 6) % 7

    def month_index(self):
        """Months elapsed since January of the epoch year (2010-01 = 0)."""
        return (self.year - EPOCH_YEAR) * 12 + self.month - 1

    def sort_key(self):
        return (self.year, self.month, self.day, self.hour, self.minute, self.second)

    def __eq__(self, other):
        return isinstance(other, Timestamp) and self.sort_key() == other.sort_key()

    def __hash__(self):
        return hash(self.sort_key())

    def __repr__(self):
        return f"Timestamp({self.format()!r})"


@dataclass(slots=True)
class WebEvent:
    id: str
    date: Timestamp
    user: str
    pc: str
    url: str
    content: str


@dataclass(slots=True)
class EmailEvent:
    id: str
    date: Timestamp
    user: str
    pc: str
    to: list
    cc: list
    bcc: list
    sender: str
    size: int
    attachments: int
    content: str


@dataclass(slots=True)
class LogonEvent:
    id: str
    date: Timestamp
    user: str
    pc: str
    activity: str  # Logon | Logoff


@dataclass(slots=True)
class FileEvent:
    id: str
    date: Timestamp
    user: str
    pc: str
    filename: str
    content: str


@dataclass(slots=True)
class DeviceEvent:
    id: str
    date: Timestamp
    user: str
    pc: str
    activity: str  # Connect | Disconnect


KIND_COLUMNS = {
    "web": ("id", "date", "user", "pc", "url", "content"),
    "email": ("id", "date", "user", "pc", "to", "cc", "bcc", "from", "size",
              "attachments", "content"),
    "logon": ("id", "date", "user", "pc", "activity"),
    "file": ("id", "date", "user", "pc", "filename", "content"),
    "device": ("id", "date", "user", "pc", "activity"),
}

KIND_CLASS = {
    "web": WebEvent,
    "email": EmailEvent,
    "logon": LogonEvent,
    "file": FileEvent,
    "device": DeviceEvent,
}

EVENT_KIND = {cls: kind for kind, cls in KIND_CLASS.items()}

# On-disk filenames follow the CERT corpus convention (web logs in http.csv).
CORPUS_FILES = {
    "web": "http.csv",
    "email": "email.csv",
    "logon": "logon.csv",
    "file": "file.csv",
    "device": "device.csv",
}

_LOGON_ACTIVITIES = ("Logon", "Logoff")
_DEVICE_ACTIVITIES = ("Connect", "Disconnect")


def _split_recipients(text):
    return [a for a in text.split(";") if a]


def _as_text(stream):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, "r", encoding="utf-8", newline="")
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline="")


def _build_event(kind, row, line_number):
    n = len(row)
    expected = len(KIND_COLUMNS[kind])
    if n != expected:
        raise MalformedRow(f"expected {expected} fields, got {n}", line_number)
    try:
        date = Timestamp.parse(row[1])
    except ValueError as exc:
        raise MalformedRow(str(exc), line_number) from None
    user = row[2]
    if not user:
        raise MalformedRow("empty user", line_number)
    if kind == "web":
        return WebEvent(row[0], date, user, row[3], row[4], row[5])
    if kind == "email":
        try:
            size = int(row[8])
            attachments = int(row[9])
        except ValueError:
            raise MalformedRow("size/attachments not integers", line_number) from None
        if size < 0 or attachments < 0:
            raise MalformedRow("negative size or attachment count", line_number)
        return EmailEvent(row[0], date, user, row[3], _split_recipients(row[4]),
                          _split_recipients(row[5]), _split_recipients(row[6]),
                          row[7], size, attachments, row[10])
    if kind == "logon":
        if row[4] not in _LOGON_ACTIVITIES:
            raise MalformedRow(f"bad logon activity {row[4]!r}", line_number)
        return LogonEvent(row[0], date, user, row[3], row[4])
    if kind == "file":
        return FileEvent(row[0], date, user, row[3], row[4], row[5])
    if kind == "device":
        if row[4] not in _DEVICE_ACTIVITIES:
            raise MalformedRow(f"bad device activity {row[4]!r}", line_number)
        return DeviceEvent(row[0], date, user, row[3], row[4])
    raise ValueError(f"unknown kind {kind!r}")


def parse_log_stream(stream, kind, on_error="raise", skipped=None):
    """Stream LogEvents from a header-first CSV of the given kind.

    ``on_error`` is ``"raise"`` (fail fast, the default) or ``"skip"``;
    skipped rows are appended to the optional ``skipped`` list as
    ``(line_number, reason)`` pairs.
    """
    if kind not in KIND_COLUMNS:
        raise ValueError(f"unknown activity kind {kind!r}")
    if on_error not in ("raise", "skip"):
        raise ValueError("on_error must be 'raise' or 'skip'")
    text = _as_text(stream)
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaMismatch(f"{kind}: empty input, no header") from None
    if tuple(header) != KIND_COLUMNS[kind]:
        raise SchemaMismatch(
            f"{kind}: header {header!r} != {list(KIND_COLUMNS[kind])!r}")

    def events():
        for row in reader:
            try:
                yield _build_event(kind, row, reader.line_num)
            except MalformedRow as exc:
                if on_error == "raise":
                    raise
                if skipped is not None:
                    skipped.append((exc.line_number, str(exc)))

    return events()


def serialize_event(event):
    """Row of CSV fields for the event, inverse of the per-kind parser."""
    kind = EVENT_KIND[type(event)]
    e = event
    if kind == "web":
        return [e.id, e.date.format(), e.user, e.pc, e.url, e.content]
    if kind == "email":
        return [e.id, e.date.format(), e.user, e.pc, ";".join(e.to),
                ";".join(e.cc), ";".join(e.bcc), e.sender, str(e.size),
                str(e.attachments), e.content]
    if kind in ("logon", "device"):
        return [e.id, e.date.format(), e.user, e.pc, e.activity]
    return [e.id, e.date.format(), e.user, e.pc, e.filename, e.content]


def write_log_csv(path, kind, rows):
    """Write serialized rows (or events) under the kind's header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(KIND_COLUMNS[kind])
        for row in rows:
            if not isinstance(row, list):
                row = serialize_event(row)
            writer.writerow(row)


def iter_corpus_events(directory, kinds=None, on_error="raise", skipped=None):
    """Chain events from the five corpus CSVs in a directory."""
    import os

    for kind in kinds or CORPUS_FILES:
        path = os.path.join(directory, CORPUS_FILES[kind])
        with open(path, "r", encoding="utf-8", newline="") as fh:
            yield from parse_log_stream(fh, kind, on_error=on_error, skipped=skipped)


# --- roster ---

ROSTER_COLUMNS = ("user_id", "first_name", "last_name", "role",
                  "supervisor_id", "start_month", "end_month")


@dataclass(slots=True)
class EmployeeRecord:
    user_id: str
    first_name: str
    last_name: str
    role: str
    supervisor_id: str | None
    start_month: int
    end_month: int | None  # inclusive; None = still employed


def parse_roster(stream):
    text = _as_text(stream)
    reader = csv.reader(text)
    header = next(reader, None)
    if header is None or tuple(header) != ROSTER_COLUMNS:
        raise SchemaMismatch(f"roster header {header!r} != {list(ROSTER_COLUMNS)!r}")
    records = []
    seen = set()
    for row in reader:
        if len(row) != len(ROSTER_COLUMNS):
            raise MalformedRow("wrong roster field count", reader.line_num)
        user_id, first, last, role, sup, start, end = row
        if user_id in seen:
            raise DuplicateUser(user_id)
        seen.add(user_id)
        try:
            start_month = int(start)
            end_month = int(end) if end else None
        except ValueError:
            raise MalformedRow("bad month index", reader.line_num) from None
        if end_month is not None and end_month < start_month:
            raise MalformedRow("empty employment interval", reader.line_num)
        records.append(EmployeeRecord(user_id, first, last, role, sup or None,
                                      start_month, end_month))
    for rec in records:
        if rec.supervisor_id is None:
            continue
        if rec.supervisor_id == rec.user_id:
            raise DanglingSupervisor(f"{rec.user_id} supervises itself")
        if rec.supervisor_id not in seen:
            raise DanglingSupervisor(
                f"{rec.user_id}: supervisor {rec.supervisor_id} not in roster")
    return records


def write_roster(path, records):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROSTER_COLUMNS)
        for r in records:
            writer.writerow([
                r.user_id, r.first_name, r.last_name, r.role,
                r.supervisor_id or "", str(r.start_month),
                "" if r.end_month is None else str(r.end_month),
            ])


def supervisor_pairs(records):
    """(employee, supervisor) pairs implied by the roster."""
    return {(r.user_id, r.supervisor_id) for r in records if r.supervisor_id}


# --- domain categories ---

DOMAIN_CATEGORIES = frozenset(
    {"FileSharing", "JobSearch", "Competitor", "Malware", "Keylogger",
     "Webmail", "Other"})


class DomainCategoryTable:
    """Registrable-domain -> category set, with suffix inheritance.

    Lookup is case-insensitive and total: the most specific listed suffix
    of the queried domain wins, and unlisted domains map to the empty set.
    """

    def __init__(self, mapping=None):
        self._map = {}
        for domain, cats in (mapping or {}).items():
            self.add(domain, cats)

    def add(self, domain, categories):
        if isinstance(categories, str):
            categories = {categories}
        bad = set(categories) - DOMAIN_CATEGORIES
        if bad:
            raise UnknownCategory(", ".join(sorted(bad)))
        self._map.setdefault(domain.lower(), set()).update(categories)

    def lookup(self, domain):
        parts = domain.lower().split(".")
        for i in range(len(parts)):
            cats = self._map.get(".".join(parts[i:]))
            if cats is not None:
                return frozenset(cats)
        return frozenset()

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()


def load_domain_categories(stream):
    text = _as_text(stream)
    table = DomainCategoryTable()
    reader = csv.reader(text)
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise MalformedRow("expected domain,category", reader.line_num)
        table.add(row[0].strip(), row[1].strip())
    return table


# --- sentiment lexicon ---

class SentimentLexicon:
    """Term (word or phrase) -> signed valence with |v| in 1..5."""

    def __init__(self, entries=None):
        self._map = {}
        self.max_words = 1
        self.phrase_starts = set()
        for term, valence in (entries or {}).items():
            self.add(term, valence)

    def add(self, term, valence):
        valence = int(valence)
        if valence == 0 or abs(valence) > 5:
            raise ValenceOutOfRange(f"{term!r}: {valence}")
        term = term.strip().lower()
        words = term.split()
        self._map[term] = valence
        if len(words) > 1:
            self.phrase_starts.add(words[0])
            if len(words) > self.max_words:
                self.max_words = len(words)

    def get(self, term):
        return self._map.get(term)

    def __contains__(self, term):
        return term in self._map

    def __len__(self):
        return len(self._map)

    def items(self):
        return self._map.items()


def load_lexicon(stream):
    """Load a tab-separated ``term<TAB>valence`` lexicon (AFINN file format)."""
    text = _as_text(stream)
    lex = SentimentLexicon()
    for n, line in enumerate(text, 1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        term, sep, valence = line.rpartition("\t")
        if not sep:
            raise MalformedRow("expected term<TAB>valence", n)
        try:
            value = int(valence)
        except ValueError:
            raise MalformedRow(f"bad valence {valence!r}", n) from None
        lex.add(term, value)
    return lex


# --- name -> gender ---

class NameGenderTable:
    """Lowercased first name -> 'F' | 'M'; unlisted names return 'U'."""

    def __init__(self, mapping=None):
        self._map = {}
        for name, code in (mapping or {}).items():
            self.add(name, code)

    def add(self, name, code):
        if code not in ("F", "M"):
            raise ValueError(f"gender code must be F or M, got {code!r}")
        self._map[name.strip().lower()] = code

    def lookup(self, first_name):
        return self._map.get(first_name.strip().lower(), "U")

    def __len__(self):
        return len(self._map)


def load_names(stream):
    text = _as_text(stream)
    table = NameGenderTable()
    reader = csv.reader(text)
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise MalformedRow("expected name,gender", reader.line_num)
        table.add(row[0], row[1].strip())
    return table


# --- host extraction ---

_HOST_RE = re.compile(r"^[a-z0-9-]+(\.[a-z0-9-]+)+$")


def registrable_domain(address_or_url):
    """Lowercase host of a URL or email address, scheme/path/user stripped."""
    s = address_or_url.strip()
    if "://" in s:
        s = s.split("://", 1)[1]
        for sep in "/?#":
            s = s.split(sep, 1)[0]
        if "@" in s:  # userinfo
            s = s.rsplit("@", 1)[1]
    elif "@" in s:
        s = s.rsplit("@", 1)[1]
        for sep in "/?#":
            s = s.split(sep, 1)[0]
    else:
        for sep in "/?#":
            s = s.split(sep, 1)[0]
    host = s.split(":", 1)[0].strip().lower().strip(".")
    if not _HOST_RE.match(host):
        raise Unparseable(address_or_url)
    return host
