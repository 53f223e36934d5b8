"""Employee-month feature vectors: the 17 monthly risk indicators.

Rows are keyed by (user_id, month index).  An employee contributes one row
per month from hire through the end of the requested range; months after a
departure still produce rows (post-departure access lands in
``unauthorized_log``), months before hire produce none.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np

from .corpus import (
    DeviceEvent,
    EmailEvent,
    FileEvent,
    LogonEvent,
    WebEvent,
    registrable_domain,
)
from .errors import MissingTruth, SchemaMismatch, UnknownUser, Unparseable
from .sentiment import normalize, score


class ClassLabel(enum.IntEnum):
    Benign = 0
    Departed = 1
    Leaker = 2
    Thief = 3
    Saboteur = 4


THREAT_LABELS = (ClassLabel.Leaker, ClassLabel.Thief, ClassLabel.Saboteur)

FEATURE_COLUMNS = (
    "risk_leak", "dow_leak", "hr_leak",
    "risk_thief", "dow_thief", "hr_thief",
    "risk_sabotage", "dow_sabotage", "hr_sabotage",
    "device_freq", "file_freq",
    "email_sentiment", "email_compete", "web_sentiment",
    "executables", "unauthorized_log", "gender",
)

COL = {name: i for i, name in enumerate(FEATURE_COLUMNS)}

GENDER_CODE = {"M": 0.0, "F": 1.0, "U": 0.5}

_FAR_FUTURE = 1 << 30


def is_weekend(t):
    """Saturday or Sunday."""
    return t.weekday() >= 5


def is_off_hours(t):
    """Outside the [08:00, 17:00) working window."""
    return t.hour < 8 or t.hour >= 17


def event_risk_categories(event, domains):
    """Risk categories touched by a web or email event.

    Web events can contribute Leak (file sharing), Thief (job search or
    competitor) and Sabotage (malware or keylogger); email events only the
    first two, via any recipient's domain.  Other kinds yield the empty set.
    """
    cats = set()
    if isinstance(event, WebEvent):
        domain_cats = _safe_lookup(domains, event.url)
        src = [domain_cats]
        sabotage_ok = True
    elif isinstance(event, EmailEvent):
        src = [_safe_lookup(domains, addr)
               for addr in event.to + event.cc + event.bcc]
        sabotage_ok = False
    else:
        return frozenset()
    for dc in src:
        if "FileSharing" in dc:
            cats.add("Leak")
        if "JobSearch" in dc or "Competitor" in dc:
            cats.add("Thief")
        if sabotage_ok and ("Malware" in dc or "Keylogger" in dc):
            cats.add("Sabotage")
    return frozenset(cats)


def _safe_lookup(domains, address_or_url):
    try:
        return domains.lookup(registrable_domain(address_or_url))
    except Unparseable:
        return frozenset()


@dataclass
class FeatureVector:
    """One employee-month row; mirrors the 17-column schema."""

    user: str
    month: int
    risk_leak: int = 0
    dow_leak: int = 0
    hr_leak: int = 0
    risk_thief: int = 0
    dow_thief: int = 0
    hr_thief: int = 0
    risk_sabotage: int = 0
    dow_sabotage: int = 0
    hr_sabotage: int = 0
    device_freq: int = 0
    file_freq: int = 0
    email_sentiment: int = 0
    email_compete: int = 0
    web_sentiment: int = 0
    executables: int = 0
    unauthorized_log: int = 0
    gender: float = 0.5
    label: ClassLabel | None = None

    def values(self):
        return np.array([getattr(self, c) for c in FEATURE_COLUMNS],
                        dtype=np.float64)


@dataclass
class DatasetTable:
    """Ordered feature rows with shared schema; the unit of sampling."""

    users: np.ndarray
    months: np.ndarray
    X: np.ndarray
    y: np.ndarray | None = None
    columns: tuple = FEATURE_COLUMNS

    def __post_init__(self):
        self.users = np.asarray(self.users, dtype=object)
        self.months = np.asarray(self.months, dtype=np.int64)
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.y is not None:
            self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape != (len(self.users), len(self.columns)):
            raise SchemaMismatch(
                f"X shape {self.X.shape} inconsistent with "
                f"{len(self.users)} rows x {len(self.columns)} columns")

    def __len__(self):
        return len(self.users)

    @property
    def n(self):
        return len(self.users)

    def keys(self):
        return list(zip(self.users.tolist(), self.months.tolist()))

    def subset(self, indices):
        indices = np.asarray(indices)
        return DatasetTable(
            self.users[indices].copy(), self.months[indices].copy(),
            self.X[indices].copy(),
            None if self.y is None else self.y[indices].copy(),
            self.columns)

    def class_counts(self):
        if self.y is None:
            raise ValueError("table is unlabeled")
        values, counts = np.unique(self.y, return_counts=True)
        return {ClassLabel(int(v)): int(c) for v, c in zip(values, counts)}

    def row(self, i):
        fv = FeatureVector(self.users[i], int(self.months[i]))
        for name, value in zip(self.columns, self.X[i]):
            setattr(fv, name, value if name == "gender" else int(value))
        if self.y is not None:
            fv.label = ClassLabel(int(self.y[i]))
        return fv

    def summary(self):
        """Per-column (mean, std, min, max)."""
        return {
            name: (float(col.mean()), float(col.std()),
                   float(col.min()), float(col.max()))
            for name, col in zip(self.columns, self.X.T)
        }

    def same_rows(self, other):
        return (len(self) == len(other)
                and np.array_equal(self.users, other.users)
                and np.array_equal(self.months, other.months)
                and np.array_equal(self.X, other.X)
                and ((self.y is None) == (other.y is None))
                and (self.y is None or np.array_equal(self.y, other.y)))


def from_feature_vectors(vectors):
    users = np.array([v.user for v in vectors], dtype=object)
    months = np.array([v.month for v in vectors])
    X = np.array([v.values() for v in vectors]) if vectors else \
        np.zeros((0, len(FEATURE_COLUMNS)))
    labels = [v.label for v in vectors]
    y = None
    if vectors and all(lab is not None for lab in labels):
        y = np.array([int(lab) for lab in labels])
    return DatasetTable(users, months, X, y)


def extract(events, roster, domains, lexicon, genders, months,
            on_unknown_user="raise", counters=None):
    """Aggregate events into one row per employed (user, month).

    ``months`` is a range of month indices.  ``on_unknown_user`` is
    ``"raise"`` or ``"skip"``; skipped events are tallied in the optional
    ``counters`` dict alongside out-of-range events.
    """
    if len(months) == 0:
        raise ValueError("months range is empty")
    m_start, m_stop = months.start, months.stop

    user_end = {}
    index = {}
    users_col = []
    months_col = []
    gender_col = []
    for rec in roster:
        end = rec.end_month if rec.end_month is not None else _FAR_FUTURE
        user_end[rec.user_id] = end
        gcode = GENDER_CODE[genders.lookup(rec.first_name)]
        for m in range(max(rec.start_month, m_start), m_stop):
            index[(rec.user_id, m)] = len(users_col)
            users_col.append(rec.user_id)
            months_col.append(m)
            gender_col.append(gcode)

    n = len(users_col)
    rows = [[0] * 16 for _ in range(n)]

    # column offsets (gender excluded from the count block)
    i_dev, i_file = COL["device_freq"], COL["file_freq"]
    i_esent, i_comp = COL["email_sentiment"], COL["email_compete"]
    i_wsent, i_exe = COL["web_sentiment"], COL["executables"]
    i_unauth = COL["unauthorized_log"]
    leak_cols = (COL["risk_leak"], COL["dow_leak"], COL["hr_leak"])
    thief_cols = (COL["risk_thief"], COL["dow_thief"], COL["hr_thief"])
    sab_cols = (COL["risk_sabotage"], COL["dow_sabotage"], COL["hr_sabotage"])

    unknown = out_of_range = 0
    wk_cache = {}
    dom_cache = {}
    index_get = index.get
    user_end_get = user_end.get

    def url_cats(url):
        # cache on the scheme+host prefix; paths vary per request
        cut = url.find("/", url.find("://") + 3) if "://" in url else \
            url.find("/")
        key = url[:cut] if cut > 0 else url
        cats = dom_cache.get(key)
        if cats is None:
            cats = _safe_lookup(domains, key)
            dom_cache[key] = cats
        return cats

    def addr_cats(addr):
        key = addr[addr.rfind("@") + 1:]
        cats = dom_cache.get(key)
        if cats is None:
            cats = _safe_lookup(domains, addr)
            dom_cache[key] = cats
        return cats

    def bump_risk(row, cols, date):
        row[cols[0]] += 1
        key = (date.year << 9) | (date.month << 5) | date.day
        wk = wk_cache.get(key)
        if wk is None:
            wk = date.weekday() >= 5
            wk_cache[key] = wk
        if wk:
            row[cols[1]] += 1
        if date.hour < 8 or date.hour >= 17:
            row[cols[2]] += 1

    for e in events:
        user = e.user
        end = user_end_get(user)
        if end is None:
            if on_unknown_user == "raise":
                raise UnknownUser(user)
            unknown += 1
            continue
        d = e.date
        midx = (d.year - 2010) * 12 + d.month - 1
        ri = index_get((user, midx))
        if ri is None:
            out_of_range += 1
            continue
        row = rows[ri]
        cls = e.__class__
        if cls is WebEvent:
            cats = url_cats(e.url)
            if cats:
                if "FileSharing" in cats:
                    bump_risk(row, leak_cols, d)
                if "JobSearch" in cats or "Competitor" in cats:
                    bump_risk(row, thief_cols, d)
                if "Malware" in cats or "Keylogger" in cats:
                    bump_risk(row, sab_cols, d)
            if e.content:
                row[i_wsent] += score(normalize(e.content), lexicon)
        elif cls is EmailEvent:
            leak = thief = compete = False
            for addr in e.to:
                cats = addr_cats(addr)
                if cats:
                    leak = leak or "FileSharing" in cats
                    thief = thief or "JobSearch" in cats or "Competitor" in cats
                    compete = compete or "Competitor" in cats
            for addr in e.cc + e.bcc:
                cats = addr_cats(addr)
                if cats:
                    leak = leak or "FileSharing" in cats
                    thief = thief or "JobSearch" in cats or "Competitor" in cats
                    compete = compete or "Competitor" in cats
            if leak:
                bump_risk(row, leak_cols, d)
            if thief:
                bump_risk(row, thief_cols, d)
            if compete:
                row[i_comp] += 1
            if e.content:
                row[i_esent] += score(normalize(e.content), lexicon)
        elif cls is FileEvent:
            row[i_file] += 1
            if e.filename.lower().endswith(".exe"):
                row[i_exe] += 1
        elif cls is LogonEvent:
            if e.activity == "Logon" and midx > end:
                row[i_unauth] += 1
        elif cls is DeviceEvent:
            if e.activity == "Connect":
                row[i_dev] += 1
                if midx > end:
                    row[i_unauth] += 1

    if counters is not None:
        counters["unknown_user"] = unknown
        counters["out_of_range"] = out_of_range

    if n:
        X = np.hstack([
            np.array(rows, dtype=np.float64),
            np.array(gender_col, dtype=np.float64).reshape(-1, 1),
        ])
    else:
        X = np.zeros((0, len(FEATURE_COLUMNS)))
    return DatasetTable(np.array(users_col, dtype=object),
                        np.array(months_col), X)


def attach_labels(table, truth):
    """Populate the label column from a (user, month) -> label mapping."""
    labels = getattr(truth, "labels", truth)
    y = np.empty(len(table), dtype=np.int64)
    for i, key in enumerate(zip(table.users.tolist(), table.months.tolist())):
        lab = labels.get(key)
        if lab is None:
            raise MissingTruth(f"no label for {key}")
        y[i] = int(lab)
    return DatasetTable(table.users, table.months, table.X, y, table.columns)


def _fmt_value(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_table(table, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user", "month", *table.columns, "label"])
        unlabeled = table.y is None
        for i in range(len(table)):
            label = "" if unlabeled else ClassLabel(int(table.y[i])).name
            writer.writerow([table.users[i], str(int(table.months[i])),
                             *(_fmt_value(v) for v in table.X[i]), label])


def read_table(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["user", "month", *FEATURE_COLUMNS, "label"]
        if header != expected:
            raise SchemaMismatch(f"feature table header {header!r}")
        users, months, rows, labels = [], [], [], []
        for row in reader:
            if len(row) != len(expected):
                raise SchemaMismatch(
                    f"row {reader.line_num}: {len(row)} fields")
            users.append(row[0])
            months.append(int(row[1]))
            rows.append([float(v) for v in row[2:-1]])
            labels.append(row[-1])
    n = len(users)
    X = np.array(rows) if n else np.zeros((0, len(FEATURE_COLUMNS)))
    if any(labels):
        if not all(labels):
            raise SchemaMismatch("mixed labeled and unlabeled rows")
        y = np.array([int(ClassLabel[name]) for name in labels])
    else:
        y = None
    return DatasetTable(np.array(users, dtype=object), np.array(months), X, y)
