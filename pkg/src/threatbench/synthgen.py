"""Deterministic CERT-style corpus generator with embedded threat narratives.

Output is a pure function of (config, seed): employees get their own PCG64
substream, events are generated month by month and merged into per-kind
chronological CSVs.  Narratives:

* Leaker  - file-sharing web/email traffic with weekend and off-hour skew
            and sharply negative email text during active months.
* Thief   - job-search/competitor browsing and competitor-addressed email,
            deliberately overlapping the benign baseline (benign users also
            email competitors and visit job sites).
* Saboteur- malware/keylogger domain hits, executable file access,
            off-hour skew.
* Departed- events stop after the departure month; a configurable fraction
            keeps producing logon/device events (unauthorized access).

Month indices count from January 2010, matching the corpus epoch.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from .corpus import (
    CORPUS_FILES,
    EPOCH_YEAR,
    KIND_COLUMNS,
    ROSTER_COLUMNS,
    Timestamp,
    days_in_month,
)
from .errors import InvalidConfig, IoFailure, TruthMismatch
from .features import ClassLabel

DEFAULT_FRACTIONS = {
    ClassLabel.Benign: 0.80,
    ClassLabel.Departed: 0.13,
    ClassLabel.Leaker: 0.03,
    ClassLabel.Thief: 0.03,
    ClassLabel.Saboteur: 0.01,
}

# events per user per day, before per-user and weekday modulation
DEFAULT_RATES = {
    "web": 0.9,
    "email": 0.45,
    "logon": 0.3,
    "file": 0.3,
    "device": 0.15,
}

COMPANY_DOMAIN = "dtaa.com"

# web destination pools; the categorized ones appear in data/domains.csv
NEUTRAL_DOMAINS = (
    "newswire.example", "weatherly.example", "sportsdesk.example",
    "techdigest.example", "recipenook.example", "travelmate.example",
    "streamflick.example", "shopcart.example", "forumhive.example",
    "wikipath.example",
)
FILESHARE_DOMAINS = ("boxdrop.example", "filevault.example",
                     "sharehub.example", "dropcrate.example",
                     "syncbin.example", "uploadbay.example")
JOBSEARCH_DOMAINS = ("careerlift.example", "jobhunt.example",
                     "hireline.example", "workscout.example",
                     "talentpool.example")
COMPETITOR_DOMAINS = ("orbitaldyn.example", "vectorforge.example",
                      "nimbusworks.example", "quantaslab.example",
                      "apexsystems.example")
MALWARE_DOMAINS = ("badpayload.example", "drivebydl.example",
                   "trojanest.example", "rootkitpit.example")
KEYLOGGER_DOMAINS = ("keysnoop.example", "strokelog.example",
                     "spykeys.example")
WEBMAIL_DOMAINS = ("mailnest.example", "inboxly.example", "postbox.example")

_WEB_POOLS = (NEUTRAL_DOMAINS, WEBMAIL_DOMAINS, JOBSEARCH_DOMAINS,
              COMPETITOR_DOMAINS, FILESHARE_DOMAINS, MALWARE_DOMAINS,
              KEYLOGGER_DOMAINS)
# indices into _WEB_POOLS: neutral, webmail, jobsearch, competitor,
# filesharing, malware, keylogger
_BENIGN_WEB_SHARES = np.array([0.905, 0.05, 0.015, 0.015, 0.012, 0.002, 0.001])

# email recipient pools: internal, competitor, webmail, filesharing
_BENIGN_MAIL_SHARES = np.array([0.92, 0.05, 0.02, 0.01])

POSITIVE_WORDS = (
    "outstanding", "breakthrough", "amazing", "awesome", "brilliant",
    "excellent", "great", "good", "win", "winner", "success", "successful",
    "superb", "fantastic", "wonderful", "delighted", "happy", "glad",
    "praise", "love", "perfect", "impressive", "excited", "thanks",
    "appreciate", "approved", "awarded", "reward", "progress", "improved",
    "nice", "best", "effective", "strong", "supported", "confident",
    "celebrate", "achievement", "accomplished", "cheerful",
)
NEGATIVE_WORDS = (
    "tortures", "awful", "terrible", "horrible", "hate", "angry", "furious",
    "disappointed", "frustrated", "annoyed", "fail", "failed", "failure",
    "problem", "problems", "worthless", "useless", "unhappy", "sad",
    "miserable", "resentful", "grievance", "complaint", "blame", "betrayed",
    "unfair", "disgusted", "stressed", "worried", "worry", "fear", "afraid",
    "threat", "fired", "lawsuit", "fraud", "scandal", "crisis", "damage",
    "dismal", "hopeless", "dreadful", "losing", "defeated", "mistake",
)
NEUTRAL_WORDS = (
    "meeting", "schedule", "report", "project", "deadline", "server",
    "update", "budget", "review", "client", "design", "release", "build",
    "status", "agenda", "invoice", "quarter", "draft", "sprint", "ticket",
    "deploy", "merge", "database", "network", "printer", "coffee", "lunch",
    "calendar", "notes", "slides", "vendor", "contract", "shipment",
    "training", "policy", "survey", "metrics", "roadmap", "workshop",
    "timesheet", "staffing", "audit", "forecast", "pipeline", "summary",
    "minutes", "handover", "inventory", "backlog", "milestone",
)

FIRST_NAMES_M = ("james", "john", "robert", "michael", "william", "david",
                 "richard", "joseph", "thomas", "charles", "christopher",
                 "daniel", "matthew", "anthony", "mark", "donald", "steven",
                 "paul", "andrew", "joshua", "kenneth", "kevin", "brian",
                 "george", "edward")
FIRST_NAMES_F = ("mary", "patricia", "jennifer", "linda", "elizabeth",
                 "barbara", "susan", "jessica", "sarah", "karen", "nancy",
                 "lisa", "betty", "margaret", "sandra", "ashley", "kimberly",
                 "emily", "donna", "michelle", "carol", "amanda", "dorothy",
                 "melissa", "deborah")
# deliberately absent from data/names.csv: their gender resolves to Unknown
FIRST_NAMES_UNLISTED = ("zephyr", "arden", "marlowe", "ellery")
LAST_NAMES = ("smith", "johnson", "williams", "brown", "jones", "garcia",
              "miller", "davis", "rodriguez", "martinez", "hernandez",
              "lopez", "gonzalez", "wilson", "anderson", "taylor", "moore",
              "jackson", "martin", "lee", "perez", "thompson", "white",
              "harris", "clark")
ROLES = ("Engineer", "Analyst", "Technician", "Scientist", "Accountant",
         "Coordinator", "Specialist", "Administrator")

FILE_EXTENSIONS = ("docx", "pdf", "xlsx", "txt", "pptx")

# file-format words, distinct from the sentiment pools
FILE_WORDS = ("spec", "appendix", "figures", "tables", "readme", "data",
              "archive", "results", "manual", "notes")

# per-event word counts by kind (content length)
EMAIL_WORDS = 8
WEB_WORDS = 6
FILE_CONTENT_WORDS = 3

WORK_START, WORK_END = 8, 17


@dataclass
class GenConfig:
    """Knobs for corpus scale, class mix, rates and narrative intensity."""

    n_employees: int = 200
    n_months: int = 12
    fractions: dict = field(default_factory=lambda: dict(DEFAULT_FRACTIONS))
    rates: dict = field(default_factory=lambda: dict(DEFAULT_RATES))
    threat_intensity: float = 1.0
    unauthorized_fraction: float = 0.5
    # multiplicative odds that a threat slot lands on a male employee; this
    # is what makes the inferred-gender column weakly informative
    threat_male_odds: float = 2.0
    seed: int = 7

    def validate(self):
        if self.n_employees < 1 or self.n_months < 1:
            raise InvalidConfig("need at least one employee and one month")
        total = sum(self.fractions.get(lab, 0.0) for lab in ClassLabel)
        if abs(total - 1.0) > 1e-9:
            raise InvalidConfig(f"class fractions sum to {total}, not 1")
        if any(v < 0 for v in self.fractions.values()):
            raise InvalidConfig("negative class fraction")
        if set(self.rates) != set(DEFAULT_RATES):
            raise InvalidConfig(f"rates must cover {sorted(DEFAULT_RATES)}")
        if any(v < 0 for v in self.rates.values()):
            raise InvalidConfig("negative event rate")
        if not 0.0 <= self.unauthorized_fraction <= 1.0:
            raise InvalidConfig("unauthorized_fraction outside [0, 1]")
        if self.threat_intensity < 0:
            raise InvalidConfig("negative threat intensity")


@dataclass
class GroundTruth:
    """Per employee-month labels plus the narrative metadata behind them."""

    labels: dict                 # (user_id, month) -> ClassLabel
    employee_class: dict         # user_id -> ClassLabel
    departures: dict             # user_id -> departure month (inclusive last)
    windows: dict                # user_id -> (start month, length)
    unauthorized_users: frozenset
    n_months: int

    def class_employee_counts(self):
        counts = {lab: 0 for lab in ClassLabel}
        for lab in self.employee_class.values():
            counts[lab] += 1
        return counts


def class_counts_exact(n, fractions):
    """Largest-remainder rounding of per-class employee counts."""
    order = list(ClassLabel)
    raw = [n * fractions.get(lab, 0.0) for lab in order]
    floors = [int(np.floor(v)) for v in raw]
    remainder = n - sum(floors)
    by_frac = sorted(range(len(order)), key=lambda i: (-(raw[i] - floors[i]), i))
    for i in by_frac[:remainder]:
        floors[i] += 1
    return dict(zip(order, floors))


def _largest_remainder_check(counts, n):
    assert sum(counts.values()) == n


def _hour_probs(off_share):
    """Discrete hour distribution with the given off-hour mass."""
    p = np.empty(24)
    work_hours = WORK_END - WORK_START
    off_hours = 24 - work_hours
    p[:] = off_share / off_hours
    p[WORK_START:WORK_END] = (1.0 - off_share) / work_hours
    return p


_BENIGN_HOURS = _hour_probs(0.18)

# per-class shape of active months: (weekend rate multiplier, hour dist)
_CLASS_WEEKEND = {ClassLabel.Benign: 0.25, ClassLabel.Departed: 0.25,
                  ClassLabel.Leaker: 0.9, ClassLabel.Thief: 0.5,
                  ClassLabel.Saboteur: 0.9}
_CLASS_HOURS = {ClassLabel.Benign: _BENIGN_HOURS,
                ClassLabel.Departed: _BENIGN_HOURS,
                ClassLabel.Leaker: _hour_probs(0.45),
                ClassLabel.Thief: _hour_probs(0.30),
                ClassLabel.Saboteur: _hour_probs(0.50)}

# active-month multipliers on the per-kind base rates
_CLASS_KIND_MULT = {
    ClassLabel.Leaker: {"web": 1.1, "email": 1.2, "file": 1.6, "device": 1.8,
                        "logon": 1.0},
    ClassLabel.Thief: {"web": 1.15, "email": 1.15, "file": 1.0,
                       "device": 1.0, "logon": 1.0},
    ClassLabel.Saboteur: {"web": 1.2, "email": 1.0, "file": 1.5,
                          "device": 1.0, "logon": 1.0},
}

# sentiment shares (positive, negative) per kind for benign/active months
_BENIGN_MAIL_SENT = (0.06, 0.03)
_BENIGN_WEB_SENT = (0.05, 0.04)
_ACTIVE_MAIL_SENT = {ClassLabel.Leaker: (0.02, 0.18),
                     ClassLabel.Thief: (0.05, 0.06),
                     ClassLabel.Saboteur: (0.03, 0.12)}
_ACTIVE_WEB_SENT = {ClassLabel.Leaker: (0.04, 0.08),
                    ClassLabel.Thief: (0.05, 0.05),
                    ClassLabel.Saboteur: (0.04, 0.09)}

# additive share shifts for web destination pools during active months
_ACTIVE_WEB_SHIFT = {
    ClassLabel.Leaker: {"filesharing": 0.15},
    ClassLabel.Thief: {"jobsearch": 0.08, "competitor": 0.06},
    ClassLabel.Saboteur: {"malware": 0.17, "keylogger": 0.08},
}
_WEB_POOL_INDEX = {"neutral": 0, "webmail": 1, "jobsearch": 2,
                   "competitor": 3, "filesharing": 4, "malware": 5,
                   "keylogger": 6}

# additive share shifts for mail recipient pools during active months
_ACTIVE_MAIL_SHIFT = {
    ClassLabel.Leaker: {"filesharing": 0.12},
    ClassLabel.Thief: {"competitor": 0.17},
    ClassLabel.Saboteur: {},
}
_MAIL_POOL_INDEX = {"internal": 0, "competitor": 1, "webmail": 2,
                    "filesharing": 3}

# benign exe share of file accesses, and active-month overrides
_BENIGN_EXE_SHARE = 0.03
_ACTIVE_EXE_SHARE = {ClassLabel.Leaker: 0.05, ClassLabel.Thief: 0.03,
                     ClassLabel.Saboteur: 0.30}

_POST_DEPARTURE_RATE = 2.0  # unauthorized events per month, when flagged


def _shifted(base, shift_map, index_map, intensity):
    p = base.copy()
    for name, delta in shift_map.items():
        d = delta * intensity
        p[index_map[name]] += d
        p[0] -= d  # taken out of the neutral/internal share
    p = np.clip(p, 1e-6, None)
    return p / p.sum()


def _token(rng, length=6):
    letters = "abcdefghijklmnopqrstuvwxyz"
    idx = rng.integers(0, 26, size=length)
    return "".join(letters[i] for i in idx)


class _Assignments:
    """Deterministic employee roster, class labels and narrative windows."""

    def __init__(self, config, ss_roster, ss_assign):
        rng_roster = np.random.Generator(np.random.PCG64(ss_roster))
        rng = np.random.Generator(np.random.PCG64(ss_assign))
        n = config.n_employees

        first_pool = list(FIRST_NAMES_M + FIRST_NAMES_F)
        self.first = []
        self.gender = []
        for i in range(n):
            if rng_roster.random() < 0.05:
                name = FIRST_NAMES_UNLISTED[
                    rng_roster.integers(0, len(FIRST_NAMES_UNLISTED))]
                g = "U"
            else:
                name = first_pool[rng_roster.integers(0, len(first_pool))]
                g = "M" if name in FIRST_NAMES_M else "F"
            self.first.append(name)
            self.gender.append(g)
        self.last = [LAST_NAMES[rng_roster.integers(0, len(LAST_NAMES))]
                     for _ in range(n)]
        self.user_ids = [
            f"{self.first[i][0].upper()}{self.last[i][0].upper()}"
            f"{chr(65 + i % 26)}{i:04d}"
            for i in range(n)
        ]
        n_managers = max(1, n // 20)
        self.roles = ["Manager" if i < n_managers else
                      ROLES[rng_roster.integers(0, len(ROLES))]
                      for i in range(n)]
        self.supervisor = [None if i == 0 else
                           self.user_ids[0] if i < n_managers else
                           self.user_ids[int(rng_roster.integers(0, n_managers))]
                           for i in range(n)]

        counts = class_counts_exact(n, config.fractions)
        _largest_remainder_check(counts, n)
        n_threat = (counts[ClassLabel.Leaker] + counts[ClassLabel.Thief]
                    + counts[ClassLabel.Saboteur])
        # weighted threat-slot assignment (exponential-race trick): smaller
        # key = earlier pick; male employees race with the configured odds
        weights = np.array([config.threat_male_odds if g == "M" else 1.0
                            for g in self.gender])
        keys = rng.exponential(1.0, size=n) / weights
        order = np.argsort(keys, kind="stable")
        threat_ids = order[:n_threat]
        threat_ids = threat_ids[rng.permutation(n_threat)] if n_threat else threat_ids
        rest = order[n_threat:]
        rest = rest[rng.permutation(len(rest))]
        departed_ids = rest[:counts[ClassLabel.Departed]]

        self.clazz = [ClassLabel.Benign] * n
        cursor = 0
        for lab in (ClassLabel.Leaker, ClassLabel.Thief, ClassLabel.Saboteur):
            for idx in threat_ids[cursor:cursor + counts[lab]]:
                self.clazz[int(idx)] = lab
            cursor += counts[lab]
        for idx in departed_ids:
            self.clazz[int(idx)] = ClassLabel.Departed

        self.departure = {}
        self.unauthorized = set()
        self.window = {}
        nm = config.n_months
        for i in range(n):
            lab = self.clazz[i]
            if lab == ClassLabel.Departed:
                lo = max(0, nm // 6)
                hi = max(lo + 1, nm - 1)
                self.departure[i] = int(rng.integers(lo, hi))
                if rng.random() < config.unauthorized_fraction:
                    self.unauthorized.add(i)
            elif lab in (ClassLabel.Leaker, ClassLabel.Thief,
                         ClassLabel.Saboteur):
                length = int(rng.integers(1, 4))
                length = min(length, nm)
                start = int(rng.integers(0, nm - length + 1))
                self.window[i] = (start, length)

        # per-user activity level and per-kind jitter (benign heterogeneity;
        # the heavy tail is what floods single-indicator triage lists)
        self.user_mult = np.clip(
            rng.lognormal(0.0, 0.45, size=n), 0.3, 4.0)
        self.kind_jitter = {
            kind: np.clip(rng.lognormal(0.0, 0.2, size=n), 0.5, 2.0)
            for kind in sorted(DEFAULT_RATES)
        }

    def label(self, i, month):
        lab = self.clazz[i]
        if lab in (ClassLabel.Leaker, ClassLabel.Thief, ClassLabel.Saboteur):
            start, length = self.window[i]
            if start <= month < start + length:
                return lab
            return ClassLabel.Benign
        if lab == ClassLabel.Departed and month > self.departure[i]:
            return ClassLabel.Departed
        return ClassLabel.Benign


def _month_calendar(month_index):
    year = EPOCH_YEAR + month_index // 12
    month = month_index % 12 + 1
    ndays = days_in_month(year, month)
    weekend = np.array([
        Timestamp(year, month, d).weekday() >= 5
        for d in range(1, ndays + 1)
    ])
    return year, month, ndays, weekend


_POS = np.array(POSITIVE_WORDS)
_NEG = np.array(NEGATIVE_WORDS)
_NEU = np.array(NEUTRAL_WORDS)


def _contents(rng, total, n_words, pos_share, neg_share):
    """Sample `total` content strings of n_words each from the word pools."""
    if total == 0:
        return []
    mix = rng.multinomial(n_words, [pos_share, neg_share,
                                    1.0 - pos_share - neg_share], size=total)
    pos_idx = rng.integers(0, len(_POS), size=int(mix[:, 0].sum()))
    neg_idx = rng.integers(0, len(_NEG), size=int(mix[:, 1].sum()))
    neu_idx = rng.integers(0, len(_NEU), size=int(mix[:, 2].sum()))
    out = []
    p = q = r = 0
    for i in range(total):
        a, b, c = mix[i]
        words = []
        words.extend(_POS[pos_idx[p:p + a]])
        words.extend(_NEG[neg_idx[q:q + b]])
        words.extend(_NEU[neu_idx[r:r + c]])
        p += a
        q += b
        r += c
        out.append(" ".join(words))
    return out


def _event_times(rng, lam_day, weekend_mult, weekend, hour_p):
    """Counts per day -> sorted (day, hour, minute, second) arrays."""
    lam = np.where(weekend, lam_day * weekend_mult, lam_day)
    per_day = rng.poisson(lam)
    total = int(per_day.sum())
    if total == 0:
        return None
    days = np.repeat(np.arange(1, len(lam) + 1), per_day)
    hours = rng.choice(24, size=total, p=hour_p)
    minutes = rng.integers(0, 60, size=total)
    seconds = rng.integers(0, 60, size=total)
    order = np.lexsort((seconds, minutes, hours, days))
    return days[order], hours[order], minutes[order], seconds[order]


def _generate_user_month(rng, config, asg, i, month_index, sink):
    """Append (sortkey, kind, tail) tuples for one employee-month."""
    lab_month = asg.label(i, month_index)
    clazz = asg.clazz[i]
    active = (clazz in _CLASS_KIND_MULT
              and lab_month == clazz)
    year, month, ndays, weekend = _month_calendar(month_index)
    uid = asg.user_ids[i]
    pc = f"PC-{i:04d}"
    base_key = ((year * 12 + month - 1) * 32) * 86400

    def key_of(d, h, mi, s):
        return (base_key + int(d) * 86400 + int(h) * 3600
                + int(mi) * 60 + int(s))

    departed_gone = (clazz == ClassLabel.Departed
                     and month_index > asg.departure[i])
    if departed_gone:
        if i in asg.unauthorized:
            times = _event_times(rng, _POST_DEPARTURE_RATE / ndays, 1.0,
                                 weekend, _hour_probs(0.7))
            if times is not None:
                d, h, mi, s = times
                pick = rng.random(len(d))
                for j in range(len(d)):
                    stamp = (f"{month:02d}/{d[j]:02d}/{year:04d} "
                             f"{h[j]:02d}:{mi[j]:02d}:{s[j]:02d}")
                    if pick[j] < 0.6:
                        sink(key_of(d[j], h[j], mi[j], s[j]), "logon",
                             f"{stamp},{uid},{pc},Logon")
                    else:
                        sink(key_of(d[j], h[j], mi[j], s[j]), "device",
                             f"{stamp},{uid},{pc},Connect")
        return

    profile = clazz if active else ClassLabel.Benign
    weekend_mult = _CLASS_WEEKEND[profile]
    hour_p = _CLASS_HOURS[profile]
    kind_mult = _CLASS_KIND_MULT.get(profile, None) if active else None
    intensity = config.threat_intensity

    for kind in ("web", "email", "logon", "file", "device"):
        rate = (config.rates[kind] * asg.user_mult[i]
                * asg.kind_jitter[kind][i])
        if kind_mult is not None:
            boost = 1.0 + (kind_mult[kind] - 1.0) * intensity
            rate *= boost
        times = _event_times(rng, rate, weekend_mult, weekend, hour_p)
        if times is None:
            continue
        d, h, mi, s = times
        total = len(d)
        stamps = [
            f"{month:02d}/{d[j]:02d}/{year:04d} "
            f"{h[j]:02d}:{mi[j]:02d}:{s[j]:02d}"
            for j in range(total)
        ]

        if kind == "web":
            if active:
                shares = _shifted(_BENIGN_WEB_SHARES,
                                  _ACTIVE_WEB_SHIFT[clazz],
                                  _WEB_POOL_INDEX, intensity)
                ps, ns = _ACTIVE_WEB_SENT[clazz]
            else:
                shares = _BENIGN_WEB_SHARES
                ps, ns = _BENIGN_WEB_SENT
            pools = rng.choice(len(_WEB_POOLS), size=total, p=shares)
            texts = _contents(rng, total, WEB_WORDS, ps, ns)
            for j in range(total):
                pool = _WEB_POOLS[pools[j]]
                domain = pool[int(rng.integers(0, len(pool)))]
                url = f"http://{domain}/{_token(rng)}"
                sink(key_of(d[j], h[j], mi[j], s[j]), "web",
                     f"{stamps[j]},{uid},{pc},{url},{texts[j]}")
        elif kind == "email":
            if active:
                shares = _shifted(_BENIGN_MAIL_SHARES,
                                  _ACTIVE_MAIL_SHIFT[clazz],
                                  _MAIL_POOL_INDEX, intensity)
                ps, ns = _ACTIVE_MAIL_SENT[clazz]
            else:
                shares = _BENIGN_MAIL_SHARES
                ps, ns = _BENIGN_MAIL_SENT
            texts = _contents(rng, total, EMAIL_WORDS, ps, ns)
            sender = f"{uid}@{COMPANY_DOMAIN}"
            for j in range(total):
                n_to = 1 + int(rng.random() < 0.25)
                rcpt = []
                for _ in range(n_to):
                    pool = int(rng.choice(4, p=shares))
                    if pool == 0:
                        other = int(rng.integers(0, config.n_employees))
                        rcpt.append(
                            f"{asg.user_ids[other]}@{COMPANY_DOMAIN}")
                    elif pool == 1:
                        dom = COMPETITOR_DOMAINS[
                            int(rng.integers(0, len(COMPETITOR_DOMAINS)))]
                        rcpt.append(f"{_token(rng, 5)}@{dom}")
                    elif pool == 2:
                        dom = WEBMAIL_DOMAINS[
                            int(rng.integers(0, len(WEBMAIL_DOMAINS)))]
                        rcpt.append(f"{_token(rng, 5)}@{dom}")
                    else:
                        dom = FILESHARE_DOMAINS[
                            int(rng.integers(0, len(FILESHARE_DOMAINS)))]
                        rcpt.append(f"upload@{dom}")
                cc = ""
                if rng.random() < 0.15:
                    other = int(rng.integers(0, config.n_employees))
                    cc = f"{asg.user_ids[other]}@{COMPANY_DOMAIN}"
                size = int(min(max(rng.lognormal(8.5, 1.0), 200.0), 5e6))
                attachments = int(rng.poisson(0.3))
                sink(key_of(d[j], h[j], mi[j], s[j]), "email",
                     f"{stamps[j]},{uid},{pc},{';'.join(rcpt)},{cc},,"
                     f"{sender},{size},{attachments},{texts[j]}")
        elif kind == "file":
            exe_share = (_ACTIVE_EXE_SHARE[clazz] if active
                         else _BENIGN_EXE_SHARE)
            if active:
                exe_share = (_BENIGN_EXE_SHARE
                             + (exe_share - _BENIGN_EXE_SHARE) * intensity)
            texts = _contents(rng, total, FILE_CONTENT_WORDS, 0.02, 0.02)
            for j in range(total):
                if rng.random() < exe_share:
                    ext = "exe"
                else:
                    ext = FILE_EXTENSIONS[
                        int(rng.integers(0, len(FILE_EXTENSIONS)))]
                word = FILE_WORDS[int(rng.integers(0, len(FILE_WORDS)))]
                fname = f"{word}_{_token(rng, 4)}.{ext}"
                sink(key_of(d[j], h[j], mi[j], s[j]), "file",
                     f"{stamps[j]},{uid},{pc},{fname},{texts[j]}")
        elif kind == "logon":
            parity = 0
            for j in range(total):
                act = "Logon" if parity % 2 == 0 else "Logoff"
                parity += 1
                sink(key_of(d[j], h[j], mi[j], s[j]), "logon",
                     f"{stamps[j]},{uid},{pc},{act}")
        else:  # device
            parity = 0
            for j in range(total):
                act = "Connect" if parity % 2 == 0 else "Disconnect"
                parity += 1
                sink(key_of(d[j], h[j], mi[j], s[j]), "device",
                     f"{stamps[j]},{uid},{pc},{act}")


_KIND_ID_PREFIX = {"web": "W", "email": "E", "logon": "L", "file": "F",
                   "device": "D"}


def generate(config, out_dir):
    """Write the five activity CSVs, roster, truth and manifest.

    Returns the GroundTruth.  Byte-identical output for identical config
    (the seed is part of the config).
    """
    config.validate()
    os.makedirs(out_dir, exist_ok=True)

    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(config.n_employees + 2)
    asg = _Assignments(config, children[0], children[1])

    per_kind = {kind: [] for kind in CORPUS_FILES}

    for i in range(config.n_employees):
        rng = np.random.Generator(np.random.PCG64(children[2 + i]))

        def sink(key, kind, tail, i=i):
            per_kind[kind].append((key, i, tail))

        for m in range(config.n_months):
            _generate_user_month(rng, config, asg, i, m, sink)

    counts = {}
    for kind, rows in per_kind.items():
        rows.sort(key=lambda r: (r[0], r[1]))
        prefix = _KIND_ID_PREFIX[kind]
        path = os.path.join(out_dir, CORPUS_FILES[kind])
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(KIND_COLUMNS[kind]) + "\n")
            for serial, row in enumerate(rows, 1):
                fh.write(f"{{{prefix}{serial:08d}}},{row[2]}\n")
        counts[kind] = len(rows)

    _write_roster_file(os.path.join(out_dir, "roster.csv"), config, asg)
    truth = _build_truth(config, asg)
    write_truth(os.path.join(out_dir, "truth.csv"), truth)
    _write_manifest(os.path.join(out_dir, "manifest.txt"), config, truth,
                    counts)
    return truth


def _write_roster_file(path, config, asg):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROSTER_COLUMNS)
        for i in range(config.n_employees):
            end = asg.departure.get(i)
            writer.writerow([
                asg.user_ids[i], asg.first[i], asg.last[i], asg.roles[i],
                asg.supervisor[i] or "", "0",
                "" if end is None else str(end),
            ])


def _build_truth(config, asg):
    labels = {}
    for i in range(config.n_employees):
        for m in range(config.n_months):
            labels[(asg.user_ids[i], m)] = asg.label(i, m)
    return GroundTruth(
        labels=labels,
        employee_class={asg.user_ids[i]: asg.clazz[i]
                        for i in range(config.n_employees)},
        departures={asg.user_ids[i]: d for i, d in asg.departure.items()},
        windows={asg.user_ids[i]: w for i, w in asg.window.items()},
        unauthorized_users=frozenset(asg.user_ids[i]
                                     for i in asg.unauthorized),
        n_months=config.n_months,
    )


def write_truth(path, truth):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["user_id", "month", "label"])
        for (uid, month), lab in sorted(truth.labels.items()):
            writer.writerow([uid, str(month), ClassLabel(lab).name])


def read_truth(path):
    """truth.csv -> labels dict plus per-employee classes (threat wins)."""
    labels = {}
    per_user = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["user_id", "month", "label"]:
            raise TruthMismatch(f"bad truth header {header!r}")
        for row in reader:
            uid, month, name = row
            lab = ClassLabel[name]
            labels[(uid, int(month))] = lab
            seen = per_user.setdefault(uid, set())
            seen.add(lab)
    employee_class = {}
    months = max((m for (_, m) in labels), default=-1) + 1
    for uid, seen in per_user.items():
        threat = [lab for lab in seen if lab in
                  (ClassLabel.Leaker, ClassLabel.Thief, ClassLabel.Saboteur)]
        if threat:
            employee_class[uid] = threat[0]
        elif ClassLabel.Departed in seen:
            employee_class[uid] = ClassLabel.Departed
        else:
            employee_class[uid] = ClassLabel.Benign
    return GroundTruth(labels, employee_class, {}, {}, frozenset(), months)


def _write_manifest(path, config, truth, counts):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"employees {config.n_employees}\n")
        fh.write(f"months {config.n_months}\n")
        for kind in sorted(counts):
            fh.write(f"{kind} {counts[kind]}\n")
        for lab, c in truth.class_employee_counts().items():
            fh.write(f"class {lab.name} {c}\n")


def read_manifest(path):
    kinds = {}
    classes = {}
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "class":
                classes[ClassLabel[parts[1]]] = int(parts[2])
            elif parts[0] in CORPUS_FILES:
                kinds[parts[0]] = int(parts[1])
            else:
                meta[parts[0]] = int(parts[1])
    return meta, kinds, classes


def verify_truth(corpus_dir):
    """Recount the corpus and compare with the manifest; returns a summary."""
    manifest_path = os.path.join(corpus_dir, "manifest.txt")
    truth_path = os.path.join(corpus_dir, "truth.csv")
    if not (os.path.isfile(manifest_path) and os.path.isfile(truth_path)):
        raise IoFailure(f"{corpus_dir}: not a generated corpus directory")
    meta, kinds, classes = read_manifest(manifest_path)

    recounted = {}
    for kind, fname in CORPUS_FILES.items():
        path = os.path.join(corpus_dir, fname)
        if not os.path.isfile(path):
            raise IoFailure(f"missing {fname}")
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            recounted[kind] = sum(1 for _ in reader)
    for kind in CORPUS_FILES:
        if recounted[kind] != kinds.get(kind):
            raise TruthMismatch(
                f"{kind}: {recounted[kind]} events on disk, manifest says "
                f"{kinds.get(kind)}")

    truth = read_truth(truth_path)
    actual_classes = {lab: 0 for lab in ClassLabel}
    for lab in truth.employee_class.values():
        actual_classes[lab] += 1
    for lab in ClassLabel:
        if actual_classes[lab] != classes.get(lab, 0):
            raise TruthMismatch(
                f"{lab.name}: {actual_classes[lab]} employees in truth.csv, "
                f"manifest says {classes.get(lab, 0)}")
    if len(truth.employee_class) != meta.get("employees"):
        raise TruthMismatch("employee count mismatch")
    return {"events": recounted, "classes": actual_classes,
            "employees": len(truth.employee_class),
            "months": meta.get("months")}
