"""Pattern-based extraction of numeric and trend claims from reasoning text.

The grammar is deliberately small: numbers (with thousands separators and
decimals), ISO / month-name / slash dates, a handful of English statistic and
trend keywords, and a token-overlap matcher that maps nearby words onto a
schema column. Anything outside it is ignored rather than guessed at.

Lexicons live in module-level tables (``MONTHS``, ``TREND_WORDS``,
``COLUMN_ALIASES`` ...) so other vocabularies can be plugged in by editing or
extending them.
"""
from __future__ import annotations

import datetime as dt
import enum
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

from ..schema import FeatureSchema, FeatureWindow


class ClaimKind(str, enum.Enum):
    POINT = "PointValue"
    EXTREMUM = "Extremum"
    AGGREGATE = "Aggregate"


class TrendKind(str, enum.Enum):
    INCREASE = "Increase"
    DECREASE = "Decrease"
    EXTREMUM_AT_DATE = "ExtremumAtDate"
    ABOVE_BELOW_AVERAGE = "AboveBelowAverage"
    HIGH_VARIABILITY = "HighVariability"
    LOW_VARIABILITY = "LowVariability"


class Scope(str, enum.Enum):
    WHOLE = "WholeWindow"
    FIRST_HALF = "FirstHalf"
    SECOND_HALF = "SecondHalf"
    DATE_RANGE = "DateRange"


@dataclass(frozen=True)
class NumericClaim:
    raw_span: str
    value: float
    start: int
    end: int
    decimals: int = 0
    hedged: bool = False
    unit_hint: str | None = None
    date_ref: dt.date | None = None
    column_ref: int | None = None
    claim_kind: ClaimKind = ClaimKind.POINT
    direction: str | None = None  # "max" / "min" for extrema
    statistic: str | None = None  # "mean" / "median" for aggregates
    # other columns the wording plausibly names ("screen time and unlock duration")
    alt_columns: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return _as_dict(self)


@dataclass(frozen=True)
class TrendClaim:
    raw_span: str
    column_ref: int | None
    trend_kind: TrendKind
    start: int
    end: int
    time_scope: Scope = Scope.WHOLE
    direction: str | None = None  # "max"/"min" or "above"/"below"
    date_ref: dt.date | None = None
    date_range: tuple[dt.date, dt.date] | None = None

    def to_dict(self) -> dict:
        return _as_dict(self)


def _as_dict(obj) -> dict:
    out = {}
    for k, v in obj.__dict__.items():
        if isinstance(v, enum.Enum):
            v = v.value
        elif isinstance(v, dt.date):
            v = v.isoformat()
        elif isinstance(v, tuple):
            v = [x.isoformat() if isinstance(x, dt.date) else x for x in v]
        out[k] = v
    return out


MONTHS = {
    "jan": 1, "january": 1, "feb": 2, "february": 2, "mar": 3, "march": 3, "apr": 4,
    "april": 4, "may": 5, "jun": 6, "june": 6, "jul": 7, "july": 7, "aug": 8, "august": 8,
    "sep": 9, "sept": 9, "september": 9, "oct": 10, "october": 10, "nov": 11,
    "november": 11, "dec": 12, "december": 12,
}
_MONTH_RE = r"(?:Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?|Sept?(?:ember)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)"
_ISO_DATE = re.compile(r"\b(\d{4})-(\d{1,2})-(\d{1,2})\b")
_MONTH_DAY = re.compile(
    rf"\b(?P<m>{_MONTH_RE})\.?\s+(?P<d>\d{{1,2}})(?:st|nd|rd|th)?\b(?:,?\s+(?P<y>\d{{4}})\b)?"
)
_DAY_MONTH = re.compile(
    rf"\b(?P<d>\d{{1,2}})(?:st|nd|rd|th)?\s+(?:of\s+)?(?P<m>{_MONTH_RE})\b(?:,?\s+(?P<y>\d{{4}})\b)?"
)
_SLASH_DATE = re.compile(r"(?<![\d/])(\d{1,2})/(\d{1,2})(?:/(\d{2}|\d{4}))?(?![\d/])")

_NUMBER = re.compile(r"(?<![\w.,])(\d{1,3}(?:,\d{3})+|\d+)(\.\d+)?")
_HEDGES = re.compile(r"\b(?:about|around|approximately|approx\.?|roughly|nearly|almost|over|under|~)\s*$", re.I)
_PERIOD_UNITS = {"day", "days", "week", "weeks", "month", "months", "night", "nights", "times", "hours of the day"}

UNIT_WORDS = {
    "minute": "minutes", "minutes": "minutes", "min": "minutes", "mins": "minutes",
    "hour": "hours", "hours": "hours", "hr": "hours", "hrs": "hours", "h": "hours",
    "second": "seconds", "seconds": "seconds", "sec": "seconds", "secs": "seconds",
    "meter": "meters", "meters": "meters", "metres": "meters", "metre": "meters", "m": "meters",
    "km": "kilometers", "kilometers": "kilometers", "kilometres": "kilometers",
    "mile": "miles", "miles": "miles",
    "step": "steps", "steps": "steps",
    "device": "devices", "devices": "devices",
    "episode": "episodes", "episodes": "episodes", "bouts": "episodes",
    "%": "percent", "percent": "percent",
}

MAX_WORDS = r"highest|maximum|max|peak|peaks|peaked|largest|longest|greatest|the\s+most"
MIN_WORDS = r"lowest|minimum|min|smallest|shortest|fewest|the\s+least"
AGG_WORDS = {"average": "mean", "averaged": "mean", "mean": "mean", "median": "median"}
_EXTREMUM_RE = re.compile(rf"\b(?:(?P<max>{MAX_WORDS})|(?P<min>{MIN_WORDS}))\b", re.I)
_AGG_RE = re.compile(r"\b(average|averaged|mean|median)\b", re.I)

TREND_WORDS: dict[TrendKind, str] = {
    TrendKind.INCREASE: r"increas(?:e|es|ed|ing)|r(?:ise|ises|ose|isen|ising)|gr(?:ew|ow|ows|owing)|climb(?:s|ed|ing)?|upward|went\s+up|trend(?:s|ed|ing)?\s+up",
    TrendKind.DECREASE: r"decreas(?:e|es|ed|ing)|declin(?:e|es|ed|ing)|dropp(?:ed|ing)|drops|f(?:ell|all|alls|alling)|downward|reduc(?:ed|ing|tion)|went\s+down|trend(?:s|ed|ing)?\s+down",
    TrendKind.HIGH_VARIABILITY: r"fluctuat(?:e|es|ed|ing|ion|ions)|variab(?:le|ility)|var(?:ies|ied|iation|iations)|inconsisten(?:t|cy|cies)|irregular(?:ity|ly)?|erratic|volatile|unstable|sporadic",
    TrendKind.LOW_VARIABILITY: r"consistent(?:ly)?|stable|steady|steadily|constant|uniform|little\s+variation",
}
_TREND_RES = {k: re.compile(rf"\b(?:{v})\b", re.I) for k, v in TREND_WORDS.items()}
_ABOVE_BELOW = re.compile(
    r"\b(?:(?P<above>above|higher\s+than|more\s+than|greater\s+than)|(?P<below>below|lower\s+than|less\s+than|fewer\s+than))"
    r"\s+(?:the\s+|their\s+|his\s+|her\s+|its\s+)?(?:average|mean|usual|normal|typical)\b",
    re.I,
)
_HYPOTHETICAL = re.compile(r"\b(?:an?|any|if|whether)\s+$", re.I)
_FIRST_HALF = re.compile(r"\b(?:first|early|earlier)\s+(?:half|part|two\s+weeks)\b", re.I)
_SECOND_HALF = re.compile(r"\b(?:second|latter|later|last)\s+(?:half|part|two\s+weeks)\b", re.I)

# words that carry no column identity
STOPWORDS = {
    "the", "a", "an", "of", "in", "on", "at", "to", "and", "or", "was", "were", "is", "are",
    "with", "for", "by", "as", "per", "day", "days", "daily", "this", "that", "their", "his",
    "her", "its", "individual", "individuals", "participant", "person", "s", "while",
    "average", "mean", "median", "highest", "lowest", "value", "values", "data", "e", "g",
}
# normalisation of inflections and synonyms onto schema vocabulary
TOKEN_MAP = {
    "asleep": "sleep", "slept": "sleep", "sleeping": "sleep", "sleeps": "sleep",
    "wake": "awake", "waking": "awake", "woke": "awake",
    "traveled": "travel", "travelled": "travel", "traveling": "travel", "travelling": "travel",
    "travels": "travel", "distances": "distance",
    "steps": "step", "walking": "step", "walked": "step",
    "unlocks": "unlock", "unlocked": "unlock", "unlocking": "unlock",
    "calls": "call", "calling": "call", "called": "call",
    "devices": "device", "minutes": "minute", "mins": "minute",
    "episodes": "episode", "bouts": "episode", "bout": "episode",
    "activity": "active", "activities": "active", "inactive": "sedentary",
    "screens": "screen", "usage": "screen", "entropies": "entropy",
    "homes": "home", "durations": "duration", "counts": "count",
}
# extra column vocabulary keyed by table label
COLUMN_ALIASES = {
    "total_distance_traveled(meters)": {"gps", "mobility"},
    "time_at_home(minutes)": {"home"},
    "incoming_call_duration(minutes)": {"received", "call"},
    "outgoing_call_duration(minutes)": {"placed", "made", "call"},
    "time_asleep(minutes)": {"sleep"},
    "time_awake_in_bed(minutes)": {"bed", "awake"},
    "bluetooth_devices_nearby": {"bluetooth", "device"},
}
MIN_COLUMN_SCORE = 1.0

_WORD_RE = re.compile(r"[A-Za-z]+")


def _norm(word: str) -> str:
    w = word.lower()
    return TOKEN_MAP.get(w, w)


def tokens(text: str) -> list[str]:
    return [t for t in (_norm(w) for w in _WORD_RE.findall(text)) if t not in STOPWORDS]


@dataclass(frozen=True)
class _ColumnIndex:
    vocab: tuple[frozenset, ...]
    weights: dict
    stems: tuple[str, ...]


@lru_cache(maxsize=32)
def _column_index(schema: FeatureSchema) -> _ColumnIndex:
    vocab = []
    for c in schema:
        words = set(tokens(c.stem)) | set(tokens(c.label.replace("_", " ")))
        words |= COLUMN_ALIASES.get(c.label, set())
        vocab.append(frozenset(words))
    n = len(vocab)
    df: dict[str, int] = {}
    for words in vocab:
        for w in words:
            df[w] = df.get(w, 0) + 1
    weights = {w: math.log((n + 1) / d) for w, d in df.items()}
    stems = tuple(c.stem.lower() for c in schema)
    return _ColumnIndex(tuple(vocab), weights, stems)


def match_column(context: str, schema: FeatureSchema) -> int | None:
    """Best-scoring column for ``context`` by weighted token overlap, or None.

    Returns None when nothing clears ``MIN_COLUMN_SCORE`` or the top score is tied.
    """
    index = _column_index(schema)
    ctx = set(tokens(context))
    if not ctx:
        return None
    scores = [sum(index.weights[w] for w in words & ctx) for words in index.vocab]
    best = max(scores)
    if best < MIN_COLUMN_SCORE:
        return None
    winners = [i for i, s in enumerate(scores) if s == best]
    return winners[0] if len(winners) == 1 else None


def candidate_columns(context: str, schema: FeatureSchema) -> tuple[int, ...]:
    """Columns the wording plausibly names, best first.

    An alternative must clear ``MIN_COLUMN_SCORE``, reach half the best score and
    match some word the best column did not; sharing "duration" is not enough.
    """
    index = _column_index(schema)
    ctx = set(tokens(context))
    hits = [words & ctx for words in index.vocab]
    scores = [sum(index.weights[w] for w in h) for h in hits]
    best = max(scores, default=0.0)
    if best < MIN_COLUMN_SCORE:
        return ()
    order = sorted(range(len(scores)), key=lambda i: -scores[i])
    top = hits[order[0]]
    return tuple(i for i in order if scores[i] >= MIN_COLUMN_SCORE and scores[i] >= best / 2
                 and (i == order[0] or hits[i] - top))


# -- segmentation ---------------------------------------------------------------

_SENTENCE_END = re.compile(r"(?<=[.!?])[\"')\]*]*\s+(?=[A-Z\"'(*\[])")
_BULLET_HEAD = re.compile(r"^\s*(?:[-*•]|\d+[.)])?\s*\**\s*([A-Za-z][^:*\n]{0,60}?)\s*\**\s*:")
_LIST_ORDINAL = re.compile(r"^\s*(?:\**\s*)?(\d{1,2})[.)](?=\s)")
_CLAUSE_SPLIT = re.compile(r"[;()]|,(?=\s)|\s(?:vs\.?|versus|while|whereas|but|compared\s+to)\s")


@dataclass
class _Sentence:
    start: int
    end: int
    text: str
    heading: str = ""

    def clauses(self, text: str | None = None) -> list[tuple[int, int]]:
        """Clause spans; pass a masked copy of the text so column names never split."""
        text = self.text if text is None else text
        bounds, last = [], 0
        for m in _CLAUSE_SPLIT.finditer(text):
            bounds.append((last, m.start()))
            last = m.end()
        bounds.append((last, len(self.text)))
        return [(self.start + a, self.start + b) for a, b in bounds]


_ITEM_START = re.compile(r"^\s*(?:[-*•]|\d+[.)]|#+)\s|^\s*\*\*")


def _blocks(reply: str) -> list[tuple[int, int]]:
    """Join soft-wrapped lines; a blank line or a new list item starts a block."""
    out: list[list[int]] = []
    pos = 0
    for line in reply.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        if not body.strip():
            out.append([pos + len(line), pos + len(line)])
        elif _ITEM_START.match(body) or not out or out[-1][0] == out[-1][1]:
            out.append([pos, pos + len(body)])
        else:
            out[-1][1] = pos + len(body)
        pos += len(line)
    return [(a, b) for a, b in out if b > a]


def _sentences(reply: str) -> list[_Sentence]:
    out = []
    for start, end in _blocks(reply):
        body = reply[start:end]
        head = _BULLET_HEAD.match(body)
        heading = head.group(1) if head else ""
        last = 0
        for m in list(_SENTENCE_END.finditer(body)) + [None]:
            stop = m.start() if m else len(body)
            chunk = body[last:stop]
            if chunk.strip():
                out.append(_Sentence(start + last, start + stop, chunk, heading))
            if m:
                last = m.end()
    return out


# -- dates ------------------------------------------------------------------------

@dataclass(frozen=True)
class _DateHit:
    start: int
    end: int
    date: dt.date


def _resolve_year(month: int, day: int, year: int | None, window: FeatureWindow | None):
    """Pick the year placing the date inside the window, else the first valid one."""
    if year is not None:
        years = [year]
    elif window is not None and window.dates:
        years = sorted({window.dates[0].year, window.dates[-1].year}, reverse=True)
    else:
        years = [2000]
    valid = []
    for y in years:
        try:
            valid.append(dt.date(y, month, day))
        except ValueError:
            pass
    inside = [d for d in valid if window is not None and window.row_of(d) is not None]
    return (inside or valid or [None])[0]


def find_dates(text: str, offset: int = 0, window: FeatureWindow | None = None) -> list[_DateHit]:
    hits: list[_DateHit] = []

    def add(m, month, day, year):
        if any(h.start < offset + m.end() and offset + m.start() < h.end for h in hits):
            return
        d = _resolve_year(month, day, year, window)
        if d is not None:
            hits.append(_DateHit(offset + m.start(), offset + m.end(), d))

    for m in _ISO_DATE.finditer(text):
        add(m, int(m.group(2)), int(m.group(3)), int(m.group(1)))
    for rx in (_MONTH_DAY, _DAY_MONTH):
        for m in rx.finditer(text):
            y = m.group("y")
            add(m, MONTHS[m.group("m").lower()], int(m.group("d")), int(y) if y else None)
    for m in _SLASH_DATE.finditer(text):
        y = m.group(3)
        if y and len(y) == 2:
            y = "20" + y
        add(m, int(m.group(1)), int(m.group(2)), int(y) if y else None)
    return sorted(hits, key=lambda h: h.start)


# -- numbers ----------------------------------------------------------------------

def _unit_after(text: str) -> str | None:
    m = re.match(r"\s*(%|[A-Za-z]+)", text)
    if not m:
        return None
    word = m.group(1).lower()
    if word in _PERIOD_UNITS:
        return "period"
    return UNIT_WORDS.get(word)


def _numbers(reply: str, s: _Sentence, masked: list[tuple[int, int]]):
    """Yield ``(start, end, value, decimals, unit, hedged)`` for claimable numbers."""
    for m in _NUMBER.finditer(s.text):
        a, b = s.start + m.start(), s.start + m.end()
        if any(x < b and a < y for x, y in masked):
            continue
        nxt = reply[b:b + 1]
        prev = reply[a - 1:a] if a else ""
        if nxt.isalpha() or (nxt == "-" and reply[b + 1:b + 2].isalpha()):
            continue  # 2nd, 24h, 2-week
        if prev == "-" and a >= 2 and reply[a - 2].isalpha():
            continue  # DSM-5, PHQ-4
        if prev == "(" and nxt == ")" and m.group(2) is None and int(m.group(1)) <= 20:
            continue  # (1) enumerations
        line_start = reply.rfind("\n", 0, a) + 1
        if _LIST_ORDINAL.match(reply[line_start:b + 2]) and reply[line_start:a].strip(" *") == "":
            continue  # "1. Physical Activity:"
        unit = _unit_after(reply[b:b + 24])
        if unit == "period":
            continue
        digits = m.group(1).replace(",", "")
        frac = m.group(2) or ""
        hedged = bool(_HEDGES.search(reply[max(line_start, a - 16):a]))
        yield a, b, float(digits + frac), max(len(frac) - 1, 0), unit, hedged


# -- extraction ------------------------------------------------------------------

def _mask_column_names(text: str, schema: FeatureSchema) -> str:
    """Blank out column names so words like 'average' inside them are not keywords."""
    low = text.lower()
    for stem in sorted(_column_index(schema).stems, key=len, reverse=True):
        low = low.replace(stem, " " * len(stem))
    return low


_LEAD = re.compile(r"^[\s\-*•]*(?:[^*\n]{1,80}\*\*\s*:\s*)?")


def _clean(span: str) -> str:
    """Drop bullet markers and a bold "**Heading**:" prefix."""
    return " ".join(_LEAD.sub("", span.strip()).split())


_EXAMPLE = re.compile(r"\b(?:e\.g\.|for example|for instance|such as)", re.I)
LOOKBACK = 80


def _lookback(text: str) -> str:
    """Text before a number that may hold its statistic keyword; examples are plain values."""
    text = text[-LOOKBACK:]
    cut = [m.end() for m in _EXAMPLE.finditer(text)]
    return text[cut[-1]:] if cut else text


# "5,000 steps on average" puts the statistic after the number
_TRAILING_AGG = re.compile(r"^[^\d.;:!?]{0,30}?\bon (?:an? )?(?:daily |weekly )?average\b")


def _clause_of(clauses, pos):
    for a, b in clauses:
        if a <= pos < b:
            return a, b
    return clauses[-1]


def _resolve_column(reply: str, schema: FeatureSchema, spans: list[tuple[int, int]], heading: str):
    """``(column, alternatives)`` from the first span (then the heading) naming any column."""
    texts = [reply[a:b] for a, b in spans] + ([heading] if heading else [])
    for text in texts:
        cands = candidate_columns(text, schema)
        if cands:
            col = match_column(text, schema)
            return col, tuple(c for c in cands if c != col)
    return None, ()


def _scope(text: str, dates: list[_DateHit]):
    if len(dates) >= 2 and re.search(r"\b(?:between|from)\b", text, re.I):
        return Scope.DATE_RANGE, (dates[0].date, dates[1].date)
    if _SECOND_HALF.search(text):
        return Scope.SECOND_HALF, None
    if _FIRST_HALF.search(text):
        return Scope.FIRST_HALF, None
    return Scope.WHOLE, None


def extract_claims(
    reply: str, schema: FeatureSchema, window: FeatureWindow | None = None
) -> tuple[list[NumericClaim], list[TrendClaim]]:
    """Extract numeric and trend claims; ``window`` resolves year-less dates."""
    numeric: list[NumericClaim] = []
    trends: list[TrendClaim] = []
    for s in _sentences(reply):
        dates = find_dates(s.text, s.start, window)
        masked = [(d.start, d.end) for d in dates]
        keyed = _mask_column_names(s.text, schema)
        clauses = s.clauses(keyed)
        nums = list(_numbers(reply, s, masked))

        # each date belongs to its clause; a date alone in its clause goes to the nearest number
        num_clause = {n[0]: _clause_of(clauses, n[0]) for n in nums}
        date_for: dict[int, dt.date] = {}
        for d in dates:
            cl = _clause_of(clauses, d.start)
            owners = [n[0] for n in nums if num_clause[n[0]] == cl]
            if not owners and nums:
                owners = [min(nums, key=lambda n: abs(n[0] - d.start))[0]]
            for o in owners:
                date_for.setdefault(o, d.date)

        ranging = re.search(r"\brang(?:e|es|ed|ing)\b", keyed) and len(nums) >= 2
        prev_end = s.start
        for k, (a, b, value, decimals, unit, hedged) in enumerate(nums):
            cl = num_clause[a]
            col, alts = _resolve_column(reply, schema, [cl, (s.start, s.end)], s.heading)
            window_text = _lookback(keyed[prev_end - s.start:a - s.start])
            kind, direction, stat = ClaimKind.POINT, None, None
            ext = list(_EXTREMUM_RE.finditer(window_text))
            agg = list(_AGG_RE.finditer(window_text))
            if ranging and k < 2:
                kind, direction = ClaimKind.EXTREMUM, ("min" if k == 0 else "max")
            elif ext or agg:
                last_ext = ext[-1].start() if ext else -1
                last_agg = agg[-1].start() if agg else -1
                if last_ext > last_agg:
                    kind = ClaimKind.EXTREMUM
                    direction = "max" if ext[-1].group("max") else "min"
                else:
                    kind, stat = ClaimKind.AGGREGATE, AGG_WORDS[agg[-1].group(1).lower()]
            trailing = _TRAILING_AGG.match(keyed[b - s.start:cl[1] - s.start])
            if kind is ClaimKind.POINT and trailing:
                kind, stat = ClaimKind.AGGREGATE, AGG_WORDS["average"]
            # a keyword after this number is not the next number's lookback
            prev_end = b + (trailing.end() if trailing else 0)
            claim = NumericClaim(
                raw_span=_clean(reply[cl[0]:cl[1]]),
                value=value, start=a, end=b, decimals=decimals, hedged=hedged,
                unit_hint=unit, date_ref=date_for.get(a), column_ref=col,
                claim_kind=kind, direction=direction, statistic=stat, alt_columns=alts,
            )
            numeric.append(claim)
            if kind is ClaimKind.EXTREMUM and claim.date_ref is not None and col is not None:
                trends.append(TrendClaim(
                    raw_span=claim.raw_span, column_ref=col,
                    trend_kind=TrendKind.EXTREMUM_AT_DATE, start=a, end=b,
                    direction=direction, date_ref=claim.date_ref,
                ))

        trends.extend(_trend_claims(reply, s, schema, keyed, dates, nums, clauses))
    return numeric, trends


def _trend_claims(reply, s, schema, keyed, dates, nums, clauses) -> list[TrendClaim]:
    out: list[TrendClaim] = []
    seen = set()

    def emit(kind, pos, end, **kw):
        cl = _clause_of(clauses, s.start + pos)
        col = _resolve_column(reply, schema, [cl, (s.start, s.end)], s.heading)[0]
        if col is None:
            return
        key = (col, kind, kw.get("time_scope"), kw.get("direction"), kw.get("date_ref"))
        if key in seen:
            return
        seen.add(key)
        out.append(TrendClaim(
            raw_span=_clean(reply[cl[0]:cl[1]]), column_ref=col, trend_kind=kind,
            start=s.start + pos, end=s.start + end, **kw,
        ))

    # extremum tied to a date with no number, e.g. "highest sleep time occurred on May 9"
    if not nums and dates:
        for m in _EXTREMUM_RE.finditer(keyed):
            emit(TrendKind.EXTREMUM_AT_DATE, m.start(), m.end(),
                 direction="max" if m.group("max") else "min", date_ref=dates[0].date)
            break

    for m in _ABOVE_BELOW.finditer(keyed):
        scope, rng = _scope(s.text, dates)
        own = [d for d in dates if _clause_of(clauses, d.start) == _clause_of(clauses, s.start + m.start())]
        date = (own or dates or [None])[0]
        if date is None and scope is Scope.WHOLE:
            continue
        emit(TrendKind.ABOVE_BELOW_AVERAGE, m.start(), m.end(),
             direction="above" if m.group("above") else "below",
             date_ref=date.date if date is not None and rng is None else None,
             time_scope=scope if date is None or rng is not None else Scope.WHOLE,
             date_range=rng)

    for kind, rx in _TREND_RES.items():
        for m in rx.finditer(keyed):
            if _HYPOTHETICAL.search(keyed[:m.start()]):
                continue
            if kind in (TrendKind.INCREASE, TrendKind.DECREASE):
                scope, rng = _scope(s.text, dates)
                emit(kind, m.start(), m.end(), time_scope=scope, date_range=rng)
            else:
                emit(kind, m.start(), m.end())
            break
    return out


__all__ = [
    "ClaimKind", "NumericClaim", "Scope", "TrendClaim", "TrendKind",
    "extract_claims", "find_dates", "match_column", "tokens",
]
