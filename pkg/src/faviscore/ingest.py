"""Reading and writing preference, scalar, matrix and judge-request files.

Preference rows (CSV header or JSONL keys)::

    item_id, system_a, system_b, human, metric      labels: "+", "=", "-"

Scalar rows::

    item_id, system_id, [rater_id], score

Matrix documents (JSON)::

    {"pairs": [{"system_a": ..., "system_b": ..., "confusion": [[..],[..],[..]]}]}

Judge requests (JSONL)::

    item_id, system_a, system_b, source, candidate_a, candidate_b, [human]

CSV files are UTF-8, comma separated, double-quote escaped, LF terminated.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

from .core import ConfusionMatrix, EvaluationSetting, RatedItem, RatingLabel, SystemPair
from .derive import ScalarRatingTable, _check_score
from .errors import DataError, InvalidScore, OrderingConflict, ParseError
from .judge import JudgeRequest

Format = Literal["csv", "jsonl", "matrix"]

PREFERENCE_FIELDS = ("item_id", "system_a", "system_b", "human", "metric")
SCALAR_FIELDS = ("item_id", "system_id", "rater_id", "score")


def detect_format(path: str | Path, fmt: str | None = None) -> str:
    if fmt and fmt != "auto":
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    if suffix == ".json":
        return "matrix"
    raise ParseError(f"cannot infer format from extension {suffix!r}; pass --format", path=str(path))


def _field_text(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    return json.dumps(value)


def iter_rows(path: str | Path, fmt: str, required: Sequence[str]) -> Iterator[tuple[int, dict[str, str]]]:
    """Yield ``(line_number, row)`` with all ``required`` fields present."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ParseError("file not found", path=str(path)) from None
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text, newline=""))
        if reader.fieldnames is None:
            raise ParseError("missing CSV header row", path=str(path), line=1)
        missing = [f for f in required if f not in reader.fieldnames]
        if missing:
            raise ParseError(f"CSV header lacks column(s) {missing}", path=str(path), line=1)
        for row in reader:
            yield reader.line_num, {k: (v if v is not None else "") for k, v in row.items() if k is not None}
    elif fmt == "jsonl":
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=lineno) from None
            if not isinstance(obj, dict):
                raise ParseError("each JSONL line must be an object", path=str(path), line=lineno)
            missing = [f for f in required if f not in obj]
            if missing:
                raise ParseError(f"missing field(s) {missing}", path=str(path), line=lineno)
            yield lineno, {k: _field_text(v) for k, v in obj.items()}
    else:
        raise ParseError(f"unsupported row format {fmt!r}", path=str(path))


def _label(token: str, path: Path | str, line: int, field: str) -> RatingLabel:
    try:
        return RatingLabel.parse(token.strip())
    except ParseError as exc:
        raise ParseError(f"{field}: {exc.message}", path=str(path), line=line) from None


def _pair(a: str, b: str, path: Path | str, line: int) -> SystemPair:
    a, b = a.strip(), b.strip()
    if not a or not b:
        raise ParseError("empty system id", path=str(path), line=line)
    if a == b:
        raise ParseError(f"system_a and system_b are both {a!r}", path=str(path), line=line)
    return SystemPair(a, b)


def load_preferences(
    path: str | Path,
    fmt: str | None = None,
    symmetrize: bool = False,
) -> list[EvaluationSetting]:
    """One :class:`EvaluationSetting` per system pair, sorted by pair.

    A file holding both orderings of the same pair is rejected unless
    ``symmetrize`` is set, in which case every row is reoriented to the
    lexicographic ordering with its labels inverted.
    """
    fmt = detect_format(path, fmt)
    if fmt == "matrix":
        return load_confusions(path)
    groups: dict[SystemPair, dict[str, RatedItem]] = {}
    first_line: dict[SystemPair, int] = {}
    orderings: dict[frozenset[str], SystemPair] = {}
    for line, row in iter_rows(path, fmt, PREFERENCE_FIELDS):
        pair = _pair(row["system_a"], row["system_b"], path, line)
        item_id = row["item_id"].strip()
        if not item_id:
            raise ParseError("empty item_id", path=str(path), line=line)
        item = RatedItem(item_id, _label(row["human"], path, line, "human"), _label(row["metric"], path, line, "metric"))
        if symmetrize:
            if not pair.is_canonical:
                pair, item = pair.swapped(), item.inverted()
        else:
            seen = orderings.setdefault(pair.key(), pair)
            if seen != pair:
                raise OrderingConflict(
                    f"pair appears as both {seen} and {pair}; use symmetrization to merge",
                    file=str(path),
                    line=line,
                )
        bucket = groups.setdefault(pair, {})
        first_line.setdefault(pair, line)
        if item_id in bucket:
            raise ParseError(f"duplicate item {item_id!r} for pair {pair}", path=str(path), line=line)
        bucket[item_id] = item
    if not groups:
        raise ParseError("no preference rows", path=str(path))
    settings = []
    for pair in sorted(groups):
        try:
            settings.append(EvaluationSetting(pair, tuple(groups[pair].values())))
        except DataError as exc:
            raise exc.with_context(file=str(path), line=first_line[pair])
    return settings


def load_human_labels(path: str | Path, fmt: str | None = None) -> dict[SystemPair, dict[str, RatingLabel]]:
    """Human labels only, keyed by pair then item (the metric column is ignored)."""
    fmt = detect_format(path, fmt)
    out: dict[SystemPair, dict[str, RatingLabel]] = {}
    for line, row in iter_rows(path, fmt, ("item_id", "system_a", "system_b", "human")):
        pair = _pair(row["system_a"], row["system_b"], path, line)
        item_id = row["item_id"].strip()
        bucket = out.setdefault(pair, {})
        if item_id in bucket:
            raise ParseError(f"duplicate item {item_id!r} for pair {pair}", path=str(path), line=line)
        bucket[item_id] = _label(row["human"], path, line, "human")
    return out


def load_confusions(path: str | Path) -> list[EvaluationSetting]:
    """Aggregate-only input: each matrix becomes a setting with synthetic items."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError("file not found", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=str(path), line=exc.lineno) from None
    entries = doc.get("pairs") if isinstance(doc, dict) else None
    if not isinstance(entries, list):
        raise ParseError("matrix document needs a 'pairs' list", path=str(path))
    settings = []
    seen: set[frozenset[str]] = set()
    for idx, entry in enumerate(entries):
        try:
            pair = SystemPair(str(entry["system_a"]), str(entry["system_b"]))
            if pair.key() in seen:
                raise OrderingConflict(f"pair {pair} listed twice")
            seen.add(pair.key())
            settings.append(EvaluationSetting.from_confusion(pair, ConfusionMatrix.from_rows(entry["confusion"])))
        except DataError as exc:
            raise exc.with_context(file=str(path), entry=idx)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed pair entry: {exc}", path=str(path), entry=idx) from None
    if not settings:
        raise ParseError("no pairs in matrix document", path=str(path))
    return sorted(settings, key=lambda s: s.pair)


def preference_rows(settings: Iterable[EvaluationSetting]) -> list[dict[str, str]]:
    return [
        {
            "item_id": it.item_id,
            "system_a": s.pair.first,
            "system_b": s.pair.second,
            "human": it.human.value,
            "metric": it.metric.value,
        }
        for s in settings
        for it in s.items
    ]


def write_rows(rows: Sequence[dict[str, str]], fields: Sequence[str], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO(newline="")
        writer = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "jsonl":
        return "".join(json.dumps({f: r.get(f, "") for f in fields}, ensure_ascii=False) + "\n" for r in rows)
    raise ParseError(f"unsupported output format {fmt!r}")


def dump_preferences(settings: Iterable[EvaluationSetting], fmt: str = "csv") -> str:
    return write_rows(preference_rows(settings), PREFERENCE_FIELDS, fmt)


def load_scalars(path: str | Path, fmt: str | None = None) -> ScalarRatingTable:
    """Scores per (item, system); several raters of one output are averaged."""
    fmt = detect_format(path, fmt)
    seen: set[tuple[str, str, str]] = set()
    rows: list[tuple[str, str, float]] = []
    for line, row in iter_rows(path, fmt, ("item_id", "system_id", "score")):
        key = (row["item_id"].strip(), row["system_id"].strip(), row.get("rater_id", "").strip())
        if not key[0] or not key[1]:
            raise ParseError("empty item_id or system_id", path=str(path), line=line)
        if key in seen:
            raise ParseError(f"duplicate score for item {key[0]!r}, system {key[1]!r}, rater {key[2]!r}", path=str(path), line=line)
        seen.add(key)
        try:
            score = _check_score(row["score"])
        except InvalidScore as exc:
            raise exc.with_context(file=str(path), line=line)
        rows.append((key[0], key[1], score))
    return ScalarRatingTable.from_ratings(rows)


def load_judge_requests(path: str | Path) -> tuple[list[JudgeRequest], dict[SystemPair, dict[str, RatingLabel]]]:
    """Judge requests plus any human labels carried on the same rows."""
    requests: list[JudgeRequest] = []
    human: dict[SystemPair, dict[str, RatingLabel]] = {}
    fields = ("item_id", "system_a", "system_b", "source", "candidate_a", "candidate_b")
    for line, row in iter_rows(path, "jsonl", fields):
        pair = _pair(row["system_a"], row["system_b"], path, line)
        try:
            req = JudgeRequest(row["item_id"], pair, row["source"], row["candidate_a"], row["candidate_b"])
        except DataError as exc:
            raise exc.with_context(file=str(path), line=line)
        requests.append(req)
        if row.get("human"):
            human.setdefault(pair, {})[req.item_id] = _label(row["human"], path, line, "human")
    return requests, human
