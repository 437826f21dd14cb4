"""Rule evaluation, the review queue, and the analyst labeling loop.

Rules fire on per-package evaluation contexts assembled from the three
analysis stages. A fired rule can be excluded (analyst judged that
signal benign for that package, that rule, or that author) without
touching the underlying analysis; a report whose every trigger is
excluded leaves the queue. Verdict labels are sticky: BENIGN records
exclusions and confirms the package, MALICIOUS confirms it and feeds
the known-malware list used by the metadata stage on later runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from pkgvet.errors import ConfigInvalidError, UnknownReportError
from pkgvet.rules.predicates import compile_predicate, empty_context

RULES_VERSION = "1"

STATUS_CLEAN = "CLEAN"
STATUS_FLAGGED = "FLAGGED"
STATUS_EXCLUDED = "EXCLUDED"
STATUS_CONFIRMED_MALICIOUS = "CONFIRMED_MALICIOUS"
STATUS_CONFIRMED_BENIGN = "CONFIRMED_BENIGN"

VERDICTS = ("MALICIOUS", "BENIGN")
SCOPES = ("coordinate", "rule", "author")


@dataclass(frozen=True)
class Rule:
    rule_id: str
    description: str
    predicate_text: str
    weight: float
    gray: bool
    predicate: object

    def to_dict(self) -> dict:
        return {
            "id": self.rule_id,
            "description": self.description,
            "predicate": self.predicate_text,
            "weight": self.weight,
            "gray": self.gray,
        }


class RuleSet:
    def __init__(self, rules):
        self.rules = tuple(rules)
        seen = set()
        for rule in self.rules:
            if rule.rule_id in seen:
                raise ConfigInvalidError(f"duplicate rule id {rule.rule_id!r}")
            seen.add(rule.rule_id)
        self.by_id = {r.rule_id: r for r in self.rules}

    @classmethod
    def from_doc(cls, doc) -> "RuleSet":
        if not isinstance(doc, list):
            raise ConfigInvalidError("rule config must be a JSON array")
        rules = []
        for i, row in enumerate(doc, 1):
            try:
                rule = Rule(
                    rule_id=str(row["id"]),
                    description=str(row.get("description", "")),
                    predicate_text=str(row["predicate"]),
                    weight=float(row.get("weight", 1.0)),
                    gray=bool(row.get("gray", False)),
                    predicate=compile_predicate(str(row["predicate"])),
                )
            except KeyError as exc:
                raise ConfigInvalidError(f"rule missing field {exc}", row=i) from exc
            except ConfigInvalidError as exc:
                raise ConfigInvalidError(f"rule {row.get('id', '?')}: {exc}", row=i) from exc
            if rule.weight < 0:
                raise ConfigInvalidError(f"rule {rule.rule_id}: negative weight", row=i)
            rules.append(rule)
        return cls(rules)

    @classmethod
    def load(cls, path=None) -> "RuleSet":
        if path is None:
            text = resources.files("pkgvet.configs").joinpath("rules_default.json").read_text(encoding="utf-8")
        else:
            text = Path(path).read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except ValueError as exc:
            raise ConfigInvalidError(f"rule config is not valid JSON: {exc}") from exc
        return cls.from_doc(doc)

    def evaluate(self, context: dict) -> list:
        """Rule ids that fire on this context, config order."""
        full = empty_context()
        full.update(context)
        return [r.rule_id for r in self.rules if r.predicate.evaluate(full)]


@dataclass(frozen=True)
class Exclusion:
    scope: str  # coordinate | rule | author
    target: str  # coordinate key or author name
    rule_id: str = ""  # rule scope only
    note: str = ""

    def to_dict(self) -> dict:
        return {"scope": self.scope, "target": self.target, "rule_id": self.rule_id, "note": self.note}

    def covers(self, coordinate: str, authors, rule_id: str) -> bool:
        if self.scope == "coordinate":
            return self.target == coordinate
        if self.scope == "rule":
            return self.target == coordinate and self.rule_id == rule_id
        return self.target in authors


class ExclusionLog:
    """Append-only. With a path, every entry also lands on disk as one
    JSON line, and an existing file is replayed on construction."""

    def __init__(self, path=None):
        self.path = Path(path) if path else None
        self.entries = []
        if self.path and self.path.exists():
            for line_no, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
                if not line.strip():
                    continue
                try:
                    doc = json.loads(line)
                    self.entries.append(Exclusion(
                        scope=doc["scope"], target=doc["target"],
                        rule_id=doc.get("rule_id", ""), note=doc.get("note", ""),
                    ))
                except (ValueError, KeyError) as exc:
                    raise ConfigInvalidError(f"exclusion log line {line_no}: {exc}") from exc

    def append(self, exclusion: Exclusion) -> None:
        if exclusion.scope not in SCOPES:
            raise ConfigInvalidError(f"unknown exclusion scope {exclusion.scope!r}")
        if exclusion in self.entries:
            return  # appending the same judgment twice changes nothing
        self.entries.append(exclusion)
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(exclusion.to_dict(), sort_keys=True) + "\n")


@dataclass
class Trigger:
    rule_id: str
    weight: float
    gray: bool
    excluded: bool = False

    def to_dict(self) -> dict:
        return {"rule_id": self.rule_id, "weight": self.weight, "gray": self.gray, "excluded": self.excluded}


@dataclass
class SuspicionReport:
    coordinate: str
    triggers: list
    status: str
    authors: tuple = ()
    amplified_downloads: int = 0
    release_time: str = ""  # ISO timestamp of the release itself

    @property
    def score(self) -> float:
        return sum(t.weight for t in self.triggers if not t.excluded)

    @property
    def non_gray_score(self) -> float:
        return sum(t.weight for t in self.triggers if not t.excluded and not t.gray)

    def rule_ids(self, include_excluded=False):
        return [t.rule_id for t in self.triggers if include_excluded or not t.excluded]

    def to_dict(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "status": self.status,
            "score": self.score,
            "non_gray_score": self.non_gray_score,
            "triggers": [t.to_dict() for t in self.triggers],
            "amplified_downloads": self.amplified_downloads,
            "release_time": self.release_time,
        }


def rank_key(report: SuspicionReport) -> tuple:
    """Hot stuff first: solid signal, then score, blast radius, recency.
    The coordinate tail pins a total order so exports never shuffle."""
    return (
        -report.non_gray_score,
        -report.score,
        -report.amplified_downloads,
        _reverse_text(report.release_time),
        report.coordinate,
    )


def _reverse_text(text: str) -> tuple:
    # newest first without float conversion: invert each character;
    # a missing stamp sorts after every real one
    if not text:
        return (1,)
    return tuple(-ord(c) for c in text)


class TriageEngine:
    """Holds evaluation contexts, rule results, exclusions, and verdicts."""

    def __init__(self, ruleset: RuleSet, exclusions: ExclusionLog = None):
        self.ruleset = ruleset
        self.exclusions = exclusions if exclusions is not None else ExclusionLog()
        self.contexts = {}  # coordinate -> context dict
        self.meta = {}  # coordinate -> {"authors": (...), "amplified": int, "release_time": str}
        self.verdicts = {}  # coordinate -> MALICIOUS | BENIGN
        self.reports = {}  # coordinate -> SuspicionReport
        self.revision = 0

    # --- evaluation ---

    def load_context(self, coordinate: str, context: dict, authors=(), amplified=0, release_time="") -> None:
        self.contexts[coordinate] = dict(context)
        self.meta[coordinate] = {
            "authors": tuple(authors),
            "amplified": int(amplified),
            "release_time": release_time,
        }

    def evaluate_all(self) -> None:
        self.reports = {}
        for coordinate in sorted(self.contexts):
            self.reports[coordinate] = self._evaluate_one(coordinate)
        self.revision += 1

    def _malicious_authors(self, except_coordinate: str) -> set:
        """Lowercased authors of every confirmed-malicious coordinate."""
        authors = set()
        for coord, verdict in self.verdicts.items():
            if verdict != "MALICIOUS" or coord == except_coordinate:
                continue
            authors.update(a.lower() for a in self.meta.get(coord, {}).get("authors", ()))
        return authors

    def _evaluate_one(self, coordinate: str) -> SuspicionReport:
        context = self.contexts[coordinate]
        meta = self.meta[coordinate]
        # confirmed-malicious verdicts act as known-malware records during
        # re-evaluation, so shared-author relations appear without re-analysis
        own = {a.lower() for a in meta["authors"]}
        if own and own & self._malicious_authors(coordinate):
            relations = frozenset(context.get("meta.relations", frozenset())) | {"SHARED_AUTHOR"}
            context = {**context, "meta.relations": relations}
        fired = self.ruleset.evaluate(context)
        triggers = []
        for rule_id in fired:
            rule = self.ruleset.by_id[rule_id]
            excluded = any(
                e.covers(coordinate, meta["authors"], rule_id) for e in self.exclusions.entries
            )
            triggers.append(Trigger(rule_id=rule_id, weight=rule.weight, gray=rule.gray, excluded=excluded))
        verdict = self.verdicts.get(coordinate)
        if verdict == "MALICIOUS":
            status = STATUS_CONFIRMED_MALICIOUS
        elif verdict == "BENIGN":
            status = STATUS_CONFIRMED_BENIGN
        elif not triggers:
            status = STATUS_CLEAN
        elif all(t.excluded for t in triggers):
            status = STATUS_EXCLUDED
        else:
            status = STATUS_FLAGGED
        return SuspicionReport(
            coordinate=coordinate,
            triggers=triggers,
            status=status,
            authors=meta["authors"],
            amplified_downloads=meta["amplified"],
            release_time=meta["release_time"],
        )

    # --- queue ---

    def queue(self, statuses=(STATUS_FLAGGED,), top=None) -> list:
        rows = [r for r in self.reports.values() if r.status in statuses]
        rows.sort(key=rank_key)
        return rows[:top] if top else rows

    def export_queue(self, statuses=(STATUS_FLAGGED,)) -> str:
        """Deterministic JSON: same state in, same bytes out."""
        rows = [r.to_dict() for r in self.queue(statuses=statuses)]
        return json.dumps({"queue": rows}, indent=2, sort_keys=True) + "\n"

    # --- labeling ---

    def apply_label(self, coordinate: str, verdict: str, scope: str = "coordinate",
                    rule_id: str = "", note: str = "") -> SuspicionReport:
        if coordinate not in self.reports:
            raise UnknownReportError(f"no report for {coordinate}")
        if verdict not in VERDICTS:
            raise ConfigInvalidError(f"unknown verdict {verdict!r}")
        if scope not in SCOPES:
            raise ConfigInvalidError(f"unknown exclusion scope {scope!r}")
        if scope == "rule":
            if not rule_id:
                raise ConfigInvalidError("rule scope needs a rule_id")
            if rule_id not in self.ruleset.by_id:
                raise ConfigInvalidError(f"unknown rule {rule_id!r}")
        self.verdicts[coordinate] = verdict
        if verdict == "BENIGN":
            if scope == "author":
                for author in self.meta[coordinate]["authors"]:
                    self.exclusions.append(Exclusion(scope="author", target=author, note=note))
            elif scope == "rule":
                self.exclusions.append(Exclusion(scope="rule", target=coordinate, rule_id=rule_id, note=note))
            else:
                self.exclusions.append(Exclusion(scope="coordinate", target=coordinate, note=note))
        self.evaluate_all()
        return self.reports[coordinate]

    def confirmed_malicious(self) -> list:
        return sorted(c for c, v in self.verdicts.items() if v == "MALICIOUS")

    # --- metrics ---

    def rule_stats(self) -> dict:
        """Per rule: how often it fired, and of those, how many landed on
        packages later confirmed malicious (tp) or benign (fp)."""
        stats = {r.rule_id: {"triggers": 0, "tp": 0, "fp": 0} for r in self.ruleset.rules}
        for report in self.reports.values():
            verdict = self.verdicts.get(report.coordinate)
            for trigger in report.triggers:
                row = stats[trigger.rule_id]
                row["triggers"] += 1
                if verdict == "MALICIOUS":
                    row["tp"] += 1
                elif verdict == "BENIGN":
                    row["fp"] += 1
        return stats
