"""Plain-language policy translation and auditable model selection.

Upward translation parses a controlled-vocabulary prompt into a policy
tuple (criterion, disparity threshold, privacy band, audited attributes,
performance floor, priority rule). Downward translation renders tuples
and frontier points back into fixed-template sentences; every sentence the
renderer can emit is parseable by the same lexicon, so translation round
trips. Selections are sealed in append-only, content-addressed contracts
that an auditor can re-verify from stored artifacts alone.
"""

import datetime
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources

from . import errors
from .canonical import digest_of
from .frontier import DISPARITY_FOR, Frontier, FrontierPoint

CONTRACT_VERSION = "contract-v1"
CRITERIA = ("DemographicParity", "EqualizedOdds", "EqualOpportunity")
PERF_METRICS = ("accuracy", "precision", "recall", "f1", "auc")
LEX_AXES = ("privacy", "fairness", "performance")

_NUMBER_WORDS = ["zero", "one", "two", "three", "four", "five",
                 "six", "seven", "eight", "nine", "ten"]
_WORD_TO_NUM = {w: i for i, w in enumerate(_NUMBER_WORDS)}


# ---------------------------------------------------------------------------
# lexicon


@dataclass(frozen=True)
class IntentLexicon:
    version: str
    fairness_intents: dict       # phrase -> criterion
    fairness_descriptors: dict   # word -> delta upper bound
    privacy_descriptors: dict    # phrase -> (low, high) epsilon band

    def __post_init__(self):
        for name, table in (("fairness_intents", self.fairness_intents),
                            ("fairness_descriptors", self.fairness_descriptors),
                            ("privacy_descriptors", self.privacy_descriptors)):
            vals = [tuple(v) if isinstance(v, (list, tuple)) else v
                    for v in table.values()]
            if len(set(vals)) != len(vals):
                raise errors.FairplaiError(f"{name} mapping is not injective")

    def band_descriptor(self, band):
        """Descriptor whose band equals `band` exactly, or None."""
        for word, (lo, hi) in self.privacy_descriptors.items():
            if math.isclose(lo, band[0]) and math.isclose(hi, band[1]):
                return word
        return None

    def band_containing(self, epsilon):
        for word, (lo, hi) in sorted(self.privacy_descriptors.items(),
                                     key=lambda kv: kv[1][0]):
            if lo <= epsilon <= hi:
                return word
        return None

    def delta_descriptor(self, delta):
        """Tightest descriptor admitting `delta`, or None if looser than all."""
        for word, bound in sorted(self.fairness_descriptors.items(),
                                  key=lambda kv: kv[1]):
            if delta <= bound + 1e-12:
                return word
        return None

    @staticmethod
    def load(path=None) -> "IntentLexicon":
        if path is None:
            raw = resources.files("fairplai").joinpath("lexicon.json").read_text()
        else:
            with open(path) as fh:
                raw = fh.read()
        d = json.loads(raw)
        return IntentLexicon(
            version=d["version"],
            fairness_intents=dict(d["fairness_intents"]),
            fairness_descriptors={k: float(v)
                                  for k, v in d["fairness_descriptors"].items()},
            privacy_descriptors={k: (float(v[0]), float(v[1]))
                                 for k, v in d["privacy_descriptors"].items()})


DEFAULT_LEXICON = IntentLexicon.load()


# ---------------------------------------------------------------------------
# policy tuple


@dataclass(frozen=True)
class PolicyTuple:
    criterion: str                     # F
    delta: float                       # max disparity
    epsilon_band: tuple                # (low, high)
    attributes: tuple                  # audited protected attributes
    metric: tuple                      # (name, minimum)
    pi: tuple = ("constraint_first",)  # or ("lexicographic", ax1, ax2, ax3)

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise errors.FairplaiError(f"unknown criterion {self.criterion!r}")
        if not (0.0 < self.delta <= 1.0):
            raise errors.DeltaOutOfRange(self.delta)
        lo, hi = self.epsilon_band
        if not (0.0 < lo <= hi):
            raise errors.FairplaiError(f"bad epsilon band [{lo}, {hi}]")
        if not self.attributes:
            raise errors.EmptyAttributeList()
        name, floor = self.metric
        if name not in PERF_METRICS:
            raise errors.FairplaiError(f"unknown performance metric {name!r}")
        if not (0.0 < floor <= 1.0):
            raise errors.FairplaiError(f"metric floor {floor} outside (0, 1]")
        if self.pi[0] == "lexicographic":
            if sorted(self.pi[1:]) != sorted(LEX_AXES):
                raise errors.FairplaiError(
                    "lexicographic order must name privacy, fairness and "
                    "performance exactly once")
        elif self.pi != ("constraint_first",):
            raise errors.FairplaiError(f"unknown priority policy {self.pi!r}")

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "delta": self.delta,
            "epsilon_band": list(self.epsilon_band),
            "attributes": list(self.attributes),
            "metric": {"name": self.metric[0], "minimum": self.metric[1]},
            "pi": {"kind": self.pi[0],
                   "order": list(self.pi[1:]) if len(self.pi) > 1 else None},
        }

    @staticmethod
    def from_dict(d: dict) -> "PolicyTuple":
        pi = (d["pi"]["kind"],) + tuple(d["pi"]["order"] or ())
        return PolicyTuple(
            criterion=d["criterion"], delta=float(d["delta"]),
            epsilon_band=tuple(float(x) for x in d["epsilon_band"]),
            attributes=tuple(d["attributes"]),
            metric=(d["metric"]["name"], float(d["metric"]["minimum"])),
            pi=pi)


@dataclass
class ParsedPolicy:
    """Partial tuple fields recovered from a prompt; None = unspecified."""
    criterion: str | None = None
    delta: float | None = None
    epsilon_band: tuple | None = None
    metric: tuple | None = None
    pi: tuple | None = None
    unmatched: tuple = ()


# ---------------------------------------------------------------------------
# upward translation

_FAIR_TEMPLATES = (
    (r"approval rates across groups will differ by no more than "
     r"([a-z0-9.]+) percentage points?", "DemographicParity"),
    (r"error rates across groups will differ by no more than "
     r"([a-z0-9.]+) percentage points?", "EqualizedOdds"),
    (r"qualified individuals will be approved at rates that differ across "
     r"groups by no more than ([a-z0-9.]+) percentage points?",
     "EqualOpportunity"),
)
_MEMBERSHIP_SENTENCE = ("An observer cannot confidently tell whether any "
                        "individual's data was included in training.")
_FAIR_TRIGGERS = ("fair", "equal", "parity", "outcome", "error rate",
                  "discriminat", "bias")
# band meaning "accept any epsilon, including non-private"
NO_PRIVACY_BAND = (1e-12, math.inf)


def _to_number(token: str) -> float:
    if token in _WORD_TO_NUM:
        return float(_WORD_TO_NUM[token])
    try:
        return float(token)
    except ValueError:
        raise errors.UnrecognizedIntent(token) from None


def _consume(text, mask, pattern):
    """Matches of `pattern` lying entirely in unconsumed text; marks them."""
    out = []
    for m in re.finditer(pattern, text):
        if any(mask[m.start():m.end()]):
            continue
        for i in range(m.start(), m.end()):
            mask[i] = True
        out.append(m)
    return out


def _clause_around(prompt, position):
    """The comma/period-delimited clause containing `position`."""
    seps = [0] + [m.end() for m in re.finditer(r"[,.;]", prompt)]
    start = max(s for s in seps if s <= position)
    ends = [m.start() for m in re.finditer(r"[,.;]", prompt) if m.start() >= position]
    end = ends[0] if ends else len(prompt)
    return prompt[start:end].strip()


def parse_policy_prompt(prompt: str,
                        lexicon: IntentLexicon = DEFAULT_LEXICON) -> ParsedPolicy:
    """Deterministic phrase matching; out-of-vocabulary fairness language is
    rejected with the offending span, never guessed at."""
    if not prompt or not prompt.strip():
        raise errors.FairplaiError("prompt is empty")
    text = prompt.lower()
    mask = [False] * len(text)
    parsed = ParsedPolicy()

    # downward fairness templates first (they subsume intent keywords)
    criteria, deltas = [], []
    for pattern, criterion in _FAIR_TEMPLATES:
        for m in _consume(text, mask, pattern):
            criteria.append(criterion)
            deltas.append(_to_number(m.group(1)) / 100.0)

    # fairness intent phrases, longest first
    for phrase in sorted(lexicon.fairness_intents, key=len, reverse=True):
        for _ in _consume(text, mask, r"\b" + re.escape(phrase) + r"\b"):
            criteria.append(lexicon.fairness_intents[phrase])
    if len(set(criteria)) > 1:
        raise errors.ConflictingDescriptors(
            f"multiple fairness criteria named: {sorted(set(criteria))}")
    if criteria:
        parsed.criterion = criteria[0]

    # privacy descriptors, longest first so "very strong" wins over "strong"
    bands = []
    words = sorted(lexicon.privacy_descriptors, key=len, reverse=True)
    alt = "|".join(re.escape(w) for w in words)
    for pattern in (rf"\b({alt}) privacy\b",
                    rf"\bprivacy protection is ({alt})\b"):
        for m in _consume(text, mask, pattern):
            bands.append(lexicon.privacy_descriptors[m.group(1)])
    for m in _consume(text, mask,
                      r"epsilon between (\d+(?:\.\d+)?) and (\d+(?:\.\d+)?)"):
        bands.append((float(m.group(1)), float(m.group(2))))
    for _ in _consume(text, mask, r"\bno privacy protection is required\b"):
        bands.append(NO_PRIVACY_BAND)
    if len(set(bands)) > 1:
        raise errors.ConflictingDescriptors(
            f"multiple privacy bands named: {sorted(set(bands))}")
    if bands:
        parsed.epsilon_band = bands[0]
    _consume(text, mask, re.escape(_MEMBERSHIP_SENTENCE.lower()))

    # fairness descriptors on whatever text privacy did not claim
    for word, bound in sorted(lexicon.fairness_descriptors.items()):
        for _ in _consume(text, mask, r"\b" + re.escape(word) + r"\b"):
            deltas.append(bound)
    if len(set(deltas)) > 1:
        raise errors.ConflictingDescriptors(
            f"multiple disparity thresholds named: {sorted(set(deltas))}")
    if deltas:
        parsed.delta = deltas[0]

    # performance floor
    metric_alt = "|".join(PERF_METRICS)
    floors = []
    for pattern in (rf"at least (\d+(?:\.\d+)?)\s*% ({metric_alt})\b",
                    rf"\b({metric_alt}) of at least (\d+(?:\.\d+)?)\s*%"):
        for m in _consume(text, mask, pattern):
            num, name = ((m.group(1), m.group(2))
                         if m.group(1)[0].isdigit() else (m.group(2), m.group(1)))
            floors.append((name, float(num) / 100.0))
    if len(set(floors)) > 1:
        raise errors.ConflictingDescriptors(
            f"multiple performance floors named: {sorted(set(floors))}")
    if floors:
        parsed.metric = floors[0]

    # priority policy
    pis = []
    for _ in _consume(text, mask, r"\bconstraint[ -]first\b"):
        pis.append(("constraint_first",))
    for m in _consume(text, mask,
                      r"\blexicographic\s*[:(]\s*([a-z]+(?:\s*,\s*[a-z]+)*)\s*\)?"):
        order = tuple(a.strip() for a in m.group(1).split(","))
        if sorted(order) != sorted(LEX_AXES):
            raise errors.UnrecognizedIntent(m.group(0))
        pis.append(("lexicographic",) + order)
    if len(set(pis)) > 1:
        raise errors.ConflictingDescriptors("multiple priority policies named")
    if pis:
        parsed.pi = pis[0]

    # boilerplate that downward rendering emits around the parseable parts
    for extra in (r"\bselected models must reach\b", r"\bpriority\b",
                  r"\bprivacy protection is limited\b",
                  r"\bmeets the 80% rule: (?:yes|no)\b"):
        _consume(text, mask, extra)

    # fairness-flavoured language that matched nothing is an error, not a guess
    if parsed.criterion is None:
        for trig in _FAIR_TRIGGERS:
            for m in re.finditer(re.escape(trig), text):
                if not any(mask[m.start():m.end()]):
                    raise errors.UnrecognizedIntent(_clause_around(prompt, m.start()))

    # report leftover clauses verbatim
    leftovers = []
    pos = 0
    for clause in re.split(r"[,.;]", prompt):
        span = range(pos, pos + len(clause))
        pos += len(clause) + 1
        if re.search(r"\w", clause) and not any(mask[i] for i in span
                                                if i < len(mask)):
            leftovers.append(clause.strip())
    parsed.unmatched = tuple(leftovers)
    return parsed


DEFAULT_DELTA = 0.05
DEFAULT_BAND = (0.5, 1.0)
DEFAULT_METRIC = ("accuracy", 0.70)
DEFAULT_PI = ("constraint_first",)


def construct_tuple(parsed: ParsedPolicy, attributes,
                    defaults: dict | None = None):
    """Complete a partial parse into a validated PolicyTuple.

    Every field except the fairness criterion has a declared default; the
    criterion is the central normative choice and is never defaulted.
    Returns (tuple, provenance) where provenance maps each field to
    "given" or "defaulted".
    """
    if parsed.criterion is None:
        raise errors.MissingCriterion()
    if not attributes:
        raise errors.EmptyAttributeList()
    d = {"delta": DEFAULT_DELTA, "epsilon_band": DEFAULT_BAND,
         "metric": DEFAULT_METRIC, "pi": DEFAULT_PI}
    if defaults:
        d.update(defaults)
    provenance = {"criterion": "given"}
    fields = {}
    for name in ("delta", "epsilon_band", "metric", "pi"):
        given = getattr(parsed, name)
        provenance[name] = "defaulted" if given is None else "given"
        fields[name] = d[name] if given is None else given
    tup = PolicyTuple(criterion=parsed.criterion,
                      delta=float(fields["delta"]),
                      epsilon_band=tuple(fields["epsilon_band"]),
                      attributes=tuple(attributes),
                      metric=tuple(fields["metric"]),
                      pi=tuple(fields["pi"]))
    return tup, provenance


# ---------------------------------------------------------------------------
# downward translation


def _pp_text(delta: float) -> str:
    pp = delta * 100.0
    if abs(pp - round(pp)) < 1e-9 and 0 <= round(pp) <= 10:
        return _NUMBER_WORDS[int(round(pp))]
    return f"{pp:g}"


_FAIR_SENTENCES = {
    "DemographicParity": ("Approval rates across groups will differ by no "
                          "more than {pp} percentage points."),
    "EqualizedOdds": ("Error rates across groups will differ by no more "
                      "than {pp} percentage points."),
    "EqualOpportunity": ("Qualified individuals will be approved at rates "
                         "that differ across groups by no more than {pp} "
                         "percentage points."),
}
_ACHIEVED_SENTENCES = {
    "dpd": "Approval rates across groups differ by {pp} percentage points.",
    "eo": "Error rates across groups differ by {pp} percentage points.",
    "eopp": ("Qualified individuals are approved at rates that differ "
             "across groups by {pp} percentage points."),
}


def _privacy_sentences(lexicon, band=None, epsilon=None):
    out = []
    if band is not None:
        word = lexicon.band_descriptor(band)
        if word is not None:
            out.append(f"Privacy protection is {word}.")
        elif math.isinf(band[1]):
            out.append("No privacy protection is required.")
        else:
            out.append(f"Privacy requirement is epsilon between "
                       f"{band[0]:g} and {band[1]:g}.")
        strong = band[1] <= 1.0 + 1e-12
    else:
        if math.isinf(epsilon):
            return ["This model was trained without privacy protection."]
        word = lexicon.band_containing(epsilon)
        if word is not None:
            out.append(f"Privacy protection is {word} (epsilon {epsilon:g}).")
        else:
            out.append(f"Privacy protection is limited (epsilon {epsilon:g}).")
        strong = epsilon <= 1.0 + 1e-12
    if strong:
        out.append(_MEMBERSHIP_SENTENCE)
    return out


def render_explanation(obj, lexicon: IntentLexicon = DEFAULT_LEXICON) -> str:
    """Fixed-template plain-language rendering of a PolicyTuple or an
    achieved FrontierPoint. Tuple renderings are parseable by
    parse_policy_prompt, so lexicon-band tuples round trip."""
    if isinstance(obj, PolicyTuple):
        parts = [_FAIR_SENTENCES[obj.criterion].format(pp=_pp_text(obj.delta))]
        parts.extend(_privacy_sentences(lexicon, band=obj.epsilon_band))
        name, floor = obj.metric
        parts.append(f"Selected models must reach at least "
                     f"{floor * 100.0:g}% {name}.")
        if obj.pi[0] == "lexicographic":
            parts.append(f"Priority: lexicographic({', '.join(obj.pi[1:])}).")
        else:
            parts.append("Priority: constraint first.")
        return " ".join(parts)

    if isinstance(obj, FrontierPoint):
        acc = obj.mean("accuracy") * 100.0
        parts = [f"This model reaches {acc:.1f}% accuracy."]
        disp = obj.mean(obj.disparity_metric)
        parts.append(_ACHIEVED_SENTENCES[obj.disparity_metric]
                     .format(pp=f"{disp * 100.0:.1f}"))
        parts.extend(_privacy_sentences(
            lexicon, epsilon=obj.certified_budget["epsilon"]))
        rule = "yes" if obj.mean("dir") >= 0.8 else "no"
        parts.append(f"Meets the 80% rule: {rule}.")
        return " ".join(parts)

    raise TypeError(f"cannot render {type(obj).__name__}")


# ---------------------------------------------------------------------------
# feasibility and selection


@dataclass
class CandidateSet:
    ids: tuple
    explanations: dict = field(default_factory=dict)  # id -> text
    diagnostics: dict = field(default_factory=dict)   # nearest miss when empty

    def to_dict(self) -> dict:
        return {"ids": list(self.ids), "explanations": dict(self.explanations),
                "diagnostics": dict(self.diagnostics)}


def _conditions(point: FrontierPoint, tup: PolicyTuple):
    """(fairness, privacy, performance) slack of a point against the tuple;
    slack 0 means the condition holds."""
    disparity = point.mean(DISPARITY_FOR[tup.criterion])
    fair = max(0.0, disparity - tup.delta)
    eps = point.certified_budget["epsilon"]
    lo, hi = tup.epsilon_band
    if math.isinf(eps):
        priv = 0.0 if math.isinf(hi) else math.inf
    elif eps < lo:
        priv = lo - eps
    elif eps > hi:
        priv = eps - hi
    else:
        priv = 0.0
    perf = max(0.0, tup.metric[1] - point.mean(tup.metric[0]))
    return fair, priv, perf


def filter_feasible(f: Frontier, tup: PolicyTuple,
                    lexicon: IntentLexicon = DEFAULT_LEXICON) -> CandidateSet:
    """Points satisfying all three conditions: disparity within delta,
    certified epsilon inside the band, performance at or above the floor."""
    missing = set(tup.attributes) - set(f.protected)
    if missing:
        raise errors.AttributeMismatch(
            f"tuple audits {sorted(missing)} but the frontier was built "
            f"over {sorted(f.protected)}")
    feasible, nearest = [], None
    for p in f.points:
        if p.status != "ok":
            continue
        fair, priv, perf = _conditions(p, tup)
        if fair <= 1e-12 and priv <= 1e-12 and perf <= 1e-12:
            feasible.append(p)
        else:
            total = fair + priv + perf
            if nearest is None or total < nearest[0]:
                nearest = (total, p, (fair, priv, perf))
    ids = tuple(p.point_id for p in feasible)
    explanations = {p.point_id: render_explanation(p, lexicon) for p in feasible}
    diagnostics = {}
    if not ids and nearest is not None:
        _, p, (fair, priv, perf) = nearest
        failed = [name for name, slack in
                  (("fairness", fair), ("privacy", priv), ("performance", perf))
                  if slack > 1e-12]
        diagnostics = {"nearest_point": p.point_id,
                       "fairness_slack": fair,
                       "privacy_slack": priv,
                       "performance_slack": perf,
                       "failed_conditions": failed}
    return CandidateSet(ids=ids, explanations=explanations,
                        diagnostics=diagnostics)


_LEX_TOLERANCE = 0.005


def _axis_value(point: FrontierPoint, axis: str, tup: PolicyTuple) -> float:
    """Lower is better on every axis (performance negated)."""
    if axis == "privacy":
        return point.certified_budget["epsilon"]
    if axis == "fairness":
        return point.mean(DISPARITY_FOR[tup.criterion])
    return -point.mean(tup.metric[0])


def select_model(cands: CandidateSet, f: Frontier, tup: PolicyTuple):
    """Pick one candidate under the tuple's priority policy.

    constraint_first maximizes the performance metric over the feasible
    set; lexicographic(order) compares axis by axis, a later axis breaking
    ties of earlier axes within 0.005. Final ties fall back to smaller
    epsilon, then smaller disparity, then point id. Returns
    (point id or None, rationale text)."""
    if not cands.ids:
        detail = (f" Nearest miss: point {cands.diagnostics['nearest_point']} "
                  f"fails {', '.join(cands.diagnostics['failed_conditions'])}."
                  if cands.diagnostics else "")
        return None, "No frontier point satisfies all three conditions." + detail
    points = [f.point(i) for i in cands.ids]

    def final_key(p):
        return (p.certified_budget["epsilon"],
                p.mean(DISPARITY_FOR[tup.criterion]), p.point_id)

    if tup.pi[0] == "constraint_first":
        best = max(p.mean(tup.metric[0]) for p in points)
        top = [p for p in points if p.mean(tup.metric[0]) == best]
        chosen = min(top, key=final_key)
        rationale = (f"constraint_first: maximized mean {tup.metric[0]} "
                     f"({best:.4f}) over {len(points)} feasible points; "
                     f"ties broken by epsilon, disparity, id.")
        return chosen.point_id, rationale

    order = tup.pi[1:]
    chosen = points[0]
    for q in points[1:]:
        better = None
        for axis in order:
            a, b = _axis_value(q, axis, tup), _axis_value(chosen, axis, tup)
            if abs(a - b) > _LEX_TOLERANCE or (math.isinf(a) != math.isinf(b)):
                better = a < b
                break
        if better is None:
            better = final_key(q) < final_key(chosen)
        if better:
            chosen = q
    rationale = (f"lexicographic({', '.join(order)}): axes compared in order "
                 f"with tolerance {_LEX_TOLERANCE}; ties broken by epsilon, "
                 f"disparity, id.")
    return chosen.point_id, rationale


# ---------------------------------------------------------------------------
# contracts


def issue_contract(tup: PolicyTuple, f: Frontier, cands: CandidateSet,
                   chosen, rationale: str, store,
                   lexicon: IntentLexicon = DEFAULT_LEXICON,
                   expected_digest: str | None = None):
    """Seal a selection in an append-only contract; returns (id, document).

    `expected_digest` is the frontier digest the caller decided against; a
    mismatch means the frontier changed under them and the selection is
    rejected rather than silently re-based."""
    digest = f.digest()
    if expected_digest is not None and expected_digest != digest:
        raise errors.StaleFrontier(
            f"selection was made against {expected_digest[:12]} but the "
            f"frontier is now {digest[:12]}")
    if chosen is not None and chosen not in cands.ids:
        raise errors.InfeasibleChoice(chosen)
    if chosen is None and cands.ids:
        raise errors.InfeasibleChoice(
            "no-selection contract but candidates exist")
    doc = {
        "format": CONTRACT_VERSION,
        "tuple": tup.to_dict(),
        "frontier_digest": digest,
        "feasible_ids": list(cands.ids),
        "diagnostics": dict(cands.diagnostics),
        "chosen_id": chosen,
        "rationale": rationale,
        "lexicon_version": lexicon.version,
        "created_at": datetime.datetime.now(datetime.timezone.utc)
                      .isoformat(timespec="seconds"),
    }
    contract_id = store.put_contract(doc)
    return contract_id, doc


def audit_contract(contract_id: str, store,
                   lexicon: IntentLexicon = DEFAULT_LEXICON) -> dict:
    """Re-verify a sealed selection from stored artifacts alone.

    Recomputes the contract digest, reloads the frontier by digest,
    re-runs feasibility and selection, and rechecks each recorded feasible
    point condition by condition. Value tampering yields a failed report;
    a missing model artifact raises MissingArtifact."""
    doc = store.get_contract(contract_id)
    checks = []

    def check(condition, passed, detail=""):
        checks.append({"condition": condition, "passed": bool(passed),
                       "detail": detail})
        return passed

    check("contract_digest", digest_of(doc) == contract_id)
    frontier = None
    try:
        fdoc = store.get_frontier_doc(doc["frontier_digest"])
        frontier = Frontier.from_dict(fdoc)
        check("frontier_digest", True)
    except (errors.UnknownFrontier, errors.CorruptFile) as exc:
        check("frontier_digest", False, str(exc))

    per_point = {}
    if frontier is not None:
        tup = PolicyTuple.from_dict(doc["tuple"])
        cands = filter_feasible(frontier, tup, lexicon)
        check("feasible_set",
              sorted(cands.ids) == sorted(doc["feasible_ids"]),
              f"recomputed {len(cands.ids)} vs recorded "
              f"{len(doc['feasible_ids'])}")
        chosen, _ = select_model(cands, frontier, tup)
        check("selection", chosen == doc["chosen_id"],
              f"recomputed {chosen!r} vs recorded {doc['chosen_id']!r}")
        for pid in doc["feasible_ids"]:
            try:
                fair, priv, perf = _conditions(frontier.point(pid), tup)
            except KeyError:
                per_point[pid] = {"fairness": False, "privacy": False,
                                  "performance": False}
                continue
            per_point[pid] = {"fairness": fair <= 1e-12,
                              "privacy": priv <= 1e-12,
                              "performance": perf <= 1e-12}
        if doc["chosen_id"] is not None:
            for ref in frontier.point(doc["chosen_id"]).model_refs:
                if not store.exists("models", ref):
                    raise errors.MissingArtifact(ref)
            check("model_artifacts", True)

    passed = (all(c["passed"] for c in checks)
              and all(all(v.values()) for v in per_point.values()))
    return {"contract_id": contract_id, "passed": passed,
            "checks": checks, "per_point": per_point}
