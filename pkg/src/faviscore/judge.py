"""LLM-as-judge preference ratings.

A judge sees a source sentence and two candidate translations and returns a
structured answer: a preference (``Candidate A``, ``Candidate B`` or
``No Preference``) plus free-text feedback that is stored but not scored.

Judging goes through a :class:`ReplayCache` first, so a run that has been
recorded once can be replayed with no network access. Live calls are made by
a *transport*: any callable ``(system_prompt, user_prompt) -> JudgeResponse``.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .core import EvaluationSetting, RatedItem, RatingLabel, SystemPair
from .errors import InvalidInput, MissingScore, TransportError, UnparseableResponse

logger = logging.getLogger(__name__)

SYSTEM_PROMPT = (
    "You act as an expert translator giving detailed feedback about candidate translations "
    "provided by users. Consider in particular the spelling, grammar, accuracy, and fluency of "
    "different translations. Make sure you give detailed information why one translation might "
    "be better than another."
)

USER_PROMPT_TEMPLATE = (
    "Please give feedback for the following translations:\n"
    "\n"
    "Original Sentence:\n"
    "{source}\n"
    "\n"
    "Candidate A:\n"
    "{hyp_a}\n"
    "\n"
    "Candidate B:\n"
    "{hyp_b}"
)

PREFERENCE_OPTIONS = ("Candidate A", "Candidate B", "No Preference")

_PREFERENCE_LABELS = {
    "Candidate A": RatingLabel.PLUS,
    "Candidate B": RatingLabel.MINUS,
    "No Preference": RatingLabel.EQUAL,
    # the judge occasionally answers with an empty preference
    "": RatingLabel.EQUAL,
}

FEEDBACK_FUNCTION = {
    "name": "submit_translation_feedback",
    "description": "Submit feedback on two candidate translations and state which one is preferred.",
    "parameters": {
        "type": "object",
        "properties": {
            "feedback_a": {"type": "string", "description": "Detailed feedback for Candidate A."},
            "feedback_b": {"type": "string", "description": "Detailed feedback for Candidate B."},
            "explanation": {"type": "string", "description": "Why one translation is better than the other."},
            "preference": {"type": "string", "enum": list(PREFERENCE_OPTIONS)},
        },
        "required": ["feedback_a", "feedback_b", "explanation", "preference"],
    },
}


@dataclass(frozen=True)
class JudgeRequest:
    item_id: str
    pair: SystemPair
    source_text: str
    candidate_a: str
    candidate_b: str

    def __post_init__(self) -> None:
        for name in ("source_text", "candidate_a", "candidate_b"):
            if not getattr(self, name):
                raise InvalidInput(f"judge request has an empty {name}", item=self.item_id, pair=str(self.pair))


@dataclass(frozen=True)
class JudgeResponse:
    preference_raw: str
    feedback_a: str = ""
    feedback_b: str = ""
    explanation: str = ""

    @classmethod
    def from_arguments(cls, args: Mapping[str, object]) -> "JudgeResponse":
        """Build from the argument object of a function call."""
        return cls(
            preference_raw=str(args.get("preference") or ""),
            feedback_a=str(args.get("feedback_a") or ""),
            feedback_b=str(args.get("feedback_b") or ""),
            explanation=str(args.get("explanation") or ""),
        )


Transport = Callable[[str, str], JudgeResponse]


def build_prompts(req: JudgeRequest) -> tuple[str, str]:
    user = USER_PROMPT_TEMPLATE.format(source=req.source_text, hyp_a=req.candidate_a, hyp_b=req.candidate_b)
    return SYSTEM_PROMPT, user


def parse_preference(resp: JudgeResponse) -> RatingLabel:
    raw = resp.preference_raw.strip()
    try:
        return _PREFERENCE_LABELS[raw]
    except KeyError:
        raise UnparseableResponse(f"unrecognised judge preference {resp.preference_raw!r}") from None


def symmetrize(ratings: Mapping[tuple[SystemPair, str], RatingLabel]) -> dict[tuple[SystemPair, str], RatingLabel]:
    """Derive ratings for flipped pairs by inverting those of the canonical order.

    Canonical order is lexicographic. Every non-canonical key in ``ratings`` is
    recomputed from its canonical twin, which must be present; canonical keys
    pass through unchanged and their flipped twins are added.
    """
    out: dict[tuple[SystemPair, str], RatingLabel] = {}
    for (pair, item), label in ratings.items():
        if pair.is_canonical:
            out[(pair, item)] = label
            out[(pair.swapped(), item)] = label.invert()
    for pair, item in ratings:
        if not pair.is_canonical and (pair, item) not in out:
            raise MissingScore(
                f"no rating for canonical ordering {pair.canonical()} of item {item!r}",
                item=item,
                pair=str(pair.canonical()),
            )
    return out


def cache_key(system_prompt: str, user_prompt: str) -> str:
    h = hashlib.sha256()
    h.update(system_prompt.encode("utf-8"))
    h.update(b"\x00")
    h.update(user_prompt.encode("utf-8"))
    return h.hexdigest()


class ReplayCache:
    """One JSON document per request, named by the hash of its prompts.

    Document fields: ``request`` (system and user prompt), ``preference``,
    ``feedback_a``, ``feedback_b``, ``explanation``.
    """

    def __init__(self, directory: os.PathLike[str] | str) -> None:
        self.directory = Path(directory)

    def path_for(self, system_prompt: str, user_prompt: str) -> Path:
        return self.directory / f"{cache_key(system_prompt, user_prompt)}.json"

    def get(self, system_prompt: str, user_prompt: str) -> Optional[JudgeResponse]:
        path = self.path_for(system_prompt, user_prompt)
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        return JudgeResponse(
            preference_raw=doc.get("preference", ""),
            feedback_a=doc.get("feedback_a", ""),
            feedback_b=doc.get("feedback_b", ""),
            explanation=doc.get("explanation", ""),
        )

    def put(self, system_prompt: str, user_prompt: str, resp: JudgeResponse) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path_for(system_prompt, user_prompt)
        doc = {
            "request": {"system_prompt": system_prompt, "user_prompt": user_prompt},
            "preference": resp.preference_raw,
            "feedback_a": resp.feedback_a,
            "feedback_b": resp.feedback_b,
            "explanation": resp.explanation,
        }
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                json.dump(doc, fh, ensure_ascii=False, indent=2, sort_keys=True)
                fh.write("\n")
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path


class OpenAIChatTransport:
    """Chat-completions endpoint with a forced function call.

    Works with any OpenAI-compatible server. ``temperature=None`` leaves the
    provider default in place; failed calls are not retried.
    """

    def __init__(
        self,
        model: str,
        api_key: str | None = None,
        base_url: str = "https://api.openai.com/v1",
        temperature: float | None = None,
        timeout: float = 60.0,
    ) -> None:
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("OPENAI_API_KEY", "")
        self.base_url = base_url.rstrip("/")
        self.temperature = temperature
        self.timeout = timeout

    def payload(self, system_prompt: str, user_prompt: str) -> dict:
        body: dict = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system_prompt},
                {"role": "user", "content": user_prompt},
            ],
            "tools": [{"type": "function", "function": FEEDBACK_FUNCTION}],
            "tool_choice": {"type": "function", "function": {"name": FEEDBACK_FUNCTION["name"]}},
        }
        if self.temperature is not None:
            body["temperature"] = self.temperature
        return body

    @staticmethod
    def parse_completion(data: Mapping) -> JudgeResponse:
        try:
            call = data["choices"][0]["message"]["tool_calls"][0]["function"]
            args = json.loads(call["arguments"])
        except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
            raise TransportError(f"malformed function-call response: {exc}") from exc
        return JudgeResponse.from_arguments(args)

    def __call__(self, system_prompt: str, user_prompt: str) -> JudgeResponse:
        import httpx

        try:
            r = httpx.post(
                f"{self.base_url}/chat/completions",
                json=self.payload(system_prompt, user_prompt),
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            r.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"judge request failed: {exc}") from exc
        return self.parse_completion(r.json())


def _fetch(req: JudgeRequest, transport: Transport | None, cache: ReplayCache | None) -> JudgeResponse:
    system_prompt, user_prompt = build_prompts(req)
    if cache is not None:
        hit = cache.get(system_prompt, user_prompt)
        if hit is not None:
            return hit
    if transport is None:
        raise TransportError("cache miss and no live transport configured", item=req.item_id, pair=str(req.pair))
    try:
        resp = transport(system_prompt, user_prompt)
    except TransportError as exc:
        raise exc.with_context(item=req.item_id, pair=str(req.pair))
    except Exception as exc:
        raise TransportError(f"transport failed: {exc}", item=req.item_id, pair=str(req.pair)) from exc
    if cache is not None:
        cache.put(system_prompt, user_prompt, resp)
    return resp


def judge_pair_over_testset(
    transport: Transport | None,
    requests: Sequence[JudgeRequest],
    cache: ReplayCache | None = None,
    max_workers: int = 1,
) -> list[RatingLabel]:
    """Judge every request and return labels in request order.

    Responses are written to ``cache`` as soon as they arrive, before parsing,
    so a later failure never loses paid-for answers.
    """
    if max_workers > 1 and len(requests) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            responses = list(pool.map(lambda r: _fetch(r, transport, cache), requests))
    else:
        responses = [_fetch(r, transport, cache) for r in requests]
    labels = []
    for req, resp in zip(requests, responses):
        try:
            labels.append(parse_preference(resp))
        except UnparseableResponse as exc:
            raise exc.with_context(item=req.item_id, pair=str(req.pair))
    logger.debug("judged %d items", len(labels))
    return labels


def judge_setting(
    transport: Transport | None,
    requests: Sequence[JudgeRequest],
    human: Mapping[str, RatingLabel],
    cache: ReplayCache | None = None,
    max_workers: int = 1,
) -> EvaluationSetting:
    """Judge one system pair and pair the labels with human ratings."""
    if not requests:
        raise InvalidInput("no judge requests")
    pairs = {r.pair for r in requests}
    if len(pairs) != 1:
        raise InvalidInput(f"requests span {len(pairs)} system pairs; judge one pair at a time")
    labels = judge_pair_over_testset(transport, requests, cache, max_workers)
    items = []
    for req, label in zip(requests, labels):
        if req.item_id not in human:
            raise MissingScore(f"no human rating for item {req.item_id!r}", item=req.item_id)
        items.append(RatedItem(req.item_id, human[req.item_id], label))
    return EvaluationSetting(requests[0].pair, tuple(items))

