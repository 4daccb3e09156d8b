from __future__ import annotations

import json
import threading
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from faviscore import EvaluationSetting, LABELS, RatingLabel, SystemPair
from faviscore.errors import InvalidInput, MissingScore, TransportError, UnparseableResponse
from faviscore.judge import (
    FEEDBACK_FUNCTION,
    SYSTEM_PROMPT,
    USER_PROMPT_TEMPLATE,
    JudgeRequest,
    JudgeResponse,
    OpenAIChatTransport,
    ReplayCache,
    build_prompts,
    cache_key,
    judge_pair_over_testset,
    judge_setting,
    parse_preference,
    symmetrize,
)

GOLDEN = Path(__file__).parent / "golden"
P, E, M = RatingLabel.PLUS, RatingLabel.EQUAL, RatingLabel.MINUS
AB = SystemPair("a", "b")


def request(i: int, pair: SystemPair = AB) -> JudgeRequest:
    return JudgeRequest(f"i{i}", pair, f"Quelle {i}", f"hyp A {i}", f"hyp B {i}")


class ScriptedJudge:
    """Answers from a fixed list and counts calls."""

    def __init__(self, answers):
        self.answers = list(answers)
        self.calls = 0
        self._lock = threading.Lock()

    def __call__(self, system_prompt, user_prompt):
        with self._lock:
            answer = self.answers[self.calls]
            self.calls += 1
        return JudgeResponse(answer, "fa", "fb", "why")


def test_system_prompt_golden():
    assert SYSTEM_PROMPT == (GOLDEN / "system_prompt.txt").read_text(encoding="utf-8")


def test_user_prompt_golden():
    assert USER_PROMPT_TEMPLATE == (GOLDEN / "user_prompt.txt").read_text(encoding="utf-8")


def test_build_prompts_fills_template():
    system, user = build_prompts(JudgeRequest("x", AB, "src", "one", "two"))
    assert system == SYSTEM_PROMPT
    assert user == "Please give feedback for the following translations:\n\nOriginal Sentence:\nsrc\n\nCandidate A:\none\n\nCandidate B:\ntwo"


def test_braces_in_text_survive():
    _, user = build_prompts(JudgeRequest("x", AB, "{hyp_a}", "{}", "{source}"))
    assert "Original Sentence:\n{hyp_a}\n" in user and user.endswith("Candidate B:\n{source}")


@pytest.mark.parametrize(
    "raw, label",
    [("Candidate A", P), ("Candidate B", M), ("No Preference", E), ("", E), ("  Candidate A\n", P)],
)
def test_parse_preference(raw, label):
    assert parse_preference(JudgeResponse(raw)) is label


@pytest.mark.parametrize("raw", ["candidate a", "Candidate C", "A", "Both"])
def test_parse_rejects_unknown(raw):
    with pytest.raises(UnparseableResponse):
        parse_preference(JudgeResponse(raw))


def test_empty_request_fields_rejected():
    with pytest.raises(InvalidInput):
        JudgeRequest("x", AB, "", "a", "b")


def test_symmetrize_adds_flipped():
    out = symmetrize({(AB, "i1"): P, (AB, "i2"): E})
    assert out[(AB.swapped(), "i1")] is M
    assert out[(AB.swapped(), "i2")] is E
    assert len(out) == 4


def test_symmetrize_overrides_non_canonical():
    out = symmetrize({(AB, "i1"): P, (AB.swapped(), "i1"): P})
    assert out[(AB.swapped(), "i1")] is M


def test_symmetrize_needs_canonical_twin():
    with pytest.raises(MissingScore):
        symmetrize({(AB.swapped(), "i1"): P})


@given(st.dictionaries(st.tuples(st.sampled_from(["a", "b", "c"]), st.sampled_from(["a", "b", "c"]), st.text(max_size=3)),
                       st.sampled_from(LABELS), max_size=12))
def test_symmetrize_idempotent(raw):
    ratings = {(SystemPair(a, b), i): lab for (a, b, i), lab in raw.items() if a < b}
    once = symmetrize(ratings)
    assert symmetrize(once) == once
    for (pair, item), label in once.items():
        assert once[(pair.swapped(), item)] is label.invert()


def test_cache_key_separates_prompts():
    assert cache_key("ab", "c") != cache_key("a", "bc")
    assert len(cache_key("s", "u")) == 64


def test_cache_round_trip(tmp_path):
    cache = ReplayCache(tmp_path / "cache")
    resp = JudgeResponse("Candidate B", "gut", "schlecht", "weil")
    path = cache.put("sys", "usr", resp)
    assert path.name == cache_key("sys", "usr") + ".json"
    assert cache.get("sys", "usr") == resp
    assert cache.get("sys", "other") is None
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["request"] == {"system_prompt": "sys", "user_prompt": "usr"}
    assert not list((tmp_path / "cache").glob("*.tmp"))


def test_cache_miss_without_transport(tmp_path):
    with pytest.raises(TransportError) as info:
        judge_pair_over_testset(None, [request(0)], ReplayCache(tmp_path))
    assert info.value.context["item"] == "i0"


def test_live_then_replay(tmp_path):
    reqs = [request(i) for i in range(4)]
    judge = ScriptedJudge(["Candidate A", "Candidate B", "No Preference", ""])
    cache = ReplayCache(tmp_path)
    first = judge_pair_over_testset(judge, reqs, cache)
    assert first == [P, M, E, E] and judge.calls == 4
    assert judge_pair_over_testset(None, reqs, cache) == first


def test_parallel_preserves_order(tmp_path):
    reqs = [request(i) for i in range(20)]
    answers = ["Candidate A" if i % 3 else "Candidate B" for i in range(20)]
    by_prompt = {build_prompts(r)[1]: a for r, a in zip(reqs, answers)}

    def transport(system_prompt, user_prompt):
        return JudgeResponse(by_prompt[user_prompt])

    labels = judge_pair_over_testset(transport, reqs, ReplayCache(tmp_path), max_workers=4)
    assert labels == [P if a == "Candidate A" else M for a in answers]


def test_response_cached_before_parse_failure(tmp_path):
    cache = ReplayCache(tmp_path)
    with pytest.raises(UnparseableResponse):
        judge_pair_over_testset(ScriptedJudge(["Maybe"]), [request(0)], cache)
    assert cache.get(*build_prompts(request(0))).preference_raw == "Maybe"


def test_transport_exception_wrapped():
    def broken(system_prompt, user_prompt):
        raise RuntimeError("boom")

    with pytest.raises(TransportError, match="boom"):
        judge_pair_over_testset(broken, [request(0)])


def test_judge_setting_replay(tmp_path):
    reqs = [request(i) for i in range(3)]
    cache = ReplayCache(tmp_path)
    for r, answer in zip(reqs, ["Candidate A", "No Preference", "Candidate B"]):
        cache.put(*build_prompts(r), JudgeResponse(answer))
    s = judge_setting(None, reqs, {"i0": P, "i1": P, "i2": M}, cache)
    assert isinstance(s, EvaluationSetting)
    assert s.confusion.as_lists() == [[1, 1, 0], [0, 0, 0], [0, 0, 1]]


def test_judge_setting_checks():
    with pytest.raises(InvalidInput):
        judge_setting(None, [], {})
    with pytest.raises(InvalidInput):
        judge_setting(None, [request(0), request(1, SystemPair("a", "c"))], {})
    with pytest.raises(MissingScore):
        judge_setting(ScriptedJudge(["Candidate A"]), [request(0)], {})


def test_openai_payload():
    t = OpenAIChatTransport("gpt-test", api_key="k", base_url="http://localhost:1/v1/")
    body = t.payload("S", "U")
    assert body["messages"] == [{"role": "system", "content": "S"}, {"role": "user", "content": "U"}]
    assert body["tools"][0]["function"] is FEEDBACK_FUNCTION
    assert body["tool_choice"]["function"]["name"] == "submit_translation_feedback"
    assert "temperature" not in body
    assert OpenAIChatTransport("m", api_key="k", temperature=0.0).payload("S", "U")["temperature"] == 0.0
    assert t.base_url == "http://localhost:1/v1"


def test_openai_parse_completion():
    args = {"preference": "Candidate B", "feedback_a": "x", "feedback_b": "y", "explanation": "z"}
    data = {"choices": [{"message": {"tool_calls": [{"function": {"name": "f", "arguments": json.dumps(args)}}]}}]}
    assert OpenAIChatTransport.parse_completion(data) == JudgeResponse("Candidate B", "x", "y", "z")
    with pytest.raises(TransportError):
        OpenAIChatTransport.parse_completion({"choices": []})
    bad = {"choices": [{"message": {"tool_calls": [{"function": {"arguments": "{not json"}}]}}]}
    with pytest.raises(TransportError):
        OpenAIChatTransport.parse_completion(bad)
