"""Geometric reasoner oracle tests, prompt templating and reply parsing."""

import itertools

import httpx
import numpy as np
import pytest

from shelfguide.guidance import CorrectionAdvice, CorrectionMode, correction_phrase, hop_vector
from shelfguide.reasoner import (
    AnswerSource,
    CellUnknown,
    EndpointConfig,
    EndpointError,
    GeometricReasoner,
    QueryKind,
    RemoteReasoner,
    SpatialQuery,
    TargetUnknown,
    UnparseableReply,
    build_prompt,
    geometric_correct,
    geometric_navigate,
    load_templates,
    parse_reply,
    remote_reason,
)

H_NAMES = ("far left", "left", "middle", "right", "far right")
V_NAMES = ("upper", "center", "lower")


def nav_query(bbox, frame=(1280, 720)):
    return SpatialQuery(
        kind=QueryKind.NAVIGATION, target_name="target", frame_size=frame, target_bbox=bbox
    )


def corr_query(touched, target):
    return SpatialQuery(
        kind=QueryKind.CORRECTION,
        target_name="target",
        target_cell=target,
        touched_name="touched",
        touched_cell=touched,
    )


class TestGeometricNavigate:
    def test_centered_target(self):
        answer = geometric_navigate(nav_query((600, 330, 80, 60)))
        assert answer.text == "middle, center"
        assert answer.source is AnswerSource.GEOMETRIC

    def test_bottom_right_target(self):
        answer = geometric_navigate(nav_query((1150, 600, 100, 100)))
        assert answer.text == "far right, lower"
        assert answer.parsed == ("far right", "lower")

    def test_top_left_corner(self):
        answer = geometric_navigate(nav_query((0, 0, 10, 10)))
        assert answer.text == "far left, upper"

    def test_unknown_target(self):
        with pytest.raises(TargetUnknown):
            geometric_navigate(nav_query(None))


class TestGeometricCorrect:
    def test_golden_phrase(self):
        answer = geometric_correct(corr_query(touched=(0, 4), target=(1, 2)))
        assert answer.text == "Two products to the left, one product down"

    def test_confirmation(self):
        answer = geometric_correct(corr_query(touched=(1, 1), target=(1, 1)))
        assert answer.parsed.mode is CorrectionMode.CONFIRMED

    def test_coarse(self):
        answer = geometric_correct(corr_query(touched=(0, 5), target=(0, 0)))
        assert answer.text == "far left"

    def test_missing_cells(self):
        query = SpatialQuery(
            kind=QueryKind.CORRECTION,
            target_name="t",
            touched_name="x",
            touched_cell=(0, 0),
            target_cell=None,
        )
        with pytest.raises(CellUnknown):
            geometric_correct(query)

    def test_query_invariants(self):
        with pytest.raises(ValueError):
            SpatialQuery(kind=QueryKind.CORRECTION, target_name="t")
        with pytest.raises(ValueError):
            SpatialQuery(kind=QueryKind.NAVIGATION, target_name="t", touched_cell=(0, 0))


class TestPrompts:
    def test_navigation_prompt_lists_all_15_labels(self):
        templates = load_templates()
        prompt = build_prompt(nav_query((0, 0, 5, 5)), templates)
        for h in H_NAMES:
            for v in V_NAMES:
                assert f"{h}, {v}" in prompt

    def test_correction_prompt_states_hop_boundary(self):
        templates = load_templates()
        prompt = build_prompt(corr_query((0, 0), (0, 1)), templates)
        assert "4 product types or fewer" in prompt
        assert "more than 4 product types" in prompt

    def test_prompt_is_deterministic(self):
        templates = load_templates()
        query = nav_query((10, 10, 20, 20))
        assert build_prompt(query, templates) == build_prompt(query, templates)

    def test_prompts_embed_fixed_examples(self):
        templates = load_templates()
        prompt = build_prompt(nav_query((0, 0, 5, 5)), templates)
        assert prompt.count("Example") == len(templates["navigation"]["examples"])


class TestParseReply:
    def test_zone_phrase_case_insensitive(self):
        assert parse_reply("Far right, lower") == ("far right", "lower")

    def test_zone_with_surrounding_prose(self):
        reply = "The target appears to be in the far right, lower region."
        assert parse_reply(reply) == ("far right", "lower")

    def test_fine_hop_phrase(self):
        advice = parse_reply("two products to the left, one product down")
        assert isinstance(advice, CorrectionAdvice)
        assert advice.hops == (-2, 1)
        assert advice.mode is CorrectionMode.FINE

    def test_digit_counts_accepted(self):
        advice = parse_reply("Move 2 products to the right")
        assert advice.hops == (2, 0)

    def test_coarse_descriptor(self):
        advice = parse_reply("the target is far left of you")
        assert advice.mode is CorrectionMode.COARSE
        assert advice.hops is None
        assert advice.phrase == "far left"

    def test_synonyms_normalized(self):
        assert parse_reply("middle, centre") == ("middle", "center")
        assert parse_reply("far-left, upper") == ("far left", "upper")

    def test_free_prose_rejected(self):
        with pytest.raises(UnparseableReply):
            parse_reply("somewhere on the shelf")

    def test_multiple_phrases_rejected(self):
        with pytest.raises(UnparseableReply):
            parse_reply("far left, upper or maybe far right, lower")

    def test_round_trip_on_all_zone_phrases(self):
        for h in H_NAMES:
            for v in V_NAMES:
                assert parse_reply(f"{h}, {v}") == (h, v)

    def test_round_trip_on_all_emittable_correction_phrases(self):
        cells = [(t, s) for t in range(3) for s in range(6)]
        for touched, target in itertools.product(cells, cells):
            advice = correction_phrase(hop_vector(touched, target))
            if advice.mode is CorrectionMode.FINE:
                parsed = parse_reply(advice.phrase)
                assert parsed.hops == advice.hops
                assert parsed.phrase == advice.phrase
            elif advice.mode is CorrectionMode.COARSE:
                parsed = parse_reply(advice.phrase)
                assert parsed.mode is CorrectionMode.COARSE
                assert parsed.phrase == advice.phrase
            else:
                parsed = parse_reply(advice.phrase)
                assert parsed.mode is CorrectionMode.CONFIRMED


def _endpoint():
    return EndpointConfig(url="https://model.example.org/v1/chat/completions",
                          model="test-model", api_key="sk-test")


def _chat_response(text):
    return {"choices": [{"message": {"content": text}}]}


def _image():
    return np.zeros((4, 4, 3), dtype=np.uint8)


class TestRemoteReason:
    def test_parses_model_reply(self):
        def handler(request):
            assert request.headers["authorization"] == "Bearer sk-test"
            import json

            body = json.loads(request.content)
            assert body["model"] == "test-model"
            parts = body["messages"][0]["content"]
            assert parts[0]["type"] == "text"
            assert parts[1]["image_url"]["url"].startswith("data:image/png;base64,")
            return httpx.Response(200, json=_chat_response("Far right, lower"))

        client = httpx.Client(transport=httpx.MockTransport(handler))
        answer = remote_reason("prompt", _image(), _endpoint(), client=client)
        assert answer.parsed == ("far right", "lower")
        assert answer.source is AnswerSource.REMOTE

    def test_unparseable_reply_raises(self):
        client = httpx.Client(
            transport=httpx.MockTransport(
                lambda request: httpx.Response(200, json=_chat_response("hmm, hard to say"))
            )
        )
        with pytest.raises(UnparseableReply):
            remote_reason("prompt", _image(), _endpoint(), client=client)

    def test_endpoint_error_after_two_retries(self):
        calls = []

        def handler(request):
            calls.append(1)
            return httpx.Response(503)

        client = httpx.Client(transport=httpx.MockTransport(handler))
        with pytest.raises(EndpointError):
            remote_reason("prompt", _image(), _endpoint(), client=client)
        assert len(calls) == 3  # first attempt + 2 retries

    def test_remote_reasoner_falls_back_to_geometric(self):
        client = httpx.Client(
            transport=httpx.MockTransport(lambda request: httpx.Response(500))
        )
        reasoner = RemoteReasoner(_endpoint(), client=client)
        query = SpatialQuery(
            kind=QueryKind.NAVIGATION,
            target_name="t",
            target_bbox=(1150, 600, 100, 100),
            image=_image(),
        )
        answer = reasoner.navigate(query)
        assert answer.source is AnswerSource.GEOMETRIC
        assert answer.text == "far right, lower"

    def test_remote_reasoner_uses_remote_answer_when_parseable(self):
        client = httpx.Client(
            transport=httpx.MockTransport(
                lambda request: httpx.Response(200, json=_chat_response("left, upper"))
            )
        )
        reasoner = RemoteReasoner(_endpoint(), client=client)
        query = SpatialQuery(
            kind=QueryKind.NAVIGATION,
            target_name="t",
            target_bbox=(0, 0, 10, 10),
            image=_image(),
        )
        answer = reasoner.navigate(query)
        assert answer.source is AnswerSource.REMOTE
        assert answer.parsed == ("left", "upper")

    def test_endpoint_config_from_env(self, monkeypatch):
        monkeypatch.delenv("SHELF_REASONER_URL", raising=False)
        assert EndpointConfig.from_env() is None
        monkeypatch.setenv("SHELF_REASONER_URL", "https://host/v1")
        monkeypatch.setenv("SHELF_REASONER_MODEL", "m1")
        monkeypatch.setenv("SHELF_REASONER_KEY", "k1")
        cfg = EndpointConfig.from_env()
        assert cfg == EndpointConfig(url="https://host/v1", model="m1", api_key="k1")
