import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contractgraph.errors import ConfigError
from contractgraph.guards import (
    DEFAULT_ALLOW_LIST,
    AllowList,
    advance_stopper,
    json_stop_index,
    stopper_state,
    token_allowed,
)
from graphgen import random_embedded_object_case


class TestJsonStopIndex:
    def test_stops_after_first_object(self):
        prompt = "Extract the graph: "
        text = prompt + '{"a":1} and more'
        assert json_stop_index(text, len(prompt)) == len(prompt) + len('{"a":1}')

    def test_brace_inside_string_ignored(self):
        prompt = "p"
        text = prompt + '{"a":"}"}'
        assert json_stop_index(text, len(prompt)) == len(text)

    def test_incomplete_object_has_no_stop(self):
        assert json_stop_index('{"a":', 0) is None

    def test_prompt_braces_excluded(self):
        prompt = 'respond as {"nodes": []} would: '
        text = prompt + '{"x":2}'
        assert json_stop_index(text, len(prompt)) == len(text)

    def test_escaped_quote_inside_string(self):
        text = '{"a":"\\"}"}'
        assert json_stop_index(text) == len(text)

    def test_leading_chatter_skipped(self):
        text = 'sure thing! here is [] the answer {"a": [1, {"b": 2}]} done'
        stop = json_stop_index(text)
        assert text[:stop].endswith('{"a": [1, {"b": 2}]}')

    def test_prompt_length_beyond_text_raises(self):
        with pytest.raises(ValueError):
            json_stop_index("abc", 4)

    def test_prefix_stability(self):
        text = 'x{"a":1}'
        stop = json_stop_index(text, 1)
        for extra in ("", "}", '{"b":2}', " trailing"):
            assert json_stop_index(text + extra, 1) == stop

    def test_incremental_matches_batch(self):
        rng = random.Random(5)
        text = 'noise {"k": ["v", {"n": 1}]} tail'
        whole = json_stop_index(text)
        for _ in range(50):
            state = stopper_state(0)
            cursor = 0
            while cursor < len(text):
                step = rng.randint(1, 5)
                state = advance_stopper(state, text[cursor : cursor + step])
                cursor += step
            assert state.stop == whole


def test_thousand_case_chunking_property():
    rng = random.Random(2024)
    for _ in range(1000):
        text, prompt_length, expected = random_embedded_object_case(rng)
        assert json_stop_index(text, prompt_length) == expected
        state = stopper_state(prompt_length)
        cursor = prompt_length
        while cursor < len(text):
            step = rng.randint(1, 7)
            state = advance_stopper(state, text[cursor : cursor + step])
            cursor += step
        assert state.stop == expected


class TestTokenAllowed:
    def test_json_punctuation_allowed(self):
        assert token_allowed('{"')

    def test_accented_character_rejected(self):
        assert not token_allowed("é")

    def test_space_and_digits_allowed(self):
        assert token_allowed(" 30")

    def test_empty_token_rejected(self):
        assert not token_allowed("")

    def test_control_byte_rejected(self):
        assert not token_allowed("ok\x00")

    def test_rejects_any_token_with_disallowed_byte(self):
        rng = random.Random(77)
        allowed_chars = sorted(DEFAULT_ALLOW_LIST.characters)
        for _ in range(200):
            body = "".join(rng.choice(allowed_chars) for _ in range(rng.randint(0, 8)))
            bad = chr(rng.choice([rng.randint(0, 8), rng.randint(0x7F, 0x2FFF)]))
            position = rng.randint(0, len(body))
            token = body[:position] + bad + body[position:]
            assert not token_allowed(token)

    def test_allow_list_must_be_ascii(self):
        with pytest.raises(ConfigError):
            AllowList(frozenset({"é"}))

    def test_extension_stays_validated(self):
        extended = DEFAULT_ALLOW_LIST.extended("\x07")
        assert token_allowed("\x07", extended)
        assert not token_allowed("\x07")


@settings(max_examples=200, deadline=None)
@given(st.text(min_size=1, max_size=10), st.text(min_size=1, max_size=10))
def test_token_allowed_concatenation(a, b):
    assert token_allowed(a + b) == (token_allowed(a) and token_allowed(b))
