"""Generation guards for decoder loops: JSON completion stopper and ASCII clamp.

Both guards operate on surface text, not token ids, so any trainer can use
them by mapping its tokens to text first. The stopper checks structural
completeness only (balanced delimiters, string-aware); full schema
validation happens downstream in the ingest module.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import ConfigError

PRINTABLE_ASCII = frozenset(chr(c) for c in range(0x20, 0x7F)) | {"\t", "\n", "\r"}


@dataclass(frozen=True)
class AllowList:
    """Set of characters a generated token may contain."""

    characters: frozenset[str]

    def __post_init__(self) -> None:
        for ch in self.characters:
            if len(ch) != 1 or ord(ch) > 0x7F:
                raise ConfigError(f"allow list entries must be single ASCII characters: {ch!r}")

    @classmethod
    def ascii_default(cls) -> "AllowList":
        """Printable ASCII plus tab, newline, and carriage return."""
        return cls(PRINTABLE_ASCII)

    def extended(self, extra: str) -> "AllowList":
        return AllowList(self.characters | frozenset(extra))


DEFAULT_ALLOW_LIST = AllowList.ascii_default()


def token_allowed(token_text: str, allow: AllowList = DEFAULT_ALLOW_LIST) -> bool:
    """True iff every character of the token is permitted. Empty tokens are rejected."""
    if not token_text:
        return False
    return all(ch in allow.characters for ch in token_text)


@dataclass(frozen=True)
class StopperState:
    """Scan state of the prompt-aware JSON stopper.

    The state is a pure function of the scanned suffix, so feeding chunks
    incrementally gives the same result as scanning the whole text once.
    ``stop`` is the absolute offset one past the character that completed
    the first top-level JSON object, or None while none has completed.
    """

    prompt_length: int
    offset: int
    in_string: bool = False
    escaped: bool = False
    stack: tuple[str, ...] = ()
    opened: bool = False
    stop: int | None = None


def stopper_state(prompt_length: int = 0) -> StopperState:
    return StopperState(prompt_length=prompt_length, offset=prompt_length)


def advance_stopper(state: StopperState, chunk: str) -> StopperState:
    """Feed the next chunk of generated text and return the updated state."""
    if state.stop is not None:
        # Prefix stability: once a stop offset exists it never changes.
        return replace(state, offset=state.offset + len(chunk))

    in_string = state.in_string
    escaped = state.escaped
    stack = list(state.stack)
    opened = state.opened
    stop = None
    offset = state.offset

    for ch in chunk:
        offset += 1
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if not stack:
            # Outside any object: everything except an opening brace is
            # chatter. Arrays and strings only count once an object opened.
            if ch == "{":
                stack.append("{")
                opened = True
            continue
        if ch == '"':
            in_string = True
        elif ch in "{[":
            stack.append(ch)
        elif ch in "}]":
            # A mismatched closer aborts the current object instead of
            # completing it; scanning then waits for the next '{'.
            matched = stack.pop()
            if ch == "}" and matched == "{" and not stack:
                stop = offset
                break

    return StopperState(
        prompt_length=state.prompt_length,
        offset=state.offset + len(chunk),
        in_string=in_string,
        escaped=escaped,
        stack=tuple(stack),
        opened=opened,
        stop=stop,
    )


def json_stop_index(full_text: str, prompt_length: int = 0) -> int | None:
    """Offset one past the first completed top-level JSON object after the prompt.

    Returns None while no object has completed. Braces inside string
    literals (including escaped quotes) do not count.
    """
    if prompt_length > len(full_text):
        raise ValueError("prompt_length exceeds text length")
    state = advance_stopper(stopper_state(prompt_length), full_text[prompt_length:])
    return state.stop


def closing_suffix(state: StopperState) -> str:
    """Delimiters that would close everything currently open, innermost first."""
    suffix = '"' if state.in_string else ""
    closers = {"{": "}", "[": "]"}
    return suffix + "".join(closers[opener] for opener in reversed(state.stack))
