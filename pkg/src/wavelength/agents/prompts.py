"""Prompt rendering for the listener and speaker roles.

The two templates ship as package assets and are treated as frozen text:
tests compare them byte-for-byte against golden copies, so edit them only on
purpose. Chain-of-thought mode appends the standard step-by-step trigger to
the otherwise unchanged base prompt.
"""

from __future__ import annotations

from importlib import resources

COT_TRIGGER = "Let's think step by step."
ANSWER_OPEN = "<answer>"
ANSWER_CLOSE = "</answer>"


def _template(name: str) -> str:
    return (
        resources.files("wavelength")
        .joinpath("templates", name)
        .read_text(encoding="utf-8")
    )


LISTENER_TEMPLATE = _template("listener.txt")
SPEAKER_TEMPLATE = _template("speaker.txt")


def format_scale_value(value: float) -> str:
    """Scale positions render as plain integers when they are whole."""
    v = float(value)
    return str(int(v)) if v == int(v) else repr(v)


def _finish(prompt: str, cot: bool) -> str:
    prompt = prompt.removesuffix("\n")
    if cot:
        prompt = f"{prompt}\n\n{COT_TRIGGER}"
    return prompt


def render_listener(left: str, right: str, clue: str, cot: bool = False) -> str:
    """The guessing prompt: scale between `left` and `right`, given `clue`."""
    return _finish(
        LISTENER_TEMPLATE.format(left_word=left, right_word=right, clue=clue), cot
    )


def render_speaker(left: str, right: str, target: float, cot: bool = False) -> str:
    """The clue-giving prompt for a target position on the scale."""
    return _finish(
        SPEAKER_TEMPLATE.format(
            left_prompt=left,
            right_prompt=right,
            target_value=format_scale_value(target),
        ),
        cot,
    )
