"""Prompt templates, in-context history and response parsing."""

from .history import (
    HISTORY_LINE,
    HistoryBuffer,
    HistoryEntry,
    format_entry,
    format_history,
    format_number,
    parse_history_line,
    push,
)
from .parse import ParsedResponse, parse_response
from .render import (
    MODES,
    PromptContext,
    env_description,
    env_hints,
    load_template,
    policy_description,
    render,
    substitute,
    template_name,
)

__all__ = [
    "HISTORY_LINE", "HistoryBuffer", "HistoryEntry", "MODES", "ParsedResponse", "PromptContext",
    "env_description", "env_hints", "format_entry", "format_history", "format_number",
    "load_template", "parse_history_line", "parse_response", "policy_description", "push",
    "render", "substitute", "template_name",
]
