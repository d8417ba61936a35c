"""Python access to the maims core: metrics, parsing, validation and the CLI."""

import json

from ._maims import (
    Error,
    accuracy,
    cache_key,
    evidence_matches,
    parse_label,
    render_template,
    run_cli,
    validate_scale_file,
    weighted_f1,
)
from . import _maims


def load_scale(path):
    """The scale file at `path`, validated, as a dict."""
    return json.loads(_maims.load_scale_json(path))


def score_scale(scale_path, response):
    """(total, answered_count) for a completed-scale dict, or None when the scale has no values."""
    return _maims.score_scale_json(scale_path, json.dumps(response))


def read_traces(path):
    """Trace records of a traces.jsonl file, as dicts."""
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


__all__ = [
    "Error",
    "accuracy",
    "cache_key",
    "evidence_matches",
    "load_scale",
    "parse_label",
    "read_traces",
    "render_template",
    "run_cli",
    "score_scale",
    "validate_scale_file",
    "weighted_f1",
]
