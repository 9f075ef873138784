"""Shared builders for the test suite."""

from clozeval import ResponseSheet, generate_cloze


def tiny_test(expected_words):
    """A lead-0 interval-2 test whose gaps land exactly on expected_words."""
    fillers = iter(f"f{i}" for i in range(1000))
    tokens = []
    for w in expected_words:
        tokens.append(w)
        tokens.append(next(fillers))
    return generate_cloze(" ".join(tokens), lead_len=0, interval=2, test_id="tiny")


def sheet(sid, answers):
    return ResponseSheet(student_id=sid, answers=answers)
