import random

import pytest

from lexnorm.corpus import GoldInstance, SentenceAnnotation, apply_instances, gold_as_instances
from lexnorm.genformat import (
    GenFormatError,
    NONE_OUTPUT,
    PLAIN,
    SPAN,
    STRUCT,
    build_prompt,
    instruction_text,
    occurrence_starts,
    parse_span,
    parse_struct,
    render_target,
)

from conftest import ALPHABET, random_corpus


def occurrences_bruteforce(source, sub):
    """Oracle: check every slice directly."""
    return [i for i in range(len(source) - len(sub) + 1) if source[i:i + len(sub)] == sub]


def sent(text, *gold):
    return SentenceAnnotation("s", "", text, None,
                              tuple(GoldInstance(b, e, (f,)) for b, e, f in gold))


class TestRender:
    def test_table_examples(self):
        s = sent("ついったみてる", (0, 4, "ツイッター"))
        assert render_target(s, PLAIN) == "ツイッターみてる"
        assert render_target(s, STRUCT) == "[[ついった>>ツイッター]]みてる"
        assert render_target(s, SPAN) == "ついった>>ツイッター>>0"

    def test_no_instances(self):
        s = sent("みてる")
        assert render_target(s, PLAIN) == "みてる"
        assert render_target(s, STRUCT) == "みてる"
        assert render_target(s, SPAN) == NONE_OUTPUT

    def test_span_occurrence_count(self):
        s = sent("abcabc", (3, 6, "xyz"))
        assert render_target(s, SPAN) == "abc>>xyz>>1"
        assert occurrences_bruteforce("abcabc", "abc") == [0, 3]

    def test_span_rejects_insertion(self):
        s = SentenceAnnotation("s", "", "ab", None, (GoldInstance(1, 1, ("x",)),))
        with pytest.raises(GenFormatError):
            render_target(s, SPAN)

    def test_deletion_renders(self):
        s = sent("abcd", (1, 3, ""))
        assert render_target(s, STRUCT) == "a[[bc>>]]d"
        assert render_target(s, SPAN) == "bc>>>>0"

    def test_delimiter_in_content_rejected(self):
        s = sent("a>>b", (0, 4, "x"))
        with pytest.raises(GenFormatError, match="delimiter"):
            render_target(s, SPAN)

    def test_multiple_records_joined(self):
        s = sent("abXcd", (0, 2, "p"), (3, 5, "q"))
        assert render_target(s, SPAN) == "ab>>p>>0||cd>>q>>0"


class TestOccurrences:
    def test_overlapping_included(self):
        assert occurrence_starts("aaa", "aa") == [0, 1] == occurrences_bruteforce("aaa", "aa")

    def test_matches_bruteforce_randomly(self, rng):
        for _ in range(2000):
            n = rng.randint(0, 12)
            source = "".join(rng.choice("abc") for _ in range(n))
            m = rng.randint(1, 3)
            sub = "".join(rng.choice("abc") for _ in range(m))
            assert occurrence_starts(source, sub) == occurrences_bruteforce(source, sub)

    def test_empty_needle_rejected(self):
        with pytest.raises(GenFormatError):
            occurrence_starts("abc", "")


class TestParseStruct:
    def test_table_example(self):
        out = parse_struct("ついったみてる", "[[ついった>>ツイッター]]みてる")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(0, 4, "ツイッター")]
        assert out.dropped == 0

    def test_no_blocks(self):
        out = parse_struct("abc", "abc")
        assert out.predictions == () and out.dropped == 0

    def test_context_alignment(self):
        out = parse_struct("abcabc", "abc[[abc>>x]]")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(3, 6, "x")]

    def test_context_mismatch_drops_rest(self):
        out = parse_struct("abcdef", "QQ[[cd>>x]]ef")
        assert out.predictions == ()
        assert out.dropped == 1
        assert any("mismatch" in n for n in out.notes)

    def test_before_mismatch_drops_rest(self):
        out = parse_struct("abcdef", "ab[[zz>>x]]ef")
        assert out.predictions == () and out.dropped == 1

    def test_prefix_kept_after_midway_failure(self):
        out = parse_struct("abcdef", "[[ab>>x]]QQ[[ef>>y]]")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(0, 2, "x")]
        assert out.dropped == 1

    def test_unterminated_block(self):
        out = parse_struct("abc", "a[[bc>>x")
        assert out.predictions == () and out.dropped == 1

    def test_reconstruction_note_on_short_output(self):
        out = parse_struct("abcdef", "abc")
        assert any("reconstruction" in n for n in out.notes)

    def test_deletion_block(self):
        out = parse_struct("abcd", "a[[bc>>]]d")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(1, 3, "")]

    def test_insertion_block(self):
        out = parse_struct("abcd", "ab[[>>X]]cd")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(2, 2, "X")]

    def test_duplicate_insertion_dropped(self):
        out = parse_struct("abcd", "ab[[>>X]][[>>Y]]cd")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(2, 2, "X")]
        assert out.dropped == 1

    def test_record_separator_inside_block_dropped(self):
        out = parse_struct("abcd", "a[[bc>>x||y]]d")
        assert out.predictions == () and out.dropped == 1


class TestParseSpan:
    def test_table_example(self):
        out = parse_span("ついったみてる", "ついった>>ツイッター>>0")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(0, 4, "ツイッター")]

    def test_none(self):
        out = parse_span("whatever", "NONE")
        assert out.predictions == () and out.dropped == 0

    def test_occurrence_resolution(self):
        out = parse_span("abcabc", "abc>>xyz>>1")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(3, 6, "xyz")]

    def test_absent_before_dropped(self):
        out = parse_span("abcabc", "zzz>>x>>0")
        assert out.predictions == () and out.dropped == 1

    def test_too_few_occurrences_dropped(self):
        out = parse_span("abcabc", "abc>>x>>2")
        assert out.dropped == 1

    def test_bad_count_dropped(self):
        for count in ("x", "-1", "1.5", ""):
            out = parse_span("abc", f"abc>>y>>{count}")
            assert out.dropped == 1, count

    def test_missing_fields_dropped(self):
        assert parse_span("abc", "abc>>x").dropped == 1
        assert parse_span("abc", "abc").dropped == 1
        assert parse_span("abc", "a>>b>>c>>0").dropped == 1

    def test_overlap_with_earlier_dropped(self):
        out = parse_span("abcdef", "abcd>>x>>0||cdef>>y>>0")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(0, 4, "x")]
        assert out.dropped == 1

    def test_whitespace_tolerated(self):
        out = parse_span("abcabc", " abc >> xyz >> 1 ")
        assert [(p.begin, p.end, p.form) for p in out.predictions] == [(3, 6, "xyz")]

    def test_later_record_may_resolve_earlier_position(self):
        out = parse_span("abXab", "ab>>q>>1||ab>>p>>0")
        spans = [(p.begin, p.end, p.form) for p in out.predictions]
        assert spans == [(0, 2, "p"), (3, 5, "q")]  # sorted, both kept

    def test_garbage_never_raises(self, rng):
        chars = "ab>|[]N0 "
        for _ in range(3000):
            source = "".join(rng.choice("ab") for _ in range(rng.randint(0, 6)))
            generated = "".join(rng.choice(chars) for _ in range(rng.randint(0, 14)))
            out = parse_span(source, generated)
            spans = [p.span for p in out.predictions]
            assert spans == sorted(spans)
            for (b1, e1), (b2, e2) in zip(spans, spans[1:]):
                assert e1 <= b2
            assert all(0 <= p.begin <= p.end <= len(source) for p in out.predictions)
            out2 = parse_struct(source, generated)
            assert all(0 <= p.begin <= p.end <= len(source) for p in out2.predictions)


class TestRoundTrip:
    def test_struct_and_span_recover_gold(self):
        sentences = random_corpus(41, 500, multi_form=False)
        for s in sentences:
            for approach, parser in ((STRUCT, parse_struct), (SPAN, parse_span)):
                out = parser(s.text, render_target(s, approach))
                assert out.dropped == 0, (s.text, approach, out)
                assert [(p.begin, p.end) for p in out.predictions] == \
                    [g.span for g in s.gold]
                assert [p.form for p in out.predictions] == \
                    [g.first_form for g in s.gold]

    def test_plain_equivalence(self):
        for s in random_corpus(43, 300):
            parsed = parse_span(s.text, render_target(s, SPAN)).predictions
            assert apply_instances(s.text, list(parsed)) == render_target(s, PLAIN)


class TestPrompt:
    def test_span_instruction_start(self):
        prompt = build_prompt("src", SPAN, "Japanese")
        inst = prompt.split("Instruction:\n", 1)[1]
        assert inst.startswith(
            'If no informal Japanese word forms exist in the input text, output exactly "NONE"')

    def test_plain_instruction_content(self):
        prompt = build_prompt("src", PLAIN, "Thai")
        assert "Provide the full normalized text where the original word forms are replaced" \
            in prompt
        assert "Thai" in prompt

    def test_template_shape_with_empty_source(self):
        prompt = build_prompt("", STRUCT, "Japanese")
        assert prompt.endswith("\n\nInput:\n\n\nOutput:\n")
        assert prompt.startswith("Instruction:\n")

    def test_language_substitution_everywhere(self):
        for approach in (PLAIN, STRUCT, SPAN):
            assert "{lang}" not in instruction_text(approach, "Japanese")

    def test_unknown_approach_rejected(self):
        with pytest.raises(GenFormatError):
            build_prompt("x", "freeform", "Japanese")
