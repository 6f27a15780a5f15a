"""
Tests for tokenization, sentence embeddings and paragraph alignment.
"""

import logging

import numpy as np
import pytest

from narrated_vmr.datamodel.grid import build_snippet_grid, seconds_to_snippet_index
from narrated_vmr.exceptions import RangeError, ValidationError
from narrated_vmr.narration.paragraph import NarrativeEntry, align_paragraph
from narrated_vmr.narration.text import EmbeddingTable, build_query, embed_sentence, tokenize


def test_tokenize_lowercases_and_splits():
    assert tokenize("A man, opens the DOOR!") == ["a", "man", "opens", "the", "door"]
    assert tokenize("") == []


def test_embed_single_word(embedding_table):
    np.testing.assert_array_equal(embed_sentence("man", embedding_table), [0.0, 1.0, 0.0])


def test_embed_averages_words(embedding_table):
    np.testing.assert_allclose(embed_sentence("a man", embedding_table), [0.5, 0.5, 0.0])


def test_embed_oov_is_zero(embedding_table):
    np.testing.assert_array_equal(embed_sentence("xyzq", embedding_table), [0.0, 0.0, 0.0])


def test_embed_oov_counts_in_mean(embedding_table):
    np.testing.assert_allclose(embed_sentence("man xyzq", embedding_table), [0.0, 0.5, 0.0])


def test_embed_rejects_empty_sentence(embedding_table):
    with pytest.raises(ValidationError):
        embed_sentence("!!!", embedding_table)


def test_build_query(embedding_table):
    query = build_query("q1", "a man opens", embedding_table)
    assert query.tokens == ("a", "man", "opens")
    assert query.embeddings.shape == (3, 3)
    assert query.mask.all()


def test_embedding_table_from_text_file(tmp_path):
    path = tmp_path / "glove.txt"
    path.write_text("the 0.1 0.2\ndoor -1 2.5\nman 3 4\n", encoding="utf-8")
    table = EmbeddingTable.from_text_file(path, limit=2)
    assert len(table) == 2
    assert table.dim == 2
    assert "man" not in table
    np.testing.assert_allclose(table.lookup("door"), [-1.0, 2.5])


def test_embedding_table_inconsistent_dims(tmp_path):
    path = tmp_path / "glove.txt"
    path.write_text("the 0.1 0.2\ndoor 1\n", encoding="utf-8")
    with pytest.raises(ValidationError, match="inconsistent"):
        EmbeddingTable.from_text_file(path)


# ============================================================================
# align_paragraph
# ============================================================================


@pytest.fixture
def letter_table():
    """Words a, b, c with one-hot vectors."""
    return EmbeddingTable(["a", "b", "c"], np.eye(3, dtype=np.float32))


def test_align_means_entries_per_bin(two_snippet_video, letter_table):
    entries = [NarrativeEntry(0.5, "a"), NarrativeEntry(1.5, "b"), NarrativeEntry(2.5, "c")]
    paragraph = align_paragraph(entries, two_snippet_video, letter_table)
    np.testing.assert_allclose(paragraph.aligned, [[0.5, 0.5, 0.0], [0.0, 0.0, 1.0]])
    assert paragraph.fill_flags.tolist() == [True, True]


def test_align_forward_fills(two_snippet_video, letter_table):
    paragraph = align_paragraph([NarrativeEntry(0.5, "a")], two_snippet_video, letter_table)
    np.testing.assert_array_equal(paragraph.aligned, [[1, 0, 0], [1, 0, 0]])
    assert paragraph.fill_flags.tolist() == [True, False]


def test_align_back_fills_leading_bins(two_snippet_video, letter_table):
    paragraph = align_paragraph([NarrativeEntry(2.5, "c")], two_snippet_video, letter_table)
    np.testing.assert_array_equal(paragraph.aligned, [[0, 0, 1], [0, 0, 1]])


def test_align_keeps_padding_zero(letter_table):
    video = build_snippet_grid(np.ones((2, 3)), 4.0, max_snippets=4)
    paragraph = align_paragraph([NarrativeEntry(0.5, "a")], video, letter_table)
    assert not paragraph.aligned[2:].any()


def test_align_is_order_independent(two_snippet_video, letter_table):
    entries = [NarrativeEntry(0.5, "a"), NarrativeEntry(0.5, "b"), NarrativeEntry(2.5, "c")]
    forward = align_paragraph(entries, two_snippet_video, letter_table)
    backward = align_paragraph(entries[::-1], two_snippet_video, letter_table)
    assert forward.aligned.tobytes() == backward.aligned.tobytes()
    assert forward.entries == backward.entries


def test_align_rejects_empty(two_snippet_video, letter_table):
    with pytest.raises(ValidationError):
        align_paragraph([], two_snippet_video, letter_table)


def test_align_rejects_out_of_video_timestamp(two_snippet_video, letter_table):
    with pytest.raises(RangeError):
        align_paragraph([NarrativeEntry(4.5, "a")], two_snippet_video, letter_table)


def test_tokenize_keeps_non_ascii_words():
    assert tokenize("Un café, s'il vous plaît") == ["un", "café", "s'il", "vous", "plaît"]
    assert tokenize("一个男人打开门") == ["一个男人打开门"]


def test_align_skips_captions_without_tokens(two_snippet_video, letter_table, caplog):
    entries = [NarrativeEntry(0.5, "a"), NarrativeEntry(2.5, "?!...")]
    with caplog.at_level(logging.WARNING, logger="narrated_vmr.narration.paragraph"):
        paragraph = align_paragraph(entries, two_snippet_video, letter_table)
    np.testing.assert_array_equal(paragraph.aligned, [[1, 0, 0], [1, 0, 0]])
    assert paragraph.fill_flags.tolist() == [True, False]
    assert any("no word tokens" in record.getMessage() for record in caplog.records)


def test_align_non_latin_caption_embeds_as_oov(two_snippet_video, letter_table):
    entries = [NarrativeEntry(0.5, "un café"), NarrativeEntry(1.5, "一个男人打开门")]
    paragraph = align_paragraph(entries, two_snippet_video, letter_table)
    np.testing.assert_array_equal(paragraph.aligned, np.zeros((2, 3)))
    assert paragraph.fill_flags.tolist() == [True, False]


def test_align_with_no_usable_captions_stays_zero(two_snippet_video, letter_table, caplog):
    with caplog.at_level(logging.WARNING, logger="narrated_vmr.narration.paragraph"):
        paragraph = align_paragraph([NarrativeEntry(0.5, "--")], two_snippet_video, letter_table)
    assert not paragraph.aligned.any()
    assert not paragraph.fill_flags.any()
    assert any("no usable narratives" in record.getMessage() for record in caplog.records)


def test_narrative_entry_validation():
    with pytest.raises(ValidationError):
        NarrativeEntry(1.0, "   ")
    with pytest.raises(RangeError):
        NarrativeEntry(-1.0, "a")


def test_paragraph_text(two_snippet_video, letter_table):
    paragraph = align_paragraph([NarrativeEntry(2.5, "c"), NarrativeEntry(0.5, "a")], two_snippet_video, letter_table)
    assert paragraph.text() == "0.5: a\n2.5: c"


def _oracle_alignment(entries, video, table):
    """Exhaustive binning: scan every snippet for every entry, then apply the fill rules."""
    n = video.n_real
    sums = [np.zeros(table.dim) for _ in range(n)]
    counts = [0] * n
    for entry in entries:
        for k, (start, end) in enumerate(video.periods):
            inside = start <= entry.timestamp < end or (k == n - 1 and entry.timestamp == end)
            if inside:
                sums[k] = sums[k] + embed_sentence(entry.text, table)
                counts[k] += 1
                break
    rows = [sums[k] / counts[k] if counts[k] else None for k in range(n)]
    first = next(k for k in range(n) if rows[k] is not None)
    filled = []
    last = rows[first]
    for k in range(n):
        if rows[k] is not None:
            last = rows[k]
        filled.append(rows[first] if k < first else last)
    return np.array(filled), [c > 0 for c in counts]


def test_align_matches_exhaustive_binning(letter_table):
    rng = np.random.default_rng(7)
    words = ["a", "b", "c"]
    for _ in range(500):
        n = int(rng.integers(1, 9))
        duration = float(rng.uniform(1.0, 20.0))
        cuts = np.sort(rng.uniform(0.0, duration, size=n - 1))
        bounds = np.concatenate([[0.0], cuts, [duration]])
        if np.any(np.diff(bounds) <= 0):
            continue
        periods = list(zip(bounds[:-1], bounds[1:]))
        video = build_snippet_grid(np.ones((n, 2)), duration, periods=periods, max_snippets=n + 2)
        n_entries = int(rng.integers(1, 12))
        entries = [
            NarrativeEntry(float(rng.uniform(0.0, duration)), " ".join(rng.choice(words, size=rng.integers(1, 4))))
            for _ in range(n_entries)
        ]
        paragraph = align_paragraph(entries, video, letter_table)
        expected, occupied = _oracle_alignment(entries, video, letter_table)

        assert paragraph.fill_flags[:n].tolist() == occupied
        assert all(seconds_to_snippet_index(e.timestamp, video.periods) < n for e in entries)
        np.testing.assert_allclose(paragraph.aligned[:n], expected, rtol=1e-6, atol=1e-7)
        assert not paragraph.aligned[n:].any()
