import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rewritebench import bundled_path
from rewritebench.cipher import (
    CipherGenerationError,
    CipherInstruction,
    Dictionary,
    apply_instruction,
    caesar,
    ingest_corpus,
    make_cipher_dataset,
    template_sentence,
    tokenize,
)
from rewritebench.taskgen import substream

LOWER = "abcdefghijklmnopqrstuvwxyz"


@pytest.fixture(scope="session")
def dictionaries():
    return (
        Dictionary.load(bundled_path("cipher_train_words.txt"), "train"),
        Dictionary.load(bundled_path("cipher_test_words.txt"), "test"),
    )


class TestCaesar:
    def test_zero_key_is_identity(self):
        assert caesar("abc", 0) == "abc"

    def test_wraparound(self):
        assert caesar("xyz", 3) == "abc"

    def test_known_encryption(self):
        assert caesar("boat", 1) == "cpbu"

    @given(word=st.text(alphabet=LOWER, min_size=0, max_size=12), key=st.integers(0, 25))
    def test_roundtrip(self, word, key):
        assert caesar(caesar(word, key), 26 - key) == word

    @pytest.mark.parametrize("key", range(26))
    def test_bijection_on_alphabet(self, key):
        image = {caesar(ch, key) for ch in LOWER}
        assert image == set(LOWER)

    def test_key_26_is_identity_like_key_0(self):
        assert caesar("boat", 26) == caesar("boat", 0) == "boat"

    def test_rejects_non_lowercase(self):
        with pytest.raises(ValueError):
            caesar("Boat", 1)
        with pytest.raises(ValueError):
            caesar("bo at", 1)


class TestTokenizeAndCorpus:
    def test_tokenize_strips_punctuation_and_case(self):
        assert tokenize("The cat, sat!") == ("the", "cat", "sat")

    def test_ingest_contained_words(self, tmp_path, dictionaries):
        train, _ = dictionaries
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("the cat sat\nthe anchor held fast\n\n", encoding="utf-8")
        pool = ingest_corpus(corpus, Dictionary("d", ("cat", "anchor")))
        assert pool.entries[0][1] == frozenset({"cat"})
        assert pool.entries[1][1] == frozenset({"anchor"})

    def test_sentence_without_dictionary_word_kept_for_noops(self, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("nothing relevant here\n", encoding="utf-8")
        pool = ingest_corpus(corpus, Dictionary("d", ("cat",)))
        assert pool.entries[0][1] == frozenset()

    def test_empty_corpus_rejected(self, tmp_path):
        corpus = tmp_path / "corpus.txt"
        corpus.write_text("\n\n", encoding="utf-8")
        with pytest.raises(CipherGenerationError, match="no sentences"):
            ingest_corpus(corpus, Dictionary("d", ("cat",)))

    def test_template_contains_word_exactly_once(self):
        rng = substream(3, "tpl")
        for _ in range(100):
            tokens = template_sentence("ship", rng)
            assert tokens.count("ship") == 1


class TestApplyInstruction:
    def test_replace_then_encrypt(self):
        ex = apply_instruction(("we", "saw", "the", "ship"), CipherInstruction("ship", "boat", 1))
        assert ex.target == ("we", "saw", "the", "cpbu")
        assert not ex.is_noop

    def test_absent_word_is_noop_copy(self):
        tokens = ("we", "saw", "nothing")
        ex = apply_instruction(tokens, CipherInstruction("ship", "boat", 1))
        assert ex.is_noop
        assert ex.target == tokens

    def test_only_first_occurrence_replaced(self):
        ex = apply_instruction(("ship", "meets", "ship"), CipherInstruction("ship", "boat", 2))
        assert ex.target == ("dqcv", "meets", "ship")


class TestMakeCipherDataset:
    def test_small_dataset_properties(self, tmp_path, dictionaries):
        train_dict, test_dict = dictionaries
        manifest = make_cipher_dataset(
            train_dict, test_dict, tmp_path / "c",
            train_size=400, test_size=100, noop_fraction=0.4, seed=9,
        )
        for name, size in (("train.jsonl", 400), ("test.jsonl", 100)):
            records = [json.loads(line) for line in (tmp_path / "c" / name).read_text().splitlines()]
            assert len(records) == size
            noops = sum(r["is_noop"] for r in records)
            assert abs(noops - 0.4 * size) <= 1
            for r in records:
                sent = r["sentence"].split()
                tgt = r["target"].split()
                if r["is_noop"]:
                    assert r["find"] not in sent
                    assert r["target"] == r["sentence"]
                else:
                    assert len(sent) == len(tgt)
                    diffs = [(a, b) for a, b in zip(sent, tgt) if a != b]
                    assert len(diffs) == 1
                    changed_from, changed_to = diffs[0]
                    assert changed_from == r["find"]
                    assert caesar(changed_to, (26 - r["key"]) % 26) == r["replace"]
                    assert 1 <= r["key"] <= 25
        assert set(manifest["files"]) == {"train.jsonl", "test.jsonl"}

    def test_dictionary_disjointness_in_emitted_files(self, tmp_path, dictionaries):
        train_dict, test_dict = dictionaries
        make_cipher_dataset(train_dict, test_dict, tmp_path / "c",
                            train_size=300, test_size=80, seed=2)
        train_records = [json.loads(l) for l in (tmp_path / "c" / "train.jsonl").read_text().splitlines()]
        test_records = [json.loads(l) for l in (tmp_path / "c" / "test.jsonl").read_text().splitlines()]
        train_used = {r["find"] for r in train_records} | {r["replace"] for r in train_records}
        test_finds = {r["find"] for r in test_records}
        assert not test_finds & train_used

    def test_test_split_cycles_distinct_words(self, tmp_path, dictionaries):
        train_dict, test_dict = dictionaries
        n_words = len(test_dict.words)
        make_cipher_dataset(train_dict, test_dict, tmp_path / "c",
                            train_size=10, test_size=n_words, seed=4)
        records = [json.loads(l) for l in (tmp_path / "c" / "test.jsonl").read_text().splitlines()]
        assert {r["find"] for r in records} == set(test_dict.words)

    def test_determinism(self, tmp_path, dictionaries):
        train_dict, test_dict = dictionaries
        a = make_cipher_dataset(train_dict, test_dict, tmp_path / "a", train_size=50, test_size=20, seed=7)
        b = make_cipher_dataset(train_dict, test_dict, tmp_path / "b", train_size=50, test_size=20, seed=7)
        assert a["checksum"] == b["checksum"]

    def test_overlapping_dictionaries_rejected(self, tmp_path):
        with pytest.raises(CipherGenerationError, match="overlap"):
            make_cipher_dataset(
                Dictionary("a", ("cat", "dog")), Dictionary("b", ("dog", "owlet")), tmp_path / "c"
            )

    def test_corpus_backed_generation(self, tmp_path, dictionaries):
        train_dict, test_dict = dictionaries
        corpus = tmp_path / "corpus.txt"
        lines = [f"people often mention the {w} in stories" for w in train_dict.words[:40]]
        lines += [f"a {w} was found by the shore" for w in test_dict.words[:40]]
        corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
        make_cipher_dataset(train_dict, test_dict, tmp_path / "c",
                            train_size=60, test_size=30, seed=3, corpus_path=corpus)
        records = [json.loads(l) for l in (tmp_path / "c" / "train.jsonl").read_text().splitlines()]
        corpus_sentences = sum(
            1 for r in records if "stories" in r["sentence"] or "shore" in r["sentence"]
        )
        assert corpus_sentences > 0
