import json
from dataclasses import replace

import pytest

from tabext.errors import InfeasibleSpec
from tabext.features import alignment_groups, default_tolerance
from tabext.ingest import parse_tsv
from tabext.pipeline import load_corpus, open_label_store
from tabext.synthgen import (
    CORPUS_SCHEMA_VERSION,
    FOOTER_HEIGHT,
    MIN_TABLE_ROWS,
    LayoutSpec,
    generate_corpus,
    generate_invoice,
    validate_spec,
)

HARD_SPEC = LayoutSpec(jitter=True, dropout=True)


def parsed(spec):
    tsv, labels = generate_invoice(spec)
    doc = parse_tsv(tsv, doc_id="synth")
    (page,) = doc.pages
    assert len(page.tokens) == len(labels)
    return page, labels


class TestInvoice:
    def test_parses_with_expected_page(self):
        page, labels = parsed(LayoutSpec(seed=7))
        assert (page.page_width, page.page_height) == (2480, 3508)
        assert set(labels) == set(range(len(page.tokens)))

    def test_table_is_exactly_one_block(self):
        for seed in range(20):
            page, labels = parsed(replace(HARD_SPEC, seed=seed))
            table_blocks = {
                t.block_num for i, t in enumerate(page.tokens) if labels[i] == 1
            }
            other_blocks = {
                t.block_num for i, t in enumerate(page.tokens) if labels[i] == 0
            }
            assert len(table_blocks) == 1
            assert table_blocks.isdisjoint(other_blocks)

    def test_table_row_and_column_floor(self):
        page, labels = parsed(replace(HARD_SPEC, seed=11))
        table = [t for i, t in enumerate(page.tokens) if labels[i] == 1]
        lines = {(t.block_num, t.par_num, t.line_num) for t in table}
        assert len(lines) >= MIN_TABLE_ROWS
        assert len(table) >= MIN_TABLE_ROWS * 3

    def test_table_horizontally_centered(self):
        for seed in range(20):
            page, labels = parsed(replace(HARD_SPEC, seed=seed))
            table = [t for i, t in enumerate(page.tokens) if labels[i] == 1]
            left = min(t.left for t in table)
            right = max(t.left + t.width for t in table)
            center = (left + right) / 2
            assert abs(center - page.page_width / 2) <= 0.05 * page.page_width

    def test_address_in_first_quarter_footer_in_fourth(self):
        for seed in range(20):
            page, labels = parsed(replace(HARD_SPEC, seed=seed))
            topmost_block = min(t.block_num for t in page.tokens)
            for i, t in enumerate(page.tokens):
                if t.block_num == topmost_block:
                    assert labels[i] == 0
                    assert t.top < page.page_height / 4
                if t.height == FOOTER_HEIGHT:
                    assert labels[i] == 0
                    assert t.top >= 3 * page.page_height / 4

    @pytest.mark.parametrize("axis", ["left", "right"])
    def test_largest_alignment_group_is_pure_table(self, axis):
        # The load-bearing prior: on either x-edge the biggest aligned set of
        # tokens always belongs to the table, even with jitter and dropout.
        for seed in range(30):
            page, labels = parsed(replace(HARD_SPEC, seed=seed))
            tol = default_tolerance(page.page_width)
            assignments = alignment_groups(list(page.tokens), axis, tol)
            best = max(a.group_count for a in assignments)
            for i, a in enumerate(assignments):
                if a.group_count == best:
                    assert labels[i] == 1, f"seed={seed} token={page.tokens[i].text!r}"

    def test_deterministic_per_seed(self):
        spec = replace(HARD_SPEC, seed=99)
        assert generate_invoice(spec) == generate_invoice(spec)
        other = generate_invoice(replace(HARD_SPEC, seed=100))
        assert other != generate_invoice(spec)

    def test_optional_blocks_can_be_disabled(self):
        bare = LayoutSpec(address=False, upper_info=False, total=False,
                          footer=False, seed=5)
        page, labels = parsed(bare)
        assert set(labels.values()) == {1}


class TestValidateSpec:
    def test_default_is_feasible(self):
        validate_spec(LayoutSpec())

    @pytest.mark.parametrize("bad", [
        LayoutSpec(table_rows=(5, 12)),
        LayoutSpec(table_rows=(8, 7)),
        LayoutSpec(table_columns=(2, 5)),
        LayoutSpec(table_columns=(3, 6)),
        LayoutSpec(page_width=900),
        LayoutSpec(page_height=1200),
    ])
    def test_infeasible(self, bad):
        with pytest.raises(InfeasibleSpec):
            validate_spec(bad)

    def test_generate_checks_spec(self, tmp_path):
        with pytest.raises(InfeasibleSpec):
            generate_invoice(LayoutSpec(table_rows=(2, 4)))
        with pytest.raises(InfeasibleSpec):
            generate_corpus(3, LayoutSpec(page_width=900), seed=0, out_dir=tmp_path)


class TestCorpus:
    def test_files_and_manifest(self, tmp_path):
        manifest = generate_corpus(4, HARD_SPEC, seed=5, out_dir=tmp_path)
        assert manifest["schema_version"] == CORPUS_SCHEMA_VERSION
        assert sorted(p.name for p in tmp_path.glob("*.tsv")) == [
            f"invoice_{i:04d}.tsv" for i in range(4)
        ]
        assert (tmp_path / "labels.jsonl").exists()
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk == json.loads(json.dumps(manifest))  # tuples become lists

    def test_manifest_counts_match_documents(self, tmp_path):
        manifest = generate_corpus(3, HARD_SPEC, seed=8, out_dir=tmp_path)
        documents = load_corpus(tmp_path)
        store = open_label_store(tmp_path, documents)
        for entry in manifest["documents"]:
            doc = documents[entry["doc_id"]]
            token_count = doc.token_count
            assert token_count == entry["token_count"]
            table = sum(
                store.effective(entry["doc_id"], i).label
                for i in range(token_count)
            )
            assert table == entry["table_token_count"]
            assert 0 < entry["table_token_count"] < entry["token_count"]

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        generate_corpus(3, HARD_SPEC, seed=12, out_dir=a)
        generate_corpus(3, HARD_SPEC, seed=12, out_dir=b)
        names = sorted(p.name for p in a.iterdir())
        assert names == sorted(p.name for p in b.iterdir())
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_zero_documents_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            generate_corpus(0, HARD_SPEC, seed=0, out_dir=tmp_path)
