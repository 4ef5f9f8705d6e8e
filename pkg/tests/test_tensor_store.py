import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plft.tensor_store import (
    DatasetSplit,
    Entry,
    Origin,
    SparseTensor,
    TensorDims,
    load_coo,
    save_coo,
    split,
)


def make_tensor(dims, coords, origin=Origin.KNOWN, base=1.0):
    entries = [Entry(i, j, k, base + n, origin) for n, (i, j, k) in enumerate(coords)]
    return SparseTensor(dims, entries)


class TestTensorDims:
    def test_n_cells(self):
        assert TensorDims(3, 4, 5).n_cells == 60

    @pytest.mark.parametrize("bad", [(0, 1, 1), (1, -2, 1), (1, 1, 0)])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(ValueError):
            TensorDims(*bad)

    def test_contains(self):
        dims = TensorDims(2, 3, 1)
        assert dims.contains(1, 2, 0)
        assert not dims.contains(2, 0, 0)
        assert not dims.contains(0, 0, -1)


class TestEntry:
    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Entry(0, 0, 0, float("nan"))
        with pytest.raises(ValueError):
            Entry(0, 0, 0, float("inf"))

    def test_default_origin_known(self):
        assert Entry(0, 0, 0, 1.0).origin is Origin.KNOWN


class TestSparseTensor:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            SparseTensor(TensorDims(2, 2, 1), [Entry(0, 0, 0, 1.0), Entry(0, 0, 0, 2.0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(IndexError):
            SparseTensor(TensorDims(2, 2, 1), [Entry(0, 0, 1, 1.0)])

    def test_entries_canonical_order(self):
        t = make_tensor(TensorDims(3, 3, 2), [(2, 0, 1), (0, 1, 0), (0, 0, 1)])
        assert [e.key for e in t.entries()] == [(0, 0, 1), (0, 1, 0), (2, 0, 1)]

    def test_row_index_consistent_with_entries(self):
        t = make_tensor(TensorDims(3, 5, 2), [(0, 4, 1), (0, 0, 1), (2, 3, 0)])
        rebuilt = {}
        for e in t.entries():
            rebuilt.setdefault((e.k, e.i), []).append(e.j)
        for cols in rebuilt.values():
            cols.sort()
        assert t.row_index == rebuilt

    @given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 1)),
                    unique=True, max_size=20))
    def test_row_index_round_trip(self, coords):
        t = make_tensor(TensorDims(4, 4, 2), coords)
        assert t._build_row_index() == t.row_index


class TestSliceRow:
    def test_sorted_columns(self):
        t = make_tensor(TensorDims(1, 5, 2), [(0, 4, 1), (0, 0, 1)])
        assert t.slice_row(1, 0) == [0, 4]

    def test_empty_row(self):
        t = make_tensor(TensorDims(1, 5, 2), [(0, 4, 1)])
        assert t.slice_row(0, 0) == []

    def test_after_merge(self):
        t = make_tensor(TensorDims(1, 5, 2), [(0, 4, 1), (0, 0, 1)])
        merged = t.merge_synthetic([Entry(0, 2, 1, 0.5, Origin.SYNTHETIC)])
        assert merged.slice_row(1, 0) == [0, 2, 4]

    def test_out_of_range(self):
        t = make_tensor(TensorDims(1, 5, 2), [(0, 4, 1)])
        with pytest.raises(IndexError):
            t.slice_row(2, 0)
        with pytest.raises(IndexError):
            t.slice_row(0, 1)


class TestMergeSynthetic:
    def test_cardinality(self):
        t = make_tensor(TensorDims(3, 3, 1), [(0, 0, 0), (1, 1, 0), (2, 2, 0)])
        omega = [Entry(0, 1, 0, 9.0, Origin.SYNTHETIC),
                 Entry(1, 2, 0, 9.0, Origin.SYNTHETIC),
                 Entry(2, 0, 0, 9.0, Origin.SYNTHETIC)]
        merged = t.merge_synthetic(omega)
        assert len(merged) == 6
        assert len(merged.synthetic_entries()) == 3

    def test_empty_omega_identity(self):
        t = make_tensor(TensorDims(2, 2, 1), [(0, 0, 0), (1, 1, 0)])
        assert t.merge_synthetic([]) == t

    def test_collision_rejected(self):
        t = make_tensor(TensorDims(2, 2, 1), [(0, 0, 0)])
        with pytest.raises(ValueError, match="collides"):
            t.merge_synthetic([Entry(0, 0, 0, 9.0, Origin.SYNTHETIC)])

    def test_known_origin_rejected(self):
        t = make_tensor(TensorDims(2, 2, 1), [(0, 0, 0)])
        with pytest.raises(ValueError, match="SYNTHETIC"):
            t.merge_synthetic([Entry(1, 1, 0, 9.0, Origin.KNOWN)])

    def test_known_entries_untouched(self):
        t = make_tensor(TensorDims(2, 2, 1), [(0, 0, 0), (1, 0, 0)])
        before = {e.key: (e.value, e.origin) for e in t.known_entries()}
        merged = t.merge_synthetic([Entry(1, 1, 0, 9.0, Origin.SYNTHETIC)])
        after = {e.key: (e.value, e.origin) for e in merged.known_entries()}
        assert before == after
        assert len(t) == 2  # original untouched


class TestValueBounds:
    def test_min_max(self):
        t = SparseTensor(TensorDims(3, 1, 1),
                         [Entry(0, 0, 0, 1.0), Entry(1, 0, 0, 2.0), Entry(2, 0, 0, 5.0)])
        assert t.value_bounds() == (1.0, 5.0)

    def test_single_value(self):
        t = SparseTensor(TensorDims(1, 1, 1), [Entry(0, 0, 0, 3.0)])
        assert t.value_bounds() == (3.0, 3.0)

    def test_synthetic_excluded(self):
        t = SparseTensor(TensorDims(3, 1, 1),
                         [Entry(0, 0, 0, 1.0), Entry(1, 0, 0, 5.0)])
        merged = t.merge_synthetic([Entry(2, 0, 0, 7.0, Origin.SYNTHETIC)])
        assert merged.value_bounds() == (1.0, 5.0)

    def test_empty_rejected(self):
        t = SparseTensor(TensorDims(1, 1, 1), [])
        with pytest.raises(ValueError):
            t.value_bounds()


class TestDensity:
    def test_ratio(self):
        t = make_tensor(TensorDims(10, 10, 1), [(0, 0, 0), (1, 1, 0)])
        assert t.density() == pytest.approx(0.02)

    def test_full(self):
        coords = [(i, j, 0) for i in range(2) for j in range(2)]
        t = make_tensor(TensorDims(2, 2, 1), coords)
        assert t.density() == 1.0

    def test_dblp_scale_consistency(self):
        # 4057 authors, 3 relations, 16131 present cells -> density about 0.0326%
        dims = TensorDims(4057, 4057, 3)
        coords = set()
        n, stride = 0, 104729
        cell = 0
        while n < 16131:
            cell = (cell + stride) % dims.n_cells
            plane = dims.j_size * dims.k_size
            i, rem = divmod(cell, plane)
            j, k = divmod(rem, dims.k_size)
            if (i, j, k) not in coords:
                coords.add((i, j, k))
                n += 1
        t = make_tensor(dims, sorted(coords))
        assert t.density() * 100 == pytest.approx(0.0326, abs=0.0002)
        # the published element count and density agree on the cell total
        assert 16131 / 0.000326 == pytest.approx(dims.n_cells, rel=0.01)


class TestLoadSaveCoo(object):
    def test_basic_load(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0 1 0 3.5\n2 0 1 1.0\n")
        t = load_coo(p, TensorDims(3, 2, 2))
        assert len(t) == 2
        assert t.get(0, 1, 0).value == 3.5
        assert all(e.origin is Origin.KNOWN for e in t.entries())

    def test_empty_file(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("")
        t = load_coo(p, TensorDims(3, 2, 2))
        assert len(t) == 0

    def test_comments_and_blanks_skipped(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("# header\n\n0 0 0 1.0\n  # indented comment\n")
        assert len(load_coo(p, TensorDims(1, 1, 1))) == 1

    def test_out_of_range_reports_line(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0 1 0 3.5\n0 1 5 3.5\n")
        with pytest.raises(ValueError, match="line 2"):
            load_coo(p, TensorDims(3, 2, 2))

    def test_wrong_token_count_reports_line(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("# c\n0 1 0\n")
        with pytest.raises(ValueError, match="line 2"):
            load_coo(p, TensorDims(3, 2, 2))

    def test_non_numeric_value(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0 0 0 abc\n")
        with pytest.raises(ValueError, match="line 1"):
            load_coo(p, TensorDims(1, 1, 1))

    def test_non_integer_index(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0.5 0 0 1.0\n")
        with pytest.raises(ValueError, match="line 1"):
            load_coo(p, TensorDims(1, 1, 1))

    def test_duplicate_key_rejected(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0 0 0 1.0\n0 0 0 2.0\n")
        with pytest.raises(ValueError, match="line 2.*duplicate"):
            load_coo(p, TensorDims(1, 1, 1))

    def test_non_finite_value_rejected(self, tmp_path):
        p = tmp_path / "t.coo"
        p.write_text("0 0 0 inf\n")
        with pytest.raises(ValueError, match="line 1"):
            load_coo(p, TensorDims(1, 1, 1))

    def test_round_trip(self, tmp_path):
        dims = TensorDims(5, 7, 3)
        t = make_tensor(dims, [(0, 6, 2), (4, 0, 0), (2, 3, 1)], base=0.123456789012345)
        p = tmp_path / "t.coo"
        save_coo(t, p)
        assert load_coo(p, dims) == t


class TestSplit:
    def tensor10(self):
        return make_tensor(TensorDims(10, 10, 1), [(i, i, 0) for i in range(10)])

    def test_floor_rule(self):
        ds = split(self.tensor10(), (0.8, 0.1, 0.1), seed=4)
        assert (len(ds.train), len(ds.validation), len(ds.test)) == (8, 1, 1)

    def test_all_train(self):
        ds = split(self.tensor10(), (1.0, 0.0, 0.0), seed=4)
        assert (len(ds.train), len(ds.validation), len(ds.test)) == (10, 0, 0)

    def test_deterministic(self):
        a = split(self.tensor10(), (0.6, 0.2, 0.2), seed=9)
        b = split(self.tensor10(), (0.6, 0.2, 0.2), seed=9)
        assert a.train == b.train
        assert a.validation == b.validation
        assert a.test == b.test

    def test_bad_ratio_sum(self):
        with pytest.raises(ValueError, match="sum to 1"):
            split(self.tensor10(), (0.8, 0.1, 0.2), seed=1)

    def test_negative_ratio(self):
        with pytest.raises(ValueError, match="non-negative"):
            split(self.tensor10(), (1.2, -0.1, -0.1), seed=1)

    def test_too_few_entries(self):
        t = make_tensor(TensorDims(2, 2, 1), [(0, 0, 0), (1, 1, 0)])
        with pytest.raises(ValueError, match="at least 3"):
            split(t, (0.8, 0.1, 0.1), seed=1)

    @settings(max_examples=40)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 25))
    def test_partition_disjoint_exhaustive(self, seed, n):
        coords = [(i % 5, (i * 3) % 5, i % 2) for i in range(n)]
        t = make_tensor(TensorDims(5, 5, 2), sorted(set(coords)))
        ds = split(t, (0.5, 0.25, 0.25), seed=seed)
        keys = [e.key for e in ds.train.entries()]
        keys += [e.key for e in ds.validation] + [e.key for e in ds.test]
        assert len(keys) == len(set(keys)) == len(t)
        assert set(keys) == {e.key for e in t.entries()}
