"""Sparse third-order tensor storage, COO text I/O, and dataset splitting.

The tensor holds link weights y_ijk over two node modes (i, j) and a
relation mode k.  Only a small set of cells is present; every absent cell
is an unknown.  Present cells are either ``KNOWN`` (observed data) or
``SYNTHETIC`` (pseudo-entries generated by prediction sampling), and the
distinction is permanent: synthetic entries keep their origin through
every merge so later training can down/up-weight them.

Tensors are immutable after construction; ``merge_synthetic`` returns a
new instance.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Origin(Enum):
    """Provenance of a stored cell value."""

    KNOWN = "known"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class TensorDims:
    """Extents of the three tensor modes (all at least 1)."""

    i_size: int
    j_size: int
    k_size: int

    def __post_init__(self):
        for name in ("i_size", "j_size", "k_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")

    @property
    def n_cells(self) -> int:
        return self.i_size * self.j_size * self.k_size

    def contains(self, i: int, j: int, k: int) -> bool:
        return 0 <= i < self.i_size and 0 <= j < self.j_size and 0 <= k < self.k_size


@dataclass(frozen=True)
class Entry:
    """One stored cell: 0-based coordinates, link weight, provenance."""

    i: int
    j: int
    k: int
    value: float
    origin: Origin = Origin.KNOWN

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"entry value must be finite, got {self.value!r}")

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.i, self.j, self.k)


class SparseTensor:
    """An incomplete third-order tensor holding only its present cells.

    Cells are keyed by (i, j, k); duplicate keys are rejected.  A row
    index maps each (relation k, row i) pair to the ascending list of
    present column indices j, which is what the prediction sampler walks.
    """

    def __init__(self, dims: TensorDims, entries=()):
        self._dims = dims
        self._cells: dict[tuple[int, int, int], Entry] = {}
        for e in entries:
            if not dims.contains(e.i, e.j, e.k):
                raise IndexError(
                    f"entry ({e.i}, {e.j}, {e.k}) outside dims "
                    f"{dims.i_size}x{dims.j_size}x{dims.k_size}"
                )
            if e.key in self._cells:
                raise ValueError(f"duplicate entry key ({e.i}, {e.j}, {e.k})")
            self._cells[e.key] = e
        self._row_index = self._build_row_index()

    def _build_row_index(self) -> dict[tuple[int, int], list[int]]:
        index: dict[tuple[int, int], list[int]] = {}
        for (i, j, k) in self._cells:
            index.setdefault((k, i), []).append(j)
        for cols in index.values():
            cols.sort()
        return index

    @property
    def dims(self) -> TensorDims:
        return self._dims

    @property
    def row_index(self) -> dict[tuple[int, int], list[int]]:
        """Mapping (k, i) -> ascending present columns.  Treat as read-only."""
        return self._row_index

    def __len__(self) -> int:
        return len(self._cells)

    def __contains__(self, key) -> bool:
        return tuple(key) in self._cells

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseTensor):
            return NotImplemented
        return self._dims == other._dims and self._cells == other._cells

    def get(self, i: int, j: int, k: int) -> Entry | None:
        return self._cells.get((i, j, k))

    def entries(self) -> list[Entry]:
        """All present entries in canonical (i, j, k) order."""
        return [self._cells[key] for key in sorted(self._cells)]

    def known_entries(self) -> list[Entry]:
        return [e for e in self.entries() if e.origin is Origin.KNOWN]

    def synthetic_entries(self) -> list[Entry]:
        return [e for e in self.entries() if e.origin is Origin.SYNTHETIC]

    def slice_row(self, k: int, i: int) -> list[int]:
        """Ascending present columns j of row i in relation slice k."""
        if not (0 <= k < self._dims.k_size):
            raise IndexError(f"relation index {k} out of range")
        if not (0 <= i < self._dims.i_size):
            raise IndexError(f"row index {i} out of range")
        return list(self._row_index.get((k, i), []))

    def merge_synthetic(self, omega) -> "SparseTensor":
        """Return a new tensor with the synthetic entry set added.

        Every entry in ``omega`` must carry origin SYNTHETIC and must not
        collide with a present cell.  Existing entries are untouched.
        """
        omega = list(omega)
        for e in omega:
            if e.origin is not Origin.SYNTHETIC:
                raise ValueError(
                    f"merge_synthetic requires SYNTHETIC origin, got {e.origin} "
                    f"at ({e.i}, {e.j}, {e.k})"
                )
            if e.key in self._cells:
                raise ValueError(
                    f"synthetic entry collides with existing cell ({e.i}, {e.j}, {e.k})"
                )
        return SparseTensor(self._dims, self.entries() + omega)

    def value_bounds(self) -> tuple[float, float]:
        """(min, max) over KNOWN values only.

        Synthetic values are clamped derivatives of these bounds and are
        deliberately excluded so densification can never widen the range.
        """
        known = [e.value for e in self._cells.values() if e.origin is Origin.KNOWN]
        if not known:
            raise ValueError("value_bounds requires at least one known entry")
        return (min(known), max(known))

    def density(self) -> float:
        return len(self._cells) / self._dims.n_cells


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint train / validation / test partition of a known-entry set."""

    train: SparseTensor
    validation: list[Entry] = field(default_factory=list)
    test: list[Entry] = field(default_factory=list)


def load_coo(path, dims: TensorDims) -> SparseTensor:
    """Read a COO text file into a tensor of KNOWN entries.

    Format: '#'-prefixed comment lines and blank lines are skipped; every
    other line holds four whitespace-separated tokens ``i j k value`` with
    0-based indices.  Dimensions are supplied by the caller, never
    inferred from the data.  Malformed lines, out-of-range indices, and
    duplicate keys are reported with their 1-based line number.
    """
    entries = []
    seen: set[tuple[int, int, int]] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) != 4:
                raise ValueError(
                    f"{path}: line {lineno}: expected 4 tokens, got {len(tokens)}"
                )
            try:
                i, j, k = (int(tokens[0]), int(tokens[1]), int(tokens[2]))
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-integer index in {tokens[:3]}"
                ) from None
            try:
                value = float(tokens[3])
            except ValueError:
                raise ValueError(
                    f"{path}: line {lineno}: non-numeric value {tokens[3]!r}"
                ) from None
            if not math.isfinite(value):
                raise ValueError(f"{path}: line {lineno}: non-finite value {value!r}")
            if not dims.contains(i, j, k):
                raise ValueError(
                    f"{path}: line {lineno}: index ({i}, {j}, {k}) outside dims "
                    f"{dims.i_size}x{dims.j_size}x{dims.k_size}"
                )
            if (i, j, k) in seen:
                raise ValueError(f"{path}: line {lineno}: duplicate key ({i}, {j}, {k})")
            seen.add((i, j, k))
            entries.append(Entry(i, j, k, value, Origin.KNOWN))
    return SparseTensor(dims, entries)


def save_coo(tensor: SparseTensor, path) -> None:
    """Write present entries as COO text, one ``i j k value`` line per cell.

    Entries are emitted in canonical (i, j, k) order with 17 significant
    digits, so save/load round-trips reproduce the tensor exactly.
    Origins are not serialized; reloaded entries are KNOWN.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in tensor.entries():
            fh.write(f"{e.i} {e.j} {e.k} {e.value:.17g}\n")


def split(tensor: SparseTensor, ratios, seed: int) -> DatasetSplit:
    """Randomly partition the tensor's entries into train/validation/test.

    ``ratios`` are (train, validation, test) fractions summing to 1.
    Validation and test receive floor(ratio * n) entries each; the
    remainder goes to train.  Assignment shuffles the canonical entry
    order with a generator seeded by ``seed``, so equal tensors and equal
    seeds always split identically.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError(f"need exactly 3 ratios, got {len(ratios)}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {sum(ratios)!r}")
    entries = tensor.entries()
    n = len(entries)
    if n < 3:
        raise ValueError(f"split needs at least 3 entries, got {n}")

    n_val = int(math.floor(ratios[1] * n))
    n_test = int(math.floor(ratios[2] * n))
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    val = [entries[idx] for idx in order[:n_val]]
    test = [entries[idx] for idx in order[n_val:n_val + n_test]]
    train = [entries[idx] for idx in order[n_val + n_test:]]
    return DatasetSplit(
        train=SparseTensor(tensor.dims, train),
        validation=val,
        test=test,
    )
