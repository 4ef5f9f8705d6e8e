# Sparse link-weight tensors: construction, COO files, splits, row access.
#
# A third-order tensor holds link weights y_ijk between node pairs (i, j)
# under relation k. Almost all cells are unknown; we store only the
# present ones and remember whether each came from real data (KNOWN) or
# from prediction sampling (SYNTHETIC).

import tempfile
from pathlib import Path

from plft import Entry, Origin, SparseTensor, TensorDims, load_coo, save_coo, split

# -- build a tiny tensor by hand -------------------------------------------
dims = TensorDims(4, 6, 2)
entries = [
    Entry(0, 0, 0, 3.0),
    Entry(0, 4, 0, 1.0),
    Entry(1, 2, 0, 2.0),
    Entry(2, 5, 1, 4.0),
    Entry(3, 1, 1, 2.5),
]
tensor = SparseTensor(dims, entries)
print(f"cells: {dims.n_cells}, present: {len(tensor)}, density: {tensor.density():.3f}")
print("known value bounds:", tensor.value_bounds())

# -- per-row column access (what the sampler walks) -------------------------
print("row (k=0, i=0) present columns:", tensor.slice_row(0, 0))
print("row (k=1, i=0) present columns:", tensor.slice_row(1, 0))

# -- COO text round-trip -----------------------------------------------------
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.coo"
    save_coo(tensor, path)
    print("\nCOO file contents:")
    print(path.read_text())
    reloaded = load_coo(path, dims)
    print("round-trip equal:", reloaded == tensor)

# -- merging synthetic entries ----------------------------------------------
omega = [Entry(0, 2, 0, 1.9, Origin.SYNTHETIC)]
merged = tensor.merge_synthetic(omega)
print("\nafter merge:", len(merged), "entries,",
      len(merged.synthetic_entries()), "synthetic")
print("row (k=0, i=0) now:", merged.slice_row(0, 0))
print("bounds still from KNOWN values only:", merged.value_bounds())

# -- train/validation/test splitting ----------------------------------------
ds = split(merged, (0.6, 0.2, 0.2), seed=42)
print(f"\nsplit 60/20/20 -> train {len(ds.train)}, "
      f"val {len(ds.validation)}, test {len(ds.test)} (remainder goes to train)")
