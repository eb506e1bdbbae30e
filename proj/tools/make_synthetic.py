"""Regenerate data/synthetic: R = F S G^T + noise with 10% of cells missing."""
import json
import pathlib

import numpy as np

rng = np.random.default_rng(7)
I, J, K, L, tau = 30, 20, 3, 3, 100.0
F = rng.exponential(1.0, (I, K))
G = rng.exponential(1.0, (J, L))
S = rng.exponential(1.0, (K, L))
R = F @ S @ G.T + rng.normal(0.0, tau ** -0.5, (I, J))
R[rng.random((I, J)) < 0.1] = np.nan

out = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"
out.mkdir(parents=True, exist_ok=True)
with open(out / "R.csv", "w") as fh:
    for row in R:
        fh.write(",".join("nan" if np.isnan(x) else repr(float(x)) for x in row) + "\n")
config = {
    "entity_types": [
        {"name": "rows", "K": 5, "negativity": "nonnegative"},
        {"name": "cols", "K": 5, "negativity": "nonnegative"},
    ],
    "datasets": [
        {"name": "R", "kind": "R", "row_entity": "rows", "col_entity": "cols", "path": "R.csv"}
    ],
    "schedule": {"iterations": 60, "burn_in": 30, "thinning": 2, "seed": 1},
}
(out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
