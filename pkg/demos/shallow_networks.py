"""Random-projection networks on the bundled tables.

Predictions from test-fold statistics follow cross-validated accuracy for
both readouts.  Ridge readouts fitted with little regularisation look
perfect on their own training sums, so the training statistics lose
their link to accuracy.

Run: python demos/shallow_networks.py   (about ten seconds)
"""

from perceptor.analysis import pearson
from perceptor.shallow import BUNDLED, EncoderConfig, cross_validate, grid_search, load_dataset

rows = []
for name in BUNDLED:
    ds = load_dataset(name)
    for n in (50, 500, 1500):
        for readout in ("centroid", "ridge"):
            res = cross_validate(ds, EncoderConfig(n, 3, seed=1), readout, lam=2.0 ** -10)
            rows.append((name, n, readout, res.accuracy, res.pred_train, res.pred_test))
            print(f"{name:14s} N={n:5d} {readout:8s} acc {res.accuracy:.3f}"
                  f"  train-pred {res.pred_train:.3f}  test-pred {res.pred_test:.3f}")

for readout in ("centroid", "ridge"):
    sel = [r for r in rows if r[2] == readout]
    acc = [r[3] for r in sel]
    print(f"{readout}: r(test stats) = {pearson(acc, [r[5] for r in sel]):.3f}, "
          f"r(train stats) = {pearson(acc, [r[4] for r in sel]):.3f}")

best = grid_search(load_dataset("wine"), [50, 200], [2.0 ** -4, 1.0], [1, 3])
print("wine grid best (N, lambda, kappa):", best.best, "accuracy", round(best.accuracy, 3))
