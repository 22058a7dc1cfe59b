"""Recall curves of a clipped integer reservoir against the predictions.

The codebook readout is close to the shared-distractor assumption, so all
predictors track it.  Trained (ridge) readouts produce correlated sums;
the shared-distractor model then overestimates while the full-covariance
Monte Carlo estimate stays on the curve.

Run: python demos/reservoir_memory.py   (about a minute)
"""

import numpy as np

from perceptor.esn import EsnConfig, run_esn


def show(title, curves):
    print(title)
    print("  delay  empirical    eq1     eq2   eq3_mc")
    for d, emp, e1, e2, e3, _ in curves.rows():
        print(f"  {d:5d}   {emp:.4f}   {e1:.4f}  {e2:.4f}  {e3:.4f}")


delays = (0, 2, 4, 6, 8, 10)
show("codebook readout", run_esn(EsnConfig(delays=delays), 10))
show("ridge readout", run_esn(EsnConfig(delays=delays, readout="regression"), 10))

# Symbols stored with unequal strength break the shared-distractor picture.
cfg = EsnConfig(d=3, amplitudes=(1.0, 0.7, 0.4), delays=delays)
show("three symbols, amplitudes 1.0/0.7/0.4", run_esn(cfg, 10))

# Memory fades slowly: the clipped walk forgets at roughly cos(pi/9) per step.
far = run_esn(EsnConfig(delays=(25, 50, 100), mc_samples=1000), 5, methods=())
print("long delays:", dict(zip(far.delays.tolist(), np.round(far.empirical, 3).tolist())))
