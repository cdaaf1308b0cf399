"""Grid capacity of the ring 1/2 < |x| < 1 against its exact value.

The relative error changes sign with the grid (the plate and the outer
sphere are rasterized separately) and shrinks under refinement.
"""
import time

import numpy as np

from ringq import Condenser, capacity_numeric, ring_modulus_exact
from ringq.regions import Ball

for n, grids in ((2, (32, 64, 128, 256)), (3, (16, 32, 48))):
    exact = ring_modulus_exact(0.5, 1.0, n)
    print(f"n = {n}: exact = {exact:.10f}")
    for g in grids:
        t0 = time.perf_counter()
        E = Condenser(Ball(np.zeros(n), 1.0), Ball(np.zeros(n), 0.5), resolution=g)
        res = capacity_numeric(E)
        dt = time.perf_counter() - t0
        print(f"  grid {g:4d}  cap = {res.value:.8f}  rel.err = {res.value / exact - 1:+.2e}"
              f"  iters = {res.iterations}  {dt:.2f} s")
