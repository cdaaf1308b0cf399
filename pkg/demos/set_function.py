"""The modulus-based set function c(E) on a few compact sets in the plane.

Values stay below the full-cap value up to discretization error and grow
with the set; for a single point they shrink as the grid is refined (a
point has zero capacity).
"""
from ringq import setfn

sets = {
    "point": setfn.point_set([[0.0, 0.0]]),
    "segment 0.25": setfn.segment_set([0, 0], [0.25, 0]),
    "segment 1": setfn.segment_set([0, 0], [1.0, 0]),
    "disk 0.6": setfn.ball_set([0, 0], 0.6),
    "disk 10": setfn.ball_set([0, 0], 10.0),
}
print(f"full cap value: {setfn.cap_bound(2):.6f}")
for name, E in sets.items():
    res = setfn.c_set(E, resolution=48)
    print(f"  {name:13s} c = {res.c_value:.5f} at {res.argmin_x}")

for g in (64, 128, 256):
    print(f"point, grid {g}: c = {setfn.c_set(sets['point'], resolution=g).c_value:.5f}")
