# Known answers for Philox4x64-10 from numpy's implementation. numpy treats the
# counter as one 256-bit integer and increments it before each block, so the
# block for counter c is produced from numpy counter c - 1.
import numpy as np

def block(ctr, key):
    c = sum(w << (64 * i) for i, w in enumerate(ctr))
    c = (c - 1) % 2**256
    words = [(c >> (64 * i)) & (2**64 - 1) for i in range(4)]
    g = np.random.Philox(counter=words, key=list(key))
    return [int(v) for v in g.random_raw(4)]

for ctr, key in [((0, 0, 0, 0), (0, 0)), ((1, 5, 0, 0), (42, 1)), ((7, 3, 0, 0), (0xDEADBEEF, 3))]:
    print(ctr, key, ["0x%016x" % v for v in block(ctr, key)])
