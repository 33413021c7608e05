"""Conventions shared across the package.

Indices are written 1..4 in docs and 0..3 in arrays; ``DOC_INDEX`` maps
between them.  The orientation is fixed by ``epsilon[0, 1, 2, 3] = +1``.
"""

from itertools import permutations

import numpy as np

DIM = 4

#: doc index (1..4) -> array index (0..3)
DOC_INDEX = {1: 0, 2: 1, 3: 2, 4: 3}


def _levi_civita():
    eps = np.zeros((DIM,) * 4)
    for perm in permutations(range(DIM)):
        inversions = sum(1 for i in range(DIM) for j in range(i + 1, DIM) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 else 1.0
    return eps


LEVI_CIVITA = _levi_civita()
LEVI_CIVITA.setflags(write=False)

#: Sign of the Yang-Mills term in the closed-form Laplacian, written as
#: ``YANG_MILLS_SIGN * int U_{1,t} (D_A^* F)(gamma') U_{t,0} dt``.
#: The trace of the Levy kernel K^L gives +1 (checked against the kernel route
#: and the finite-difference route in tests/test_levy.py).
YANG_MILLS_SIGN = +1

#: Self-dual parts are stored with the 1/2: B_+ = (B + *B)/2, so B = B_+ + B_-.
#: A convention writing F_+ = F + *F has F_+ = 2 * B_+.
HALF_SPLIT = True

#: Central-difference step for metric derivatives (chart units).
METRIC_FD_STEP = 1e-5

#: Central-difference step for connection derivatives.
FIELD_FD_STEP = 1e-5
