"""Integer flags shared by both kernel backends.

Ghost conventions at the boundary:

* ``MODE_EVEN``  - mirror reflection (zero normal derivative); the centered
  difference at the boundary collapses to exactly 0.
* ``MODE_ODD``   - odd reflection about the boundary value; for fields pinned
  to zero this makes the centered difference at the boundary ``f[1]/h``,
  which is the unique choice keeping the summation-by-parts identity exact
  under trapezoidal weights.
* ``MODE_ONESIDED`` - second-order one-sided difference, used for the
  gradient of boundary-pinned fields where accuracy at the wall matters
  more than the pairing identity.
"""

MODE_EVEN = 0
MODE_ODD = 1
MODE_ONESIDED = 2

BC_DIRICHLET = 0
BC_NEUMANN = 1
