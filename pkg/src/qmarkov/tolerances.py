"""Central tolerance table.

Modeling tolerances (what counts as Hermitian, positive, trace preserving)
are kept separate from method noise floors (finite differencing, rank
cutoffs) so a failed check points at the right culprit.
"""

# Hermiticity / exact-structure tolerance (floating point noise floor).
TOL_HERM = 1e-12

# Allowed negativity for "positive semidefinite" eigenvalue checks.
TOL_PSD = 1e-10

# Slack for "<= 0" assertions on finite-difference derivative estimates.
TOL_DERIV = 1e-6

# Slack for "<= 0" assertions on closed-form evaluations.
TOL_CLOSED_FORM = 1e-12

# Relative singular-value cutoff for rank decisions (image bases,
# pseudoinverses).  Far above float noise, far below the spectral gaps of
# the maps handled here.
RANK_CUTOFF = 1e-8

# Default initial step for the right-derivative estimator; two Richardson
# halvings on top of this pass closed-form checks at 1e-5 without
# catastrophic cancellation at the 1e-12 matrix tolerance floor.
DEFAULT_H0 = 1e-4

# Fixed published seed so default runs are reproducible.
DEFAULT_SEED = 20210907
