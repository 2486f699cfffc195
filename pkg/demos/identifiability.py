"""
When can the data distinguish candidate Q-matrices at all?
==========================================================

Recovery guarantees need two things: a complete Q-matrix (each attribute has
a single-attribute item) and a population that actually exercises different
profiles. The probe below computes, for every non-equivalent candidate, the
closest it can get to the true population rates when its own rates are free;
a candidate reaching distance zero is indistinguishable from the truth.
"""

from dinaq import (
    DinaParams,
    ProfileDistribution,
    QMatrix,
    check_identifiability,
)

truth = QMatrix.from_rows(["10", "01", "11"])
params = DinaParams.noiseless(3)

# Healthy case: uniform population, complete matrix.
report = check_identifiability(truth, params, ProfileDistribution.uniform(2))
print("uniform population:")
print("  complete Q:", report.complete)
print("  candidates probed:", len(report.deltas))
print("  smallest separation:", round(report.min_delta, 4))
print("  identifiable:", report.identifiable)

# Degenerate case: everyone masters both attributes. All items look alike,
# and coarser candidates mimic the population rates perfectly.
point = ProfileDistribution.point_mass(2, (1, 1))
report = check_identifiability(truth, params, point)
print("\npoint-mass population at profile 11:")
print("  identifiable:", report.identifiable)
print("  notes:", *report.notes, sep="\n    ")
print("  indistinguishable candidates:")
for cand in report.flagged[:5]:
    print("   ", cand.row_strings())
if len(report.flagged) > 5:
    print(f"    ... and {len(report.flagged) - 5} more")

# Incomplete case: no single-attribute item for the second attribute.
# The probe refuses to certify anything.
incomplete = QMatrix.from_rows(["10", "11", "11"])
report = check_identifiability(incomplete, params, ProfileDistribution.uniform(2))
print("\nincomplete Q-matrix:")
print("  complete:", report.complete)
print("  identifiable:", report.identifiable)
print("  notes:", *report.notes, sep="\n    ")
