"""Stark systems on a synthetic Selmer datum: solve, reduce rank, read off Fitting ideals."""

from bidual.ring import RingDescriptor
from bidual.stark import fitting_comparison, rank_reduction, stark_solve, synthetic_datum, validate_selmer_datum

d = synthetic_datum(7, RingDescriptor(3, 2), (7, 13, 19), 1)
print("datum valid:", validate_selmer_datum(d)["valid"])

sol = stark_solve(d, 1)
print("Stark systems of rank 1:", sol.describe())

e0 = rank_reduction(d, sol.generators[0])
for row in fitting_comparison(d, e0)["rows"]:
    print(row)
