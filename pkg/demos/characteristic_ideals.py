"""Fitting ideal vs characteristic ideal vs annihilator on a few small modules."""

from bidual import PresentedModule, RingDescriptor, annihilator, characteristic_ideal, fitting_ideal

Z9 = RingDescriptor(3, 2)
G = RingDescriptor(3, 2, (3,))

examples = {
    "Z/3 over Z/9": PresentedModule.cyclic(Z9, [Z9.scalar(3)]),
    "(Z/3)^2 over Z/9": PresentedModule.diagonal(Z9, [3, 3]),
    "Z/9 + Z/3 over Z/9": PresentedModule.diagonal(Z9, [0, 3]),
    "R/(3, s-1) over Z/9[C3]": PresentedModule(G, 1, [[[3, 0, 0]], [[8, 1, 0]]]),
}

for name, M in examples.items():
    print(f"{name:26s} length {M.length()}  Fitt0 {fitting_ideal(M, 0).describe():8s} char {characteristic_ideal(M).describe():18s} Ann {annihilator(M).describe()}")
