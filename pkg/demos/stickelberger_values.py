"""Stickelberger elements, their character values, and a p-adic L-element at finite level."""

from bidual.ring import CharacterSpec
from bidual.stickelberger import DirichletCharacter, LevelField, modified_p_adic_L, stickelberger_element

theta = stickelberger_element(5)
print("theta_5:", {a: str(c) for a, c in sorted(theta.coeffs.items())})

psi = DirichletCharacter(7, (3,))
print("quadratic character mod 7 applied to theta_7:", stickelberger_element(7).evaluate(psi))

chi = CharacterSpec.from_exponents(5, 3, 1, 2, [1])
for labels in [(), (19,), (19, 109)]:
    K = LevelField(3, 1, labels, cap=1)
    L = modified_p_adic_L(K, chi)
    print(f"L at K = {labels or 'Q'}: {L.coeffs[:9]}{' ...' if len(L.coeffs) > 9 else ''}")
