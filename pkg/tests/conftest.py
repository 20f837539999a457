import numpy as np
import pytest

from pqsp import DensityMatrix, Polynomial, sup_norm


@pytest.fixture
def rho_34():
    """The diag(0.75, 0.25) workhorse state."""
    return DensityMatrix.diagonal([0.75, 0.25])


def random_nonneg(rng: np.random.Generator, half_degree: int) -> Polynomial:
    """|q|^2 for a random complex q, normalized to sup norm 1 on [-1, 1].

    Complex roots of q stay simple, so the square-free factoring path is
    exercised without the double-root ill-conditioning of a real square.
    """
    q = Polynomial(rng.normal(size=half_degree + 1) + 1j * rng.normal(size=half_degree + 1))
    p = q * Polynomial([c.conjugate() for c in q.coeffs])
    p = Polynomial([c.real for c in p.coeffs])
    return p * (1.0 / sup_norm(p))
