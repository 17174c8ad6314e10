"""Critical couplings of the square and triangular Ising models."""

import math

BETA_C = 0.5 * math.log(1.0 + math.sqrt(2.0))
ALPHA_C = math.sqrt(2.0) - 1.0
ALPHA_TRI = 2.0 - math.sqrt(3.0)
BETA_TRI = math.atanh(ALPHA_TRI)

# critical full-plane expectations of neighboring spin products
EPS_BAR_SQUARE = 1.0 / math.sqrt(2.0)
EPS_BAR_TRIANGULAR = 2.0 / 3.0

# triangular Laplacian eigenvalues are C_TRI * v_tri(ALPHA_TRI, q)
C_TRI = 1.0 / (12.0 * (-26.0 + 15.0 * math.sqrt(3.0)))


def eps_bar(kind: str) -> float:
    if kind == "square":
        return EPS_BAR_SQUARE
    if kind == "triangular":
        return EPS_BAR_TRIANGULAR
    raise ValueError(f"unknown lattice kind {kind!r}")


def critical_beta(kind: str) -> float:
    return BETA_C if kind == "square" else BETA_TRI
