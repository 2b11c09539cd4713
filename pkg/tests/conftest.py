import pytest

from fexpand.auxreg import builtin
from fexpand.pdeparse import parse_pde
from fexpand.reduce import reduce_pde

BURGER_FISHER = "u_xx + u*u_x - u_t + u - u^2 = 0"
KAWAHARA = "u_t + 6*u*u_x + u_xxx - u_xxxxx = 0"
FKDV = "u_t + sigma*u^2*u_x + delta*u_x*u_xx + rho*u*u_xxx + u_xxxxx = 0"
FKDV_PARAMS = ("sigma", "delta", "rho")
# named members of the fifth-order family: (sigma, delta, rho)
FKDV_MEMBERS = {
    "sk": (5, 5, 5),
    "cdg": (180, 30, 30),
    "lax": (30, 20, 10),
    "kk": (20, 25, 10),
    "ito": (2, 6, 3),
}


def fkdv_member(name: str) -> str:
    s, d, r = FKDV_MEMBERS[name]
    return f"u_t + {s}*u^2*u_x + {d}*u_x*u_xx + {r}*u*u_xxx + u_xxxxx = 0"


@pytest.fixture(scope="session")
def tanh():
    return builtin("tanh")


@pytest.fixture(scope="session")
def bf_ode():
    return reduce_pde(parse_pde(BURGER_FISHER))
