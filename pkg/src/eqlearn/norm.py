"""Standard-normal density and distribution function to machine precision."""

import math

SQRT_2PI = math.sqrt(2.0 * math.pi)
INV_SQRT_2PI = 1.0 / SQRT_2PI
_INV_SQRT_2 = 1.0 / math.sqrt(2.0)


def norm_pdf(x: float) -> float:
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


def norm_cdf(x: float) -> float:
    # erfc keeps full relative precision deep in the lower tail, where a
    # 1 - erf(...) formulation would cancel to zero.
    return 0.5 * math.erfc(-x * _INV_SQRT_2)
