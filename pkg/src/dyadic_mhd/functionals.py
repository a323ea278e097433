"""Conserved quantities, ladder norms, Lyapunov functionals and their constants."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import HypothesisError, InfeasibleError, ParameterError
from .shell_model import ShellState

MAX_HALVINGS = 60


class LyapunovVariant(str, enum.Enum):
    MHD = "mhd"
    HALL = "hall"


def energy(state: ShellState) -> float:
    """Total energy ``0.5 * sum(a_j**2 + b_j**2)``."""
    return 0.5 * math.fsum(np.concatenate([state.a * state.a, state.b * state.b]))


def cross_helicity(state: ShellState) -> float:
    """Cross helicity ``sum a_j * b_j``."""
    return math.fsum(state.a * state.b)


def weighted_terms(seq, s: float, lam: float) -> np.ndarray:
    """``lam**(s*j) * |u_j|`` for ``j = 1..len(seq)``; may contain ``inf``."""
    u = np.abs(np.asarray(seq, dtype=float))
    j = np.arange(1, u.shape[0] + 1, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        w = np.power(float(lam), s * j) * u
    w[u == 0] = 0.0
    return w


def sobolev_norm(seq, s: float, lam: float, with_flag: bool = False):
    """Ladder norm ``sqrt(sum lam**(2 s j) u_j**2)``.

    Overflow saturates to ``inf`` instead of raising. With ``with_flag=True``
    the return value is ``(norm, saturated)``.
    """
    if not lam > 1:
        raise ParameterError(f"lambda must exceed 1, got {lam!r}")
    w = weighted_terms(seq, s, lam)
    if w.size == 0:
        value = 0.0
    else:
        scale = w.max()
        if scale == 0.0:
            value = 0.0
        elif not math.isfinite(scale):
            value = math.inf
        else:
            r = w / scale
            value = scale * math.sqrt(math.fsum(r * r))
    saturated = not math.isfinite(value)
    if saturated:
        value = math.inf
    return (value, saturated) if with_flag else value


@dataclass(frozen=True)
class LyapunovCoeffs:
    """Coefficients of a Lyapunov functional and the constants built from them.

    ``c4`` is the cubic gain of the MHD functional; the Hall functional uses
    ``c3`` in that role and ignores ``c4``.
    """

    variant: LyapunovVariant
    gamma: float
    c1: float
    c2: float
    c3: float
    c4: float
    c0: float
    M1: float
    M0: float
    K: float

    def __post_init__(self):
        object.__setattr__(self, "variant", LyapunovVariant(self.variant))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["variant"] = self.variant.value
        return d

    @property
    def cubic_gain(self) -> float:
        return self.c4 if self.variant is LyapunovVariant.MHD else self.c3


def _neighbour_sum(x, y, weights):
    """``sum_j weights_j * x_j * y_{j+1}`` with ``y_{N+1} = 0``."""
    return math.fsum(weights[:-1] * x[:-1] * y[1:])


def lyapunov(state: ShellState, coeffs: LyapunovCoeffs, lam: float) -> float:
    """Evaluate the MHD or Hall Lyapunov functional at ``state``."""
    a, b = state.a, state.b
    j = np.arange(1, state.n + 1, dtype=float)
    w = np.power(float(lam), 2.0 * coeffs.gamma * j)
    parts = [
        math.fsum(w * a * a),
        math.fsum(w * b * b),
        coeffs.c1 * _neighbour_sum(a, a, w),
    ]
    if coeffs.variant is LyapunovVariant.MHD:
        parts.append(coeffs.c2 * _neighbour_sum(b, a, w))
        parts.append(coeffs.c3 * math.fsum(w * a * b))
    else:
        parts.append(coeffs.c2 * _neighbour_sum(b, b, w))
    return math.fsum(parts)


def derive_constant_c0(lam: float, gamma: float, theta: float) -> float:
    """Constant ``c0`` with ``sum lam_j**(2g+theta) x_j**3 >= c0 * ||x||_{g+1}**3`` for ``x >= 0``.

    Writing ``y_j = lam_j**(g+1) x_j`` and ``w_j = lam_j**(theta-g-3)``, Hoelder
    with exponents 3/2 and 3 gives ``sum y_j**2 <= (sum w_j y_j**3)**(2/3) *
    (sum w_j**-2)**(1/3)``; the last sum is geometric with ratio
    ``r = lam**(2g + 6 - 2 theta)``.
    """
    if not theta > 3.0 + gamma:
        raise HypothesisError(f"c0 needs theta > 3 + gamma, got theta={theta!r}, gamma={gamma!r}")
    r = lam ** (2.0 * gamma + 6.0 - 2.0 * theta)
    return (r / (1.0 - r)) ** -0.5


# Parameter conditions. Each returns (lhs, rhs) for "lhs >= rhs".

def mhd_conditions(c1, c2, c3, c4, lam, gamma, theta):
    x = lam ** (-0.5 * (2 * gamma + theta))
    y = lam ** (-4 * gamma - theta)
    z = lam ** (-2 * gamma)
    g = lam ** (2 * gamma) - 1.0
    lt = lam ** theta
    return {
        "mhd.cond.1": (c1 * (1 - 0.5 * x - 0.25 * y - z / 3) - c2 * (0.5 * x + 0.25 * y), c4),
        "mhd.cond.2": (c2 * (1 - 0.25 * y) - 2.0 / 3.0 * c1 * z, c4),
        "mhd.cond.3": (c1 * (1 - 0.5 * x), 0.0),
        "mhd.cond.4": (2 * g - c1 * (0.5 * x + 0.5 * lt + 0.25 * z) - 0.25 * c2 * z - c3, 0.0),
        "mhd.cond.5": (2 * g - 0.5 * c1 * x - 0.5 * c2 * (x + lt) - c3, 0.0),
        "mhd.cond.6": (c3 * g - c2 * (0.5 * lt + 0.25 * z), 0.0),
    }


def mhd_sufficient_bounds(c2, c3, lam, gamma, theta):
    g = lam ** (2 * gamma) - 1.0
    z = lam ** (-2 * gamma)
    c3_max = g / (lam ** theta + z)
    c2_max = 4 * c3 * g / (2 * lam ** theta + z)
    return {
        "mhd.suff.c3": (c3_max, c3),
        "mhd.suff.c2": (c2_max, c2),
    }


def hall_conditions(c1, c2, c3, lam, gamma, theta):
    x = lam ** (-0.5 * (2 * gamma + theta))
    y = lam ** (-4 * gamma - theta)
    g = lam ** (2 * gamma) - 1.0
    p = lam ** (-(2 * gamma + 5.0 / 3.0))
    hall_bracket = 0.5 * lam ** (theta - 1) + 0.5 + 0.5 * lam ** (theta + 1) + 0.25 * lam ** (-2 * gamma)
    return {
        "hall.cond.1": (c1 * (1 - p / 3 - 0.5 * x - 0.25 * y) - c2 * y / 3, c3),
        "hall.cond.2": (
            c2 * (1 - lam ** (-2 * gamma - 2) / 6 - 0.5 * lam ** (-2 * gamma - theta - 1)
                  - 0.25 * lam ** (-4 * gamma - theta - 1)) - 2.0 / 3.0 * c1 * p,
            c3,
        ),
        "hall.cond.3": (c1 * (1 - 0.5 * x) - 0.5 * c2 * x, 0.0),
        "hall.cond.4": (2 * g - c1 * (0.5 * x + 0.5 * lam ** theta + 0.25 * lam ** (-2 * gamma)), 0.0),
        "hall.cond.5": (2 * g - 0.5 * c1 * x - 0.5 * c2 * x, 0.0),
        "hall.cond.6": (2 * g - c2 * hall_bracket, 0.0),
    }


def condition_values(coeffs: LyapunovCoeffs, lam, gamma, theta):
    """All parameter conditions for ``coeffs`` as ``{id: (lhs, rhs)}``."""
    if coeffs.variant is LyapunovVariant.MHD:
        out = mhd_conditions(coeffs.c1, coeffs.c2, coeffs.c3, coeffs.c4, lam, gamma, theta)
        out.update(mhd_sufficient_bounds(coeffs.c2, coeffs.c3, lam, gamma, theta))
        return out
    return hall_conditions(coeffs.c1, coeffs.c2, coeffs.c3, lam, gamma, theta)


def first_violation(coeffs: LyapunovCoeffs, lam, gamma, theta):
    """Id of the first failed condition, or ``None``.

    The cubic gain (``c4`` for MHD, ``c3`` for Hall) must also be positive.
    """
    for cid, (lhs, rhs) in condition_values(coeffs, lam, gamma, theta).items():
        if lhs - rhs < -1e-12 * max(abs(lhs), abs(rhs), 1.0):
            return cid
    if not coeffs.cubic_gain > 0:
        return coeffs.variant.value + ".cond.1"
    return None


def _mhd_c4(c1, lam, gamma, theta):
    x2 = lam ** (-0.5 * (2 * gamma + theta))
    y = lam ** (-4 * gamma - theta)
    z = lam ** (-2 * gamma)
    return min(c1 * (1 - x2 - 0.5 * y - z / 3), c1 * (1 - 0.25 * y - 2.0 / 3.0 * z))


def _finish_mhd(c1, c3, lam, gamma, theta, nu, mu):
    c4 = _mhd_c4(c1, lam, gamma, theta)
    base = LyapunovCoeffs(LyapunovVariant.MHD, gamma, c1, c1, c3, c4, 0.0, 0.0, 0.0, 0.0)
    return with_constants(base, lam, theta, nu, mu)


def _finish_hall(c1, lam, gamma, theta, nu, mu):
    c2 = 0.5 * c1
    cond = hall_conditions(c1, c2, 0.0, lam, gamma, theta)
    c3 = min(cond["hall.cond.1"][0], cond["hall.cond.2"][0])
    base = LyapunovCoeffs(LyapunovVariant.HALL, gamma, c1, c2, c3, 0.0, 0.0, 0.0, 0.0, 0.0)
    return with_constants(base, lam, theta, nu, mu)


def select_coefficients(variant, lam: float, gamma: float, theta: float, nu: float = 0.0,
                        mu: float = 0.0) -> LyapunovCoeffs:
    """Constructive choice of the Lyapunov coefficients and derived constants.

    MHD: ``c3`` at its sufficient bound, ``c1 = c2`` at the smaller of the
    ``c2`` bound and ``c3/10``, ``c4`` from the closed-form minimum. Hall:
    ``c2 = c1/2`` with ``c1`` at the closed-form bound capped at ``1/10``,
    and ``c3`` the largest value meeting the two cubic-gain conditions.
    If any condition still fails, ``c1`` (and ``c2``) are halved.
    """
    variant = LyapunovVariant(variant)
    if not lam >= 2:
        raise HypothesisError(f"coefficient selection needs lambda >= 2, got {lam!r}")
    if not theta > 3:
        raise HypothesisError(f"coefficient selection needs theta > 3, got {theta!r}")
    if not 0 < gamma < theta - 3:
        raise HypothesisError(f"coefficient selection needs 0 < gamma < theta - 3, got gamma={gamma!r}")
    if nu < 0 or mu < 0:
        raise ParameterError("nu and mu must be >= 0")
    g = lam ** (2 * gamma) - 1.0
    z = lam ** (-2 * gamma)
    if variant is LyapunovVariant.MHD:
        c3 = g / (lam ** theta + z)
        c1 = min(4 * c3 * g / (2 * lam ** theta + z), c3 / 10)
        build = lambda c: _finish_mhd(c, c3, lam, gamma, theta, nu, mu)
    else:
        denom = 2 * lam ** (theta - 1) + 2 + 2 * lam ** (theta + 1) + z
        c1 = min(8 * g / denom, 0.1)
        build = lambda c: _finish_hall(c, lam, gamma, theta, nu, mu)
    coeffs = build(c1)
    violated = first_violation(coeffs, lam, gamma, theta)
    halvings = 0
    while violated is not None:
        if halvings == MAX_HALVINGS:
            raise InfeasibleError(
                f"no feasible {variant.value} coefficients after {MAX_HALVINGS} halvings; "
                f"{violated} fails", violated)
        c1 *= 0.5
        halvings += 1
        coeffs = build(c1)
        violated = first_violation(coeffs, lam, gamma, theta)
    return coeffs


def coeffs_from_dict(d: dict) -> LyapunovCoeffs:
    """Inverse of :meth:`LyapunovCoeffs.to_dict`; missing constants default to 0."""
    fields = {k: d.get(k, 0.0) for k in ("c1", "c2", "c3", "c4", "c0", "M1", "M0", "K")}
    return LyapunovCoeffs(LyapunovVariant(d["variant"]), float(d["gamma"]), **{k: float(v) for k, v in fields.items()})


def with_constants(coeffs: LyapunovCoeffs, lam, theta, nu=0.0, mu=0.0) -> LyapunovCoeffs:
    """Recompute ``c0``, ``M1``, ``M0`` and ``K`` for user-supplied ``c1..c4``."""
    gamma = coeffs.gamma
    c0 = derive_constant_c0(lam, gamma, theta)
    if coeffs.variant is LyapunovVariant.MHD:
        m1 = 2 * (nu + mu) + (nu + mu) * (1 + lam ** 2) * lam ** (-gamma - 1) + coeffs.c3 * (nu + mu)
        spread = 2 + 2 * lam ** (-gamma - 1)
        gain = coeffs.c4
    else:
        m1 = 2 * (nu + mu) + (coeffs.c1 * nu + coeffs.c2 * mu) * (1 + lam ** 2) * lam ** (-gamma - 1)
        spread = 1 + (coeffs.c1 + coeffs.c2) * lam ** (-gamma - 1)
        gain = coeffs.c3
    m0 = 4 * m1 / (c0 * gain) * math.sqrt(spread) if gain > 0 else math.inf
    return replace(coeffs, c0=c0, M1=m1, M0=m0, K=0.25 * c0 * gain * spread ** -1.5)
