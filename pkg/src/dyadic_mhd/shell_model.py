"""Dyadic (shell) models of MHD and Hall-MHD on a finite truncation.

Shell ``j`` (``j = 1..N``) carries a velocity amplitude ``a_j`` and a magnetic
amplitude ``b_j`` at wavenumber ``lambda_j = lambda**j``. Only nearest-neighbour
interactions are present. The truncation uses a zero closure: the ghost values
``a_0 = b_0 = a_{N+1} = b_{N+1} = 0`` are implied and never stored.

Four variants are available:

* ``GENERAL`` -- the full model with coefficients ``alpha_1..alpha_4``,
  ``beta_1..beta_4`` and intermittency dimensions ``delta_u``, ``delta_b``.
* ``SYS1`` -- the coupled model with backward cascade in the coupling terms
  (cross helicity conserved when ``nu = mu = d_i = 0``).
* ``SYS2`` -- the forward-cascade model studied for blow-up.
* ``SYS3`` -- ``SYS2`` written in the rescaled ladder ``lambda_j = lbar_j**alpha``
  with ``alpha = 1/theta`` (fractional dissipation ``lbar_j**(2 alpha)``).

Every nonlinear contribution is a product of two neighbouring amplitudes
times a precomputed wavenumber power, so the right-hand side is stored as a
small table of :class:`FluxTerm` records. The same table produces the
Jacobian used by the implicit integrator.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import ParameterError, ShapeError, VariantError

A, B = 0, 1  # field indices in the stacked state


class Variant(str, enum.Enum):
    GENERAL = "general"
    SYS1 = "sys1"
    SYS2 = "sys2"
    SYS3 = "sys3"


def build_ladder(lam: float, n: int) -> np.ndarray:
    """Return the wavenumbers ``[lam**1, ..., lam**n]``."""
    if not lam > 1:
        raise ParameterError(f"wavenumber base must exceed 1, got {lam!r}")
    if n < 0:
        raise ParameterError(f"ladder length must be >= 0, got {n!r}")
    return np.power(float(lam), np.arange(1, n + 1, dtype=float))


def theta_of_delta(delta: float) -> float:
    """Nonlinearity exponent ``theta = (5 - delta)/2`` for intermittency dimension ``delta``."""
    return (5.0 - delta) / 2.0


def _geometric(base: float, j: np.ndarray) -> np.ndarray:
    return np.power(base, j.astype(float))


@dataclass(frozen=True)
class FluxTerm:
    """``d(target)_j/dt += coef_j * f1_{j+o1} * f2_{j+o2}`` for ``j = 1..N``."""

    target: int
    coef: np.ndarray
    f1: int
    o1: int
    f2: int
    o2: int


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one model variant on an ``n_shells`` truncation.

    For ``SYS3`` the fields ``lam`` and ``theta`` hold the rescaled base
    ``lbar`` and the exponent ``alpha = 1/theta`` respectively. ``GENERAL``
    ignores ``theta`` and reads ``alpha_coeffs``, ``beta_coeffs``,
    ``delta_u`` and ``delta_b`` instead.
    """

    variant: Variant
    lam: float
    theta: float | None
    nu: float = 0.0
    mu: float = 0.0
    d_i: float = 0.0
    n_shells: int = 20
    alpha_coeffs: tuple[float, float, float, float] | None = None
    beta_coeffs: tuple[float, float, float, float] | None = None
    delta_u: float | None = None
    delta_b: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not self.lam > 1:
            raise ParameterError(f"lambda must exceed 1, got {self.lam!r}")
        if int(self.n_shells) != self.n_shells or self.n_shells < 1:
            raise ParameterError(f"n_shells must be a positive integer, got {self.n_shells!r}")
        object.__setattr__(self, "n_shells", int(self.n_shells))
        for name in ("nu", "mu", "d_i"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ParameterError(f"{name} must be finite and >= 0, got {value!r}")
        if self.variant is Variant.GENERAL:
            missing = [
                name
                for name in ("alpha_coeffs", "beta_coeffs", "delta_u", "delta_b")
                if getattr(self, name) is None
            ]
            if missing:
                raise ParameterError("general model needs " + ", ".join(missing))
            for name in ("alpha_coeffs", "beta_coeffs"):
                coeffs = tuple(float(c) for c in getattr(self, name))
                if len(coeffs) != 4:
                    raise ParameterError(f"{name} must have 4 entries")
                object.__setattr__(self, name, coeffs)
        else:
            if self.theta is None or not math.isfinite(self.theta):
                raise ParameterError(f"variant {self.variant.value} needs a finite theta")
            if self.variant is Variant.SYS3 and not self.theta > 0:
                raise ParameterError(f"rescaled exponent alpha must be > 0, got {self.theta!r}")

    @classmethod
    def from_delta(cls, variant, lam, delta, **kwargs) -> "ModelSpec":
        """Build a ``SYS1``/``SYS2``/``SYS3`` spec from an intermittency dimension."""
        variant = Variant(variant)
        if variant is Variant.GENERAL:
            raise VariantError("general model takes delta_u/delta_b directly")
        theta = theta_of_delta(delta)
        if variant is Variant.SYS3:
            theta = 2.0 / (5.0 - delta)
        return cls(variant, lam, theta, **kwargs)

    @property
    def wavenumber_base(self) -> float:
        """Base of the physical ladder ``lambda_j`` (``lbar**alpha`` for SYS3)."""
        if self.variant is Variant.SYS3:
            return self.lam ** self.theta
        return self.lam

    @property
    def physical_theta(self) -> float | None:
        """Nonlinearity exponent in the physical ladder (``1/alpha`` for SYS3)."""
        if self.variant is Variant.SYS3:
            return 1.0 / self.theta
        return self.theta

    @cached_property
    def dissipation(self) -> np.ndarray:
        """Per-shell dissipation rates ``lambda_j**2`` (``lbar_j**(2 alpha)`` for SYS3)."""
        j = np.arange(1, self.n_shells + 1)
        if self.variant is Variant.SYS3:
            return _geometric(self.wavenumber_base ** 2, j)
        return _geometric(self.lam ** 2, j)

    @cached_property
    def flux_terms(self) -> tuple[FluxTerm, ...]:
        return tuple(_flux_terms(self))

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)


def _flux_terms(m: ModelSpec):
    n = m.n_shells
    j = np.arange(1, n + 1)
    if m.variant in (Variant.SYS1, Variant.SYS2, Variant.SYS3):
        if m.variant is Variant.SYS3:
            flux_base = m.lam
            # lbar * lbar**alpha rather than lbar**(1 + alpha): one pow fewer
            hall_base = m.lam * m.wavenumber_base
        else:
            flux_base = m.lam ** m.theta
            # same rounding path as the rescaled form: lambda**theta * lambda
            hall_base = flux_base * m.lam
        t_j = _geometric(flux_base, j)
        t_jm = _geometric(flux_base, j - 1)
        h_j = m.d_i * _geometric(hall_base, j)
        h_jm = m.d_i * _geometric(hall_base, j - 1)
        # coupling sign: -1 for the forward-cascade model, +1 for SYS1
        s = 1.0 if m.variant is Variant.SYS1 else -1.0
        yield FluxTerm(A, -t_j, A, 0, A, 1)
        yield FluxTerm(A, t_jm, A, -1, A, -1)
        yield FluxTerm(A, s * t_j, B, 0, B, 1)
        yield FluxTerm(A, -s * t_jm, B, -1, B, -1)
        yield FluxTerm(B, s * t_j, B, 0, A, 1)
        yield FluxTerm(B, -s * t_j, A, 0, B, 1)
        if m.d_i:
            yield FluxTerm(B, -h_j, B, 0, B, 1)
            yield FluxTerm(B, h_jm, B, -1, B, -1)
        return

    al1, al2, al3, al4 = m.alpha_coeffs
    be1, be2, be3, be4 = m.beta_coeffs
    tu = lambda k: _geometric(m.lam ** ((5.0 - m.delta_u) / 2.0), k)
    tb = lambda k: _geometric(m.lam ** ((5.0 - m.delta_b) / 2.0), k)
    th = lambda k: _geometric(m.lam ** ((7.0 - m.delta_b) / 2.0), k)
    # Each printed bracket "c * (X - Y)" sits on the left-hand side, so it
    # enters the right-hand side as "-c*X + c*Y".
    lhs = [
        # velocity equation
        (A, al1 * tu(j), A, 0, A, 1), (A, -al1 * tu(j - 1), A, -1, A, -1),
        (A, be1 * tu(j), A, 1, A, 1), (A, -be1 * tu(j - 1), A, -1, A, 0),
        (A, al3 * tb(j), B, 0, B, 1), (A, -al3 * tb(j - 1), B, -1, B, -1),
        (A, be3 * tb(j + 1), B, 1, B, 1), (A, -be3 * tb(j), B, -1, B, 0),
        # magnetic equation
        (B, al2 * tb(j), A, 0, B, 1), (B, -al2 * tb(j - 1), A, -1, B, -1),
        (B, be2 * tb(j + 1), A, 1, B, 1), (B, -be2 * tb(j), A, 0, B, -1),
        (B, al3 * tb(j), B, 0, A, 1), (B, -al3 * tb(j - 1), A, -1, B, -1),
        (B, be3 * tb(j + 1), B, 1, A, 1), (B, -be3 * tb(j), A, -1, B, 0),
        (B, m.d_i * al4 * th(j), B, 0, B, 1), (B, -m.d_i * al4 * th(j - 1), B, -1, B, -1),
        (B, m.d_i * be4 * th(j), B, 1, B, 1), (B, -m.d_i * be4 * th(j - 1), B, 0, B, -1),
    ]
    for target, coef, f1, o1, f2, o2 in lhs:
        if np.any(coef):
            yield FluxTerm(target, -coef, f1, o1, f2, o2)


@dataclass(frozen=True)
class ShellState:
    """Time ``t`` and the shell amplitudes ``a``, ``b`` (read-only arrays)."""

    t: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.array(self.a, dtype=float)
        b = np.array(self.b, dtype=float)
        if a.ndim != 1 or a.shape != b.shape:
            raise ShapeError(f"a and b must be 1-d of equal length, got {a.shape} and {b.shape}")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_vector(cls, t, y) -> "ShellState":
        y = np.asarray(y, dtype=float)
        n = y.shape[0] // 2
        return cls(t, y[:n], y[n:])

    @classmethod
    def zeros(cls, n, t=0.0) -> "ShellState":
        return cls(t, np.zeros(n), np.zeros(n))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)))


@dataclass(frozen=True)
class Derivative:
    da: np.ndarray
    db: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.da, self.db])


def _check_length(model: ModelSpec, n: int):
    if n != model.n_shells:
        raise ShapeError(f"state has {n} shells, model expects {model.n_shells}")


def _padded(y: np.ndarray, n: int) -> np.ndarray:
    p = np.zeros((2, n + 2))
    p[A, 1:-1] = y[:n]
    p[B, 1:-1] = y[n:]
    return p


def nonlinear_rhs(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Nonlinear part of the right-hand side for a stacked vector ``[a, b]``."""
    n = model.n_shells
    p = _padded(y, n)
    out = np.zeros((2, n))
    for term in model.flux_terms:
        out[term.target] += term.coef * p[term.f1, 1 + term.o1:n + 1 + term.o1] * p[term.f2, 1 + term.o2:n + 1 + term.o2]
    return out.reshape(-1)


def linear_rates(model: ModelSpec) -> np.ndarray:
    """Diagonal of the dissipation operator, ``[-nu*k_j, -mu*k_j]``."""
    return np.concatenate([-model.nu * model.dissipation, -model.mu * model.dissipation])


def rhs_vector(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Full right-hand side on a stacked vector ``[a, b]``."""
    return nonlinear_rhs(model, y) + linear_rates(model) * y


def term_magnitude(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Componentwise sum of the absolute values of every right-hand-side term.

    This is the natural scale for rounding comparisons: two evaluations of
    the same sum can only differ by a few ulps of it, even when the sum
    itself cancels.
    """
    n = model.n_shells
    p = np.abs(_padded(y, n))
    out = np.zeros((2, n))
    for term in model.flux_terms:
        out[term.target] += np.abs(term.coef) * p[term.f1, 1 + term.o1:n + 1 + term.o1] * p[term.f2, 1 + term.o2:n + 1 + term.o2]
    return out.reshape(-1) + np.abs(linear_rates(model) * y)


def evaluate_rhs(model: ModelSpec, state: ShellState) -> Derivative:
    """Time derivatives ``(da/dt, db/dt)`` of ``state`` under ``model``."""
    _check_length(model, state.n)
    dy = rhs_vector(model, state.vector())
    n = model.n_shells
    return Derivative(dy[:n], dy[n:])


def jacobian(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Dense Jacobian of :func:`rhs_vector` at ``y``."""
    n = model.n_shells
    p = _padded(y, n)
    jac = np.diag(linear_rates(model))
    rows = np.arange(n)
    for term in model.flux_terms:
        for (fa, oa), (fb, ob) in (((term.f1, term.o1), (term.f2, term.o2)), ((term.f2, term.o2), (term.f1, term.o1))):
            # derivative with respect to fa_{j+oa}; the partner factor stays
            cols = rows + oa
            ok = (cols >= 0) & (cols < n)
            partner = term.coef * p[fb, 1 + ob:n + 1 + ob]
            np.add.at(jac, (term.target * n + rows[ok], fa * n + cols[ok]), partner[ok])
    return jac


def energy_transfer(model: ModelSpec, state: ShellState) -> tuple[float, float]:
    """Net nonlinear energy transfer ``sum a_j N^a_j + b_j N^b_j`` and its absolute scale.

    For energy-conserving variants the first value vanishes up to rounding;
    the second is ``sum |a_j N^a_j| + |b_j N^b_j|``, the natural yardstick.
    Both use compensated summation.
    """
    _check_length(model, state.n)
    y = state.vector()
    products = y * nonlinear_rhs(model, y)
    return math.fsum(products), math.fsum(np.abs(products))


def rescale_sys2_to_sys3(model: ModelSpec) -> ModelSpec:
    """Rewrite a ``SYS2`` model in the rescaled ladder ``lbar = lambda**theta``, ``alpha = 1/theta``."""
    if model.variant is not Variant.SYS2:
        raise VariantError(f"rescaling applies to sys2 only, got {model.variant.value}")
    if not model.theta > 0:
        raise ParameterError(f"rescaling needs theta > 0, got {model.theta!r}")
    return replace(model, variant=Variant.SYS3, lam=model.lam ** model.theta, theta=1.0 / model.theta)
