"""Inequality verification and trajectory monitors.

Every check produces :class:`ReportEntry` records oriented so that the
inequality reads ``lhs >= rhs``; ``residual = lhs - rhs`` and an entry is
satisfied when ``residual >= -tol`` with ``tol = 1e-12 * max(|lhs|, |rhs|, 1)``.
Young-type chains are checked term by term as well as summed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, ParameterError, VariantError
from .functionals import (
    LyapunovCoeffs,
    LyapunovVariant,
    condition_values,
    derive_constant_c0,
    energy,
    lyapunov,
    sobolev_norm,
)
from .shell_model import ModelSpec, ShellState, Variant

REL_TOL = 1e-12


@dataclass(frozen=True)
class ReportEntry:
    condition_id: str
    satisfied: bool
    residual: float
    lhs: float
    rhs: float
    tol: float
    applicable: bool = True
    witness: object = None
    samples: int = 1
    failures: int = 0

    @property
    def scaled_residual(self) -> float:
        return self.residual / max(abs(self.lhs), abs(self.rhs), 1.0)

    @property
    def verdict(self) -> str:
        if not self.applicable:
            return "n/a"
        return "pass" if self.satisfied else "FAIL"


def make_entry(cid: str, lhs: float, rhs: float, witness=None, extra_ok: bool = True) -> ReportEntry:
    lhs, rhs = float(lhs), float(rhs)
    tol = REL_TOL * max(abs(lhs), abs(rhs), 1.0)
    residual = lhs - rhs
    ok = bool(residual >= -tol) and extra_ok
    return ReportEntry(cid, ok, residual, lhs, rhs, tol, witness=witness, failures=0 if ok else 1)


def not_applicable(cid: str, reason: str) -> ReportEntry:
    return ReportEntry(cid, True, 0.0, 0.0, 0.0, 0.0, applicable=False, witness=reason, failures=0)


@dataclass
class VerificationReport:
    entries: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.satisfied for e in self.entries if e.applicable)

    def violations(self) -> list:
        return [e for e in self.entries if e.applicable and not e.satisfied]

    def skipped(self) -> list:
        return [e for e in self.entries if not e.applicable]

    def __getitem__(self, cid: str) -> ReportEntry:
        for e in self.entries:
            if e.condition_id == cid:
                return e
        raise KeyError(cid)

    def ids(self) -> list:
        return [e.condition_id for e in self.entries]

    def to_text(self) -> str:
        """One line per condition: ``id residual verdict [failures/samples]``."""
        lines = []
        for e in self.entries:
            line = f"{e.condition_id} {e.residual:.17g} {e.verdict}"
            if e.samples > 1:
                line += f" {e.failures}/{e.samples}"
            lines.append(line)
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def aggregate(cls, reports: Sequence["VerificationReport"]) -> "VerificationReport":
        """Merge per-state reports, keeping each condition's worst scaled residual."""
        worst: dict = {}
        order: list = []
        for report in reports:
            for e in report.entries:
                prev = worst.get(e.condition_id)
                if prev is None:
                    order.append(e.condition_id)
                    worst[e.condition_id] = e
                    continue
                applicable = prev.applicable or e.applicable
                keep = prev
                if e.applicable and (not prev.applicable or e.scaled_residual < prev.scaled_residual):
                    keep = e
                worst[e.condition_id] = replace(
                    keep,
                    applicable=applicable,
                    satisfied=prev.satisfied and e.satisfied,
                    samples=prev.samples + e.samples,
                    failures=prev.failures + e.failures,
                )
        return cls([worst[cid] for cid in order])


def _powers(lam, exponent, idx):
    return np.power(float(lam), exponent * np.asarray(idx, dtype=float))


def _norm_sq(x, s, lam):
    return sobolev_norm(x, s, lam) ** 2


def _nonnegative(state: ShellState) -> bool:
    return bool(np.all(state.a >= 0) and np.all(state.b >= 0))


def verify_triple_lemma(state: ShellState, lam: float, gamma: float, theta: float,
                        c0: Optional[float] = None) -> VerificationReport:
    """Cubic lower bounds, norm comparisons, bilinear and cubic upper bounds.

    Entries ``triple.i.*`` need ``theta > 3 + gamma`` and a nonnegative state,
    ``triple.ii.*`` need ``theta > 3 + gamma``, ``triple.iv.*`` need a
    nonnegative state; otherwise they are marked not applicable.
    """
    a, b = state.a, state.b
    n = state.n
    j = np.arange(1, n + 1)
    s = 2 * gamma + theta
    hyp = theta > 3 + gamma
    pos = _nonnegative(state)
    entries = []

    ids_i = ["triple.i.a", "triple.i.b", "triple.i.b_hall"]
    if hyp and pos:
        if c0 is None:
            c0 = derive_constant_c0(lam, gamma, theta)
        na = sobolev_norm(a, gamma + 1, lam)
        nb = sobolev_norm(b, gamma + 1, lam)
        entries.append(make_entry(ids_i[0], math.fsum(_powers(lam, s, j) * a ** 3), c0 * na ** 3))
        entries.append(make_entry(ids_i[1], math.fsum(_powers(lam, s, j) * b ** 3), c0 * nb ** 3))
        entries.append(make_entry(ids_i[2], math.fsum(_powers(lam, s + 1, j) * b ** 3), c0 * nb ** 3))
    else:
        reason = "needs theta > 3 + gamma" if not hyp else "needs a nonnegative state"
        entries += [not_applicable(cid, reason) for cid in ids_i]

    blow = theta / 3 + 2 * gamma / 3
    if hyp:
        entries.append(make_entry("triple.ii.a", sobolev_norm(a, blow, lam), sobolev_norm(a, gamma + 1, lam)))
        entries.append(make_entry("triple.ii.b", sobolev_norm(b, blow, lam), sobolev_norm(b, gamma + 1, lam)))
    else:
        entries += [not_applicable(cid, "needs theta > 3 + gamma") for cid in ("triple.ii.a", "triple.ii.b")]

    w = _powers(lam, 2 * gamma + 2, j)
    na2 = _norm_sq(a, gamma + 1, lam)
    nb2 = _norm_sq(b, gamma + 1, lam)
    shift = lam ** (-gamma - 1)
    entries.append(make_entry("triple.iii.aa", shift * na2, math.fsum(w[:-1] * a[:-1] * a[1:])))
    entries.append(make_entry("triple.iii.bb", shift * nb2, math.fsum(w[:-1] * b[:-1] * b[1:])))
    entries.append(make_entry("triple.iii.ab", 0.5 * (na2 + nb2), math.fsum(w * a * b)))
    entries.append(make_entry("triple.iii.ba", 0.5 * shift * (na2 + nb2), math.fsum(w[:-1] * b[:-1] * a[1:])))

    ids_iv = ["triple.iv.aa", "triple.iv.bb", "triple.iv.ba"]
    if pos:
        ws = _powers(lam, s, j)
        ba3 = sobolev_norm(a, blow, lam) ** 3
        bb3 = sobolev_norm(b, blow, lam) ** 3
        entries.append(make_entry(ids_iv[0], 2 * ba3, math.fsum(ws[:-1] * a[:-1] ** 2 * a[1:])))
        entries.append(make_entry(ids_iv[1], 2 * bb3, math.fsum(ws[:-1] * b[:-1] ** 2 * b[1:])))
        entries.append(make_entry(ids_iv[2], ba3 + bb3, math.fsum(ws[:-1] * b[:-1] ** 2 * a[1:])))
    else:
        entries += [not_applicable(cid, "needs a nonnegative state") for cid in ids_iv]
    return VerificationReport(entries)


def _young_terms(state: ShellState, lam, gamma, theta, variant):
    """Yield ``(id, larger_side_terms, smaller_side_terms)`` over ``j = 1..N-2``."""
    a, b = state.a, state.b
    n = state.n
    m = max(n - 2, 0)
    j = np.arange(1, m + 1)
    s = 2 * gamma + theta
    sh = s + 1
    a0, a1, a2 = a[:m], a[1:m + 1], a[2:m + 2]
    b0, b1, b2 = b[:m], b[1:m + 1], b[2:m + 2]
    P = lambda p, k: _powers(lam, p, j + k)
    half = lam ** (-0.5 * s)
    mix = P(2 * gamma, 0) * P(theta, 1)  # lam_j^{2g} lam_{j+1}^theta
    tail = lam ** (-4 * gamma - theta)
    lz = lam ** (-2 * gamma)

    one = ("1", P(s, 0) * a0 * a1 ** 2,
           0.5 * half * P(s, 1) * a1 ** 3 + 0.5 * half * P(s, 0) * a0 ** 2 * a1)
    triple_a = ("", mix * a0 * a1 * a2,
                0.5 * lam ** theta * P(s, 0) * a0 ** 2 * a1 + 0.25 * lz * P(s, 1) * a1 ** 2 * a2
                + 0.25 * tail * P(s, 2) * a2 ** 3)
    bab = ("", P(s, 0) * b0 * a1 * b1,
           0.5 * half * P(s, 0) * b0 ** 2 * a1 + 0.5 * half * P(s, 1) * a1 * b1 ** 2)

    if variant is LyapunovVariant.MHD:
        yield "mhd.young.1", one[1], one[2]
        yield "mhd.young.2", triple_a[1], triple_a[2]
        yield "mhd.young.3", bab[1], bab[2]
        yield ("mhd.young.4", mix * a0 * b1 * b2,
               lz / 3 * (P(s, 0) * a0 ** 3 + P(s, 1) * b1 ** 3 + P(s, 2) * b2 ** 3))
        yield ("mhd.young.5", P(s, 0) * b0 * a1 ** 2,
               0.5 * half * P(s, 0) * b0 ** 2 * a1 + 0.5 * half * P(s, 1) * a1 ** 3)
        yield ("mhd.young.6", mix * b0 * a1 * a2,
               0.5 * lam ** theta * P(s, 0) * b0 ** 2 * a1 + 0.25 * lz * P(s, 1) * a1 ** 2 * a2
               + 0.25 * tail * P(s, 2) * a2 ** 3)
        yield ("mhd.young.7", mix * b0 * b1 * b2,
               0.5 * lam ** theta * P(s, 0) * b0 ** 2 * b1 + 0.25 * lz * P(s, 1) * b1 ** 2 * b2
               + 0.25 * tail * P(s, 2) * b2 ** 3)
        yield ("mhd.young.8", 2 * P(s, 0) * a0 * b0 * a1,
               P(s, 0) * a0 ** 2 * a1 + P(s, 0) * b0 ** 2 * a1)
        return

    yield "hall.young.1", one[1], one[2]
    yield "hall.young.2", bab[1], bab[2]
    yield "hall.young.3", triple_a[1], triple_a[2]
    q = lam ** (-(2 * gamma + 5.0 / 3.0))
    yield ("hall.young.4", mix * a0 * b1 * b2,
           q / 3 * (P(s, 0) * a0 ** 3 + P(sh, 1) * b1 ** 3 + P(sh, 2) * b2 ** 3))
    yield ("hall.young.5", mix * b0 * b1 * a2,
           0.5 * lam ** (theta - 1) * P(sh, 0) * b0 ** 2 * b1
           + lam ** (-2 * gamma - 2) / 6 * P(sh, 1) * b1 ** 3
           + tail / 3 * P(s, 2) * a2 ** 3)
    yield ("hall.young.6", P(sh, 0) * b0 * b1 ** 2,
           0.5 * P(sh, 0) * b0 ** 2 * b1 + 0.5 * lam ** (-sh) * P(sh, 1) * b1 ** 3)
    yield ("hall.young.7", P(2 * gamma, 0) * P(theta + 1, 1) * b0 * b1 * b2,
           0.5 * lam ** (theta + 1) * P(sh, 0) * b0 ** 2 * b1 + 0.25 * lz * P(sh, 1) * b1 ** 2 * b2
           + 0.25 * lam ** (-4 * gamma - theta - 1) * P(sh, 2) * b2 ** 3)


def verify_young_chain(state: ShellState, lam: float, gamma: float, theta: float,
                       variant) -> VerificationReport:
    """Check the Young-inequality estimates of the negative flux terms.

    Each entry compares the sums over ``j = 1..N-2``; it also fails if any
    single shell violates the inequality. The witness is the worst shell.
    """
    variant = LyapunovVariant(variant)
    for name, arr in (("a", state.a), ("b", state.b)):
        bad = np.flatnonzero(arr < 0)
        if bad.size:
            k = int(bad[0])
            raise ParameterError(f"negative component {name}_{k + 1} = {arr[k]!r}; Young chains need a nonnegative state")
    entries = []
    for cid, smaller, larger in _young_terms(state, lam, gamma, theta, variant):
        if smaller.size:
            gap = larger - smaller
            tol = REL_TOL * np.maximum(np.maximum(np.abs(larger), np.abs(smaller)), 1.0)
            worst = int(np.argmin(gap / np.maximum(np.abs(larger), 1.0)))
            termwise_ok = bool(np.all(gap >= -tol))
            witness = {"shell": worst + 1, "gap": float(gap[worst])}
        else:
            termwise_ok, witness = True, None
        entries.append(make_entry(cid, math.fsum(larger), math.fsum(smaller), witness, termwise_ok))
    return VerificationReport(entries)


def verify_parameter_conditions(coeffs: LyapunovCoeffs, lam: float, gamma: float,
                                theta: float) -> VerificationReport:
    """One entry per parameter condition of the selected functional.

    The two conditions bounded below by the cubic gain also require that gain
    to be strictly positive.
    """
    entries = []
    gain_ok = coeffs.cubic_gain > 0
    gain_ids = {f"{coeffs.variant.value}.cond.1", f"{coeffs.variant.value}.cond.2"}
    for cid, (lhs, rhs) in condition_values(coeffs, lam, gamma, theta).items():
        snapshot = {"c1": coeffs.c1, "c2": coeffs.c2, "c3": coeffs.c3, "c4": coeffs.c4}
        entries.append(make_entry(cid, lhs, rhs, snapshot, gain_ok if cid in gain_ids else True))
    return VerificationReport(entries)


# Lyapunov rate via the shell identities

def _ladder(lam, p, n, shift=0):
    return _powers(lam, p, np.arange(1, n + 1) + shift)


def _pad(x, k=2):
    return np.concatenate([x, np.zeros(k)])


def lyapunov_rate(model: ModelSpec, state: ShellState, coeffs: LyapunovCoeffs) -> float:
    """``dL/dt`` assembled from the closed-form shell identities.

    The pair products ``a_j a_{j+1}`` (and ``b_j a_{j+1}``, ``b_j b_{j+1}``)
    contribute for ``j <= N-1`` only: under the zero closure the product at
    ``j = N`` vanishes identically. Requires the forward-cascade model; the
    MHD functional additionally requires ``d_i = 0``.
    """
    if model.variant is not Variant.SYS2:
        raise VariantError("the Lyapunov identities are written for sys2")
    if coeffs.variant is LyapunovVariant.MHD and model.d_i != 0:
        raise ParameterError("the MHD functional identities need d_i = 0")
    lam, th, g = model.lam, model.theta, coeffs.gamma
    nu, mu, di = model.nu, model.mu, model.d_i
    n = state.n
    s = 2 * g + th
    a, b = _pad(state.a), _pad(state.b)
    am = np.concatenate([[0.0], a[:-1]])
    bm = np.concatenate([[0.0], b[:-1]])
    A0, A1, A2 = a[:n], a[1:n + 1], a[2:n + 2]
    B0, B1, B2 = b[:n], b[1:n + 1], b[2:n + 2]
    Am, Bm = am[:n], bm[:n]
    w2 = _ladder(lam, 2 * g + 2, n)
    ws = _ladder(lam, s, n)
    wsh = _ladder(lam, s + 1, n)
    wg = _ladder(lam, 2 * g, n)
    t_prev = _ladder(lam, th, n, -1)
    t_next = _ladder(lam, th, n, 1)
    h_prev = _ladder(lam, th + 1, n, -1)
    h_next = _ladder(lam, th + 1, n, 1)
    pair = np.arange(n) < n - 1
    fs = lambda x: math.fsum(x)
    lg = lam ** (2 * g)

    # d/dt of the weighted a_j a_{j+1} products
    aa = (-nu * (1 + lam ** 2) * w2 * A0 * A1 + ws * A0 ** 3 + ws * A0 * B0 ** 2
          + t_prev * wg * Am ** 2 * A1 + t_prev * wg * Bm ** 2 * A1
          - ws * A0 * A1 ** 2 - wg * t_next * A0 * A1 * A2
          - ws * B0 * A1 * B1 - wg * t_next * A0 * B1 * B2)
    # gamma-weighted energy with Hall flux scaled by d_i
    en = (-2 * nu * fs(w2 * A0 ** 2) - 2 * mu * fs(w2 * B0 ** 2)
          + 2 * (lg - 1) * fs(ws * A0 ** 2 * A1) + 2 * (lg - 1) * fs(ws * B0 ** 2 * A1)
          + 2 * di * (lg - 1) * fs(wsh * B0 ** 2 * B1))
    if coeffs.variant is LyapunovVariant.MHD:
        ba = (-(mu + nu * lam ** 2) * w2 * B0 * A1 + ws * B0 ** 3 + ws * A0 ** 2 * B0
              + ws * A0 * A1 * B1 - ws * B0 * A1 ** 2
              - wg * t_next * B0 * A1 * A2 - wg * t_next * B0 * B1 * B2)
        ab = (-(nu + mu) * fs(w2 * A0 * B0) + (lg + 1) * fs(ws * A0 ** 2 * B1)
              + (lg - 1) * fs(ws * B0 ** 2 * B1) - 2 * fs(ws * A0 * B0 * A1))
        return fs([en, coeffs.c1 * fs(aa[pair]), coeffs.c2 * fs(ba[pair]), coeffs.c3 * ab])
    bb = (-mu * (1 + lam ** 2) * w2 * B0 * B1 + di * wsh * B0 ** 3 + ws * A0 * B1 ** 2
          + wg * t_next * B0 * A1 * B2 + di * h_prev * wg * Bm ** 2 * B1
          - ws * B0 * A1 * B1 - wg * t_next * B0 * B1 * A2
          - di * wsh * B0 * B1 ** 2 - di * wg * h_next * B0 * B1 * B2)
    return fs([en, coeffs.c1 * fs(aa[pair]), coeffs.c2 * fs(bb[pair])])


def lyapunov_gradient(state: ShellState, coeffs: LyapunovCoeffs, lam: float) -> np.ndarray:
    """Gradient of the Lyapunov functional with respect to ``[a, b]``."""
    a, b = state.a, state.b
    n = state.n
    w = _ladder(lam, 2 * coeffs.gamma, n)
    ga = 2 * w * a
    gb = 2 * w * b
    # c1 * sum w_j a_j a_{j+1}
    ga[:-1] += coeffs.c1 * w[:-1] * a[1:]
    ga[1:] += coeffs.c1 * w[:-1] * a[:-1]
    if coeffs.variant is LyapunovVariant.MHD:
        gb[:-1] += coeffs.c2 * w[:-1] * a[1:]
        ga[1:] += coeffs.c2 * w[:-1] * b[:-1]
        ga += coeffs.c3 * w * b
        gb += coeffs.c3 * w * a
    else:
        gb[:-1] += coeffs.c2 * w[:-1] * b[1:]
        gb[1:] += coeffs.c2 * w[:-1] * b[:-1]
    return np.concatenate([ga, gb])


def lyapunov_rate_lower_bound(model: ModelSpec, state: ShellState, coeffs: LyapunovCoeffs) -> float:
    """Lower bound on ``dL/dt`` after all Young estimates (dissipation plus cubic gain).

    The dissipative terms are those produced by the individual estimates
    (weighted by ``c1``, ``c2``, ``c3``). The Hall form assumes ``d_i = 1``.
    """
    if coeffs.variant is LyapunovVariant.HALL and model.d_i != 1:
        raise ParameterError("the Hall lower bound is derived for d_i = 1")
    lam, th, g = model.lam, model.theta, coeffs.gamma
    nu, mu = model.nu, model.mu
    a, b = state.a, state.b
    n = state.n
    w2 = _ladder(lam, 2 * g + 2, n)
    ws = _ladder(lam, 2 * g + th, n)
    fs = math.fsum
    pair = lambda x, y: fs(w2[:-1] * x[:-1] * y[1:])
    diss = -2 * nu * fs(w2 * a * a) - 2 * mu * fs(w2 * b * b)
    if coeffs.variant is LyapunovVariant.MHD:
        diss += (-coeffs.c1 * nu * (1 + lam ** 2) * pair(a, a)
                 - coeffs.c2 * (mu + nu * lam ** 2) * pair(b, a)
                 - coeffs.c3 * (nu + mu) * fs(w2 * a * b))
        gain = coeffs.c4 * (fs(ws * a ** 3) + fs(ws * b ** 3))
    else:
        wsh = _ladder(lam, 2 * g + th + 1, n)
        diss += (-coeffs.c1 * nu * (1 + lam ** 2) * pair(a, a)
                 - coeffs.c2 * mu * (1 + lam ** 2) * pair(b, b))
        gain = coeffs.c3 * (fs(ws * a ** 3) + fs(wsh * b ** 3))
    return diss + gain


def spectral_front(state: ShellState, fraction: float = 0.01) -> int:
    """Largest shell index holding at least ``fraction`` of the total energy (0 if none)."""
    e = 0.5 * (state.a ** 2 + state.b ** 2)
    total = math.fsum(e)
    if not total > 0:
        return 0
    idx = np.flatnonzero(e >= fraction * total)
    return int(idx[-1]) + 1 if idx.size else 0


@dataclass(frozen=True)
class RiccatiSample:
    t: float
    L: float
    dLdt: float
    bound: float
    satisfied: bool
    front: int


@dataclass(frozen=True)
class RiccatiReport:
    samples: tuple
    initial_size: float  # ||a(0)||_gamma^2 + ||b(0)||_gamma^2
    M0: float
    n_shells: int

    @property
    def above_threshold(self) -> bool:
        return self.initial_size > self.M0 ** 2

    def gated(self, margin: int = 3) -> list:
        """Samples whose spectral front stays at or below ``N - margin``."""
        return [s for s in self.samples if s.front <= self.n_shells - margin]

    def fraction_satisfied(self, margin: int = 3) -> float:
        g = self.gated(margin)
        return sum(s.satisfied for s in g) / len(g) if g else float("nan")


def riccati_monitor(trajectory, coeffs: LyapunovCoeffs, lam: Optional[float] = None) -> RiccatiReport:
    """Compare centered differences of ``L`` with ``K * L**1.5`` at interior samples."""
    samples = trajectory.samples
    if len(samples) < 3:
        raise InsufficientDataError(f"riccati monitor needs >= 3 samples, got {len(samples)}")
    if lam is None:
        lam = trajectory.model.wavenumber_base
    t = np.array([s.t for s in samples])
    L = np.array([lyapunov(s, coeffs, lam) for s in samples])
    out = []
    for i in range(1, len(samples) - 1):
        rate = (L[i + 1] - L[i - 1]) / (t[i + 1] - t[i - 1])
        bound = coeffs.K * max(L[i], 0.0) ** 1.5
        tol = REL_TOL * max(abs(rate), bound, 1.0)
        out.append(RiccatiSample(t[i], L[i], rate, bound, bool(rate >= bound - tol),
                                 spectral_front(samples[i])))
    s0 = samples[0]
    size0 = sobolev_norm(s0.a, coeffs.gamma, lam) ** 2 + sobolev_norm(s0.b, coeffs.gamma, lam) ** 2
    return RiccatiReport(tuple(out), size0, coeffs.M0, s0.n)


class PositivityLoss(NamedTuple):
    t: float
    shell: int
    component: str
    value: float


def first_negative(state: ShellState, rel: float = 1e-12) -> Optional[PositivityLoss]:
    scale = max(float(np.max(np.abs(state.a), initial=0.0)), float(np.max(np.abs(state.b), initial=0.0)))
    thresh = -rel * scale
    for name, arr in (("a", state.a), ("b", state.b)):
        bad = np.flatnonzero(arr < thresh)
        if bad.size:
            k = int(bad[0])
            return PositivityLoss(state.t, k + 1, name, float(arr[k]))
    return None


def positivity_watch(trajectory) -> Optional[PositivityLoss]:
    """Earliest sample with a component below ``-1e-12`` times the current max amplitude."""
    for state in trajectory.samples:
        hit = first_negative(state)
        if hit is not None:
            return hit
    return None


def integrability_accumulator(trajectory, lam: float, s_a: float, s_b: float) -> float:
    """Trapezoid integral of ``||a||_{s_a}**3 + ||b||_{s_b}**3`` over the trajectory."""
    samples = trajectory.samples
    if len(samples) < 2:
        return 0.0
    t = np.array([s.t for s in samples])
    f = np.array([sobolev_norm(s.a, s_a, lam) ** 3 + sobolev_norm(s.b, s_b, lam) ** 3 for s in samples])
    return math.fsum(0.5 * np.diff(t) * (f[1:] + f[:-1]))


def energy_law_residuals(trajectory) -> np.ndarray:
    """Per-interval residual of the energy law, relative to the state size.

    With ``Q = ||a||_0^2 + ||b||_0^2`` and ``W`` the dissipated energy integrated
    alongside the solution, the law ``dQ/dt = -2nu||a||_1^2 - 2mu||b||_1^2``
    reads ``Q + W = const``. Entry ``k`` is ``|dQ_k + dW_k| / max(Q_{k-1}, Q_k)``
    over the interval between samples ``k-1`` and ``k``.
    """
    samples = trajectory.samples
    w = trajectory.dissipated
    if len(w) != len(samples):
        raise InsufficientDataError("trajectory carries no dissipation record")
    q = np.array([2.0 * energy(s) for s in samples])
    w = np.asarray(w, dtype=float)
    return np.abs(np.diff(q) + np.diff(w)) / np.maximum(np.maximum(q[1:], q[:-1]), 1e-300)


def random_damped_state(rng: np.random.Generator, n: int, amplitude: Optional[float] = None,
                        ratio: Optional[float] = None, sparsity: float = 0.2) -> ShellState:
    """Nonnegative state ``A * u_j * r**j`` with uniform ``u_j`` and random zeros.

    Unspecified amplitude and ratio are drawn log-uniformly in ``[1e-3, 1e3]``
    and uniformly in ``[0.1, 0.95]``.
    """
    if amplitude is None:
        amplitude = 10.0 ** rng.uniform(-3, 3)
    if ratio is None:
        ratio = rng.uniform(0.1, 0.95)
    j = np.arange(1, n + 1, dtype=float)
    damp = amplitude * np.power(ratio, j)
    u = rng.random((2, n)) * (rng.random((2, n)) >= sparsity)
    return ShellState(0.0, u[0] * damp, u[1] * damp)


SUITES = ("triple", "young", "conditions", "all")


def run_suite(suite: str, lam: float, theta: float, gamma: float, variants=("mhd", "hall"),
              seed: int = 0, count: int = 1000, n_shells: int = 12,
              nu: float = 0.0, mu: float = 0.0) -> VerificationReport:
    """Run a verification suite and return the aggregated (worst-case) report.

    Randomized parts draw ``count`` states from ``random_damped_state`` with
    ``numpy.random.default_rng(seed)``. The ``conditions`` part raises
    :class:`~dyadic_mhd.errors.InfeasibleError` if coefficient selection fails.
    """
    from .functionals import select_coefficients

    if suite not in SUITES:
        raise ParameterError(f"unknown suite {suite!r}; choose from {SUITES}")
    variants = [LyapunovVariant(v) for v in variants]
    reports = []
    if suite in ("conditions", "all"):
        for v in variants:
            coeffs = select_coefficients(v, lam, gamma, theta, nu, mu)
            reports.append(verify_parameter_conditions(coeffs, lam, gamma, theta))
    if suite in ("triple", "young", "all"):
        rng = np.random.default_rng(seed)
        c0 = derive_constant_c0(lam, gamma, theta) if theta > 3 + gamma else None
        for _ in range(count):
            state = random_damped_state(rng, n_shells)
            if suite in ("triple", "all"):
                reports.append(verify_triple_lemma(state, lam, gamma, theta, c0))
            if suite in ("young", "all"):
                for v in variants:
                    reports.append(verify_young_chain(state, lam, gamma, theta, v))
    return VerificationReport.aggregate(reports)
