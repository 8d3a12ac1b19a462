"""Energy expansions of E_alpha restricted to the bubble set, checked numerically.

Everything here integrates in the chart centred on the bubble with the
composite polar rule from :mod:`bubblelab.torus`; on the flat torus the
integrals do not depend on the centre, which is therefore fixed at the origin.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import torus as T
from .bubble import LAMBDA_MIN, BubbleMap, BubbleParams
from .greens import GreensTorus

JAY_TORUS = -2 * np.pi


class DerivativeMismatch(ArithmeticError):
    """The variational and finite-difference derivatives disagree."""


@dataclass
class ExpansionRecord:
    lam: float
    alpha: float
    e_alpha_z: float = np.nan
    lemma21_residual: float = np.nan
    d_lambda_e: float = np.nan
    d_lambda_e_fd: float = np.nan
    prop41_scaled: float = np.nan  # lam^(3-2 alpha) dE/dlam
    prop41_leading: float = np.nan  # 8 pi (jay lam^-2 + (alpha - 1))
    prop41_defect: float = np.nan
    d_center_e: tuple = (np.nan, np.nan)
    d_center_e_fd: tuple = (np.nan, np.nan)
    prop42_scaled: float = np.nan  # |lam^(4-2 alpha) grad_A E|
    meta: dict = field(default_factory=dict)

    def row(self) -> dict:
        d = asdict(self)
        d.pop("meta")
        dc, dcf = d.pop("d_center_e"), d.pop("d_center_e_fd")
        d["d_center_e1"], d["d_center_e2"] = dc
        d["d_center_e1_fd"], d["d_center_e2_fd"] = dcf
        return d


class OnZ:
    """Energy and its scale/centre derivatives at z_{lam, 0} on a fixed node set.

    The quadrature is built once for ``lam`` and reused for the nearby
    scales of the finite-difference stencils.
    """

    def __init__(self, lam: float, greens: GreensTorus | None = None, refine: int = 1):
        if lam <= LAMBDA_MIN:
            raise ValueError(f"lambda must exceed lambda_min = {LAMBDA_MIN}")
        self.lam = float(lam)
        self.greens = greens or GreensTorus()
        self.quad = T.torus_quadrature(lam, refine=refine)
        self.x = self.quad.points
        self.H2 = self.greens.regular_jet(self.x, 2)
        self._H3 = None

    @property
    def H3(self):
        if self._H3 is None:
            self._H3 = self.greens.regular_jet(self.x, 3)
        return self._H3

    def _bm(self, lam):
        return BubbleMap(BubbleParams(lam), self.greens)

    def _grad_sq(self, lam, x=None, H=None):
        x = self.x if x is None else x
        H = self.H2 if H is None else H
        bm = self._bm(lam)
        g = [bm.jet(x, e, None, H=H).a for e in np.eye(2)]
        return g[0], g[1]

    def energy(self, alpha: float, lam: float | None = None, x=None, H=None) -> float:
        lam = self.lam if lam is None else lam
        g1, g2 = self._grad_sq(lam, x, H)
        s = np.sum(g1**2 + g2**2, axis=-1)
        dens = 2.0**alpha * np.expm1(alpha * np.log1p(0.5 * s))
        return 0.5 * (self.quad.integrate(dens) + 2.0**alpha)

    def dirichlet_excess(self, lam=None) -> float:
        """1/2 int |grad z|^2 - 4 pi."""
        lam = self.lam if lam is None else lam
        g1, g2 = self._grad_sq(lam)
        return self.quad.integrate(0.5 * np.sum(g1**2 + g2**2, axis=-1)) - 4 * np.pi

    def d_lambda(self, alpha: float) -> float:
        """alpha int (2 + |grad z|^2)^(alpha-1) grad z . grad d_lambda z."""
        bm = self._bm(self.lam)
        J = [bm.jet(self.x, e, "lam", H=self.H2) for e in np.eye(2)]
        s = sum(np.sum(j.a**2, axis=-1) for j in J)
        integrand = sum(np.sum(j.a * j.ab, axis=-1) for j in J)
        return alpha * self.quad.integrate((2.0 + s) ** (alpha - 1) * integrand)

    def d_lambda_fd(self, alpha: float, rel_step: float = 1e-4) -> float:
        h = rel_step * self.lam
        ep = self.energy(alpha, self.lam + h)
        em = self.energy(alpha, self.lam - h)
        ep2 = self.energy(alpha, self.lam + 2 * h)
        em2 = self.energy(alpha, self.lam - 2 * h)
        return (8 * (ep - em) - (ep2 - em2)) / (12 * h)

    def d_center(self, alpha: float, A) -> float:
        """alpha int w grad z . grad(grad_A z), with grad_A z = -A . grad_x z."""
        A = np.asarray(A, dtype=float)
        bm = self._bm(self.lam)
        J = [bm.jet(self.x, e, A, H=self.H3) for e in np.eye(2)]
        s = sum(np.sum(j.a**2, axis=-1) for j in J)
        integrand = sum(np.sum(j.a * (-j.ab), axis=-1) for j in J)
        return alpha * self.quad.integrate((2.0 + s) ** (alpha - 1) * integrand)

    def d_center_fd(self, alpha: float, A, step: float = 1e-5) -> float:
        """Central difference of E(z_{lam, sA}) in s on the unshifted node set."""
        A = np.asarray(A, dtype=float)
        vals = []
        for s in (step, -step):
            xs = T.chart(s * A, self.x)
            Hs = self.greens.regular_jet(xs, 2)
            vals.append(self.energy(alpha, x=xs, H=Hs))
        return (vals[0] - vals[1]) / (2 * step)


def lemma21_residual(e_alpha_z: float, lam: float, alpha: float) -> float:
    """E_alpha(z) - |Sigma| - 4 pi - 4 pi (lam^(2 alpha - 2) - 1)."""
    return e_alpha_z - 1.0 - 4 * np.pi - 4 * np.pi * np.expm1((2 * alpha - 2) * np.log(lam))


def prop41_leading(lam: float, alpha: float, jay: float = JAY_TORUS) -> float:
    return 8 * np.pi * (jay / lam**2 + (alpha - 1))


def check_agreement(a: float, b: float, rtol: float, atol: float = 0.0, what: str = "derivative"):
    if abs(a - b) > rtol * max(abs(a), abs(b)) + atol:
        raise DerivativeMismatch(f"{what}: variational {a:.12g} vs finite difference {b:.12g}")


# ----------------------------------------------------------------------------
# sweeps


def lemma21_sweep(lams, alphas, refine: int = 1) -> list[ExpansionRecord]:
    out = []
    for lam in lams:
        oz = OnZ(lam, refine=refine)
        for alpha in alphas:
            e = oz.energy(alpha)
            out.append(ExpansionRecord(lam=lam, alpha=alpha, e_alpha_z=e,
                                       lemma21_residual=lemma21_residual(e, lam, alpha)))
    return out


def prop41_sweep(lams, alphas, rtol: float = 1e-5, refine: int = 1) -> list[ExpansionRecord]:
    out = []
    for lam in lams:
        oz = OnZ(lam, refine=refine)
        for alpha in alphas:
            dv = oz.d_lambda(alpha)
            df = oz.d_lambda_fd(alpha)
            check_agreement(dv, df, rtol, what=f"dE/dlambda at lambda={lam}, alpha={alpha}")
            scaled = lam ** (3 - 2 * alpha) * dv
            lead = prop41_leading(lam, alpha)
            out.append(ExpansionRecord(lam=lam, alpha=alpha, d_lambda_e=dv, d_lambda_e_fd=df,
                                       prop41_scaled=scaled, prop41_leading=lead,
                                       prop41_defect=scaled - lead))
    return out


def prop42_sweep(lams, alphas, directions=((1.0, 0.0), (0.0, 1.0)), refine: int = 1,
                 fd_step: float = 1e-5) -> list[ExpansionRecord]:
    """Centre derivatives; the torus leading term 4 pi grad jay vanishes identically.

    Both routes return round-off here, so they are compared against the
    finite-difference noise floor ~ eps * E / step rather than relatively.
    """
    out = []
    for lam in lams:
        oz = OnZ(lam, refine=refine)
        for alpha in alphas:
            dv = tuple(oz.d_center(alpha, A) for A in directions)
            df = tuple(oz.d_center_fd(alpha, A, step=fd_step) for A in directions)
            floor = 100 * np.finfo(float).eps * oz.energy(alpha) / fd_step
            for a_, b_ in zip(dv, df):
                check_agreement(a_, b_, 1e-5, atol=floor, what="grad_A E")
            mag = float(np.hypot(*dv))
            out.append(ExpansionRecord(lam=lam, alpha=alpha, d_center_e=dv, d_center_e_fd=df,
                                       prop42_scaled=lam ** (4 - 2 * alpha) * mag))
    return out


def zero_crossing(alpha: float, lo: float, hi: float, tol: float = 1e-4, refine: int = 1) -> float:
    """Bisection for the root of dE_alpha(z_lam)/dlambda in lambda."""
    f = lambda lam: OnZ(lam, refine=refine).d_lambda(alpha)
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise ValueError(f"no sign change of dE/dlambda on [{lo}, {hi}] (values {flo:.3g}, {fhi:.3g})")
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def loglog_slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float)))
    return float(np.polyfit(x, y, 1)[0])


def corollary22_check(records, delta: float = 0.1, bound: float = 1.2) -> dict:
    """Scales admitted to the delta-sublevel must have lam^(2 alpha - 2) <= bound."""
    admitted, violations = [], []
    for r in records:
        excess = r.e_alpha_z - 1.0 - 4 * np.pi
        if excess <= delta:
            v = r.lam ** (2 * r.alpha - 2)
            admitted.append((r.lam, r.alpha, v))
            if v > bound:
                violations.append((r.lam, r.alpha, v))
    return {"admitted": admitted, "violations": violations, "passed": not violations}
