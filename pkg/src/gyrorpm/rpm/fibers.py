"""Admissible angular velocities over points of the Poisson sphere.

Fixing the integral constants k and a base point nu, the admissible
velocities are the solutions of

    |A omega + lam|^2 = k1,   (A omega) . omega = k2,   (A omega + lam) . nu = k3.

The third equation is linear in omega, so every solution lies in a plane
with normal ``A nu`` (never zero for positive-definite inertia and unit
nu).  Substituting an orthonormal parametrization of that plane into the
two quadratic integrals leaves two conics in the plane coordinates
(s, t).  Eliminating t via the Bezout resultant of the two quadratics
gives a quartic in s,

    res(s) = (a f - c d)^2 - (a e - b d)(b f - c e),

whose real roots are back-substituted, polished by a damped Newton
iteration on the full 3x3 system, residual-filtered and clustered.  The
quartic is solved through companion-matrix eigenvalues, batched over all
base points at once; a base point is flagged *uncertain* when the
normalized quartic discriminant falls below ``DISCRIMINANT_TOL``
(roots colliding at a fold), and such points are excluded from component
adjacency downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import GyrostatParams, IntegralConstants
from ..errors import DomainError, SolveFailure

__all__ = [
    "FiberBatch",
    "FiberSolutionSet",
    "fiber_counts",
    "admissible_velocities",
    "q_factor",
    "RESIDUAL_TOL",
    "CLUSTER_TOL",
    "DISCRIMINANT_TOL",
]

#: accepted solutions must satisfy all three level equations to this scaled residual
RESIDUAL_TOL = 1e-8
#: solutions closer than this merge into one (fold roots colliding)
CLUSTER_TOL = 1e-6
#: normalized quartic discriminant below this flags the base point uncertain
DISCRIMINANT_TOL = 1e-10

_IMAG_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class FiberBatch:
    """Vectorized fiber solutions over a batch of base points.

    ``omegas`` is (n, 4, 3) with NaN padding; ``valid`` marks accepted
    roots, ``counts`` their number per base point, ``residuals`` the max
    scaled residual among accepted roots (0 where the fiber is empty) and
    ``uncertain`` the near-fold discriminant flag.
    """

    counts: np.ndarray
    omegas: np.ndarray
    valid: np.ndarray
    residuals: np.ndarray
    uncertain: np.ndarray


@dataclass(frozen=True, eq=False)
class FiberSolutionSet:
    """All admissible velocities over one base point."""

    nu: np.ndarray
    omegas: list
    residual: float
    uncertain: bool = False

    def __len__(self):
        return len(self.omegas)


def _scales(k: IntegralConstants) -> np.ndarray:
    return np.array([max(1.0, abs(k.k1)), max(1.0, abs(k.k2)), max(1.0, abs(k.k3))])


def _level_residuals(w, nus, k, params):
    """Residuals of the three level equations, scaled; w broadcast (..., 3)."""
    m = params.A * w + params.lam
    F = np.stack([
        np.einsum("...i,...i->...", m, m) - k.k1,
        np.einsum("...i,...i->...", params.A * w, w) - k.k2,
        np.einsum("...i,...i->...", m, nus) - k.k3,
    ], axis=-1)
    return F, np.max(np.abs(F) / _scales(k), axis=-1)


def _discriminant_indicator(roots):
    """Vanishing factor of the quartic discriminant, scale-free.

    The monic discriminant is the product of the six squared pairwise
    root differences, so it approaches zero exactly through its smallest
    factor; testing that factor (squared separation over the root
    magnitude scale) against the threshold is the scale-robust form of
    the discriminant-magnitude test -- the full product is damped by the
    five benign factors and would misread moderate root spread as a
    collision.  Rows with any non-finite root return 0 (uncertain).
    """
    scale = 1.0 + np.max(np.abs(np.nan_to_num(roots, nan=0.0)), axis=1)
    smallest = np.full(len(roots), np.inf)
    for i in range(4):
        for j in range(i + 1, 4):
            smallest = np.minimum(smallest, np.abs(roots[:, i] - roots[:, j]) ** 2 / scale**2)
    return np.where(np.isfinite(roots).all(axis=1), smallest, 0.0)


def _conv12(p, q):
    # (s-linear) * (s-quadratic) -> s-cubic, batched, highest degree first
    return np.stack([
        p[:, 0] * q[:, 0],
        p[:, 0] * q[:, 1] + p[:, 1] * q[:, 0],
        p[:, 0] * q[:, 2] + p[:, 1] * q[:, 1],
        p[:, 1] * q[:, 2],
    ], axis=-1)


def _conv22(p, q):
    return np.stack([
        p[:, 0] * q[:, 0],
        p[:, 0] * q[:, 1] + p[:, 1] * q[:, 0],
        p[:, 0] * q[:, 2] + p[:, 1] * q[:, 1] + p[:, 2] * q[:, 0],
        p[:, 1] * q[:, 2] + p[:, 2] * q[:, 1],
        p[:, 2] * q[:, 2],
    ], axis=-1)


def _conv13(p, q):
    return np.stack([
        p[:, 0] * q[:, 0],
        p[:, 0] * q[:, 1] + p[:, 1] * q[:, 0],
        p[:, 0] * q[:, 2] + p[:, 1] * q[:, 1],
        p[:, 0] * q[:, 3] + p[:, 1] * q[:, 2],
        p[:, 1] * q[:, 3],
    ], axis=-1)


def _batch_quartic_roots(coeffs):
    """Roots of batched quartics (highest degree first), (n, 4) complex.

    Rows whose leading coefficient vanishes (degree drop) fall back to a
    per-row solve; pads with NaN.  Input rows are expected normalized to
    unit max-abs coefficient.
    """
    n = len(coeffs)
    roots = np.full((n, 4), np.nan + 0j, dtype=complex)
    lead_ok = np.abs(coeffs[:, 0]) > 1e-10
    if np.any(lead_ok):
        mon = coeffs[lead_ok] / coeffs[lead_ok, 0][:, None]
        comp = np.zeros((int(lead_ok.sum()), 4, 4))
        comp[:, 1, 0] = comp[:, 2, 1] = comp[:, 3, 2] = 1.0
        comp[:, 0, 3] = -mon[:, 4]
        comp[:, 1, 3] = -mon[:, 3]
        comp[:, 2, 3] = -mon[:, 2]
        comp[:, 3, 3] = -mon[:, 1]
        roots[lead_ok] = np.linalg.eigvals(comp)
    for i in np.flatnonzero(~lead_ok):
        c = np.trim_zeros(coeffs[i], "f")
        if len(c) >= 2:
            r = np.roots(c)
            roots[i, : len(r)] = r
    return roots


def fiber_counts(nus, k: IntegralConstants, params: GyrostatParams,
                 newton_iters: int = 3) -> FiberBatch:
    """Solve the fiber equations over a batch of unit base points.

    ``nus`` has shape (n, 3); every row must be unit within 1e-9 (the
    stricter per-point contract lives in :func:`admissible_velocities`).
    """
    nus = np.asarray(nus, dtype=float)
    if nus.ndim != 2 or nus.shape[1] != 3:
        raise ValueError(f"nus must have shape (n, 3), got {nus.shape}")
    n = len(nus)
    empty = FiberBatch(
        counts=np.zeros(n, dtype=int),
        omegas=np.full((n, 4, 3), np.nan),
        valid=np.zeros((n, 4), dtype=bool),
        residuals=np.zeros(n),
        uncertain=np.zeros(n, dtype=bool),
    )
    if n == 0 or k.k1 < k.k3**2 or k.k1 < 0 or k.k2 < 0:
        # Cauchy-Schwarz (k3^2 <= k1) and positive-definite energy make
        # these levels empty for every base point.
        return empty

    A, lam = params.A, params.lam
    normal = nus * A  # plane normal A nu; nonzero for unit nu and positive A
    assert np.all(np.einsum("ij,ij->i", normal, normal) > 0.0), "degenerate fiber plane"
    d = k.k3 - nus @ lam
    n2 = np.einsum("ij,ij->i", normal, normal)
    w0 = (d / n2)[:, None] * normal

    # orthonormal in-plane basis, seeded from the least-aligned coordinate axis
    axis = np.argmin(np.abs(normal), axis=1)
    e1 = np.cross(normal, np.eye(3)[axis])
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(normal, e1)
    e2 /= np.linalg.norm(e2, axis=1, keepdims=True)

    def dot(x, y):
        return np.einsum("ij,ij->i", x, y)

    # first level equation as quadratic in t with s-polynomial coefficients
    M0 = A * w0 + lam
    U, V = A * e1, A * e2
    pa = dot(V, V)
    pb = np.stack([2 * dot(U, V), 2 * dot(M0, V)], axis=-1)
    pc = np.stack([dot(U, U), 2 * dot(M0, U), dot(M0, M0) - k.k1], axis=-1)
    # second level equation (inertia inner product)
    qa = dot(A * e2, e2)
    qb = np.stack([2 * dot(A * e1, e2), 2 * dot(A * w0, e2)], axis=-1)
    qc = np.stack([dot(A * e1, e1), 2 * dot(A * w0, e1), dot(A * w0, w0) - k.k2], axis=-1)

    t2 = pa[:, None] * qc - qa[:, None] * pc
    u1 = pa[:, None] * qb - qa[:, None] * pb
    v3 = _conv12(pb, qc) - _conv12(qb, pc)
    quart = _conv22(t2, t2) - _conv13(u1, v3)

    coeff_scale = np.max(np.abs(quart), axis=1)
    degenerate = coeff_scale < 1e-12
    coeff_scale = np.where(degenerate, 1.0, coeff_scale)
    quart_n = quart / coeff_scale[:, None]

    roots = _batch_quartic_roots(quart_n)
    uncertain = _discriminant_indicator(roots) < DISCRIMINANT_TOL
    uncertain |= degenerate
    real = np.isfinite(roots) & (np.abs(roots.imag) <= _IMAG_TOL * (1.0 + np.abs(roots.real)))
    s = np.where(real, roots.real, np.nan)

    # t: eliminate the quadratic term between the two conics; fall back to
    # the quadratic formula on the first conic where the pencil degenerates
    def ev1(p):
        return p[:, None, 0] * s + p[:, None, 1]

    def ev2(p):
        return (p[:, None, 0] * s + p[:, None, 1]) * s + p[:, None, 2]

    den = qa[:, None] * ev1(pb) - pa[:, None] * ev1(qb)
    num = pa[:, None] * ev2(qc) - qa[:, None] * ev2(pc)
    with np.errstate(divide="ignore", invalid="ignore"):
        t_elim = num / den
        disc_q = ev1(pb) ** 2 - 4.0 * pa[:, None] * ev2(pc)
        sq = np.sqrt(np.maximum(disc_q, 0.0))
        t_quad_a = (-ev1(pb) + sq) / (2.0 * pa[:, None])
        t_quad_b = (-ev1(pb) - sq) / (2.0 * pa[:, None])
    den_scale = np.abs(qa[:, None] * pb[:, None, 1]) + np.abs(pa[:, None] * qb[:, None, 1]) + 1e-30
    use_elim = np.abs(den) > 1e-9 * den_scale

    def assemble(t):
        return w0[:, None, :] + s[..., None] * e1[:, None, :] + t[..., None] * e2[:, None, :]

    nu_b = np.broadcast_to(nus[:, None, :], (n, 4, 3))
    cands = []
    for t in (t_elim, t_quad_a, t_quad_b):
        w = assemble(t)
        _, res = _level_residuals(np.nan_to_num(w, nan=np.inf), nu_b, k, params)
        cands.append((w, res))
    # prefer the eliminated value; otherwise the better quadratic root
    w_e, r_e = cands[0]
    w_a, r_a = cands[1]
    w_b, r_b = cands[2]
    w_q = np.where((r_a <= r_b)[..., None], w_a, w_b)
    w = np.where(use_elim[..., None], w_e, w_q)
    w = np.where(real[..., None], w, np.nan)

    finite = np.isfinite(w).all(axis=-1)
    w = np.nan_to_num(w, nan=0.0)
    _, res_pre = _level_residuals(w, nu_b, k, params)
    res_pre = np.where(finite, res_pre, np.inf)

    # damped Newton polish on the full 3x3 system
    res = res_pre
    for _ in range(newton_iters):
        m = A * w + lam
        F, _ = _level_residuals(w, nu_b, k, params)
        J = np.stack([2 * A * m, 2 * A * w, A * nu_b], axis=-2)
        ok = finite & (res < np.inf)
        J = np.where(ok[..., None, None], J, np.eye(3))
        F = np.where(ok[..., None], F, 0.0)
        try:
            step = np.linalg.solve(J, F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            break
        for frac in (1.0, 0.5):
            w_try = w - frac * step
            _, res_try = _level_residuals(w_try, nu_b, k, params)
            better = ok & (res_try < res)
            w = np.where(better[..., None], w_try, w)
            res = np.where(better, res_try, res)
            step = np.where(better[..., None], 0.0, step)

    # a candidate that started close but ended non-finite means the polish
    # itself broke down rather than a spurious complex root
    blew_up = (res_pre < 1e-4) & ~np.isfinite(res)
    if np.any(blew_up):
        idx = int(np.argwhere(blew_up.any(axis=1))[0, 0])
        raise SolveFailure(f"Newton polish diverged at base point index {idx}")

    valid = finite & (res <= RESIDUAL_TOL)

    # cluster colliding roots, keeping the better-polished representative
    for i in range(4):
        for j in range(i + 1, 4):
            dij = np.linalg.norm(w[:, i] - w[:, j], axis=-1)
            dup = valid[:, i] & valid[:, j] & (dij < CLUSTER_TOL)
            take_j = dup & (res[:, j] < res[:, i])
            w[:, i] = np.where(take_j[:, None], w[:, j], w[:, i])
            res[:, i] = np.where(take_j, res[:, j], res[:, i])
            valid[:, j] &= ~dup

    w = np.where(valid[..., None], w, np.nan)
    counts = valid.sum(axis=1)
    max_res = np.where(counts > 0, np.max(np.where(valid, res, 0.0), axis=1), 0.0)
    return FiberBatch(counts=counts.astype(int), omegas=w, valid=valid,
                      residuals=max_res, uncertain=uncertain)


def admissible_velocities(nu, k: IntegralConstants,
                          params: GyrostatParams) -> FiberSolutionSet:
    """All admissible velocities over one base point of the Poisson sphere."""
    nu = np.asarray(nu, dtype=float).reshape(3)
    if abs(nu @ nu - 1.0) > 1e-12:
        raise ValueError(f"nu must be unit to 1e-12, | |nu|^2 - 1 | = {abs(nu @ nu - 1.0):.3e}")
    batch = fiber_counts(nu[None, :], k, params)
    ws = batch.omegas[0][batch.valid[0]]
    order = np.lexsort((ws[:, 2], ws[:, 1], ws[:, 0])) if len(ws) else []
    return FiberSolutionSet(
        nu=nu,
        omegas=[ws[i].copy() for i in order],
        residual=float(batch.residuals[0]),
        uncertain=bool(batch.uncertain[0]),
    )


def q_factor(omega, k: IntegralConstants, params: GyrostatParams) -> float:
    """Positive square-root factor of the boundary formula.

    ``sqrt((k1 - k3^2) / (k1 |omega|^2 - (k2 + omega . lam)^2))``; raises
    DomainError naming the offending factor when the numerator is
    negative or the denominator not positive.
    """
    omega = np.asarray(omega, dtype=float).reshape(3)
    num = k.k1 - k.k3**2
    if num < 0.0:
        raise DomainError("numerator", f"k1 - k3^2 = {num:g} is negative")
    den = k.k1 * float(omega @ omega) - (k.k2 + float(omega @ params.lam)) ** 2
    if den <= 0.0:
        raise DomainError("denominator",
                          f"k1 |omega|^2 - (k2 + omega.lam)^2 = {den:g} is not positive")
    return float(np.sqrt(num / den))
