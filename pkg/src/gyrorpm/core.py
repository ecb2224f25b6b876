"""Domain types, first integrals and equations of motion of the free gyrostat.

The body carries a rotor with constant gyrostatic moment ``lam``; the
angular momentum seen in the body frame is ``m = A @ omega + lam`` with a
diagonal inertia tensor ``A``.  The attitude enters only through the unit
vertical vector ``nu`` (the Poisson sphere), so the phase space is
``S^2 x R^3``.  Three quantities are conserved:

    k1 = |m|^2          squared angular momentum
    k2 = (A omega) . omega   twice the kinetic energy
    k3 = m . nu         vertical momentum component

Everything here is a pure function of immutable value types.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import NonGenericParamsError

__all__ = [
    "GyrostatParams",
    "State",
    "IntegralConstants",
    "SphereCurve",
    "angular_momentum",
    "integrals",
    "rhs",
]

#: tolerance on | |nu|^2 - 1 | accepted at State construction
UNIT_NU_TOL = 1e-12


def _vec3(value, name):
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {np.shape(value)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {arr}")
    return arr.copy()


def _freeze(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class GyrostatParams:
    """Principal inertia moments and gyrostatic moment of the body.

    Parameters
    ----------
    A : array_like, shape (3,)
        Positive principal moments of inertia (diagonal tensor).
    lam : array_like, shape (3,)
        Gyrostatic moment of the rotor in the body frame.

    Attributes
    ----------
    a : ndarray, shape (3,)
        Inverse inertias ``1/A``, stored eagerly; they are the poles of
        the bifurcation curve and are used throughout the package.
    """

    A: np.ndarray
    lam: np.ndarray
    a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = _vec3(self.A, "A")
        lam = _vec3(self.lam, "lambda")
        if not np.all(A > 0.0):
            raise ValueError(f"inertia moments must be positive, got {A}")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "lam", _freeze(lam))
        object.__setattr__(self, "a", _freeze(1.0 / A))

    @property
    def is_generic(self) -> bool:
        """True when all inverse inertias are pairwise distinct and the
        gyrostatic moment avoids every principal plane (all lam_i != 0)."""
        a = self.a
        distinct = a[0] != a[1] and a[0] != a[2] and a[1] != a[2]
        return bool(distinct and np.all(self.lam != 0.0))

    def require_generic(self):
        if not self.is_generic:
            raise NonGenericParamsError(
                "operation requires pairwise distinct inverse inertias and "
                f"all gyrostatic moment components nonzero; got A={self.A}, "
                f"lambda={self.lam}"
            )

    @property
    def poles(self) -> np.ndarray:
        """Inverse inertias sorted ascending (poles of the bifurcation curve)."""
        return np.sort(self.a)

    def key(self):
        """Hashable identity (used for mesh/scan caches)."""
        return (tuple(self.A.tolist()), tuple(self.lam.tolist()))

    def to_json(self) -> str:
        return json.dumps({"A": self.A.tolist(), "lambda": self.lam.tolist()})

    @classmethod
    def from_dict(cls, obj) -> "GyrostatParams":
        return cls(A=obj["A"], lam=obj["lambda"])

    @classmethod
    def from_json(cls, text: str) -> "GyrostatParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class State:
    """A point of the phase space: body angular velocity plus Poisson vector.

    ``nu`` must lie on the unit sphere to within ``UNIT_NU_TOL`` at
    construction; use :meth:`normalized` when building states from
    unnormalized directions.
    """

    omega: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        omega = _vec3(self.omega, "omega")
        nu = _vec3(self.nu, "nu")
        err = abs(nu @ nu - 1.0)
        if err > UNIT_NU_TOL:
            raise ValueError(
                f"nu must be a unit vector (| |nu|^2 - 1 | = {err:.3e} "
                f"exceeds {UNIT_NU_TOL})"
            )
        object.__setattr__(self, "omega", _freeze(omega))
        object.__setattr__(self, "nu", _freeze(nu))

    @classmethod
    def normalized(cls, omega, nu) -> "State":
        nu = _vec3(nu, "nu")
        n = np.linalg.norm(nu)
        if n == 0.0:
            raise ValueError("nu direction must be nonzero")
        return cls(omega=omega, nu=nu / n)

    def to_json(self) -> str:
        return json.dumps({"omega": self.omega.tolist(), "nu": self.nu.tolist()})

    @classmethod
    def from_dict(cls, obj) -> "State":
        return cls(omega=obj["omega"], nu=obj["nu"])

    @classmethod
    def from_json(cls, text: str) -> "State":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class IntegralConstants:
    """A point in the space of integral values ``k = (k1, k2, k3)``.

    ``k1 >= k3**2`` is necessary for a nonempty integral level (Cauchy-
    Schwarz with ``|nu| = 1``); infeasible constants are representable,
    operations report the resulting emptiness rather than reject them.
    """

    k1: float
    k2: float
    k3: float

    def __post_init__(self):
        for name in ("k1", "k2", "k3"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)

    @property
    def feasible(self) -> bool:
        return self.k1 >= self.k3**2

    def astuple(self):
        return (self.k1, self.k2, self.k3)

    def asarray(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3])


@dataclass(frozen=True, eq=False)
class SphereCurve:
    """A polyline on the Poisson sphere.

    ``closed`` marks loops (last point coincides with the first).  Curves
    produced by the boundary extractor carry the sign pattern of the
    branch formula that generated them and the index of the source
    velocity curve.
    """

    points: np.ndarray
    closed: bool = False
    sign_pattern: tuple | None = None
    source_curve: int | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        object.__setattr__(self, "points", _freeze(pts.copy()))

    def __len__(self):
        return len(self.points)


def angular_momentum(omega, params: GyrostatParams) -> np.ndarray:
    """Body-frame angular momentum ``A @ omega + lam``."""
    omega = np.asarray(omega, dtype=float)
    return params.A * omega + params.lam


def integrals(state: State, params: GyrostatParams) -> IntegralConstants:
    """Evaluate the three first integrals at a state."""
    m = angular_momentum(state.omega, params)
    return IntegralConstants(
        k1=float(m @ m),
        k2=float((params.A * state.omega) @ state.omega),
        k3=float(m @ state.nu),
    )


def rhs(state: State, params: GyrostatParams):
    """Time derivative ``(domega/dt, dnu/dt)`` of the free motion.

    ``A domega/dt = -omega x (A omega + lam)`` and ``dnu/dt = nu x omega``;
    the returned ``dnu/dt`` is tangent to the Poisson sphere.
    """
    m = angular_momentum(state.omega, params)
    domega = -params.a * np.cross(state.omega, m)
    dnu = np.cross(state.nu, state.omega)
    return domega, dnu
