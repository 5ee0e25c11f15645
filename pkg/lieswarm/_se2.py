# SPDX-FileCopyrightText: Copyright 2024, Contributors to lieswarm
# SPDX-License-Identifier: Apache-2.0

"""
SE(2) and se(2) kernel.

Poses are stored as ``(theta, x, y)``, algebra elements as ``(a, v1, v2)`` in the basis

    e1 = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]
    e2 = [[0, 0, 1], [0, 0, 0], [0, 0, 0]]
    e3 = [[0, 0, 0], [0, 0, 1], [0, 0, 0]]

and covectors as ``(m1, m2, m3)`` in the dual basis under ``<mu, xi> = tr(mu xi)``.
:class:`Se2` works on numpy arrays whose last axis has length 3, so every operation
broadcasts over agents; :class:`Pose2`, :class:`Twist` and :class:`Momentum` are the
immutable scalar wrappers used by the public API.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from lieswarm._global import LieswarmGlobals

FloatArray = NDArray[np.float64]

# diagonal of the trace inner product tr(xi^T eta) in the (e1, e2, e3) basis
METRIC = np.array([2.0, 1.0, 1.0])


def _arr(v: ArrayLike) -> FloatArray:
    return np.asarray(v, dtype=np.float64)


class Se2:
    """
    Array-level SE(2) operations.
    Every method accepts arrays of shape ``(..., 3)`` and broadcasts.
    """

    @classmethod
    def wrap(cls, theta: ArrayLike) -> FloatArray:
        """
        Wraps angles to (-pi, pi].
        """
        theta = _arr(theta)
        return np.pi - np.mod(np.pi - theta, 2 * np.pi)

    @classmethod
    def identity(cls, shape: tuple[int, ...] = ()) -> FloatArray:
        return np.zeros((*shape, 3))

    @classmethod
    def compose(cls, g: ArrayLike, h: ArrayLike) -> FloatArray:
        g, h = _arr(g), _arr(h)
        c, s = np.cos(g[..., 0]), np.sin(g[..., 0])
        return np.stack(
            [
                cls.wrap(g[..., 0] + h[..., 0]),
                g[..., 1] + c * h[..., 1] - s * h[..., 2],
                g[..., 2] + s * h[..., 1] + c * h[..., 2],
            ],
            axis=-1,
        )

    @classmethod
    def inverse(cls, g: ArrayLike) -> FloatArray:
        g = _arr(g)
        c, s = np.cos(g[..., 0]), np.sin(g[..., 0])
        return np.stack(
            [
                cls.wrap(-g[..., 0]),
                -(c * g[..., 1] + s * g[..., 2]),
                s * g[..., 1] - c * g[..., 2],
            ],
            axis=-1,
        )

    @classmethod
    def exp(cls, xi: ArrayLike) -> FloatArray:
        """
        Closed-form exponential.
        Uses ``sin(a)/a`` and ``(1 - cos a)/a = 2 sin^2(a/2)/a``, switching to the
        second-order limit below :attr:`LieswarmGlobals.SMALL_ANGLE`.
        """
        xi = _arr(xi)
        a, v1, v2 = xi[..., 0], xi[..., 1], xi[..., 2]
        small = np.abs(a) < LieswarmGlobals.SMALL_ANGLE
        safe = np.where(small, 1.0, a)
        p = np.where(small, 1.0, np.sin(safe) / safe)
        q = np.where(small, a / 2, 2 * np.sin(safe / 2) ** 2 / safe)
        return np.stack([cls.wrap(a), p * v1 - q * v2, q * v1 + p * v2], axis=-1)

    @classmethod
    def log(cls, g: ArrayLike) -> FloatArray:
        """
        Closed-form logarithm; theta = pi returns the +pi branch.
        """
        g = cls.normalize(g)
        a, x, y = g[..., 0], g[..., 1], g[..., 2]
        half = a / 2
        small = np.abs(a) < LieswarmGlobals.SMALL_ANGLE
        safe = np.where(small, 1.0, half)
        # (a/2) cot(a/2), exactly 0 at a = pi
        d = np.where(small, 1.0, safe * np.cos(safe) / np.sin(safe))
        return np.stack([a, d * x + half * y, -half * x + d * y], axis=-1)

    @classmethod
    def normalize(cls, g: ArrayLike) -> FloatArray:
        g = np.array(g, dtype=np.float64)
        g[..., 0] = cls.wrap(g[..., 0])
        return g

    @classmethod
    def bracket(cls, xi: ArrayLike, eta: ArrayLike) -> FloatArray:
        """
        Lie bracket from ``[e1, e2] = e3``, ``[e2, e3] = 0``, ``[e3, e1] = e2``.
        """
        xi, eta = _arr(xi), _arr(eta)
        a, v1, v2 = xi[..., 0], xi[..., 1], xi[..., 2]
        b, w1, w2 = eta[..., 0], eta[..., 1], eta[..., 2]
        return np.stack([np.zeros_like(a * b), -a * w2 + b * v2, a * w1 - b * v1], axis=-1)

    @classmethod
    def pairing(cls, mu: ArrayLike, xi: ArrayLike) -> FloatArray:
        return np.sum(_arr(mu) * _arr(xi), axis=-1)

    @classmethod
    def inner(cls, xi: ArrayLike, eta: ArrayLike) -> FloatArray:
        return np.sum(METRIC * _arr(xi) * _arr(eta), axis=-1)

    @classmethod
    def norm_sq(cls, xi: ArrayLike) -> FloatArray:
        return cls.inner(xi, xi)

    @classmethod
    def adjoint(cls, g: ArrayLike, xi: ArrayLike) -> FloatArray:
        """
        ``Ad_g xi = g xi g^-1``: the rotation part is kept,
        translation becomes ``R v + a (y, -x)``.
        """
        g, xi = _arr(g), _arr(xi)
        c, s = np.cos(g[..., 0]), np.sin(g[..., 0])
        a, v1, v2 = xi[..., 0], xi[..., 1], xi[..., 2]
        return np.stack(
            [
                a * np.ones_like(c),
                c * v1 - s * v2 + a * g[..., 2],
                s * v1 + c * v2 - a * g[..., 1],
            ],
            axis=-1,
        )

    @classmethod
    def coadjoint_star(cls, xi: ArrayLike, mu: ArrayLike) -> FloatArray:
        """
        ``ad*_xi mu``, defined by ``<ad*_xi mu, eta> = <mu, [xi, eta]>``.
        """
        xi, mu = _arr(xi), _arr(mu)
        a, v1, v2 = xi[..., 0], xi[..., 1], xi[..., 2]
        m2, m3 = mu[..., 1], mu[..., 2]
        return np.stack([v2 * m2 - v1 * m3, a * m3, -a * m2], axis=-1)

    @classmethod
    def cotangent_lift(cls, g: ArrayLike, grad_xy: ArrayLike) -> FloatArray:
        """
        Pulls a world-frame position gradient back to the body frame, ``T*_e L_g``.
        Only valid for heading-independent functions.
        """
        g, grad_xy = _arr(g), _arr(grad_xy)
        c, s = np.cos(g[..., 0]), np.sin(g[..., 0])
        gx, gy = grad_xy[..., 0], grad_xy[..., 1]
        return np.stack([np.zeros_like(c * gx), c * gx + s * gy, -s * gx + c * gy], axis=-1)

    @classmethod
    def dexpinv(cls, u: ArrayLike, w: ArrayLike) -> FloatArray:
        """
        Inverse derivative of exp for right-multiplied updates ``g exp(u)``,
        ``w + [u, w]/2 + [u, [u, w]]/12`` (enough for fourth-order Munthe-Kaas stages).
        """
        uw = cls.bracket(u, w)
        return _arr(w) + uw / 2 + cls.bracket(u, uw) / 12

    @classmethod
    def pose_matrix(cls, g: ArrayLike) -> FloatArray:
        g = _arr(g)
        c, s = np.cos(g[..., 0]), np.sin(g[..., 0])
        m = np.zeros((*g.shape[:-1], 3, 3))
        m[..., 0, 0], m[..., 0, 1], m[..., 0, 2] = c, -s, g[..., 1]
        m[..., 1, 0], m[..., 1, 1], m[..., 1, 2] = s, c, g[..., 2]
        m[..., 2, 2] = 1.0
        return m

    @classmethod
    def pose_from_matrix(cls, m: ArrayLike) -> FloatArray:
        m = _arr(m)
        theta = np.arctan2(m[..., 1, 0], m[..., 0, 0])
        return np.stack([cls.wrap(theta), m[..., 0, 2], m[..., 1, 2]], axis=-1)

    @classmethod
    def twist_matrix(cls, xi: ArrayLike) -> FloatArray:
        xi = _arr(xi)
        m = np.zeros((*xi.shape[:-1], 3, 3))
        m[..., 0, 1], m[..., 1, 0] = -xi[..., 0], xi[..., 0]
        m[..., 0, 2], m[..., 1, 2] = xi[..., 1], xi[..., 2]
        return m

    @classmethod
    def momentum_matrix(cls, mu: ArrayLike) -> FloatArray:
        mu = _arr(mu)
        m = np.zeros((*mu.shape[:-1], 3, 3))
        m[..., 0, 1], m[..., 1, 0] = mu[..., 0] / 2, -mu[..., 0] / 2
        m[..., 2, 0], m[..., 2, 1] = mu[..., 1], mu[..., 2]
        return m


@dataclass(frozen=True, repr=True)
class Pose2:
    """
    An element of SE(2).

    Attributes:
        theta: heading in radians, always wrapped to (-pi, pi]
        x: abscissa in meters
        y: ordinate in meters
    """

    theta: float
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(Se2.wrap(self.theta)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))

    @classmethod
    def of(cls, theta: float = 0.0, x: float = 0.0, y: float = 0.0) -> Pose2:
        return cls(theta, x, y)

    @classmethod
    def identity(cls) -> Pose2:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def translation(cls, x: float, y: float) -> Pose2:
        return cls(0.0, x, y)

    @classmethod
    def rotation(cls, theta: float) -> Pose2:
        return cls(theta, 0.0, 0.0)

    @classmethod
    def from_array(cls, arr: ArrayLike) -> Pose2:
        arr = _arr(arr)
        return cls(arr[0], arr[1], arr[2])

    @classmethod
    def from_matrix(cls, m: ArrayLike) -> Pose2:
        return cls.from_array(Se2.pose_from_matrix(m))

    def copy(self, **kwargs) -> Pose2:
        return dataclasses.replace(self, **kwargs)

    @cached_property
    def array(self) -> FloatArray:
        return np.array([self.theta, self.x, self.y])

    @property
    def position(self) -> tuple[float, float]:
        return self.x, self.y

    def to_matrix(self) -> FloatArray:
        return Se2.pose_matrix(self.array)

    def compose(self, other: Pose2) -> Pose2:
        return Pose2.from_array(Se2.compose(self.array, other.array))

    def inverse(self) -> Pose2:
        return Pose2.from_array(Se2.inverse(self.array))

    def log(self) -> Twist:
        return Twist.from_array(Se2.log(self.array))

    def adjoint(self, xi: Twist) -> Twist:
        """
        ``Ad_g xi``.
        """
        return Twist.from_array(Se2.adjoint(self.array, xi.array))

    def cotangent_lift(self, d_dx: float, d_dy: float) -> Momentum:
        """
        Body-frame covector of a heading-independent function with world gradient ``(d_dx, d_dy)``.
        """
        return Momentum.from_array(Se2.cotangent_lift(self.array, [d_dx, d_dy]))

    def __matmul__(self, other: Pose2) -> Pose2:
        return self.compose(other)


@dataclass(frozen=True, repr=True)
class Twist:
    """
    An element of se(2) in the (e1, e2, e3) basis.

    Attributes:
        a: rotational coordinate (rad/s for velocities)
        v1: translational coordinate along e2
        v2: translational coordinate along e3
    """

    a: float
    v1: float
    v2: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "v1", float(self.v1))
        object.__setattr__(self, "v2", float(self.v2))

    @classmethod
    def of(cls, a: float = 0.0, v1: float = 0.0, v2: float = 0.0) -> Twist:
        return cls(a, v1, v2)

    @classmethod
    def zero(cls) -> Twist:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def basis(cls, k: int) -> Twist:
        """
        Returns ``e_k`` for k in 1, 2, 3.
        """
        if k not in (1, 2, 3):
            msg = f"No basis element e_{k} in se(2)"
            raise IndexError(msg)
        return cls.from_array(np.eye(3)[k - 1])

    @classmethod
    def from_array(cls, arr: ArrayLike) -> Twist:
        arr = _arr(arr)
        return cls(arr[0], arr[1], arr[2])

    def copy(self, **kwargs) -> Twist:
        return dataclasses.replace(self, **kwargs)

    @cached_property
    def array(self) -> FloatArray:
        return np.array([self.a, self.v1, self.v2])

    def to_matrix(self) -> FloatArray:
        return Se2.twist_matrix(self.array)

    def exp(self) -> Pose2:
        return Pose2.from_array(Se2.exp(self.array))

    def bracket(self, other: Twist) -> Twist:
        return Twist.from_array(Se2.bracket(self.array, other.array))

    def inner(self, other: Twist) -> float:
        return float(Se2.inner(self.array, other.array))

    @property
    def norm_sq(self) -> float:
        return float(Se2.norm_sq(self.array))

    def __add__(self, other: Twist) -> Twist:
        return Twist.from_array(self.array + other.array)

    def __sub__(self, other: Twist) -> Twist:
        return Twist.from_array(self.array - other.array)

    def __neg__(self) -> Twist:
        return Twist.from_array(-self.array)

    def __mul__(self, scale: float) -> Twist:
        return Twist.from_array(self.array * scale)

    __rmul__ = __mul__


@dataclass(frozen=True, repr=True)
class Momentum:
    """
    An element of se(2)* in the dual basis (e^1, e^2, e^3).
    """

    m1: float
    m2: float
    m3: float

    def __post_init__(self):
        object.__setattr__(self, "m1", float(self.m1))
        object.__setattr__(self, "m2", float(self.m2))
        object.__setattr__(self, "m3", float(self.m3))

    @classmethod
    def of(cls, m1: float = 0.0, m2: float = 0.0, m3: float = 0.0) -> Momentum:
        return cls(m1, m2, m3)

    @classmethod
    def zero(cls) -> Momentum:
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def basis(cls, k: int) -> Momentum:
        """
        Returns the dual basis element ``e^k`` for k in 1, 2, 3.
        """
        if k not in (1, 2, 3):
            msg = f"No dual basis element e^{k} in se(2)*"
            raise IndexError(msg)
        return cls.from_array(np.eye(3)[k - 1])

    @classmethod
    def from_array(cls, arr: ArrayLike) -> Momentum:
        arr = _arr(arr)
        return cls(arr[0], arr[1], arr[2])

    def copy(self, **kwargs) -> Momentum:
        return dataclasses.replace(self, **kwargs)

    @cached_property
    def array(self) -> FloatArray:
        return np.array([self.m1, self.m2, self.m3])

    def to_matrix(self) -> FloatArray:
        return Se2.momentum_matrix(self.array)

    def pair(self, xi: Twist) -> float:
        return float(Se2.pairing(self.array, xi.array))

    def coadjoint(self, xi: Twist) -> Momentum:
        """
        ``ad*_xi`` applied to this covector.
        """
        return Momentum.from_array(Se2.coadjoint_star(xi.array, self.array))

    def __add__(self, other: Momentum) -> Momentum:
        return Momentum.from_array(self.array + other.array)

    def __sub__(self, other: Momentum) -> Momentum:
        return Momentum.from_array(self.array - other.array)

    def __neg__(self) -> Momentum:
        return Momentum.from_array(-self.array)

    def __mul__(self, scale: float) -> Momentum:
        return Momentum.from_array(self.array * scale)

    __rmul__ = __mul__


def compose(g: Pose2, h: Pose2) -> Pose2:
    return g.compose(h)


def inverse(g: Pose2) -> Pose2:
    return g.inverse()


def exp(xi: Twist) -> Pose2:
    return xi.exp()


def log(g: Pose2) -> Twist:
    return g.log()


def bracket(xi: Twist, eta: Twist) -> Twist:
    return xi.bracket(eta)


def pairing(mu: Momentum, xi: Twist) -> float:
    return mu.pair(xi)


def inner(xi: Twist, eta: Twist) -> float:
    return xi.inner(eta)


def norm_sq(xi: Twist) -> float:
    return xi.norm_sq


def adjoint(g: Pose2, xi: Twist) -> Twist:
    return g.adjoint(xi)


def coadjoint_star(xi: Twist, mu: Momentum) -> Momentum:
    return mu.coadjoint(xi)


def cotangent_lift_position_gradient(g: Pose2, d_dx: float, d_dy: float) -> Momentum:
    return g.cotangent_lift(d_dx, d_dy)


__all__ = [
    "METRIC",
    "Momentum",
    "Pose2",
    "Se2",
    "Twist",
    "adjoint",
    "bracket",
    "coadjoint_star",
    "compose",
    "cotangent_lift_position_gradient",
    "exp",
    "inner",
    "inverse",
    "log",
    "norm_sq",
    "pairing",
]
