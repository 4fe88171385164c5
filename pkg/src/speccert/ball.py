"""Midpoint-radius (ball) arithmetic for complex scalars, vectors and matrices.

A ball with center ``c`` and radius ``r >= 0`` represents the closed disk
``{x : |x - c| <= r}``; a ball matrix represents the set of matrices whose
entries lie in the corresponding entry disks.  Every operation in this module
satisfies the inclusion principle: for any members of the input balls, the
exact result of the operation on those members lies in the output ball.

Centers are computed in ordinary round-to-nearest numpy arithmetic (complex
products always through four real kernels, never through the 3M trick, so the
standard componentwise error model applies).  Radii are computed from
nonnegative round-to-nearest expressions and then inflated once by the
a-priori factors of :mod:`speccert._rounding`, which makes every result
independent of summation order and hence reproducible for any BLAS/thread
configuration.  As an extra guarantee of bitwise determinism, the BLAS-backed
kernels pin the library to a single thread for their duration.

Any NaN or infinity in a computed center or radius voids the enclosure and
raises :class:`BallArithmeticError` immediately; no value is ever silently
clipped.
"""

from __future__ import annotations

import hashlib
import io
import json
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from . import _rounding as rd
from ._rounding import U, scale_up

__all__ = [
    "BallArithmeticError",
    "BallScalar",
    "BallVector",
    "BallMatrix",
    "ball_add",
    "ball_sub",
    "ball_matmul",
    "spectral_norm_upper",
    "l1_norm_from_l2",
    "l1_col_norm_upper",
    "dump_ballmatrix",
    "load_ballmatrix",
]

_FIVEU = 5.0 * U    # covers complex-multiply rounding (>= sqrt(5) u componentwise model)

_MAGIC = b"BALLMAT1\n"


class BallArithmeticError(ValueError):
    """Raised when an enclosure would be invalid (non-finite data, bad shapes)."""


def _require_finite(*arrays) -> None:
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise BallArithmeticError("non-finite value voids the enclosure")


def _as_c128(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


def _as_f64(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


# ---------------------------------------------------------------------------
# elementwise kernels on raw (centers, radii) arrays
# ---------------------------------------------------------------------------

def cabs_up(z: np.ndarray) -> np.ndarray:
    """Entrywise upper bound of |z|.

    sqrt is correctly rounded, so with s = fl(re^2+im^2) >= |z|^2 (1+u)^-3 the
    chain fl(sqrt(s)) * scale_up(4) dominates |z|; hypot is deliberately not
    used (its accuracy is implementation-defined).
    """
    z = np.asarray(z)
    return np.sqrt(z.real * z.real + z.imag * z.imag) * scale_up(4)


def cabs_down(z: np.ndarray) -> np.ndarray:
    """Entrywise lower bound of |z|."""
    z = np.asarray(z)
    out = np.sqrt(z.real * z.real + z.imag * z.imag) * rd.scale_down(4)
    return np.maximum(out, 0.0)


def ball_abs_bounds(c: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise (lower, upper) bounds of |x| over members x of the balls."""
    hi = (cabs_up(c) + r) * scale_up(1)
    lo = np.maximum((cabs_down(c) - r) * rd.scale_down(1), 0.0)
    return lo, hi


def _two_sum_err(a: np.ndarray, b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Exact rounding error of the float addition s = fl(a+b) (Knuth TwoSum)."""
    bv = s - a
    return (a - (s - bv)) + (b - bv)


def _v_add(c1, r1, c2, r2):
    c = c1 + c2
    # center rounding is recovered exactly componentwise, so exact sums keep radius 0
    ere = _two_sum_err(np.asarray(c1).real, np.asarray(c2).real, np.asarray(c).real)
    eim = _two_sum_err(np.asarray(c1).imag, np.asarray(c2).imag, np.asarray(c).imag)
    err = np.sqrt(ere * ere + eim * eim) * scale_up(4)
    r = ((r1 + r2) + err) * scale_up(2)
    return c, r


def _v_mul(c1, r1, c2, r2):
    # |fl(xy) - xy| <= sqrt(5) u |x||y| for the componentwise complex product
    # (Brent-Percival-Zimmermann); numpy elementwise complex multiply uses it.
    a1 = cabs_up(c1)
    a2 = cabs_up(c2)
    c = c1 * c2
    r = ((a1 * r2 + r1 * a2) + (r1 * r2 + a1 * a2 * _FIVEU)) * scale_up(8)
    return c, r


def _v_inv(c, r):
    """Exact disk inversion: 1/D(c,r) is the disk D(cbar/d, r/d), d = |c|^2 - r^2."""
    c = np.asarray(c)
    abs2 = c.real * c.real + c.imag * c.imag
    d_lo = (abs2 * rd.scale_down(3) - (r * r) * scale_up(1)) * rd.scale_down(2)
    if np.any(d_lo <= 0.0):
        raise BallArithmeticError("inversion of a ball containing 0")
    d = abs2 - r * r
    p = np.conj(c) / d
    # center misplacement: |cbar/d_true - fl(cbar/fl(d))| <= |c| e_d / d_lo^2 + 3u|p|
    e_d = (abs2 * (8.0 * U) + (r * r) * (8.0 * U)) * scale_up(2)
    slack = (cabs_up(c) * e_d / (d_lo * d_lo) + cabs_up(p) * (3.0 * U)) * scale_up(6)
    rad = (r / d_lo + slack) * scale_up(4)
    return p, rad


def _v_scale(c, r, w: complex):
    """Multiply by an exact complex scalar w."""
    aw = rd.cabs_up(w.real, w.imag)
    c2 = c * w
    r2 = (r * aw + cabs_up(c2) * _FIVEU) * scale_up(4)
    return c2, r2


# ---------------------------------------------------------------------------
# public containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallScalar:
    """Closed complex disk {x : |x - center| <= radius}."""

    center: complex
    radius: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.center) and np.isfinite(self.radius)):
            raise BallArithmeticError("non-finite ball")
        if self.radius < 0:
            raise BallArithmeticError("negative radius")

    def __add__(self, other: "BallScalar") -> "BallScalar":
        c, r = _v_add(np.complex128(self.center), self.radius,
                      np.complex128(other.center), other.radius)
        return BallScalar(complex(c), float(r))

    def __mul__(self, other: "BallScalar") -> "BallScalar":
        c, r = _v_mul(np.complex128(self.center), self.radius,
                      np.complex128(other.center), other.radius)
        return BallScalar(complex(c), float(r))

    def inverse(self) -> "BallScalar":
        c, r = _v_inv(np.complex128(self.center), self.radius)
        return BallScalar(complex(c), float(r))

    def abs_bounds(self) -> tuple[float, float]:
        lo = max(0.0, rd.sub_down(rd.cabs_down(self.center.real, self.center.imag), self.radius))
        hi = rd.add_up(rd.cabs_up(self.center.real, self.center.imag), self.radius)
        return lo, hi

    def contains(self, x: complex) -> bool:
        dre = x.real - self.center.real
        dim = x.imag - self.center.imag
        return rd.mul_up(rd.cabs_up(dre, dim), scale_up(2)) <= self.radius


class BallVector:
    """1-d array of complex balls (shared layout for FFT and arc kernels)."""

    __slots__ = ("centers", "radii")

    def __init__(self, centers, radii=None):
        centers = _as_c128(centers)
        if centers.ndim != 1:
            raise BallArithmeticError("BallVector is one-dimensional")
        if radii is None:
            radii = np.zeros(centers.shape)
        radii = _as_f64(radii)
        if radii.shape != centers.shape:
            raise BallArithmeticError("radii shape mismatch")
        _require_finite(centers, radii)
        if np.any(radii < 0):
            raise BallArithmeticError("negative radius")
        centers.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    def __setattr__(self, *a):
        raise AttributeError("BallVector is immutable")

    def __len__(self):
        return self.centers.shape[0]

    @classmethod
    def from_scalars(cls, scalars) -> "BallVector":
        scalars = list(scalars)
        return cls(np.array([s.center for s in scalars], dtype=np.complex128),
                   np.array([s.radius for s in scalars]))

    def to_scalars(self) -> list[BallScalar]:
        return [BallScalar(complex(c), float(r))
                for c, r in zip(self.centers, self.radii)]

    def __getitem__(self, i) -> BallScalar:
        return BallScalar(complex(self.centers[i]), float(self.radii[i]))


class BallMatrix:
    """n x m matrix of complex disks; the universal rigorous linear-algebra carrier."""

    __slots__ = ("centers", "radii")

    def __init__(self, centers, radii=None):
        centers = _as_c128(centers)
        if centers.ndim != 2:
            raise BallArithmeticError("BallMatrix is two-dimensional")
        if radii is None:
            radii = np.zeros(centers.shape)
        radii = _as_f64(radii)
        if radii.shape != centers.shape:
            raise BallArithmeticError("radii shape mismatch")
        _require_finite(centers, radii)
        if np.any(radii < 0):
            raise BallArithmeticError("negative radius")
        centers.flags.writeable = False
        radii.flags.writeable = False
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "radii", radii)

    def __setattr__(self, *a):
        raise AttributeError("BallMatrix is immutable")

    @property
    def shape(self):
        return self.centers.shape

    @classmethod
    def exact(cls, a) -> "BallMatrix":
        return cls(a)

    @classmethod
    def identity(cls, n: int) -> "BallMatrix":
        return cls(np.eye(n, dtype=np.complex128))

    def conj_transpose(self) -> "BallMatrix":
        return BallMatrix(self.centers.conj().T, self.radii.T)

    def member_contains(self, a: np.ndarray) -> bool:
        """True when the point matrix a provably lies in this ball (upward-rounded test)."""
        d = cabs_up(np.asarray(a, dtype=np.complex128) - self.centers) * scale_up(2)
        return bool(np.all(d <= self.radii))

    def abs_upper(self) -> np.ndarray:
        """Entrywise upper bound of |A'_ij| valid for every member A'."""
        return (cabs_up(self.centers) + self.radii) * scale_up(1)

    def digest(self) -> str:
        """Stable 16-hex identifier of the exact ball contents."""
        h = hashlib.sha256()
        h.update(repr(self.centers.shape).encode())
        h.update(np.ascontiguousarray(self.centers).tobytes())
        h.update(np.ascontiguousarray(self.radii).tobytes())
        return h.hexdigest()[:16]

    def __add__(self, other: "BallMatrix") -> "BallMatrix":
        return ball_add(self, other)

    def __sub__(self, other: "BallMatrix") -> "BallMatrix":
        return ball_sub(self, other)

    def __matmul__(self, other: "BallMatrix") -> "BallMatrix":
        return ball_matmul(self, other)


# ---------------------------------------------------------------------------
# matrix operations
# ---------------------------------------------------------------------------

def ball_add(A: BallMatrix, B: BallMatrix) -> BallMatrix:
    """Enclosure of A' + B' over all members; radii absorb center rounding."""
    if A.shape != B.shape:
        raise BallArithmeticError(f"shape mismatch {A.shape} vs {B.shape}")
    c, r = _v_add(A.centers, A.radii, B.centers, B.radii)
    return BallMatrix(c, r)


def ball_sub(A: BallMatrix, B: BallMatrix) -> BallMatrix:
    if A.shape != B.shape:
        raise BallArithmeticError(f"shape mismatch {A.shape} vs {B.shape}")
    c, r = _v_add(A.centers, A.radii, -B.centers, B.radii)
    return BallMatrix(c, r)


def _gamma_up(n: int) -> float:
    """Upper bound of n*u/(1-n*u), the classical dot-product error constant."""
    nu = rd.mul_up(float(n), U)
    return rd.div_up(nu, rd.sub_down(1.0, nu))


def ball_matmul(A: BallMatrix, B: BallMatrix) -> BallMatrix:
    """Rigorous enclosure of the product set {A'B' : A' in A, B' in B}.

    Centers use one bulk floating product per real component (four real GEMMs,
    so the standard model holds entrywise for any BLAS summation order); radii
    dominate |A_c| B_r + A_r |B_c| + A_r B_r plus the rounding slack
    2*gamma_n (|A||B|) + u(|Re C| + |Im C|), everything inflated a-priori.
    """
    n, k = A.shape
    k2, m = B.shape
    if k != k2:
        raise BallArithmeticError(f"inner dimension mismatch {A.shape} x {B.shape}")

    with threadpool_limits(limits=1):
        ar, ai = np.ascontiguousarray(A.centers.real), np.ascontiguousarray(A.centers.imag)
        br, bi = np.ascontiguousarray(B.centers.real), np.ascontiguousarray(B.centers.imag)
        cre = ar @ br - ai @ bi
        cim = ar @ bi + ai @ br
        centers = cre + 1j * cim

        a_abs = cabs_up(A.centers)
        b_abs = cabs_up(B.centers)
        m_abs = (a_abs @ b_abs) * scale_up(k + 4)

        g = _gamma_up(k + 2)
        round_term = m_abs * (2.0 * g) + (np.abs(cre) + np.abs(cim)) * U
        cross = a_abs @ B.radii + A.radii @ b_abs + A.radii @ B.radii
        radii = (cross + round_term) * scale_up(k + 8)

    return BallMatrix(centers, radii)


def spectral_norm_upper(A: BallMatrix, v: np.ndarray | None = None) -> float:
    """Certified U with ||A'||_2 <= U for every member A', via the Perron-type bound

        ||B||_2 <= sqrt(max_i (|B|^T |B| v)_i / v_i),   v > 0 arbitrary,

    applied to the entrywise dominant |centers| + radii.  The default weight is
    the all-ones vector; a near-Perron vector sharpens the bound.
    """
    n, m = A.shape
    if v is None:
        v = np.ones(m)
    else:
        v = _as_f64(v)
        if v.shape != (m,):
            raise BallArithmeticError("weight vector length mismatch")
        if not np.all(v > 0) or not np.all(np.isfinite(v)):
            raise BallArithmeticError("weight vector must be strictly positive and finite")

    with threadpool_limits(limits=1):
        babs = A.abs_upper()
        w = (babs @ v) * scale_up(m + 4)
        t = (babs.T @ w) * scale_up(n + 4)
        ratio = (t / v) * scale_up(1)
    hi = float(np.max(ratio))
    return rd.sqrt_up(hi)


def l1_norm_from_l2(l2_bound: float, n: int) -> float:
    """sqrt(n) * l2_bound rounded upward; converts a spectral-norm bound to the
    l1-induced (max column absolute sum) operator norm."""
    if l2_bound < 0 or n < 1:
        raise BallArithmeticError("invalid arguments")
    return rd.mul_up(rd.sqrt_up(float(n)), l2_bound)


def l1_col_norm_upper(A: BallMatrix) -> float:
    """Certified upper bound of the l1-induced norm max_j sum_i |A'_ij|."""
    n = A.shape[0]
    s = A.abs_upper().sum(axis=0) * scale_up(n + 4)
    return float(np.max(s))


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def dump_ballmatrix(A: BallMatrix, fileobj_or_path) -> None:
    """Deterministic binary dump: magic, one JSON header line, raw row-major bytes."""
    header = json.dumps({"rows": A.shape[0], "cols": A.shape[1],
                         "centers": "complex128", "radii": "float64"},
                        sort_keys=True).encode() + b"\n"
    own = isinstance(fileobj_or_path, (str, bytes)) or hasattr(fileobj_or_path, "__fspath__")
    f = open(fileobj_or_path, "wb") if own else fileobj_or_path
    try:
        f.write(_MAGIC)
        f.write(header)
        f.write(np.ascontiguousarray(A.centers).tobytes())
        f.write(np.ascontiguousarray(A.radii).tobytes())
    finally:
        if own:
            f.close()


def load_ballmatrix(fileobj_or_path) -> BallMatrix:
    own = isinstance(fileobj_or_path, (str, bytes)) or hasattr(fileobj_or_path, "__fspath__")
    f = open(fileobj_or_path, "rb") if own else fileobj_or_path
    try:
        if f.read(len(_MAGIC)) != _MAGIC:
            raise BallArithmeticError("not a ball-matrix dump")
        meta = json.loads(f.readline().decode())
        n, m = meta["rows"], meta["cols"]
        centers = np.frombuffer(f.read(n * m * 16), dtype=np.complex128).reshape(n, m)
        radii = np.frombuffer(f.read(n * m * 8), dtype=np.float64).reshape(n, m)
    finally:
        if own:
            f.close()
    return BallMatrix(centers.copy(), radii.copy())


def _buffer_roundtrip(A: BallMatrix) -> BallMatrix:
    """Dump/load through memory (used by tests for bit-identity checks)."""
    buf = io.BytesIO()
    dump_ballmatrix(A, buf)
    buf.seek(0)
    return load_ballmatrix(buf)
