"""Scene geometry: endpoints, the rectangular surface, distances and angles.

The surface lies in the z=0 plane, centered at the origin, with half-lengths
(half_len_x, half_len_y). The transmitter is always at z > 0; the receiver is
at z > 0 for a reflecting link and z < 0 for a transmitting link.

Conventions fixed here and used everywhere else:

* theta_inc/theta_rec are polar angles measured from the z axis, computed
  from |z|/distance, so both lie in [0, pi/2).
* phi_inc_az/phi_rec_az are the azimuths of the horizontal direction from
  the surface point *toward* the endpoint, in [0, 2*pi).
* propagation_unit_vector points from the transmitter toward the surface
  point (z-component strictly negative). This is the single source of sign
  truth for the polarization projection patterns; the patterns are even in
  it, so the opposite convention would give identical fields.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ContractError

TWO_PI = 2.0 * math.pi


class Side(Enum):
    REFLECTION = "reflection"
    TRANSMISSION = "transmission"


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ContractError(f"point components must be finite, got {self}")

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    @staticmethod
    def from_array(a):
        return Point3(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class SurfaceSpec:
    """Rectangular surface |x| <= half_len_x, |y| <= half_len_y at z = 0."""

    half_len_x: float
    half_len_y: float

    def __post_init__(self):
        if not (self.half_len_x > 0 and self.half_len_y > 0):
            raise ContractError("surface half-lengths must be positive")

    @property
    def diagonal(self):
        return 2.0 * math.hypot(self.half_len_x, self.half_len_y)

    @property
    def area(self):
        return 4.0 * self.half_len_x * self.half_len_y

    def contains(self, x, y, strict=False):
        if strict:
            return (abs(x) < self.half_len_x) & (abs(y) < self.half_len_y)
        return (abs(x) <= self.half_len_x) & (abs(y) <= self.half_len_y)


@dataclass(frozen=True)
class LinkGeometry:
    tx: Point3
    rx: Point3
    surface: SurfaceSpec
    side: Side

    def __post_init__(self):
        if self.tx.z <= 0:
            raise ContractError("transmitter must sit above the surface (tx.z > 0)")
        if self.rx.z == 0:
            raise ContractError("receiver must not lie in the surface plane (rx.z != 0)")
        if self.side is Side.REFLECTION and self.rx.z < 0:
            raise ContractError(
                "rx.z must be positive on a reflection link (receiver on the "
                "same side of the surface as the transmitter)"
            )
        if self.side is Side.TRANSMISSION and self.rx.z > 0:
            raise ContractError(
                "rx.z must be negative on a transmission link (receiver on the "
                "far side of the surface)"
            )

    @property
    def d_tx0(self):
        """Distance from the transmitter to the surface center."""
        return float(np.linalg.norm(self.tx.as_array()))

    @property
    def d_rx0(self):
        return float(np.linalg.norm(self.rx.as_array()))


@dataclass(frozen=True)
class AngleSet:
    """Incidence/observation angles at a surface point (radians)."""

    theta_inc: float
    theta_rec: float
    phi_inc_az: float
    phi_rec_az: float


def place_point(theta, phi, distance, side=Side.REFLECTION):
    """Point at `distance` from the origin along (theta, phi); z < 0 for transmission."""
    sign = 1.0 if side is Side.REFLECTION else -1.0
    st = math.sin(theta)
    return Point3(
        distance * st * math.cos(phi),
        distance * st * math.sin(phi),
        sign * distance * math.cos(theta),
    )


def distances(geom, x, y):
    """(d_tx, d_rx) from surface point (x, y) to the two endpoints.

    x, y may be scalars or broadcastable arrays; the point need not lie
    inside the surface (scans probe boundary extensions).
    """
    tx, rx = geom.tx, geom.rx
    d_tx = np.sqrt((x - tx.x) ** 2 + (y - tx.y) ** 2 + tx.z**2)
    d_rx = np.sqrt((x - rx.x) ** 2 + (y - rx.y) ** 2 + rx.z**2)
    return d_tx, d_rx


def angles(geom, x, y):
    """AngleSet at surface point (x, y); azimuth 0 when the endpoint is overhead."""
    d_tx, d_rx = distances(geom, x, y)
    theta_inc = np.arccos(np.clip(geom.tx.z / d_tx, -1.0, 1.0))
    theta_rec = np.arccos(np.clip(abs(geom.rx.z) / d_rx, -1.0, 1.0))
    # atan2(0, 0) = 0 gives the degenerate-azimuth convention for free
    phi_inc = np.mod(np.arctan2(geom.tx.y - y, geom.tx.x - x), TWO_PI)
    phi_rec = np.mod(np.arctan2(geom.rx.y - y, geom.rx.x - x), TWO_PI)
    return AngleSet(theta_inc, theta_rec, phi_inc, phi_rec)


def propagation_unit_vector(geom, x, y):
    """Unit vector from the transmitter toward surface point (x, y, 0).

    For array x, y the result has shape (..., 3).
    """
    d_tx, _ = distances(geom, x, y)
    sx = (x - geom.tx.x) / d_tx
    sy = (y - geom.tx.y) / d_tx
    sz = -geom.tx.z / d_tx
    return np.stack(np.broadcast_arrays(sx, sy, sz), axis=-1)


def electrical_metrics(surface, wavelength):
    """(diagonal D, area A_S, far-regime distance r_es = 8(Lx^2+Ly^2)/lambda)."""
    if wavelength <= 0:
        raise ContractError("wavelength must be positive")
    r_es = 8.0 * (surface.half_len_x**2 + surface.half_len_y**2) / wavelength
    return surface.diagonal, surface.area, r_es
