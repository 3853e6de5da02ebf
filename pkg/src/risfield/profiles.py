"""Local surface coefficient Gamma(x, y) = |Gamma| exp(j*angle) and the three
canonical phase laws: constant (specular), linear gradient (anomalous
steering), and distance-matched (focusing).

Phases are kept unwrapped: only exp(j*angle) is ever consumed, and the linear
k*(alpha*x + beta*y) term spans thousands of radians across a meter-scale
surface, so reducing mod 2*pi would only invite branch-cut bugs.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .errors import ContractError
from .geometry import distances
from .em_core import Polarization


class Mode(Enum):
    REFLECT = "reflect"
    TRANSMIT = "transmit"


@dataclass(frozen=True)
class SpecularPhase:
    phi0: float = 0.0


@dataclass(frozen=True)
class AnomalousPhase:
    """Linear phase gradient k*(alpha*x + beta*y) + phi0."""

    alpha: float
    beta: float
    phi0: float = 0.0

    def __post_init__(self):
        # each coefficient is a sum of two direction sines
        if abs(self.alpha) > 2 or abs(self.beta) > 2:
            raise ContractError("steering coefficients must satisfy |alpha|,|beta| <= 2")


@dataclass(frozen=True)
class FocusingPhase:
    """Phase law k*(d_tx + d_rx) + phi0, cancelling the propagation phase pointwise."""

    phi0: float = 0.0


PhaseLaw = Union[SpecularPhase, AnomalousPhase, FocusingPhase]


@dataclass(frozen=True)
class SurfaceProfile:
    """Surface transformation: magnitude (constant or per-point map), phase law,
    output polarization, polarization-change efficiency, and operating mode."""

    phase_law: PhaseLaw
    pol_out: Polarization
    mode: Mode
    magnitude: Union[float, Callable] = 1.0
    efficiency: float = 1.0

    def __post_init__(self):
        if isinstance(self.magnitude, (int, float)):
            if not 0.0 < float(self.magnitude) <= 1.0:
                raise ContractError("constant magnitude must lie in (0, 1] (passive surface)")
        if not 0.0 <= self.efficiency <= 1.0:
            raise ContractError("polarization efficiency must lie in [0, 1]")

    @property
    def constant_magnitude(self):
        """The constant |Gamma|, or None when the magnitude is a per-point map."""
        if isinstance(self.magnitude, (int, float)):
            return float(self.magnitude)
        return None

    @property
    def phi0(self):
        return self.phase_law.phi0


def gamma_magnitude(profile, x, y):
    """|Gamma| at (x, y); broadcasts over arrays."""
    if callable(profile.magnitude):
        return np.asarray(profile.magnitude(x, y), dtype=float)
    return np.broadcast_to(float(profile.magnitude), np.broadcast(x, y).shape) if (
        isinstance(x, np.ndarray) or isinstance(y, np.ndarray)
    ) else float(profile.magnitude)


def gamma_phase(profile, geom, x, y, k):
    """Unwrapped phase angle of Gamma at (x, y).

    The focusing law needs the link geometry to evaluate d_tx + d_rx; passing
    geom=None in that case is a configuration error.
    """
    law = profile.phase_law
    if isinstance(law, SpecularPhase):
        return law.phi0 + np.zeros(np.broadcast(x, y).shape)
    if isinstance(law, AnomalousPhase):
        return k * (law.alpha * np.asarray(x) + law.beta * np.asarray(y)) + law.phi0
    if isinstance(law, FocusingPhase):
        if geom is None:
            raise ContractError("focusing phase law requires the link geometry")
        d_tx, d_rx = distances(geom, x, y)
        return k * (d_tx + d_rx) + law.phi0
    raise ContractError(f"unknown phase law {law!r}")


def gamma(profile, geom, x, y, k):
    """Complex Gamma(x, y) = |Gamma| exp(j*angle)."""
    return gamma_magnitude(profile, x, y) * np.exp(1j * gamma_phase(profile, geom, x, y, k))


def steering_coefficients(theta_inc0, phi_inc0, theta_rec0, phi_rec0):
    """(alpha, beta) of the linear phase law that steers the center-incident ray
    from (theta_inc0, phi_inc0) to the exit direction (theta_rec0, phi_rec0)."""
    alpha = -(math.sin(theta_inc0) * math.cos(phi_inc0) + math.sin(theta_rec0) * math.cos(phi_rec0))
    beta = -(math.sin(theta_inc0) * math.sin(phi_inc0) + math.sin(theta_rec0) * math.sin(phi_rec0))
    return alpha, beta


def steering_angles(phase_law):
    """(alpha, beta) used by the stationary-point machinery: the phase-law
    gradient divided by k. Zero for the specular law; the focusing law has no
    oscillatory residual, so asking for its steering angles is a contract error."""
    if isinstance(phase_law, SpecularPhase):
        return 0.0, 0.0
    if isinstance(phase_law, AnomalousPhase):
        return phase_law.alpha, phase_law.beta
    raise ContractError("the focusing law has no linear steering coefficients")
