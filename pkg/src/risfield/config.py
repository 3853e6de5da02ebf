"""Strict JSON run-configuration parsing.

Unknown keys are rejected and every error message names the offending key
path. Angles are only accepted with an explicit unit suffix (theta_deg vs
theta_rad), never as bare numbers.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, ContractError
from .geometry import LinkGeometry, Point3, Side, SurfaceSpec, angles
from .em_core import Carrier, DipoleSource, Polarization, paper_normalized_moment
from .profiles import (
    AnomalousPhase,
    FocusingPhase,
    Mode,
    SpecularPhase,
    SurfaceProfile,
    steering_coefficients,
)
from .fields import QuadratureSpec
from .experiments import AxisSpec, ScanGrid, ScanMode, parse_method


@dataclass(frozen=True)
class RunConfig:
    carrier: Carrier
    source: DipoleSource
    geometry: LinkGeometry
    profile: SurfaceProfile
    rec_pol: Polarization
    quad: QuadratureSpec
    scan: Optional[ScanGrid]
    scan_pgm: bool = False
    scan_normalize_db: bool = False


def _expect_obj(node, path):
    if not isinstance(node, dict):
        raise ConfigError(f"{path}: expected an object")
    return node


def _check_keys(node, path, allowed):
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key: {path}.{key}" if path else f"unknown key: {key}")


def _get(node, path, key, required=True, default=None):
    if key not in node:
        if required:
            raise ConfigError(f"missing key: {path}.{key}")
        return default
    return node[key]


def _num(node, path, key, required=True, default=None):
    v = _get(node, path, key, required, default)
    if v is default and not required:
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return float(v)


def _int(node, path, key, required=True, default=None):
    v = _get(node, path, key, required, default)
    if v is default and not required:
        return default
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    return v


def _bool(node, path, key, default=False):
    v = node.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}: expected true/false")
    return v


def _angle(node, path, stem, required=True, default=None):
    """Angle given as <stem>_deg or <stem>_rad (exactly one)."""
    deg, rad = f"{stem}_deg", f"{stem}_rad"
    has_deg, has_rad = deg in node, rad in node
    if has_deg and has_rad:
        raise ConfigError(f"{path}: give exactly one of {deg} and {rad}")
    if not has_deg and not has_rad:
        if required:
            raise ConfigError(f"missing key: {path}.{stem}_deg (or {stem}_rad)")
        return default
    key = deg if has_deg else rad
    v = node[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number")
    return math.radians(v) if has_deg else float(v)


def _vec3(node, path, key):
    v = _get(node, path, key)
    if (
        not isinstance(v, list)
        or len(v) != 3
        or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in v)
    ):
        raise ConfigError(f"{path}.{key}: expected a list of three numbers")
    return [float(c) for c in v]


def _polarization(node, path):
    node = _expect_obj(node, path)
    _check_keys(node, path, {"direction", "phase_deg", "phase_rad"})
    direction = _vec3(node, path, "direction")
    phase = _angle(node, path, "phase", required=False, default=0.0)
    try:
        return Polarization(direction=tuple(direction), phase=phase)
    except ContractError as exc:
        raise ConfigError(f"{path}.direction: {exc}") from exc


def _placement(node, path):
    node = _expect_obj(node, path)
    if "position" in node:
        _check_keys(node, path, {"position"})
        p = _vec3(node, path, "position")
        return Point3(*p)
    _check_keys(node, path, {"d0", "theta_deg", "theta_rad", "phi_deg", "phi_rad", "z_sign"})
    d0 = _num(node, path, "d0")
    if d0 <= 0:
        raise ConfigError(f"{path}.d0: must be positive")
    theta = _angle(node, path, "theta")
    phi = _angle(node, path, "phi")
    z_sign = _int(node, path, "z_sign", required=False, default=1)
    if z_sign not in (1, -1):
        raise ConfigError(f"{path}.z_sign: must be 1 or -1")
    st = math.sin(theta)
    return Point3(d0 * st * math.cos(phi), d0 * st * math.sin(phi), z_sign * d0 * math.cos(theta))


def _carrier(node, path):
    node = _expect_obj(node, path)
    _check_keys(node, path, {"freq_hz", "eps0", "mu0"})
    freq = _num(node, path, "freq_hz")
    kwargs = {}
    eps0 = _num(node, path, "eps0", required=False)
    mu0 = _num(node, path, "mu0", required=False)
    if eps0 is not None:
        kwargs["eps0"] = eps0
    if mu0 is not None:
        kwargs["mu0"] = mu0
    try:
        return Carrier(freq=freq, **kwargs)
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _geometry(node, path):
    node = _expect_obj(node, path)
    _check_keys(node, path, {"half_len_x", "half_len_y", "side", "tx", "rx"})
    lx = _num(node, path, "half_len_x")
    ly = _num(node, path, "half_len_y")
    if lx <= 0:
        raise ConfigError(f"{path}.half_len_x: must be positive")
    if ly <= 0:
        raise ConfigError(f"{path}.half_len_y: must be positive")
    side_raw = _get(node, path, "side")
    try:
        side = Side(side_raw)
    except ValueError:
        raise ConfigError(f"{path}.side: must be 'reflection' or 'transmission'")
    tx = _placement(_get(node, path, "tx"), f"{path}.tx")
    rx_node = _expect_obj(_get(node, path, "rx"), f"{path}.rx")
    if "position" not in rx_node and "z_sign" not in rx_node:
        rx_node = dict(rx_node)
        rx_node["z_sign"] = 1 if side is Side.REFLECTION else -1
    rx = _placement(rx_node, f"{path}.rx")
    try:
        return LinkGeometry(tx=tx, rx=rx, surface=SurfaceSpec(lx, ly), side=side)
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _phase_law(node, path, geom):
    node = _expect_obj(node, path)
    variant = _get(node, path, "variant")
    phi0_keys = {"phi0_deg", "phi0_rad"}
    if variant == "specular":
        _check_keys(node, path, {"variant"} | phi0_keys)
        return SpecularPhase(phi0=_angle(node, path, "phi0", required=False, default=0.0))
    if variant == "anomalous":
        _check_keys(
            node,
            path,
            {"variant", "alpha", "beta", "steer_theta_deg", "steer_theta_rad",
             "steer_phi_deg", "steer_phi_rad"} | phi0_keys,
        )
        phi0 = _angle(node, path, "phi0", required=False, default=0.0)
        explicit = "alpha" in node or "beta" in node
        steered = any(k in node for k in
                      ("steer_theta_deg", "steer_theta_rad", "steer_phi_deg", "steer_phi_rad"))
        if explicit and steered:
            raise ConfigError(f"{path}: give either alpha/beta or steer_* angles, not both")
        if explicit:
            alpha = _num(node, path, "alpha")
            beta = _num(node, path, "beta")
        elif steered:
            steer_theta = _angle(node, path, "steer_theta")
            steer_phi = _angle(node, path, "steer_phi")
            a0 = angles(geom, 0.0, 0.0)
            alpha, beta = steering_coefficients(
                a0.theta_inc, a0.phi_inc_az, steer_theta, steer_phi
            )
        else:
            raise ConfigError(f"missing key: {path}.alpha (or steer_theta_deg/steer_phi_deg)")
        try:
            return AnomalousPhase(alpha=alpha, beta=beta, phi0=phi0)
        except ContractError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if variant == "focusing":
        _check_keys(node, path, {"variant"} | phi0_keys)
        return FocusingPhase(phi0=_angle(node, path, "phi0", required=False, default=0.0))
    raise ConfigError(f"{path}.variant: must be 'specular', 'anomalous' or 'focusing'")


def _profile(node, path, geom):
    node = _expect_obj(node, path)
    _check_keys(node, path, {"mode", "magnitude", "efficiency", "phase_law", "output_polarization"})
    mode_raw = _get(node, path, "mode")
    try:
        mode = Mode(mode_raw)
    except ValueError:
        raise ConfigError(f"{path}.mode: must be 'reflect' or 'transmit'")
    if (mode is Mode.REFLECT) != (geom.side is Side.REFLECTION):
        raise ConfigError(f"{path}.mode: must match geometry.side")
    magnitude = _num(node, path, "magnitude", required=False, default=1.0)
    efficiency = _num(node, path, "efficiency", required=False, default=1.0)
    law = _phase_law(_get(node, path, "phase_law"), f"{path}.phase_law", geom)
    pol = _polarization(_get(node, path, "output_polarization"), f"{path}.output_polarization")
    try:
        return SurfaceProfile(
            phase_law=law, pol_out=pol, mode=mode, magnitude=magnitude, efficiency=efficiency
        )
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _source(node, path, carrier):
    node = _expect_obj(node, path)
    _check_keys(node, path, {"p_dm", "polarization"})
    raw = _get(node, path, "p_dm", required=False, default="paper-normalized")
    if raw == "paper-normalized":
        p_dm = paper_normalized_moment(carrier)
    elif isinstance(raw, (int, float)) and not isinstance(raw, bool):
        p_dm = float(raw)
    else:
        raise ConfigError(f"{path}.p_dm: expected a number or 'paper-normalized'")
    pol = _polarization(_get(node, path, "polarization"), f"{path}.polarization")
    return p_dm, pol


def _quadrature(node, path):
    if node is None:
        return QuadratureSpec()
    node = _expect_obj(node, path)
    _check_keys(node, path, {"samples_per_wavelength", "budget", "min_samples"})
    kwargs = {}
    spw = _num(node, path, "samples_per_wavelength", required=False)
    if spw is not None:
        kwargs["samples_per_wavelength"] = spw
    budget = _int(node, path, "budget", required=False)
    if budget is not None:
        kwargs["budget"] = budget
    ms = _int(node, path, "min_samples", required=False)
    if ms is not None:
        kwargs["min_samples"] = ms
    try:
        return QuadratureSpec(**kwargs)
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _axis(node, path, angular=False):
    node = _expect_obj(node, path)
    if angular:
        _check_keys(node, path, {"start_deg", "start_rad", "stop_deg", "stop_rad", "count"})
        start = _angle(node, path, "start")
        stop = _angle(node, path, "stop")
        log = False
        centers = True
    else:
        _check_keys(node, path, {"start", "stop", "count", "log"})
        start = _num(node, path, "start")
        stop = _num(node, path, "stop")
        log = _bool(node, path, "log", default=False)
        centers = False
    count = _int(node, path, "count")
    try:
        return AxisSpec(start=start, stop=stop, count=count, log=log, cell_centers=centers)
    except ContractError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _methods(node, path):
    v = _get(node, path, "methods")
    if not isinstance(v, list) or not v or not all(isinstance(m, str) for m in v):
        raise ConfigError(f"{path}.methods: expected a non-empty list of method strings")
    for m in v:
        try:
            parse_method(m)
        except ContractError as exc:
            raise ConfigError(f"{path}.methods: {exc}") from exc
    return tuple(v)


def _scan(node, path):
    if node is None:
        return None
    node = _expect_obj(node, path)
    mode_raw = _get(node, path, "mode")
    try:
        mode = ScanMode(mode_raw)
    except ValueError:
        raise ConfigError(
            f"{path}.mode: must be one of 'angular', 'distance', 'size', 'discretization'"
        )
    common = {"mode", "methods", "pgm", "normalize_db"}
    if mode is ScanMode.ANGULAR:
        _check_keys(node, path, common | {"theta", "phi"})
        axis0 = _axis(_get(node, path, "theta"), f"{path}.theta", angular=True)
        axis1 = _axis(_get(node, path, "phi"), f"{path}.phi", angular=True)
    else:
        key = {"distance": "d0", "size": "diagonal", "discretization": "step"}[mode.value]
        _check_keys(node, path, common | {key})
        axis0 = _axis(_get(node, path, key), f"{path}.{key}")
        axis1 = None
    return ScanGrid(mode=mode, axis0=axis0, axis1=axis1, methods=_methods(node, path)), _bool(
        node, path, "pgm", default=False
    ), _bool(node, path, "normalize_db", default=False)


def parse_config(path):
    """Parse and validate a JSON run configuration into a RunConfig."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        root = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    root = _expect_obj(root, "<root>")
    _check_keys(
        root,
        "",
        {"carrier", "source", "geometry", "profile", "receive_polarization", "quadrature", "scan"},
    )
    carrier = _carrier(_get(root, "<root>", "carrier"), "carrier")
    geom = _geometry(_get(root, "<root>", "geometry"), "geometry")
    p_dm, src_pol = _source(_get(root, "<root>", "source"), "source", carrier)
    source = DipoleSource(p_dm=p_dm, polarization=src_pol, position=geom.tx)
    profile = _profile(_get(root, "<root>", "profile"), "profile", geom)
    rec_pol = _polarization(_get(root, "<root>", "receive_polarization"), "receive_polarization")
    quad = _quadrature(root.get("quadrature"), "quadrature")
    scan_parsed = _scan(root.get("scan"), "scan")
    return RunConfig(
        carrier=carrier,
        source=source,
        geometry=geom,
        profile=profile,
        rec_pol=rec_pol,
        quad=quad,
        scan=scan_parsed[0] if scan_parsed else None,
        scan_pgm=scan_parsed[1] if scan_parsed else False,
        scan_normalize_db=scan_parsed[2] if scan_parsed else False,
    )
