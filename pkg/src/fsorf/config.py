"""TOML run-configuration parsing and validation.

A run config has a [channel] section (physical link-budget parameters, or
a direct (a, b, gamma_T) override), a [network] section (N, B, Omega,
omega, one or more protocol variants, optional sweep declaration), an
optional [simulation] section and an optional [output] section. Fields
holding dB values carry a _dB / _dBm / _dBi suffix; everything else is
linear / SI.

Sweeps are declared next to the scalar they replace:
``omega_sweep = { start = 0.1, stop = 1.0, step = 0.1 }`` (or
``{ values = [...] }``) in [network] for omega / p / omega_ratio / n_nodes,
and a_sweep / b_sweep in [channel] (direct form only). The `sweep` command
requires exactly one declaration.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import (FsoParams, LinkState, RfParams, ScintillationParams,
                      db_to_linear, dbm_to_watts, evaluate_link_state)
from .errors import ValidationError
from .protocol import ProtocolConfig, ProtocolMode
from .simulator import SimConfig

SWEEPABLE = ("omega", "p", "omega_ratio", "n_nodes", "a", "b")


@dataclass(frozen=True)
class DirectChannel:
    """User-supplied link state, bypassing the physics chain."""

    a: float
    b: float
    gamma_t: float   # linear

    def link_state(self) -> LinkState:
        return LinkState(a=self.a, b=self.b, gamma_T=self.gamma_t,
                         avg_snr_fso=math.nan, avg_snr_rf=math.nan)


@dataclass(frozen=True)
class PhysicalChannel:
    fso: FsoParams
    rf: RfParams
    modulation_order: int
    target_ber: float
    scint_override: ScintillationParams | None = None

    def link_state(self) -> LinkState:
        return evaluate_link_state(self.fso, self.rf, self.modulation_order,
                                   self.target_ber, self.scint_override)


@dataclass(frozen=True)
class NetworkSection:
    n_nodes: int
    buffer_size: int
    omega_ratio: int
    omega: float
    protocols: tuple[ProtocolConfig, ...]


@dataclass(frozen=True)
class RunConfig:
    channel: DirectChannel | PhysicalChannel
    network: NetworkSection
    simulation: SimConfig | None
    sweep_var: str | None
    sweep_values: tuple[float, ...]
    csv_path: str | None
    precision: int
    metadata: dict = field(default_factory=dict)


def _req(table: dict, key: str, section: str):
    if key not in table:
        raise ValidationError(f"[{section}] is missing required field '{key}'")
    return table[key]


def _num(table: dict, key: str, section: str, default=None):
    if key not in table:
        if default is None:
            raise ValidationError(f"[{section}] is missing required field '{key}'")
        return default
    val = table[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"[{section}].{key} must be a number, got {val!r}")
    return float(val)


def _int(table: dict, key: str, section: str, default=None) -> int:
    val = _num(table, key, section, default)
    if val != int(val):
        raise ValidationError(f"[{section}].{key} is restricted to integer values, got {val}")
    return int(val)


def _parse_fso(t: dict) -> FsoParams:
    sec = "channel.fso"
    if "tx_power_dBm" in t:
        tx_w = dbm_to_watts(_num(t, "tx_power_dBm", sec))
    else:
        tx_w = _num(t, "tx_power_W", sec)
    return FsoParams(
        wavelength_m=_num(t, "wavelength_m", sec),
        lo_power_W=_num(t, "lo_power_W", sec),
        shot_noise_var=_num(t, "shot_noise_var", sec),
        responsivity_A_per_W=_num(t, "responsivity_A_per_W", sec),
        detector_diameter_m=_num(t, "detector_diameter_m", sec),
        tx_power_W=tx_w,
        divergence_rad=_num(t, "divergence_rad", sec),
        jitter_std_m=_num(t, "jitter_std_m", sec),
        link_distance_m=_num(t, "link_distance_m", sec),
        cn2=_num(t, "cn2", sec),
        weather_atten_dB_per_km=_num(t, "weather_atten_dB_per_km", sec),
        avg_symbol_energy=_num(t, "avg_symbol_energy", sec, 1.0),
    )


def _parse_rf(t: dict) -> RfParams:
    sec = "channel.rf"
    if "tx_power_dBm" in t:
        tx_w = dbm_to_watts(_num(t, "tx_power_dBm", sec))
    else:
        tx_w = _num(t, "tx_power_W", sec)
    return RfParams(
        carrier_hz=_num(t, "carrier_Hz", sec),
        bandwidth_hz=_num(t, "bandwidth_Hz", sec),
        tx_power_W=tx_w,
        tx_gain_dBi=_num(t, "tx_gain_dBi", sec),
        rx_gain_dBi=_num(t, "rx_gain_dBi", sec),
        noise_psd_dBm_per_MHz=_num(t, "noise_psd_dBm_per_MHz", sec),
        noise_figure_dB=_num(t, "noise_figure_dB", sec),
        oxygen_atten_dB_per_km=_num(t, "oxygen_atten_dB_per_km", sec, 0.0),
        rain_atten_dB_per_km=_num(t, "rain_atten_dB_per_km", sec, 0.0),
        nakagami_m=_num(t, "nakagami_m", sec),
        link_distance_m=_num(t, "link_distance_m", sec),
        avg_symbol_energy=_num(t, "avg_symbol_energy", sec, 1.0),
    )


def _parse_channel(t: dict) -> DirectChannel | PhysicalChannel:
    direct_keys = {"a", "b", "gamma_T_dB"} & set(t)
    physical = "fso" in t or "rf" in t
    if direct_keys and physical:
        raise ValidationError(
            "[channel] must use either the direct (a, b, gamma_T_dB) override or "
            "the physical fso/rf form, not both")
    if direct_keys:
        ch = DirectChannel(a=_num(t, "a", "channel"), b=_num(t, "b", "channel"),
                           gamma_t=db_to_linear(_num(t, "gamma_T_dB", "channel")))
        ch.link_state()  # validate ranges now
        return ch
    if not physical:
        raise ValidationError(
            "[channel] needs physical fso/rf subsections or a direct (a, b, gamma_T_dB) override")
    if "fso" not in t or "rf" not in t:
        raise ValidationError("[channel] physical form needs both [channel.fso] and [channel.rf]")
    override = None
    if "scintillation" in t:
        s = t["scintillation"]
        override = ScintillationParams(
            alpha=_num(s, "alpha", "channel.scintillation"),
            beta=_num(s, "beta", "channel.scintillation"),
            xi=_num(s, "xi", "channel.scintillation"),
            rytov_var=_num(s, "rytov_var", "channel.scintillation", math.nan),
            d_param=_num(s, "d_param", "channel.scintillation", math.nan),
            w_eq_m=_num(s, "w_eq_m", "channel.scintillation", math.nan),
            w_z_m=_num(s, "w_z_m", "channel.scintillation", math.nan),
        )
    return PhysicalChannel(
        fso=_parse_fso(t["fso"]),
        rf=_parse_rf(t["rf"]),
        modulation_order=_int(t, "modulation_order", "channel"),
        target_ber=_num(t, "target_ber", "channel"),
        scint_override=override,
    )


def _parse_protocol(t: dict) -> ProtocolConfig:
    mode_str = _req(t, "mode", "network.protocol")
    try:
        mode = ProtocolMode(mode_str)
    except ValueError:
        names = ", ".join(m.value for m in ProtocolMode)
        raise ValidationError(f"unknown protocol mode {mode_str!r}; expected one of: {names}")
    p = _num(t, "p", "network.protocol", 1.0)
    return ProtocolConfig(mode=mode, n_nodes=1, p=p)  # n_nodes patched by caller


def _sweep_values(decl: dict, name: str) -> tuple[float, ...]:
    if "values" in decl:
        vals = decl["values"]
        if not isinstance(vals, list) or not vals:
            raise ValidationError(f"{name}.values must be a nonempty list")
        return tuple(float(v) for v in vals)
    start = _num(decl, "start", name)
    stop = _num(decl, "stop", name)
    step = _num(decl, "step", name)
    if step <= 0.0:
        raise ValidationError(f"{name}.step must be positive, got {step}")
    if stop < start:
        raise ValidationError(f"{name}: stop < start")
    vals = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + 1e-9 * max(1.0, abs(stop)):
            break
        vals.append(v)
        k += 1
    if not vals:
        raise ValidationError(f"{name}: empty sweep range")
    return tuple(vals)


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a TOML run configuration."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"config parse error: {exc}") from exc

    if "channel" not in doc:
        raise ValidationError("config is missing the [channel] section")
    if "network" not in doc:
        raise ValidationError("config is missing the [network] section")

    channel = _parse_channel(doc["channel"])

    net = doc["network"]
    n_nodes = _int(net, "n_nodes", "network")
    buffer_size = _int(net, "buffer_size", "network")
    omega_ratio = _int(net, "omega_ratio", "network")
    omega = _num(net, "omega", "network")
    if not 0.0 <= omega <= 1.0:
        raise ValidationError(f"[network].omega must be in [0,1], got {omega}")
    if n_nodes < 1 or buffer_size < 1 or omega_ratio < 1:
        raise ValidationError("[network] n_nodes, buffer_size, omega_ratio must be >= 1")

    if "protocols" in net and "protocol" in net:
        raise ValidationError("[network] declares both 'protocol' and 'protocols'")
    raw_protocols = net.get("protocols", [net.get("protocol", {"mode": "p-persistence", "p": 1.0})])
    if not raw_protocols:
        raise ValidationError("[network].protocols must not be empty")
    protocols = []
    for raw in raw_protocols:
        proto = _parse_protocol(raw)
        protocols.append(ProtocolConfig(mode=proto.mode, n_nodes=n_nodes, p=proto.p))

    # sweep declarations
    sweeps: list[tuple[str, tuple[float, ...]]] = []
    for var in ("omega", "p", "omega_ratio", "n_nodes"):
        key = f"{var}_sweep"
        if key in net:
            sweeps.append((var, _sweep_values(net[key], f"network.{key}")))
    for var in ("a", "b"):
        key = f"{var}_sweep"
        if key in doc["channel"]:
            if not isinstance(channel, DirectChannel):
                raise ValidationError(f"[channel].{key} requires the direct channel form")
            sweeps.append((var, _sweep_values(doc["channel"][key], f"channel.{key}")))
    if len(sweeps) > 1:
        names = ", ".join(v for v, _ in sweeps)
        raise ValidationError(f"config declares more than one sweep ({names})")
    sweep_var, sweep_values = sweeps[0] if sweeps else (None, ())

    if sweep_var in ("omega_ratio", "n_nodes"):
        for v in sweep_values:
            if v != int(v) or v < 1:
                raise ValidationError(
                    f"{sweep_var} sweep values are restricted to integers >= 1, got {v}")
    if sweep_var == "omega" or sweep_var == "a" or sweep_var == "b":
        for v in sweep_values:
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"{sweep_var} sweep values must be in [0,1], got {v}")

    simulation = None
    if "simulation" in doc:
        s = doc["simulation"]
        simulation = SimConfig(
            seed=_int(s, "seed", "simulation", 1),
            steps=_int(s, "steps", "simulation"),
            warmup=_int(s, "warmup", "simulation", 0),
            scope=s.get("scope", "joint"),
            chain_node=_int(s, "chain_node", "simulation", 1),
        )

    out = doc.get("output", {})
    precision = _int(out, "precision", "output", 12)
    if not 1 <= precision <= 17:
        raise ValidationError(f"[output].precision must be in [1, 17], got {precision}")

    return RunConfig(
        channel=channel,
        network=NetworkSection(n_nodes=n_nodes, buffer_size=buffer_size,
                               omega_ratio=omega_ratio, omega=omega,
                               protocols=tuple(protocols)),
        simulation=simulation,
        sweep_var=sweep_var,
        sweep_values=sweep_values,
        csv_path=out.get("csv") if isinstance(out.get("csv"), str) else None,
        precision=precision,
        metadata=dict(doc.get("metadata", {})),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from exc
