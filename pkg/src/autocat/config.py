"""TOML scenario configs with units spelled out in the key names.

Frequency-like keys carry cycle units the way device tables quote them
(kappa_b_MHz = 40 means kappa_b / 2 pi = 40 MHz) and are converted to
angular rad/s exactly once, here. Ring energies E_*_GHz are E/h in GHz,
passed through unchanged. Unknown keys anywhere are rejected so a typo
cannot silently fall back to a default.

Only constant drive envelopes are expressible in a config; shaped
envelopes stay a library-level feature.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields

from .circuit import RingParams
from .dynamics import DriveSpec, RateSet
from .errors import ConfigError

try:
    import tomllib as _toml
except ModuleNotFoundError:
    import tomli as _toml

__all__ = [
    "ScenarioConfig",
    "RunSettings",
    "parse_config",
    "load_config",
    "effective_toml",
    "config_hash",
]

TWO_PI = 2.0 * math.pi
_GHZ = TWO_PI * 1e9
_MHZ = TWO_PI * 1e6
_KHZ = TWO_PI * 1e3

_RING_KEYS = ("E_J_GHz", "E_W_GHz", "E_C_GHz", "phi_ext_phi0")

# circuit keys -> (target name, scale to rad/s; None keeps raw value)
_CIRCUIT_KEYS = {
    "E_J_GHz": None, "E_W_GHz": None, "E_C_GHz": None, "phi_ext_phi0": None,
    "zpf_m": ("zpf_m", 1.0), "zpf_b": ("zpf_b", 1.0),
    "omega_m_GHz": ("omega_m", _GHZ), "omega_b_GHz": ("omega_b", _GHZ),
    "g2_MHz": ("g2", _MHZ), "chi_mm_kHz": ("chi_mm", _KHZ),
    "chi_bb_MHz": ("chi_bb", _MHZ), "chi_mb_MHz": ("chi_mb", _MHZ),
}

_RATES_KEYS = {
    "kappa_1_kHz": ("kappa_1", _KHZ),
    "kappa_b_MHz": ("kappa_b", _MHZ),
    "kappa_phi_m_MHz": ("kappa_phi_m", _MHZ),
    "kappa_phi_b_MHz": ("kappa_phi_b", _MHZ),
}

_DRIVE_KEYS = {
    "epsilon_d_MHz": ("epsilon_d", _MHZ),
    "epsilon_Z_MHz": ("epsilon_Z", _MHZ),
    "theta_z_rad": ("theta_z", 1.0),
    "Delta_m_MHz": ("Delta_m", _MHZ),
    "Delta_b_MHz": ("Delta_b", _MHZ),
}

# run keys -> (field, converter) where the converter maps parsed TOML
# values to the stored (base-unit) form
_RUN_KEYS = {
    "protocol": ("protocol", str),
    "alpha": ("alpha", float),
    "alpha_sq": ("alpha_sq", float),
    "p_plus": ("p_plus", float),
    "dim": ("dim", int),
    "dims": ("dims", lambda v: tuple(int(x) for x in v)),
    "t_max_us": ("t_max", lambda v: float(v) * 1e-6),
    "n_samples": ("n_samples", int),
    "times_ns": ("times", lambda v: tuple(float(x) * 1e-9 for x in v)),
    "seed": ("seed", int),
    "out": ("out", str),
    "kappa2_MHz": ("kappa2", lambda v: float(v) * _MHZ),
    "kappa2_guess_MHz": ("kappa2_guess", lambda v: float(v) * _MHZ),
    "x_tol": ("x_tol", float),
    "grid_extent": ("grid_extent", float),
    "grid_points": ("grid_points", int),
    "eps_Z_list_MHz": ("eps_list",
                       lambda v: tuple(float(x) * _MHZ for x in v)),
    "phi_start_phi0": ("phi_start", float),
    "phi_stop_phi0": ("phi_stop", float),
    "n_points": ("n_points", int),
    "photon_axis": ("photon_axis", lambda v: tuple(float(x) for x in v)),
    "populations": ("populations",
                    lambda v: tuple(tuple(float(x) for x in row)
                                    for row in v)),
    "hybridized_mass": ("hybridized_mass",
                        lambda v: tuple(float(x) for x in v)),
    "T1_us": ("T1", lambda v: float(v) * 1e-6),
    "alpha_c": ("alpha_c", float),
    "alpha_t": ("alpha_t", float),
    "g_cnot_MHz": ("g_cnot", lambda v: float(v) * _MHZ),
    "restabilize_kappa2_MHz": ("restabilize_kappa2",
                               lambda v: float(v) * _MHZ),
    "state": ("state", str),
    "fock_n": ("fock_n", int),
    "include_w0": ("include_w0", bool),
}


@dataclass(frozen=True)
class RunSettings:
    """Run-section values, converted to base units (s, rad/s)."""

    protocol: str | None = None
    alpha: float | None = None
    alpha_sq: float | None = None
    p_plus: float | None = None
    dim: int | None = None
    dims: tuple[int, ...] | None = None
    t_max: float | None = None
    n_samples: int | None = None
    times: tuple[float, ...] | None = None
    seed: int = 0
    out: str | None = None
    kappa2: float | None = None
    kappa2_guess: float | None = None
    x_tol: float | None = None
    grid_extent: float | None = None
    grid_points: int | None = None
    eps_list: tuple[float, ...] | None = None
    phi_start: float | None = None
    phi_stop: float | None = None
    n_points: int | None = None
    photon_axis: tuple[float, ...] | None = None
    populations: tuple[tuple[float, ...], ...] | None = None
    hybridized_mass: tuple[float, ...] | None = None
    T1: float | None = None
    alpha_c: float | None = None
    alpha_t: float | None = None
    g_cnot: float | None = None
    restabilize_kappa2: float | None = None
    state: str | None = None
    fock_n: int | None = None
    include_w0: bool = False

    def require(self, name: str):
        value = getattr(self, name)
        if value is None:
            key = _FIELD_TO_KEY.get(name, name)
            raise ConfigError(f"[run] needs key '{key}' for this protocol")
        return value

    def target_alpha(self) -> float:
        """Stabilized amplitude from alpha or alpha_sq."""
        if self.alpha is not None:
            return float(self.alpha)
        if self.alpha_sq is not None:
            return math.sqrt(float(self.alpha_sq))
        raise ConfigError("[run] needs 'alpha' or 'alpha_sq'")


_FIELD_TO_KEY = {f: k for k, (f, _) in _RUN_KEYS.items()}


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed scenario: circuit model, rates, drive, and run settings.

    `raw` keeps the TOML values exactly as given, so the effective config
    and its hash are stable against unit conversion round-off.
    """

    ring: RingParams | None
    overrides: dict[str, float]
    rates: RateSet
    drive: DriveSpec
    run: RunSettings
    raw: dict = field(repr=False)


def _check_section(name: str, table: dict, known) -> None:
    unknown = sorted(set(table) - set(known))
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys: {', '.join(unknown)}")


def _number(section: str, key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"[{section}] {key} must be a number")
    return float(value)


def parse_config(text: str) -> ScenarioConfig:
    try:
        doc = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    _check_section("config", doc, ("circuit", "rates", "drive", "run"))

    circ = doc.get("circuit", {})
    _check_section("circuit", circ, _CIRCUIT_KEYS)
    ring = None
    ring_given = [k for k in _RING_KEYS if k in circ]
    if ring_given:
        missing = sorted(set(_RING_KEYS) - set(ring_given))
        if missing:
            raise ConfigError(
                f"[circuit] ring model needs all of {', '.join(_RING_KEYS)}; "
                f"missing {', '.join(missing)}")
        try:
            ring = RingParams(
                E_J=_number("circuit", "E_J_GHz", circ["E_J_GHz"]),
                E_W=_number("circuit", "E_W_GHz", circ["E_W_GHz"]),
                E_C=_number("circuit", "E_C_GHz", circ["E_C_GHz"]),
                phi_ext=_number("circuit", "phi_ext_phi0",
                                circ["phi_ext_phi0"]))
        except ValueError as exc:
            raise ConfigError(f"[circuit] {exc}") from exc
    overrides = {}
    for key, spec in _CIRCUIT_KEYS.items():
        if spec is None or key not in circ:
            continue
        name, scale = spec
        overrides[name] = _number("circuit", key, circ[key]) * scale

    rates_tab = doc.get("rates", {})
    _check_section("rates", rates_tab, _RATES_KEYS)
    rate_kwargs = {}
    for key, (name, scale) in _RATES_KEYS.items():
        if key in rates_tab:
            rate_kwargs[name] = _number("rates", key, rates_tab[key]) * scale
    rates = RateSet(**rate_kwargs)

    drive_tab = doc.get("drive", {})
    _check_section("drive", drive_tab, _DRIVE_KEYS)
    drive_kwargs = {}
    for key, (name, scale) in _DRIVE_KEYS.items():
        if key in drive_tab:
            v = _number("drive", key, drive_tab[key]) * scale
            if name in ("epsilon_d", "epsilon_Z"):
                v = complex(v)
            drive_kwargs[name] = v
    drive = DriveSpec(**drive_kwargs)

    run_tab = doc.get("run", {})
    _check_section("run", run_tab, _RUN_KEYS)
    run_kwargs = {}
    for key, (name, conv) in _RUN_KEYS.items():
        if key not in run_tab:
            continue
        try:
            run_kwargs[name] = conv(run_tab[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[run] {key}: {exc}") from exc
    run = RunSettings(**run_kwargs)

    return ScenarioConfig(ring=ring, overrides=overrides, rates=rates,
                          drive=drive, run=run, raw=doc)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return repr(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize config value {v!r}")


def effective_toml(cfg: ScenarioConfig) -> str:
    """Canonical TOML text of the parsed config (sorted keys).

    Parsing this text yields the same raw values and therefore the same
    hash; re-running it reproduces the original outputs byte for byte.
    """
    lines = []
    for section in ("circuit", "rates", "drive", "run"):
        table = cfg.raw.get(section)
        if not table:
            continue
        lines.append(f"[{section}]")
        for key in sorted(table):
            lines.append(f"{key} = {_toml_value(table[key])}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(effective_toml(cfg).encode("utf-8")).hexdigest()
