"""JSON run configuration.

Physical quantities are SI with the unit in the key name, e.g.::

    {
      "mode": "two_phonon",
      "fock_dim": 40,
      "engine": "exact_channel",
      "atom": {"beta_sq": 0.2, "theta_rad": 0.0},
      "G": 0.2,
      "bath": {"gamma_over_rate": 0.005, "nbar_th": 0.1},
      "init": {"state": "thermal", "nbar": 0.1},
      "k_atoms": 30
    }

Instead of ``"G"`` a ``"physical"`` block (``Q_C``, ``z_osc_m``, ``mu0_C_m``,
``mu0p_C_m``, ``Delta_rad_per_s``, ``omega_osc_rad_per_s``, ``v_m_per_s``,
``Z0_m``, ``rate_per_s``) lets the coupling be computed from the flyby.
The bath may also be given as ``Gamma_m_rad_per_s``, divided by the atom rate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields

from .atomfield import PhysicalParams, integrated_coupling
from .errors import ConfigError, DomainError
from .propagator import MODES
from .sweep import ENGINES

PHYSICAL_KEYS = {
    "Q_C": "Q",
    "z_osc_m": "z_osc",
    "mu0_C_m": "mu0",
    "mu0p_C_m": "mu0p",
    "Delta_rad_per_s": "Delta",
    "omega_osc_rad_per_s": "omega_osc",
    "v_m_per_s": "v",
    "Z0_m": "Z0",
    "rate_per_s": "rate",
}


def physical_to_dict(p: PhysicalParams) -> dict:
    return {key: getattr(p, attr) for key, attr in PHYSICAL_KEYS.items()}


def physical_from_dict(d: dict) -> PhysicalParams:
    unknown = set(d) - set(PHYSICAL_KEYS)
    if unknown:
        raise ConfigError(f"unknown physical keys {sorted(unknown)}")
    base = physical_to_dict(PhysicalParams.cesium_reference())
    base.update(d)
    try:
        return PhysicalParams(**{PHYSICAL_KEYS[k]: float(v) for k, v in base.items()})
    except DomainError as e:
        raise ConfigError(str(e)) from None


@dataclass(frozen=True)
class RunConfig:
    mode: str = "two_phonon"
    fock_dim: int = 40
    engine: str = "exact_channel"
    beta_sq: float = 0.2
    theta: float = 0.0
    G: float | None = None
    physical: PhysicalParams | None = None
    gamma_over_rate: float = 0.0
    nbar_th: float = 0.0
    init: str = "vacuum"
    nbar_init: float | None = None
    k_atoms: int = 30
    temperature: float | None = None
    render: bool = False
    sweep: dict | None = None
    wigner: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if int(self.fock_dim) != self.fock_dim or self.fock_dim < 2:
            raise ConfigError("fock_dim must be an integer >= 2")
        if int(self.k_atoms) != self.k_atoms or self.k_atoms < 0:
            raise ConfigError("k_atoms must be a non-negative integer")
        if not 0.0 <= self.beta_sq <= 1.0:
            raise ConfigError("atom.beta_sq must lie in [0, 1]")
        if self.G is not None and self.physical is not None:
            raise ConfigError("give either 'G' or 'physical', not both")
        if self.gamma_over_rate < 0 or self.nbar_th < 0:
            raise ConfigError("bath parameters must be non-negative")
        if self.init not in ("vacuum", "thermal"):
            raise ConfigError("init.state must be 'vacuum' or 'thermal'")

    def coupling(self) -> float:
        """Dimensionless G, given directly or integrated over the flyby."""
        if self.G is not None:
            return float(self.G)
        if self.physical is None:
            raise ConfigError("simulation needs either 'G' or a 'physical' block")
        which = "two_phonon" if self.mode == "two_phonon" else "single"
        return integrated_coupling(self.physical, which=which)

    def physical_or_reference(self) -> PhysicalParams:
        return self.physical or PhysicalParams.cesium_reference()

    def model_params(self) -> dict:
        """Parameter map understood by :func:`rydosc.sweep.simulate_point`."""
        return {
            "mode": self.mode,
            "G": self.coupling(),
            "beta_sq": self.beta_sq,
            "theta": self.theta,
            "gamma_over_rate": self.gamma_over_rate,
            "nbar_th": self.nbar_th,
            "init": self.init,
            "nbar_init": self.nbar_init,
            "fock_dim": self.fock_dim,
        }

    def to_dict(self) -> dict:
        d = {
            "mode": self.mode,
            "fock_dim": self.fock_dim,
            "engine": self.engine,
            "atom": {"beta_sq": self.beta_sq, "theta_rad": self.theta},
            "bath": {"gamma_over_rate": self.gamma_over_rate, "nbar_th": self.nbar_th},
            "init": {"state": self.init, "nbar": self.nbar_init},
            "k_atoms": self.k_atoms,
            "render": self.render,
        }
        if self.G is not None:
            d["G"] = self.G
        if self.physical is not None:
            d["physical"] = physical_to_dict(self.physical)
        if self.temperature is not None:
            d["temperature_K"] = self.temperature
        if self.sweep is not None:
            d["sweep"] = self.sweep
        if self.wigner:
            d["wigner"] = dict(self.wigner)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        known = {"mode", "fock_dim", "engine", "atom", "G", "physical", "bath", "init", "k_atoms",
                 "temperature_K", "render", "sweep", "wigner"}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
        atom = d.get("atom", {})
        bath = d.get("bath", {})
        init = d.get("init", {})
        physical = physical_from_dict(d["physical"]) if "physical" in d else None
        gamma = bath.get("gamma_over_rate")
        if "Gamma_m_rad_per_s" in bath:
            if gamma is not None:
                raise ConfigError("give the bath as gamma_over_rate or Gamma_m_rad_per_s, not both")
            rate = (physical or PhysicalParams.cesium_reference()).rate
            gamma = float(bath["Gamma_m_rad_per_s"]) / rate
        try:
            return cls(
                mode=d.get("mode", "two_phonon"),
                fock_dim=d.get("fock_dim", 40),
                engine=d.get("engine", "exact_channel"),
                beta_sq=float(atom.get("beta_sq", 0.2)),
                theta=float(atom.get("theta_rad", 0.0)),
                G=None if d.get("G") is None else float(d["G"]),
                physical=physical,
                gamma_over_rate=float(gamma or 0.0),
                nbar_th=float(bath.get("nbar_th", 0.0)),
                init=init.get("state", "vacuum"),
                nbar_init=None if init.get("nbar") is None else float(init["nbar"]),
                k_atoms=d.get("k_atoms", 30),
                temperature=None if d.get("temperature_K") is None else float(d["temperature_K"]),
                render=bool(d.get("render", False)),
                sweep=d.get("sweep"),
                wigner=dict(d.get("wigner", {})),
            )
        except (TypeError, AttributeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"malformed configuration: {e}") from None

    def replace(self, **changes) -> "RunConfig":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return RunConfig(**d)


def load_config(path) -> RunConfig:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from None
    return RunConfig.from_dict(data)
