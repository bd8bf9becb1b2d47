"""
Source configuration: YAML files in conventional units, validated by pydantic and converted to the
SI domain objects in one place.
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union
import hashlib
import json
import logging

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, ValidationError
from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from backwave.biphoton import Calibration
from backwave.cavity import CavitySpec
from backwave.dispersion import DATA_DIR, Axis, SellmeierModel, load_dispersion_file
from backwave.errors import ConfigError, UnsupportedSetting
from backwave.phasematch import CrystalSpec, Geometry
from backwave import units

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = DATA_DIR / "default.yaml"
HASH_LENGTH = 12

Auto = Literal["auto"]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AxesConfig(Section):
    pump: Axis = Axis.Y
    signal: Axis = Axis.Y
    idler: Axis = Axis.Z


class CrystalConfig(Section):
    length_cm: float = Field(gt=0)
    poling_period_nm: Union[Auto, float] = "auto"
    qpm_order: int = Field(default=3, ge=1)
    geometry: Geometry = Geometry.BACKWARD
    axes: AxesConfig = AxesConfig()
    dispersion: str = "ktp.yaml"
    temperature_c: Optional[float] = None


class BandValues(Section):
    signal: float
    idler: float


class ModeIndices(Section):
    signal: Union[Auto, int] = "auto"
    idler: Union[Auto, int] = "auto"


class CavityConfig(Section):
    reflectivity: BandValues
    single_pass_loss: BandValues = BandValues(signal=0.0, idler=0.0)
    mode_index: ModeIndices = ModeIndices()


class PumpConfig(Section):
    wavelength_nm: float = Field(gt=0)
    power_mw: float = Field(ge=0)


class CalibrationConfig(Section):
    rate_per_watt: Optional[float] = None
    kappa1_mhz: Optional[float] = None
    reference_power_mw: Optional[float] = None


class GridSpec(Section):
    window: float = Field(gt=0)
    points: int = Field(ge=3)


class GridsConfig(Section):
    spectrum: GridSpec = GridSpec(window=40.0, points=4001)
    tau: GridSpec = GridSpec(window=5.0, points=2001)
    freespace: GridSpec = GridSpec(window=3.0, points=4001)
    include_accidentals: bool = False


class EventsConfig(Section):
    duration_s: float = 1.0
    seed: int = 42
    window_ns: Optional[float] = None
    bin_ns: Optional[float] = None


class OutputConfig(Section):
    directory: str = "out"
    formats: List[Literal["csv", "svg"]] = ["csv", "svg"]


class SourceConfig(Section):
    """
    Complete description of one simulated source. Lengths in cm/nm, power in mW, kappa1 in MHz.
    """
    crystal: CrystalConfig
    cavity: CavityConfig
    pump: PumpConfig
    calibration: CalibrationConfig
    grids: GridsConfig = GridsConfig()
    events: EventsConfig = EventsConfig()
    output: OutputConfig = OutputConfig()

    _source_dir: Optional[Path] = PrivateAttr(default=None)

    @property
    def source_dir(self) -> Optional[Path]:
        return self._source_dir

    def echo(self) -> Dict[str, Any]:
        """
        Plain mapping of the validated configuration, suitable for YAML round trips.
        """
        return self.model_dump(mode="json")

    def config_hash(self) -> str:
        canonical = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:HASH_LENGTH]


def load_config(path: Union[str, Path] = None, overrides: Sequence[str] = None) -> SourceConfig:
    """
    Read, override and validate a configuration file (the shipped default if no path is given).
    """
    path = Path(path) if path else DEFAULT_CONFIG
    if not path.is_file():
        raise ConfigError(f"Configuration file {path} does not exist.")

    yaml = YAML(typ="safe")
    try:
        with path.open("r", encoding="utf-8") as f:
            data = yaml.load(f)
    except YAMLError as e:
        raise ConfigError(f"Configuration file {path} is not valid YAML: {e}")

    if not isinstance(data, dict):
        raise ConfigError(f"Configuration file {path} must contain a mapping at its root.")

    cfg = config_from_mapping(apply_overrides(data, overrides or []))
    cfg._source_dir = path.resolve().parent
    logger.info(f"Loaded configuration {path} ({cfg.config_hash()}).")

    return cfg


def config_from_mapping(data: Dict[str, Any]) -> SourceConfig:
    try:
        cfg = SourceConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {_describe(e)}")

    if cfg.crystal.temperature_c is not None:
        raise UnsupportedSetting("Crystal temperature is not supported; remove crystal.temperature_c or set it to null.")

    return cfg


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """
    Apply dotted-path overrides `section.key=value`; values are parsed as YAML scalars.
    """
    yaml = YAML(typ="safe")
    for item in overrides:
        key, sep, raw = item.partition("=")
        parts = [p for p in key.strip().split(".") if p]
        if not sep or not parts:
            raise ConfigError(f"Invalid override '{item}'; expected section.key=value.")

        target = data
        for segment in parts[:-1]:
            if target.get(segment) is None:
                target[segment] = {}
            target = target[segment]
            if not isinstance(target, dict):
                raise ConfigError(f"Cannot apply override '{item}': '{segment}' is not a section.")

        try:
            target[parts[-1]] = yaml.load(raw) if raw.strip() else None
        except YAMLError as e:
            raise ConfigError(f"Cannot parse value of override '{item}': {e}")

    return data


def dispersion_path(cfg: SourceConfig) -> Path:
    """
    Dispersion file relative to the configuration file, falling back to the packaged data directory.
    """
    name = Path(cfg.crystal.dispersion)
    candidates = [name] if name.is_absolute() else [p / name for p in (cfg.source_dir, DATA_DIR) if p is not None]
    for candidate in candidates:
        if candidate.is_file():
            return candidate

    raise ConfigError(f"Dispersion data file '{cfg.crystal.dispersion}' not found.")


def load_dispersion(cfg: SourceConfig) -> Dict[Axis, SellmeierModel]:
    return load_dispersion_file(dispersion_path(cfg))


def build_crystal(cfg: SourceConfig, dispersion: Dict[Axis, SellmeierModel] = None) -> CrystalSpec:
    """
    CrystalSpec in SI units; an `auto` poling period is left unset for the designer to fill in.
    """
    c = cfg.crystal
    period = None if c.poling_period_nm == "auto" else units.nm_to_m(c.poling_period_nm)

    return CrystalSpec(
        length=units.cm_to_m(c.length_cm),
        qpm_order=c.qpm_order,
        dispersion=dispersion if dispersion is not None else load_dispersion(cfg),
        poling_period=period,
        pump_axis=c.axes.pump,
        signal_axis=c.axes.signal,
        idler_axis=c.axes.idler,
        geometry=c.geometry,
    )


def build_cavity(cfg: SourceConfig) -> CavitySpec:
    """
    CavitySpec for a cavity formed by the coated crystal faces, so its length is the crystal length.
    """
    cav = cfg.cavity
    auto = cav.mode_index.signal == "auto" or cav.mode_index.idler == "auto"
    if auto and cav.mode_index.signal != cav.mode_index.idler:
        raise ConfigError("Cavity mode indices must be both explicit or both auto.")

    return CavitySpec(
        length=units.cm_to_m(cfg.crystal.length_cm),
        reflectivity_signal=cav.reflectivity.signal,
        reflectivity_idler=cav.reflectivity.idler,
        loss_signal=cav.single_pass_loss.signal,
        loss_idler=cav.single_pass_loss.idler,
        mode_index_signal=None if auto else cav.mode_index.signal,
        mode_index_idler=None if auto else cav.mode_index.idler,
    )


def build_calibration(cfg: SourceConfig) -> Calibration:
    cal = cfg.calibration
    return Calibration(
        rate_per_watt=cal.rate_per_watt,
        kappa1=units.mhz_to_rad_s(cal.kappa1_mhz) if cal.kappa1_mhz is not None else None,
        reference_power=units.mw_to_w(cal.reference_power_mw) if cal.reference_power_mw is not None else None,
    )


def pump_wavelength(cfg: SourceConfig) -> float:
    return units.nm_to_m(cfg.pump.wavelength_nm)


def pump_omega(cfg: SourceConfig) -> float:
    return float(units.wavelength_to_omega(pump_wavelength(cfg)))


def pump_power(cfg: SourceConfig) -> float:
    return units.mw_to_w(cfg.pump.power_mw)


def _describe(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in error.errors())
