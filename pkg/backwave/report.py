"""
Artifact writers: CSV tables, the scalar report table and the YAML report with the config echo.

Every artifact carries the config hash; CSV files are comma separated with a header row, LF line
endings and '.' decimals, preceded by one `# config_hash:` comment line.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union
import logging

from pandas import DataFrame
from ruamel.yaml import YAML
import numpy as np
import pandas as pd

from backwave.errors import IoError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


@dataclass(frozen=True)
class Scalar:
    """
    One reported quantity in SI units and, where one exists, in conventional units.
    """
    name: str
    value: float
    unit: str
    conventional_value: Optional[float] = None
    conventional_unit: str = ""

    def to_row(self) -> Dict[str, Any]:
        return {
            "quantity": self.name,
            "value": self.value,
            "unit": self.unit,
            "conventional_value": self.conventional_value if self.conventional_value is not None else self.value,
            "conventional_unit": self.conventional_unit or self.unit,
        }


def scalar_table(scalars: Iterable[Scalar]) -> DataFrame:
    return pd.DataFrame([s.to_row() for s in scalars], columns=["quantity", "value", "unit", "conventional_value", "conventional_unit"])


def read_csv(path: Union[str, Path]) -> DataFrame:
    return pd.read_csv(path, comment="#")


def write_csv(table: DataFrame, path: Union[str, Path], config_hash: str, float_format: str = FLOAT_FORMAT) -> Path:
    """
    Write a table behind its config-hash comment line.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            f.write(f"# config_hash: {config_hash}\n")
            table.to_csv(f, index=False, float_format=float_format, lineterminator="\n")
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}")

    logger.info(f"Wrote {path}")
    return path


def write_yaml(data: Dict[str, Any], path: Union[str, Path]) -> Path:
    path = Path(path)
    yaml = YAML(typ="safe")
    yaml.default_flow_style = False
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as f:
            yaml.dump(_plain(data), f)
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}")

    logger.info(f"Wrote {path}")
    return path


def read_yaml(path: Union[str, Path]) -> Dict[str, Any]:
    yaml = YAML(typ="safe")
    with Path(path).open("r", encoding="utf-8") as f:
        return yaml.load(f)


def report_document(name: str, config_hash: str, config_echo: Dict[str, Any], scalars: List[Scalar]) -> Dict[str, Any]:
    """
    YAML report: header with the config hash and the validated config echo, then the scalars.
    """
    return {
        "subcommand": name,
        "config_hash": config_hash,
        "config": config_echo,
        "scalars": {
            s.name: {
                "value": s.value,
                "unit": s.unit,
                **({"conventional_value": s.conventional_value, "conventional_unit": s.conventional_unit} if s.conventional_unit else {}),
            }
            for s in scalars
        },
    }


def _plain(value: Any) -> Any:
    """
    Convert numpy scalars and nested containers into YAML-safe builtins.
    """
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value
