"""
Experiment configuration: a key=value text file validated through a marshmallow schema.

Precedence is defaults < config file < explicit overrides (command-line flags).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from marshmallow import (
    RAISE,
    Schema,
    ValidationError,
    fields as ma_fields,
    post_load,
    pre_load,
    validate,
    validates_schema,
)

from exceptions.exceptions import ExperimentConfigError
from libs.decoders.stream import DEFAULT_COMMIT_LAG, DEFAULT_WINDOW_SHEETS, DecodeWindowConfig
from libs.lattice import BoundaryMode, LatticeDims
from libs.matching.components import MatchingOptions
from libs.matching.mwpm import DEFAULT_CANONICAL_LIMIT
from libs.noise import CHANNEL_TOLERANCE, SEED_MASK, NoiseChannel

MODES: tuple[str, str] = ("batch", "stream")
DEFAULT_SPARSIFY_K: int = 8
_BOUNDARIES = [_mode.value for _mode in BoundaryMode]


@dataclass(frozen=True)
class ExperimentConfig:
    lx: int = 3
    ly: int = 3
    lt: int = 3
    boundary: str = BoundaryMode.PERIODIC.value
    time_boundary: str | None = None
    p_x: float = 0.0
    p_z: float = 0.0
    p_xz: float = 0.0
    trials: int = 1000
    seed: int = 0
    mode: str = "batch"
    window: int = DEFAULT_WINDOW_SHEETS
    lag: int = DEFAULT_COMMIT_LAG
    sparsify: bool = False
    sparsify_k: int = DEFAULT_SPARSIFY_K
    canonical_limit: int = DEFAULT_CANONICAL_LIMIT
    measurement_error: float = 0.0
    workers: int = 1
    out: str | None = None

    @property
    def dims(self) -> LatticeDims:
        return LatticeDims(
            lx=self.lx,
            ly=self.ly,
            lt=self.lt,
            boundary_mode=BoundaryMode(self.boundary),
            time_boundary=BoundaryMode(self.time_boundary) if self.time_boundary else None,
        )

    @property
    def channel(self) -> NoiseChannel:
        return NoiseChannel.from_rates(p_x=self.p_x, p_z=self.p_z, p_xz=self.p_xz)

    @property
    def window_config(self) -> DecodeWindowConfig:
        return DecodeWindowConfig(window_sheets=self.window, commit_lag=self.lag)

    @property
    def matching_options(self) -> MatchingOptions:
        # trials are spread over the workers, each trial matches on one thread
        return MatchingOptions(
            sparsify_k=self.sparsify_k if self.sparsify else None, canonical_limit=self.canonical_limit
        )

    def replace(self, **changes: Any) -> ExperimentConfig:
        return load_config(data={**asdict(self), **changes})


class ExperimentConfigSchema(Schema):
    class Meta:
        unknown = RAISE

    lx = ma_fields.Integer(load_default=3, validate=validate.Range(min=1))
    ly = ma_fields.Integer(load_default=3, validate=validate.Range(min=1))
    lt = ma_fields.Integer(load_default=3, validate=validate.Range(min=1))
    boundary = ma_fields.String(load_default=BoundaryMode.PERIODIC.value, validate=validate.OneOf(_BOUNDARIES))
    time_boundary = ma_fields.String(load_default=None, allow_none=True, validate=validate.OneOf(_BOUNDARIES))
    p_x = ma_fields.Float(load_default=0.0, validate=validate.Range(min=0.0, max=1.0))
    p_z = ma_fields.Float(load_default=0.0, validate=validate.Range(min=0.0, max=1.0))
    p_xz = ma_fields.Float(load_default=0.0, validate=validate.Range(min=0.0, max=1.0))
    trials = ma_fields.Integer(load_default=1000, validate=validate.Range(min=1))
    seed = ma_fields.Integer(load_default=0, validate=validate.Range(min=0, max=SEED_MASK))
    mode = ma_fields.String(load_default="batch", validate=validate.OneOf(MODES))
    window = ma_fields.Integer(load_default=DEFAULT_WINDOW_SHEETS, validate=validate.Range(min=2))
    lag = ma_fields.Integer(load_default=DEFAULT_COMMIT_LAG, validate=validate.Range(min=1))
    sparsify = ma_fields.Boolean(load_default=False)
    sparsify_k = ma_fields.Integer(load_default=DEFAULT_SPARSIFY_K, validate=validate.Range(min=1))
    canonical_limit = ma_fields.Integer(load_default=DEFAULT_CANONICAL_LIMIT, validate=validate.Range(min=0))
    measurement_error = ma_fields.Float(load_default=0.0, validate=validate.Range(min=0.0, max=1.0))
    workers = ma_fields.Integer(load_default=1, validate=validate.Range(min=1))
    out = ma_fields.String(load_default=None, allow_none=True)

    @pre_load
    def expand_p(self, data: dict[str, Any], **kwargs: Any) -> dict[str, Any]:
        """
        p sets p_x = p_z = p and p_xz = p**2; explicit p_x, p_z and p_xz keys win.
        """
        _data = {key: value for key, value in data.items() if value not in (None, "")}
        if "p" not in _data:
            return _data

        try:
            _p = float(_data.pop("p"))
        except (TypeError, ValueError) as exp:
            raise ValidationError({"p": [f"Not a valid number: {data['p']!r}."]}) from exp

        for key, value in (("p_x", _p), ("p_z", _p), ("p_xz", _p * _p)):
            _data.setdefault(key, value)
        return _data

    @validates_schema
    def check_consistency(self, data: dict[str, Any], **kwargs: Any) -> None:
        errors: dict[str, list[str]] = {}
        total = data["p_x"] + data["p_z"] + data["p_xz"]
        if total > 1.0 + CHANNEL_TOLERANCE:
            errors["p_x"] = [f"p_x + p_z + p_xz = {total} exceeds 1."]
        if data["lag"] >= data["window"]:
            errors["lag"] = [f"Must be smaller than window ({data['window']})."]
        if errors:
            raise ValidationError(errors)

    @post_load
    def make_config(self, data: dict[str, Any], **kwargs: Any) -> ExperimentConfig:
        return ExperimentConfig(**data)


def _validation_message(error: ValidationError) -> str:
    messages = error.normalized_messages()
    return "; ".join(f"{key}: {' '.join(map(str, value))}" for key, value in sorted(messages.items()))


def load_config(data: dict[str, Any]) -> ExperimentConfig:
    """
    Raises:
        ExperimentConfigError: naming every invalid or unknown key
    """
    try:
        return ExperimentConfigSchema().load(data)
    except ValidationError as exp:
        raise ExperimentConfigError(f"Invalid experiment config: {_validation_message(error=exp)}") from exp


def parse_config_text(text: str) -> dict[str, str]:
    """
    key=value lines; blank lines and # comments are skipped.

    Raises:
        ExperimentConfigError: a line without '=' or a repeated key
    """
    data: dict[str, str] = {}
    for number, _line in enumerate(text.splitlines(), start=1):
        _line = _line.split("#", 1)[0].strip()
        if not _line:
            continue
        if "=" not in _line:
            raise ExperimentConfigError(f"Config line {number} is not key=value: {_line!r}")

        _key, _value = (part.strip() for part in _line.split("=", 1))
        if _key in data:
            raise ExperimentConfigError(f"Config key {_key!r} repeated on line {number}")
        data[_key] = _value
    return data


def dump_config(cfg: ExperimentConfig) -> str:
    """
    Render a config as sorted key=value lines; None values are left out.
    """
    dumped = ExperimentConfigSchema().dump(cfg)
    return "".join(f"{key}={_value}\n" for key, _value in sorted(dumped.items()) if _value is not None)


def read_config_file(path: Path | str) -> dict[str, str]:
    _path = Path(path)
    if not _path.is_file():
        raise ExperimentConfigError(f"Config file {_path} does not exist")
    return parse_config_text(text=_path.read_text())


def build_config(config_file: Path | str | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """
    Merge defaults, an optional config file and overrides; None overrides are ignored.

    A p override replaces any p_x, p_z and p_xz set by the file.
    """
    data: dict[str, Any] = read_config_file(path=config_file) if config_file else {}
    _overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
    if "p" in _overrides:
        for key in ("p_x", "p_z", "p_xz"):
            data.pop(key, None)
    data.update(_overrides)
    return load_config(data=data)


def config_keys() -> list[str]:
    return sorted(field.name for field in fields(ExperimentConfig))
