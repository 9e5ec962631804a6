"""Pydantic models for experiment configuration files.

Test Coverage: tests/test_models.py
- Section defaults and constraints (seed range, positive steps, quadrature names)
- Kernel family parameters and CSV kernels
- INI parsing (comma lists, none values) and JSON round trip
- Schema errors reported as section.field lines
"""

import configparser
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union, get_args, get_origin

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic import ValidationError as SchemaError

from memory_control.core.exceptions import ValidationError


EXPERIMENT_KINDS = ("simulate", "steer", "diagnose", "identities")
INI_SUFFIXES = (".ini", ".cfg")


class _Section(BaseModel):
    model_config = {"extra": "forbid"}


class ExperimentSpec(_Section):
    """What to run and how to seed it."""

    kind: Literal["simulate", "steer", "diagnose", "identities"] = Field(
        "simulate", description="Generic experiment kind"
    )
    name: Optional[str] = Field(None, description="Named catalog experiment (overrides the generic kind)")
    seed: int = Field(0, ge=0, lt=2**64, description="Seed for numpy.random.default_rng")
    threads: int = Field(1, ge=1, le=256, description="Worker threads for mode sweeps")
    samples: int = Field(20, ge=1, description="Random samples for statistical diagnostics")

    @field_validator("name")
    @classmethod
    def validate_name_format(cls, v: Optional[str]) -> Optional[str]:
        if v is not None and not v.replace("-", "").isalnum():
            raise ValueError(f"Experiment name must be alphanumeric with hyphens only: '{v}'")
        return v


class DomainSpec(_Section):
    """Built-in spatial domain and its active boundary."""

    kind: Literal["interval", "rectangle"] = Field("interval", description="Domain geometry")
    length: float = Field(math.pi, gt=0, description="Interval length, or rectangle side a")
    width: Optional[float] = Field(None, gt=0, description="Rectangle side b")
    n_max: int = Field(64, ge=1, le=4096, description="Number of modes kept")
    gamma: List[str] = Field(default_factory=lambda: ["both"], description="Active boundary part(s)")
    lambda_cutoff: Optional[float] = Field(None, gt=0, description="Rectangle eigenvalue cutoff")
    nodes_per_edge: int = Field(65, ge=2, description="Boundary quadrature nodes per rectangle edge")

    @model_validator(mode="after")
    def validate_geometry(self):
        if self.kind == "interval":
            if len(self.gamma) != 1 or self.gamma[0] not in ("left", "right", "both"):
                raise ValueError(f"Interval gamma must be one of left, right, both; got {self.gamma}")
        else:
            unknown = set(self.gamma) - {"left", "right", "bottom", "top"}
            if unknown or not self.gamma:
                raise ValueError(f"Rectangle gamma must be edges among left/right/bottom/top; got {self.gamma}")
            if self.width is None:
                raise ValueError("Rectangle domain requires 'width'")
        return self


class ProblemSpec(_Section):
    """Equation form and its scalar coefficients."""

    form: Literal["second_order", "first_order"] = Field(
        "second_order", description="Memory wave equation, or first-order memory equation (MacCamy transform)"
    )
    alpha: float = Field(0.0, description="First-order coefficient alpha")
    b: float = Field(0.0, description="Zeroth-order shift b of the second-order equation")
    velocity: float = Field(0.0, description="Velocity coefficient of the second-order equation")


class KernelSpec(_Section):
    """Memory kernel: a closed-form family or a two-column CSV table."""

    family: Literal["zero", "constant", "exponential", "polynomial", "sine", "cosine", "csv"] = Field(
        "zero", description="Kernel family"
    )
    c: Optional[float] = Field(None, description="Constant / exponential amplitude")
    rate: Optional[float] = Field(None, description="Exponential decay rate")
    coefficients: Optional[List[float]] = Field(None, description="Polynomial coefficients, lowest degree first")
    amplitude: Optional[float] = Field(None, description="Sine/cosine amplitude")
    frequency: Optional[float] = Field(None, description="Sine/cosine frequency")
    path: Optional[str] = Field(None, description="CSV table (t, value) for family 'csv'")

    @model_validator(mode="after")
    def validate_family_parameters(self):
        if self.family == "csv" and not self.path:
            raise ValueError("Kernel family 'csv' requires 'path'")
        if self.family == "polynomial" and not self.coefficients:
            raise ValueError("Kernel family 'polynomial' requires 'coefficients'")
        return self

    def closed_form_params(self) -> Dict[str, Any]:
        """Parameters of the closed-form family, without unset entries."""
        keys = ("c", "rate", "coefficients", "amplitude", "frequency")
        return {key: getattr(self, key) for key in keys if getattr(self, key) is not None}

    def describe(self) -> str:
        if self.family == "csv":
            return f"csv({self.path})"
        args = ", ".join(f"{key}={value}" for key, value in sorted(self.closed_form_params().items()))
        return f"{self.family}({args})"


class GridSpec(_Section):
    """Uniform time grid and memory quadrature."""

    horizon: float = Field(2.0 * math.pi, gt=0, description="Final time T")
    dt: float = Field(1e-3, gt=0, description="Time step")
    quadrature: Literal["trapezoid", "gregory"] = Field("trapezoid", description="Convolution quadrature rule")

    @model_validator(mode="after")
    def validate_step_count(self):
        if self.horizon / self.dt < 2.0 - 1e-9:
            raise ValueError(f"Time step {self.dt} leaves fewer than 2 steps on (0, {self.horizon})")
        return self

    @property
    def n_steps(self) -> int:
        return max(2, int(round(self.horizon / self.dt)))


class ControlSpec(_Section):
    """Modal data and control synthesis settings."""

    n_modes: int = Field(16, ge=1, description="Number of steered (or simulated) modes")
    basis: Literal["hats", "trig"] = Field("hats", description="Control time basis")
    basis_size: Optional[int] = Field(None, ge=1, description="Basis size (None: one hat per grid node)")
    regularization: Optional[float] = Field(None, ge=0, description="Fixed epsilon (None: automatic policy)")
    velocity_rows: bool = Field(False, description="Also steer the terminal velocity to zero")
    initial: List[float] = Field(default_factory=list, description="Initial displacement coefficients")
    initial_velocity: List[float] = Field(default_factory=list, description="Initial velocity coefficients")
    target: List[float] = Field(default_factory=list, description="Terminal displacement coefficients")

    @model_validator(mode="after")
    def validate_basis(self):
        if self.basis == "trig" and self.basis_size is None:
            raise ValueError("Trigonometric control basis requires 'basis_size'")
        if self.basis == "hats" and self.basis_size is not None and self.basis_size < 2:
            raise ValueError("Hat basis needs basis_size >= 2")
        return self


class ToleranceSpec(_Section):
    """Acceptance thresholds used by the checks."""

    identity: float = Field(1e-6, gt=0)
    resolvent: float = Field(1e-8, gt=0)
    equivalence: float = Field(5e-4, gt=0)
    reconstruction: float = Field(5e-4, gt=0)
    duality: float = Field(5e-4, gt=0)
    steering_in_sample: float = Field(1e-6, gt=0)
    steering_verification: float = Field(1e-3, gt=0)
    memory_verification: float = Field(1e-2, gt=0)
    stability: float = Field(0.10, gt=0, description="Relative spread allowed across truncations")
    deflation: float = Field(5e-3, gt=0)
    rcond: float = Field(1e-8, gt=0, lt=1, description="Rank threshold of the epsilon = 0 synthesis")
    series: float = Field(1e-12, gt=0, description="Picard series stopping threshold")
    picard_agreement: float = Field(1e-8, gt=0)


class OutputSpec(_Section):
    """Where and how densely results are written."""

    directory: str = Field("runs", min_length=1, description="Parent directory of run folders")
    field_points: int = Field(65, ge=2, description="Spatial points of the lattice CSV")
    time_stride: int = Field(100, ge=1, description="Time subsampling of the lattice CSV")


class ExperimentConfig(BaseModel):
    """Complete experiment configuration."""

    experiment: ExperimentSpec = Field(default_factory=ExperimentSpec)
    domain: DomainSpec = Field(default_factory=DomainSpec)
    problem: ProblemSpec = Field(default_factory=ProblemSpec)
    kernel: KernelSpec = Field(default_factory=KernelSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    control: ControlSpec = Field(default_factory=ControlSpec)
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    output: OutputSpec = Field(default_factory=OutputSpec)

    model_config = {"extra": "forbid"}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        """
        Build a config from nested dictionaries.

        Raises:
            ValidationError: One 'section.field: message' line per schema error
        """
        try:
            return cls(**data)
        except SchemaError as e:
            errors = [f"{'.'.join(str(part) for part in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()]
            raise ValidationError(errors, "Invalid experiment configuration") from e

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ExperimentConfig":
        """
        Load and validate a configuration from an INI or JSON file.

        Relative kernel paths are resolved against the configuration file's directory.

        Args:
            path: Path to .ini/.cfg or .json file

        Returns:
            Validated ExperimentConfig instance

        Raises:
            FileNotFoundError: If file doesn't exist
            ValidationError: If parsing or schema validation fails
        """
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"Experiment config not found: {path}")

        try:
            if path.suffix.lower() in INI_SUFFIXES:
                data = _read_ini(path)
            else:
                with open(path, "r", encoding="utf-8") as f:
                    data = json.load(f)
        except (configparser.Error, json.JSONDecodeError) as e:
            raise ValidationError([f"{path.name}: {e}"], "Unreadable experiment configuration") from e

        if not isinstance(data, dict):
            raise ValidationError([f"{path.name}: top level must be a mapping of sections"])

        kernel = data.get("kernel")
        if isinstance(kernel, dict) and kernel.get("path") and not Path(kernel["path"]).is_absolute():
            kernel["path"] = str(path.parent / kernel["path"])

        return cls.from_dict(data)

    def to_file(self, path: Union[str, Path]) -> None:
        """Write the configuration as JSON."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)

        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.model_dump(), f, indent=2, sort_keys=True)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        threads: Optional[int] = None,
        output_dir: Optional[str] = None,
        dt: Optional[float] = None,
    ) -> "ExperimentConfig":
        """Copy with command-line overrides applied (validated like the file values)."""
        data = self.model_dump(exclude_unset=True)
        if seed is not None:
            data.setdefault("experiment", {})["seed"] = seed
        if threads is not None:
            data.setdefault("experiment", {})["threads"] = threads
        if output_dir is not None:
            data.setdefault("output", {})["directory"] = output_dir
        if dt is not None:
            data.setdefault("grid", {})["dt"] = dt
        return ExperimentConfig.from_dict(data)

    @property
    def run_name(self) -> str:
        return self.experiment.name or self.experiment.kind


def _is_list_field(model: type, key: str) -> bool:
    info = model.model_fields.get(key)
    if info is None:
        return False
    annotation = info.annotation
    if get_origin(annotation) is Union:
        annotation = next((arg for arg in get_args(annotation) if arg is not type(None)), annotation)
    return get_origin(annotation) in (list, List)


def _read_ini(path: Path) -> Dict[str, Dict[str, Any]]:
    """Sections become sub-models; list fields are comma-separated, "none" or empty keeps the default."""
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as f:
        parser.read_file(f)

    data: Dict[str, Dict[str, Any]] = {}
    for section in parser.sections():
        info = ExperimentConfig.model_fields.get(section)
        model = info.annotation if info is not None else None
        values: Dict[str, Any] = {}
        for key, raw in parser.items(section):
            text = raw.strip()
            if text.lower() in ("", "none"):
                continue
            if model is not None and _is_list_field(model, key):
                values[key] = [item.strip() for item in text.split(",") if item.strip()]
            else:
                values[key] = text
        data[section] = values
    return data
