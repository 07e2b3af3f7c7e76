"""Request/response models of the analysis service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class BuiltinMaterial(BaseModel):
    """Built-in constructor: isotropic (lam, mu, l, m, n) or cubic_m3m
    (c11, c12, c44, c111, c112, c144, c123, c166, c456)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["isotropic", "cubic_m3m"]
    constants: dict[str, float]
    density: float = Field(default=1.0, gt=0)


class MaterialInput(BaseModel):
    """Either a built-in constructor or a raw material document (the same
    JSON schema as material files)."""

    model_config = ConfigDict(extra="forbid")

    builtin: BuiltinMaterial | None = None
    document: dict | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.builtin is None) == (self.document is None):
            raise ValueError("provide exactly one of 'builtin' or 'document'")
        return self


class ToleranceInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    degeneracy_reltol: float = Field(default=1e-8, gt=0)
    vanish_tol: float = Field(default=1e-9, gt=0)
    mu_tol: float = Field(default=1e-9, gt=0)


class AnalyzeRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    material: MaterialInput
    direction: list[float] = Field(min_length=3, max_length=3)
    tolerances: ToleranceInput = ToleranceInput()


class ModeInfo(BaseModel):
    alpha: float
    speed: float
    polarization: list[float]


class DegeneracyInfo(BaseModel):
    kind: str
    pair: list[int] | None
    gap: float


class PairCoefficients(BaseModel):
    gamma_s: float
    gamma_s_s2: float
    gamma_s2_s: float
    gamma_s2: float


class GComponents(BaseModel):
    g111: float
    g112: float
    g122: float
    g222: float


class ProfileInfo(BaseModel):
    kind: str
    canonical_form: str
    speed: float
    mode_indices: list[int]
    gamma: float | None = None
    g_cubic: float | None = None
    gammas: PairCoefficients | None = None
    g: GComponents | None = None
    g_pattern: GComponents | None = None
    basis: list[list[float]] | None = None
    theta_pattern: float | None = None
    mu: float | None = None
    mu_gamma: float | None = None
    gamma1: float | None = None
    gamma3: float | None = None
    theta_star: float | None = None
    decoupled: bool | None = None
    coupling_class: str | None = None
    cubic_pair: list[float] | None = None
    transverse_residual: float | None = None
    notes: list[str] = []


class AnalyzeResponse(BaseModel):
    direction: list[float]
    density: float
    modes: list[ModeInfo]
    degeneracy: DegeneracyInfo
    longitudinal: ProfileInfo
    shear: list[ProfileInfo]
    tolerances: ToleranceInput


class ScanRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    material: MaterialInput
    resolution: int = Field(default=64, ge=16)
    reltol: float = Field(default=1e-8, gt=0)
    threads: int | None = Field(default=None, ge=1)


class AxisRow(BaseModel):
    n: list[float]
    alphas: list[float]
    gap: float
    label: str


class ScanResponse(BaseModel):
    globally_degenerate: bool
    degenerate_fraction: float
    resolution: int
    reltol: float
    axes: list[AxisRow]
    representative_alphas: list[float] | None = None


class DecouplingRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    material: MaterialInput
    direction: list[float] = Field(min_length=3, max_length=3)
    tolerances: ToleranceInput = ToleranceInput()


class DecouplingResponse(BaseModel):
    direction: list[float]
    decoupled: bool
    mu: float
    mu_gamma: float
    theta_star: float | None
    coupling_class: str
    canonical_form: str


class InitialSpec(BaseModel):
    """Analytic initial amplitude or explicit samples to interpolate."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["sine", "gaussian", "box", "zero", "samples"] = "gaussian"
    amplitude: float = 1.0
    cycles: float = 1.0
    phase: float = 0.0
    center: float = 0.5
    width: float = 0.1
    left: float = 0.25
    right: float = 0.75
    sample_eta: list[float] | None = None
    sample_values: list[float] | None = None

    @model_validator(mode="after")
    def _samples_complete(self):
        if self.kind == "samples":
            if not self.sample_eta or not self.sample_values:
                raise ValueError("samples initial data needs sample_eta and sample_values")
            if len(self.sample_eta) != len(self.sample_values):
                raise ValueError("sample_eta and sample_values lengths differ")
        return self


class SolverSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    cells: int = Field(default=256, ge=16)
    length: float = Field(default=1.0, gt=0)
    origin: float = 0.0
    cfl: float = Field(default=0.45, gt=0, le=1.0)
    tau_end: float = Field(gt=0)
    boundary: Literal["periodic", "outflow"] = "periodic"
    snapshots: int = Field(default=5, ge=1)


class EvolveRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    material: MaterialInput
    direction: list[float] = Field(min_length=3, max_length=3)
    wave: Literal["auto", "longitudinal", "pair", "shear1", "shear2"] = "auto"
    initial: InitialSpec = InitialSpec()
    initial2: InitialSpec | None = None
    solver: SolverSpec
    tolerances: ToleranceInput = ToleranceInput()


class SystemInfo(BaseModel):
    form: str
    speed: float
    ncomp: int
    linear: float
    quadratic: float
    cubic: float
    pair: list[float] | None
    basis_angle: float


class SnapshotData(BaseModel):
    tau: float
    sigma: list[list[float]]


class DiagnosticsInfo(BaseModel):
    steps: int
    max_signal: float
    mass_initial: list[float]
    mass_final: list[float]
    min_dtau: float
    max_dtau: float


class EvolveResponse(BaseModel):
    system: SystemInfo
    eta: list[float]
    snapshots: list[SnapshotData]
    diagnostics: DiagnosticsInfo
    manifest: dict
