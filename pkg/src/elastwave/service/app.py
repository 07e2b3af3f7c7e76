"""FastAPI application wrapping the analysis pipeline."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..acoustics import modes_for_direction, scan_acoustic_axes
from ..errors import NumericalError, ValidationError
from ..evolution import (
    EvolutionSystem,
    WaveField,
    build_system,
    initial_profile,
    integrate,
    uniform_grid,
)
from ..moduli import Moduli, make_cubic_m3m, make_isotropic, moduli_from_document
from ..nonlinearity import (
    NonlinearityProfile,
    Tolerances,
    analyze_direction,
    classify_axis,
    decoupling_invariant,
    g_tensor,
    mode_profile,
)
from . import schemas

ISOTROPIC_KEYS = ("lam", "mu", "l", "m", "n")
CUBIC_KEYS = ("c11", "c12", "c44", "c111", "c112", "c144", "c123", "c166", "c456")

app = FastAPI(
    title="elastwave",
    version=__version__,
    description=(
        "Weakly nonlinear plane-wave analysis for anisotropic hyperelastic "
        "solids: phase speeds, acoustic axes, amplitude-equation "
        "coefficients, decoupling tests, and conservative evolution runs."
    ),
)


@app.exception_handler(ValidationError)
async def _validation_handler(request: Request, exc: ValidationError):
    return JSONResponse(status_code=400,
                        content={"detail": {"kind": "validation",
                                            "message": str(exc)}})


@app.exception_handler(NumericalError)
async def _numerical_handler(request: Request, exc: NumericalError):
    return JSONResponse(status_code=500,
                        content={"detail": {"kind": "numerical",
                                            "message": str(exc)}})


def moduli_from_input(material: schemas.MaterialInput) -> Moduli:
    if material.document is not None:
        return moduli_from_document(material.document)
    builtin = material.builtin
    keys = ISOTROPIC_KEYS if builtin.kind == "isotropic" else CUBIC_KEYS
    unknown = set(builtin.constants) - set(keys)
    if unknown:
        raise ValidationError(
            f"unknown constants for {builtin.kind}: {sorted(unknown)}; "
            f"expected a subset of {keys}"
        )
    values = {k: float(builtin.constants.get(k, 0.0)) for k in keys}
    if builtin.kind == "isotropic":
        return make_isotropic(values["lam"], values["mu"], values["l"],
                              values["m"], values["n"], density=builtin.density)
    return make_cubic_m3m(density=builtin.density, **values)


def tolerances_from_input(tol: schemas.ToleranceInput) -> Tolerances:
    return Tolerances(degeneracy_reltol=tol.degeneracy_reltol,
                      vanish_tol=tol.vanish_tol, mu_tol=tol.mu_tol)


def profile_info(p: NonlinearityProfile) -> schemas.ProfileInfo:
    info = schemas.ProfileInfo(
        kind=p.kind, canonical_form=p.canonical_form, speed=p.speed,
        mode_indices=list(p.mode_indices), gamma=p.gamma, g_cubic=p.g_cubic,
        theta_pattern=p.theta_pattern, mu=p.mu, mu_gamma=p.mu_gamma,
        gamma1=p.gamma1, gamma3=p.gamma3, theta_star=p.theta_star,
        decoupled=p.decoupled, coupling_class=p.coupling_class,
        cubic_pair=list(p.cubic_pair) if p.cubic_pair else None,
        transverse_residual=p.transverse_residual, notes=list(p.notes),
    )
    if p.kind == "degenerate_pair":
        info.gammas = schemas.PairCoefficients(
            gamma_s=p.gamma_s, gamma_s_s2=p.gamma_s_s2,
            gamma_s2_s=p.gamma_s2_s, gamma_s2=p.gamma_s2)
        info.g = schemas.GComponents(g111=p.g.g111, g112=p.g.g112,
                                     g122=p.g.g122, g222=p.g.g222)
        info.g_pattern = schemas.GComponents(
            g111=p.g_pattern.g111, g112=p.g_pattern.g112,
            g122=p.g_pattern.g122, g222=p.g_pattern.g222)
        info.basis = [list(map(float, row)) for row in p.g_pattern.basis]
    return info


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}


@app.post("/analyze", response_model=schemas.AnalyzeResponse)
def analyze(req: schemas.AnalyzeRequest) -> schemas.AnalyzeResponse:
    mod = moduli_from_input(req.material)
    tols = tolerances_from_input(req.tolerances)
    rep = analyze_direction(mod, req.direction, tols=tols)
    modes = rep.modes
    return schemas.AnalyzeResponse(
        direction=[float(x) for x in rep.n],
        density=mod.density,
        modes=[
            schemas.ModeInfo(alpha=float(a), speed=float(-np.sqrt(a)),
                             polarization=[float(x) for x in k])
            for a, k in zip(modes.alphas, modes.polarizations)
        ],
        degeneracy=schemas.DegeneracyInfo(
            kind=modes.degeneracy.kind,
            pair=list(modes.degeneracy.pair) if modes.degeneracy.pair else None,
            gap=modes.degeneracy.gap,
        ),
        longitudinal=profile_info(rep.longitudinal),
        shear=[profile_info(p) for p in rep.shear],
        tolerances=req.tolerances,
    )


@app.post("/scan", response_model=schemas.ScanResponse)
def scan(req: schemas.ScanRequest) -> schemas.ScanResponse:
    mod = moduli_from_input(req.material)
    res = scan_acoustic_axes(mod, resolution=req.resolution,
                             reltol=req.reltol, threads=req.threads)
    rep_alphas = None
    if res.globally_degenerate:
        rep_alphas = [float(a)
                      for a in modes_for_direction(mod, [0.0, 0.0, 1.0]).alphas]
    return schemas.ScanResponse(
        globally_degenerate=res.globally_degenerate,
        degenerate_fraction=res.degenerate_fraction,
        resolution=res.resolution, reltol=res.reltol,
        axes=[
            schemas.AxisRow(n=[float(x) for x in h.n],
                            alphas=[float(a) for a in h.alphas],
                            gap=h.gap, label=h.label)
            for h in res.axes
        ],
        representative_alphas=rep_alphas,
    )


@app.post("/check-decoupling", response_model=schemas.DecouplingResponse)
def check_decoupling(req: schemas.DecouplingRequest) -> schemas.DecouplingResponse:
    mod = moduli_from_input(req.material)
    tols = tolerances_from_input(req.tolerances)
    profile = classify_axis(mod, req.direction, tols=tols)
    return schemas.DecouplingResponse(
        direction=[float(x) for x in profile.n],
        decoupled=bool(profile.decoupled),
        mu=profile.mu, mu_gamma=profile.mu_gamma,
        theta_star=profile.theta_star,
        coupling_class=profile.coupling_class,
        canonical_form=profile.canonical_form,
    )


def _select_system(mod: Moduli, direction, wave: str, tols: Tolerances):
    modes = modes_for_direction(mod, direction, reltol=tols.degeneracy_reltol)
    dots = np.abs(modes.polarizations @ np.asarray(direction, float)
                  / np.linalg.norm(direction))
    long_idx = int(np.argmax(dots))
    if wave == "auto":
        wave = "pair" if modes.degeneracy.is_degenerate else "longitudinal"
    if wave == "pair":
        profile = classify_axis(mod, direction, tols=tols, modes=modes)
    elif wave == "longitudinal":
        profile = mode_profile(mod, direction, long_idx, tols=tols, modes=modes)
    else:
        shear_indices = [i for i in range(3) if i != long_idx]
        idx = shear_indices[0 if wave == "shear1" else 1]
        profile = mode_profile(mod, direction, idx, tols=tols, modes=modes)
    return profile, build_system(profile)


@app.post("/evolve", response_model=schemas.EvolveResponse)
def evolve(req: schemas.EvolveRequest) -> schemas.EvolveResponse:
    mod = moduli_from_input(req.material)
    tols = tolerances_from_input(req.tolerances)
    profile, system = _select_system(mod, req.direction, req.wave, tols)

    sol = req.solver
    eta = uniform_grid(sol.cells, sol.length, sol.origin)
    specs = [req.initial]
    if system.ncomp == 2:
        specs.append(req.initial2 if req.initial2 is not None
                     else schemas.InitialSpec(kind="zero"))
    elif req.initial2 is not None:
        raise ValidationError("initial2 given but the selected wave is scalar")
    columns = [_initial_column(s, eta, sol.length) for s in specs]
    field = WaveField(eta=eta, sigma=np.stack(columns, axis=1), tau=0.0)

    snap_taus = tuple(sol.tau_end * i / sol.snapshots
                      for i in range(1, sol.snapshots + 1))
    final, snaps, diag = integrate(field, system, tau_end=sol.tau_end,
                                   cfl=sol.cfl, boundary=sol.boundary,
                                   snapshot_taus=snap_taus)
    if not snaps or snaps[-1].tau != sol.tau_end:
        snaps.append(final)

    sys_info = schemas.SystemInfo(
        form=system.form, speed=system.speed, ncomp=system.ncomp,
        linear=system.linear, quadratic=system.quadratic, cubic=system.cubic,
        pair=list(system.pair) if system.pair else None,
        basis_angle=system.basis_angle,
    )
    manifest = {
        "version": __version__,
        "material": req.material.model_dump(),
        "direction": [float(x) for x in profile.n],
        "wave": req.wave,
        "profile_kind": profile.kind,
        "coupling_class": profile.coupling_class,
        "canonical_form": profile.canonical_form,
        "system": sys_info.model_dump(),
        "solver": sol.model_dump(),
        "initial": [s.model_dump() for s in specs],
        "tolerances": req.tolerances.model_dump(),
        "characteristic_map": "tau = t - speed * x; eta is the stretched "
                              "phase variable riding the carrier",
    }
    return schemas.EvolveResponse(
        system=sys_info,
        eta=[float(x) for x in eta],
        snapshots=[
            schemas.SnapshotData(tau=float(s.tau),
                                 sigma=[[float(v) for v in row] for row in s.sigma])
            for s in snaps
        ],
        diagnostics=schemas.DiagnosticsInfo(
            steps=diag.steps, max_signal=diag.max_signal,
            mass_initial=[float(x) for x in diag.mass_initial],
            mass_final=[float(x) for x in diag.mass_final],
            min_dtau=float(diag.min_dtau), max_dtau=float(diag.max_dtau),
        ),
        manifest=manifest,
    )


def _initial_column(spec: schemas.InitialSpec, eta: np.ndarray,
                    length: float) -> np.ndarray:
    if spec.kind == "samples":
        xs = np.asarray(spec.sample_eta, dtype=float)
        ys = np.asarray(spec.sample_values, dtype=float)
        order = np.argsort(xs)
        return np.interp(eta, xs[order], ys[order],
                         period=length if length > 0 else None)
    return initial_profile(
        spec.kind, eta, amplitude=spec.amplitude, cycles=spec.cycles,
        phase=spec.phase, center=spec.center, width=spec.width,
        left=spec.left, right=spec.right,
    )
