"""Canonical amplitude-evolution systems and a conservative solver.

The reduced equations evolve amplitudes sigma(eta) in the characteristic
time tau; the transport part is removed exactly by the reduction, so the
flux carries only the nonlinearity (plus an optional linear term for
diagnostics).  The scheme is a first-order finite-volume update with the
local Lax-Friedrichs (Rusanov) numerical flux: robustly dissipative,
exactly conservative under periodic boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BlowupError, CFLError, NotDecoupledError
from .nonlinearity import NonlinearityProfile, g_rotation_matrix, rotate_g

DEFAULT_CFL = 0.45

SCALAR_FORMS = ("transport", "burgers", "modified_burgers")
PAIR_FORMS = ("transport_pair", "coupled_pair", "coupled_twofold",
              "coupled_threefold")


@dataclass(frozen=True)
class EvolutionSystem:
    """Reduced amplitude equations in characteristic variables.

    Scalar forms use the polynomial flux a1*s + a2/2*s^2 + a3/3*s^3 via
    the ``linear``/``quadratic``/``cubic`` fields.  Pair forms carry the
    totally symmetric coefficient quadruple (G111, G112, G122, G222); the
    flux is the gradient of the cubic potential G s s s / 6, so its
    Jacobian is symmetric and the system stays hyperbolic.

    ``basis_angle`` records the in-plane rotation from the profile's
    canonical polarization basis to the amplitude frame of this system.
    """

    form: str
    speed: float
    linear: float = 0.0
    quadratic: float = 0.0
    cubic: float = 0.0
    pair: tuple[float, float, float, float] | None = None
    basis_angle: float = 0.0

    def __post_init__(self):
        if self.form in SCALAR_FORMS:
            if self.pair is not None:
                raise ValueError(f"scalar form {self.form} takes no pair coefficients")
        elif self.form in PAIR_FORMS:
            if self.pair is None or len(self.pair) != 4:
                raise ValueError(f"pair form {self.form} needs 4 coefficients")
        else:
            raise ValueError(f"unknown evolution form {self.form!r}")

    @property
    def ncomp(self) -> int:
        return 1 if self.form in SCALAR_FORMS else 2

    def flux(self, sigma: np.ndarray) -> np.ndarray:
        s = np.asarray(sigma, dtype=float)
        if self.ncomp == 1:
            u = s[..., 0]
            f = (self.linear * u + 0.5 * self.quadratic * u ** 2
                 + self.cubic / 3.0 * u ** 3)
            return f[..., None]
        g111, g112, g122, g222 = self.pair
        s1, s2 = s[..., 0], s[..., 1]
        f1 = 0.5 * (g111 * s1 ** 2 + 2 * g112 * s1 * s2 + g122 * s2 ** 2)
        f2 = 0.5 * (g112 * s1 ** 2 + 2 * g122 * s1 * s2 + g222 * s2 ** 2)
        return np.stack([f1, f2], axis=-1)

    def signal(self, sigma: np.ndarray) -> np.ndarray:
        """Spectral radius of the flux Jacobian, per cell."""
        s = np.asarray(sigma, dtype=float)
        if self.ncomp == 1:
            u = s[..., 0]
            with np.errstate(over="ignore", invalid="ignore"):
                return np.abs(self.linear + self.quadratic * u
                              + self.cubic * u ** 2)
        g111, g112, g122, g222 = self.pair
        s1, s2 = s[..., 0], s[..., 1]
        j11 = g111 * s1 + g112 * s2
        j22 = g122 * s1 + g222 * s2
        j12 = g112 * s1 + g122 * s2
        mean = 0.5 * (j11 + j22)
        delta = np.hypot(0.5 * (j11 - j22), j12)
        return np.abs(mean) + delta

    def jacobian(self, sigma1: float, sigma2: float) -> np.ndarray:
        if self.ncomp != 2:
            raise ValueError("jacobian matrix available for pair forms only")
        g111, g112, g122, g222 = self.pair
        j11 = g111 * sigma1 + g112 * sigma2
        j12 = g112 * sigma1 + g122 * sigma2
        j22 = g122 * sigma1 + g222 * sigma2
        return np.array([[j11, j12], [j12, j22]])


def build_system(profile: NonlinearityProfile) -> EvolutionSystem:
    """Canonical reduced system for a nonlinearity profile.

    Single quadratic waves give the inviscid Burgers flux, single cubic
    waves the modified Burgers flux.  Degenerate pairs map by coupling
    class: no surviving coefficient -> plain transport of both amplitudes;
    the three-fold class enforces its one-parameter structure exactly
    (small numerical residue projected out); a pair decoupled by the
    invariant identity is emitted in its decoupling basis with the cross
    terms removed.
    """
    if profile.kind == "longitudinal_single":
        return EvolutionSystem(form="burgers", speed=profile.speed,
                               quadratic=profile.gamma)
    if profile.kind == "shear_single_cubic":
        if profile.g_cubic is None:
            raise NotDecoupledError(
                "cubic coefficient unavailable for this mode; the coupled "
                "pair equations apply"
            )
        return EvolutionSystem(form="modified_burgers", speed=profile.speed,
                               cubic=profile.g_cubic)
    if profile.kind != "degenerate_pair":
        raise ValueError(f"unknown profile kind {profile.kind!r}")

    cls = profile.coupling_class
    theta = profile.theta_pattern
    if cls == "r0":
        return EvolutionSystem(form="transport_pair", speed=profile.speed,
                               pair=(0.0, 0.0, 0.0, 0.0), basis_angle=theta)
    if cls == "r1":
        gamma = 0.5 * (profile.gamma_s2 - profile.gamma_s_s2)
        return EvolutionSystem(form="coupled_threefold", speed=profile.speed,
                               pair=(0.0, -gamma, 0.0, gamma),
                               basis_angle=theta)
    if cls == "r2":
        return EvolutionSystem(form="coupled_twofold", speed=profile.speed,
                               pair=(0.0, profile.gamma_s_s2, 0.0,
                                     profile.gamma_s2),
                               basis_angle=theta)
    if cls == "decoupled_by_identity":
        gstar = rotate_g(profile.g, profile.theta_star)
        f = 1.0 / (2.0 * profile.speed)
        return EvolutionSystem(form="coupled_pair", speed=profile.speed,
                               pair=(gstar.g111 * f, 0.0, 0.0, gstar.g222 * f),
                               basis_angle=profile.theta_star)
    return EvolutionSystem(form="coupled_pair", speed=profile.speed,
                           pair=(profile.gamma_s, profile.gamma_s_s2,
                                 profile.gamma_s2_s, profile.gamma_s2),
                           basis_angle=theta)


def decouple_transform(system: EvolutionSystem, theta: float,
                       tol: float = 1e-9) -> tuple[EvolutionSystem, EvolutionSystem]:
    """Split a coupled pair into two Burgers equations in the rotated basis.

    Refuses unless the rotated cross coefficients actually vanish.  The
    amplitudes of the returned scalars are (cos t s1 + sin t s2,
    -sin t s1 + cos t s2).
    """
    if system.ncomp != 2:
        raise ValueError("decouple_transform applies to pair systems")
    vec = np.array([system.pair[0], system.pair[3],
                    system.pair[1], system.pair[2]])
    rot = g_rotation_matrix(theta) @ vec
    scale = max(np.max(np.abs(vec)), 1e-300)
    if max(abs(rot[2]), abs(rot[3])) > tol * scale:
        raise NotDecoupledError(
            "rotated coupling terms do not vanish: the invariant obstruction "
            "is nonzero for this system"
        )
    angle = system.basis_angle + theta
    sys1 = EvolutionSystem(form="burgers", speed=system.speed,
                           quadratic=float(rot[0]), basis_angle=angle)
    sys2 = EvolutionSystem(form="burgers", speed=system.speed,
                           quadratic=float(rot[1]), basis_angle=angle)
    return sys1, sys2


def rotate_pair_system(system: EvolutionSystem, theta: float) -> EvolutionSystem:
    """The same coupled pair expressed in a basis rotated by theta."""
    if system.ncomp != 2:
        raise ValueError("rotate_pair_system applies to pair systems")
    vec = np.array([system.pair[0], system.pair[3],
                    system.pair[1], system.pair[2]])
    r = g_rotation_matrix(theta) @ vec
    return replace(system, pair=(float(r[0]), float(r[2]), float(r[3]),
                                 float(r[1])),
                   basis_angle=system.basis_angle + theta)


def rotate_components(sigma: np.ndarray, theta: float) -> np.ndarray:
    """Amplitude pairs re-expressed in a basis rotated by theta."""
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty_like(sigma)
    out[..., 0] = c * sigma[..., 0] + s * sigma[..., 1]
    out[..., 1] = -s * sigma[..., 0] + c * sigma[..., 1]
    return out


# ---------------------------------------------------------------------------
# Fields and the finite-volume update
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WaveField:
    """Cell-centered amplitudes on a uniform grid at one characteristic time."""

    eta: np.ndarray             # (cells,)
    sigma: np.ndarray           # (cells, ncomp)
    tau: float = 0.0

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim == 1:
            sigma = sigma[:, None]
        if eta.ndim != 1 or sigma.shape[0] != eta.shape[0]:
            raise ValueError("sigma must hold one row per grid cell")
        steps = np.diff(eta)
        if len(steps) and not np.allclose(steps, steps[0], rtol=1e-12, atol=1e-15):
            raise ValueError("grid must be uniform")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "sigma", sigma)

    @property
    def spacing(self) -> float:
        return float(self.eta[1] - self.eta[0])

    @property
    def ncomp(self) -> int:
        return self.sigma.shape[1]

    def mass(self) -> np.ndarray:
        return self.sigma.sum(axis=0) * self.spacing


def uniform_grid(cells: int, length: float = 1.0, origin: float = 0.0) -> np.ndarray:
    """Cell centers of a uniform grid covering [origin, origin + length)."""
    if cells < 2:
        raise ValueError("need at least 2 cells")
    d = length / cells
    return origin + d * (np.arange(cells) + 0.5)


def initial_profile(kind: str, eta: np.ndarray, *, amplitude: float = 1.0,
                    cycles: float = 1.0, phase: float = 0.0,
                    center: float = 0.5, width: float = 0.1,
                    left: float = 0.25, right: float = 0.75) -> np.ndarray:
    """Analytic initial data: sine, gaussian bump, or box."""
    eta = np.asarray(eta, dtype=float)
    length = (eta[-1] - eta[0]) + (eta[1] - eta[0])
    if kind == "sine":
        return amplitude * np.sin(2 * np.pi * cycles * (eta - eta[0]) / length + phase)
    if kind == "gaussian":
        return amplitude * np.exp(-0.5 * ((eta - center) / width) ** 2)
    if kind == "box":
        return amplitude * ((eta >= left) & (eta < right)).astype(float)
    if kind == "zero":
        return np.zeros_like(eta)
    raise ValueError(f"unknown initial profile kind {kind!r}")


def _extend(sigma: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        return np.concatenate([sigma[-1:], sigma, sigma[:1]], axis=0)
    if boundary == "outflow":
        return np.concatenate([sigma[:1], sigma, sigma[-1:]], axis=0)
    raise ValueError(f"unknown boundary {boundary!r}")


def step(field: WaveField, system: EvolutionSystem, dtau: float,
         boundary: str = "periodic") -> WaveField:
    """One conservative update with the Rusanov numerical flux.

    Refuses time steps beyond the stability bound dtau <= deta / max|f'|.
    """
    if field.ncomp != system.ncomp:
        raise ValueError("field and system component counts differ")
    if dtau <= 0:
        raise ValueError("time step must be positive")
    deta = field.spacing
    ext = _extend(field.sigma, boundary)
    a_cells = system.signal(ext)
    a_max = float(a_cells.max(initial=0.0))
    if not np.isfinite(a_max):
        raise BlowupError(
            f"signal speed left the finite range at tau = {field.tau:.6g}",
            last_field=field,
        )
    if dtau * a_max > deta * (1.0 + 1e-12):
        raise CFLError(
            f"time step {dtau:.3e} exceeds the stability bound "
            f"{deta / a_max:.3e} (max signal speed {a_max:.3e})"
        )
    ul, ur = ext[:-1], ext[1:]
    a_face = np.maximum(a_cells[:-1], a_cells[1:])
    with np.errstate(over="ignore", invalid="ignore"):
        fl, fr = system.flux(ul), system.flux(ur)
        face_flux = 0.5 * (fl + fr) - 0.5 * a_face[:, None] * (ur - ul)
        new = field.sigma - dtau / deta * (face_flux[1:] - face_flux[:-1])
    if not np.all(np.isfinite(new)):
        raise BlowupError(
            f"solution left the finite range at tau = {field.tau:.6g}",
            last_field=field,
        )
    return replace(field, sigma=new, tau=field.tau + dtau)


@dataclass
class Diagnostics:
    steps: int = 0
    max_signal: float = 0.0
    mass_initial: np.ndarray | None = None
    mass_final: np.ndarray | None = None
    min_dtau: float = np.inf
    max_dtau: float = 0.0


def integrate(field: WaveField, system: EvolutionSystem, tau_end: float,
              cfl: float = DEFAULT_CFL, boundary: str = "periodic",
              snapshot_taus: tuple[float, ...] = ()) -> tuple[WaveField, list[WaveField], Diagnostics]:
    """March to tau_end with CFL-limited steps, landing on it exactly.

    Snapshot times are hit exactly by clipping the step; the returned list
    holds one field per requested time (plus nothing else).
    """
    if not 0 < cfl <= 1.0:
        raise ValueError("cfl must lie in (0, 1]")
    if tau_end < field.tau:
        raise ValueError("tau_end precedes the field's current time")
    diag = Diagnostics(mass_initial=field.mass())
    marks = sorted(t for t in set(snapshot_taus) if field.tau < t <= tau_end)
    snaps: list[WaveField] = []
    current = field
    while current.tau < tau_end:
        remaining = tau_end - current.tau
        a_max = float(system.signal(_extend(current.sigma, boundary)).max(initial=0.0))
        if not np.isfinite(a_max):
            raise BlowupError(
                f"signal speed left the finite range at tau = {current.tau:.6g}",
                last_field=current,
            )
        diag.max_signal = max(diag.max_signal, a_max)
        dtau = cfl * current.spacing / a_max if a_max > 0 else remaining
        dtau = min(dtau, remaining)
        if marks:
            dtau = min(dtau, marks[0] - current.tau)
        current = step(current, system, dtau, boundary=boundary)
        diag.steps += 1
        diag.min_dtau = min(diag.min_dtau, dtau)
        diag.max_dtau = max(diag.max_dtau, dtau)
        if marks and current.tau >= marks[0] - 1e-15 * max(1.0, tau_end):
            current = replace(current, tau=marks.pop(0))
            snaps.append(current)
    current = replace(current, tau=tau_end)
    diag.mass_final = current.mass()
    return current, snaps, diag
