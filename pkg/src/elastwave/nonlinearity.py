"""Nonlinearity coefficients of weakly nonlinear plane-wave amplitude
equations.

For a propagation direction n the plane-deformation energy V(m) = W(E(m))
is an exact polynomial once W is truncated after its cubic term, so the
tensors entering the quasilinear system are closed-form derivatives at
m = 0:

* ``lam``  second derivative: the (density-scaled) acoustical tensor,
* ``psi``  third derivative: drives quadratic self- and cross-coupling,
* ``pi``   fourth derivative: drives cubic terms when quadratic ones vanish.

On an acoustic axis the quadratic couplings of the two coincident shear
modes form a totally symmetric third-order tensor of dimension two
(:class:`GTensor`).  Its rotation law, harmonic split, invariants, and the
decoupling criterion live here, together with the symmetry classification
of the coupled amplitude equations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .acoustics import (
    DEGENERACY_RELTOL,
    AcousticModeSet,
    christoffel,
    eigenmodes,
    modes_for_direction,
)
from .errors import (
    DegenerateModeError,
    IllConditionedError,
    NotAcousticAxisError,
)
from .moduli import Moduli, as_direction

# |Gamma| below vanish_tol times the characteristic coefficient scale
# counts as zero when classifying coupled equations.
VANISH_TOL = 1e-9
# |mu| below mu_tol times max|g|^2 counts as decoupled.
MU_TOL = 1e-9

_DELTA = np.eye(3)


@dataclass(frozen=True)
class Tolerances:
    degeneracy_reltol: float = DEGENERACY_RELTOL
    vanish_tol: float = VANISH_TOL
    mu_tol: float = MU_TOL


def v_derivatives(mod: Moduli, n) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Second, third and fourth m-derivatives of the plane-deformation
    energy at m = 0, divided by density.

    The third-order truncation of W makes these exact: psi carries the
    third-order constants plus the geometric correction theta = lam @ n on
    every index pair, and pi combines the c3 double-contraction with the
    purely geometric c2 term.
    """
    n = as_direction(n)
    rho = mod.density
    c2f = mod.c2_full
    c3f = mod.c3_full
    lam = np.einsum("abcd,b,d->ac", c2f, n, n) / rho
    lam = 0.5 * (lam + lam.T)
    theta = lam @ n

    t3 = np.einsum("abcdef,b,d,f->ace", c3f, n, n, n, optimize=True) / rho
    t3 = _sym3x3x3(t3)
    psi = (t3
           + np.einsum("a,ce->ace", theta, _DELTA)
           + np.einsum("c,ae->ace", theta, _DELTA)
           + np.einsum("e,ac->ace", theta, _DELTA))

    phi = np.einsum("abcdef,a,b,d,f->ce", c3f, n, n, n, n, optimize=True) / rho
    phi = 0.5 * (phi + phi.T)
    q = float(n @ lam @ n)
    d = _DELTA
    pi = (np.einsum("ac,eg->aceg", d, phi) + np.einsum("ae,cg->aceg", d, phi)
          + np.einsum("ag,ce->aceg", d, phi) + np.einsum("ce,ag->aceg", d, phi)
          + np.einsum("cg,ae->aceg", d, phi) + np.einsum("eg,ac->aceg", d, phi)
          + q * (np.einsum("ac,eg->aceg", d, d) + np.einsum("ae,cg->aceg", d, d)
                 + np.einsum("ag,ce->aceg", d, d)))
    return lam, psi, pi


def _sym3x3x3(t: np.ndarray) -> np.ndarray:
    out = np.empty((3, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            for c in range(b, 3):
                v = (t[a, b, c] + t[a, c, b] + t[b, a, c]
                     + t[b, c, a] + t[c, a, b] + t[c, b, a]) / 6.0
                for idx in ((a, b, c), (a, c, b), (b, a, c),
                            (b, c, a), (c, a, b), (c, b, a)):
                    out[idx] = v
    return out


def n_tensor_contraction(mod: Moduli, n) -> np.ndarray:
    """psi from the second-order stress-expansion route: the mixed tensor
    c_abcdef + c_abdf d_ce + c_bfcd d_ae + c_bdef d_ac contracted with n on
    slots b, d, f.  Equals the energy-derivative psi; kept as the
    cross-check between the two derivations."""
    n = as_direction(n)
    c2f, c3f = mod.c2_full, mod.c3_full
    d = _DELTA
    big = (c3f
           + np.einsum("abdf,ce->abcdef", c2f, d)
           + np.einsum("bfcd,ae->abcdef", c2f, d)
           + np.einsum("bdef,ac->abcdef", c2f, d))
    return np.einsum("abcdef,b,d,f->ace", big, n, n, n, optimize=True) / mod.density


def _mode_index(s: int) -> int:
    if not 1 <= s <= 6:
        raise ValueError(f"system index must be in 1..6, got {s}")
    return (s - 1) // 2


def gamma_single(mod: Moduli, n, s: int,
                 modes: AcousticModeSet | None = None) -> float:
    """Quadratic self-coupling coefficient of system mode ``s`` (1..6).

    Odd indices ride the negative speed branch.  The sign is tied to the
    orientation of the stored polarization vector (largest component
    positive) and to the branch sign; the two branch values differ only by
    sign.
    """
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n)
    j = _mode_index(s)
    lam_s = modes.lambdas6[s - 1]
    k = modes.polarizations[j]
    _, psi, _ = v_derivatives(mod, n)
    return float(np.einsum("ace,a,c,e->", psi, k, k, k)) / (2.0 * lam_s)


def gamma_single_component_form(mod: Moduli, n, s: int,
                                modes: AcousticModeSet | None = None) -> float:
    """Same coefficient from the split form: third-order contraction plus
    3/2 lambda (n . k).  Valid when the polarization is an eigenvector."""
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n)
    j = _mode_index(s)
    lam_s = modes.lambdas6[s - 1]
    k = modes.polarizations[j]
    c3nnn = np.einsum("abcdef,b,d,f,a,c,e->", mod.c3_full, n, n, n, k, k, k,
                      optimize=True) / mod.density
    return c3nnn / (2.0 * lam_s) + 1.5 * lam_s * float(n @ k)


def _pair_context(mod: Moduli, n, modes: AcousticModeSet | None,
                  reltol: float, allow_off_axis: bool):
    """Plane basis, pair speed and off-axis flag for degenerate-pair ops."""
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n, reltol=reltol)
    deg = modes.degeneracy
    if deg.kind == "shear_pair":
        i, j = deg.pair
        off_axis = False
    elif deg.kind == "triple":
        i, j = 0, 1
        off_axis = False
    elif allow_off_axis:
        # diagnostics off-axis: take the two most transverse modes
        dots = np.abs(modes.polarizations @ n)
        i, j = sorted(np.argsort(dots)[:2])
        off_axis = True
    else:
        raise NotAcousticAxisError(
            f"direction {np.array2string(n, precision=6)} is not an acoustic "
            f"axis (relative eigenvalue gap {deg.gap:.3e}); degenerate-pair "
            "quantities need coincident shear speeds"
        )
    return n, modes, (i, j), off_axis


def gamma_interaction(mod: Moduli, n, j: int, p: int, q: int,
                      modes: AcousticModeSet | None = None,
                      reltol: float = DEGENERACY_RELTOL,
                      allow_off_axis: bool = True) -> float:
    """Quadratic interaction coefficient for pair indices j, p, q in 1..4.

    Indices 1, 2 ride the first in-plane polarization (negative/positive
    branch), 3, 4 the second one.  Off an acoustic axis the two transverse
    modes are used with their own branch speeds; profiles flag such calls.
    """
    for idx in (j, p, q):
        if not 1 <= idx <= 4:
            raise ValueError(f"pair indices must be in 1..4, got {idx}")
    n, modes, (mi, mj), _ = _pair_context(mod, n, modes, reltol, allow_off_axis)
    pair_modes = (mi, mj)
    _, psi, _ = v_derivatives(mod, n)

    def vec(idx):
        return modes.polarizations[pair_modes[(idx - 1) // 2]]

    mode_j = pair_modes[(j - 1) // 2]
    lam_j = -np.sqrt(modes.alphas[mode_j]) if j % 2 else np.sqrt(modes.alphas[mode_j])
    val = float(np.einsum("ace,a,c,e->", psi, vec(j), vec(p), vec(q)))
    return val / (2.0 * lam_j)


@dataclass(frozen=True)
class GTensor:
    """Totally symmetric quadratic-coupling tensor of a degenerate shear
    pair, expressed in an orthonormal in-plane basis.

    ``speed`` is the common negative-branch phase speed; the four Gamma
    coefficients of the coupled amplitude equations are these components
    divided by twice the signed speed.
    """

    g111: float
    g112: float
    g122: float
    g222: float
    basis: np.ndarray          # (2, 3) rows: in-plane polarizations
    n: np.ndarray
    speed: float               # negative branch
    off_axis: bool = False
    transverse_residual: float = 0.0   # max |n . k| over the plane basis

    @property
    def vector4(self) -> np.ndarray:
        """Components in the rotation-law order (g111, g222, g112, g122)."""
        return np.array([self.g111, self.g222, self.g112, self.g122])

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.vector4)))

    @property
    def noise_floor(self) -> float:
        """Magnitude below which the components are rounding noise; the
        squared speed sets the physical unit of the contractions."""
        return 1e-12 * self.speed ** 2

    def as_array(self) -> np.ndarray:
        g = np.empty((2, 2, 2))
        comp = {(0, 0, 0): self.g111, (0, 0, 1): self.g112,
                (0, 1, 1): self.g122, (1, 1, 1): self.g222}
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    g[a, b, c] = comp[tuple(sorted((a, b, c)))]
        return g

    def contract(self) -> float:
        """Total self-contraction g_abc g_abc."""
        return (self.g111 ** 2 + self.g222 ** 2
                + 3.0 * self.g112 ** 2 + 3.0 * self.g122 ** 2)

    @property
    def gammas(self) -> tuple[float, float, float, float]:
        """(gamma_s, gamma_s_s2, gamma_s2_s, gamma_s2) on the negative branch."""
        f = 1.0 / (2.0 * self.speed)
        return (self.g111 * f, self.g112 * f, self.g122 * f, self.g222 * f)


def g_tensor(mod: Moduli, n, modes: AcousticModeSet | None = None,
             reltol: float = DEGENERACY_RELTOL,
             allow_off_axis: bool = False) -> GTensor:
    """In-plane restriction of psi to the degenerate shear plane."""
    n, modes, (mi, mj), off_axis = _pair_context(mod, n, modes, reltol,
                                                 allow_off_axis)
    k1 = modes.polarizations[mi]
    k2 = modes.polarizations[mj]
    _, psi, _ = v_derivatives(mod, n)

    def g(a, b, c):
        return float(np.einsum("ace,a,c,e->", psi, a, b, c))

    alpha = 0.5 * (modes.alphas[mi] + modes.alphas[mj])
    return GTensor(
        g111=g(k1, k1, k1), g112=g(k1, k1, k2),
        g122=g(k1, k2, k2), g222=g(k2, k2, k2),
        basis=np.stack([k1, k2]), n=n, speed=-float(np.sqrt(alpha)),
        off_axis=off_axis,
        transverse_residual=float(max(abs(n @ k1), abs(n @ k2))),
    )


def g_rotation_matrix(theta: float) -> np.ndarray:
    """Rotation law on components ordered (g111, g222, g112, g122)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([
        [c ** 3, s ** 3, 3 * c ** 2 * s, 3 * c * s ** 2],
        [-s ** 3, c ** 3, 3 * c * s ** 2, -3 * c ** 2 * s],
        [-c ** 2 * s, c * s ** 2, c ** 3 - 2 * c * s ** 2,
         2 * c ** 2 * s - s ** 3],
        [c * s ** 2, c ** 2 * s, s ** 3 - 2 * c ** 2 * s,
         c ** 3 - 2 * c * s ** 2],
    ])


def rotate_g(g: GTensor, theta: float) -> GTensor:
    """Components and basis after rotating the in-plane basis by theta."""
    v = g_rotation_matrix(theta) @ g.vector4
    c, s = np.cos(theta), np.sin(theta)
    k1 = c * g.basis[0] + s * g.basis[1]
    k2 = -s * g.basis[0] + c * g.basis[1]
    return replace(g, g111=float(v[0]), g222=float(v[1]), g112=float(v[2]),
                   g122=float(v[3]), basis=np.stack([k1, k2]))


@dataclass(frozen=True)
class GDecomposition:
    """Harmonic split g = g1 + g3 with quadratic invariants."""

    g1: tuple[float, float, float, float]   # (g111, g112, g122, g222) of the trace part
    g3: tuple[float, float, float, float]   # traceless remainder
    gamma1: float
    gamma3: float


def decompose_g(g: GTensor) -> GDecomposition:
    """Split into the pseudovector (trace) part and the harmonic remainder.

    gamma1 and gamma3 are the rotation-invariant squared magnitudes of the
    two parts; their sum is the total contraction of g.
    """
    t1 = g.g111 + g.g122
    t2 = g.g112 + g.g222
    g1 = (0.75 * t1, 0.25 * t2, 0.25 * t1, 0.75 * t2)
    g3 = (g.g111 - g1[0], g.g112 - g1[1], g.g122 - g1[2], g.g222 - g1[3])
    gamma1 = 0.75 * (t1 ** 2 + t2 ** 2)
    gamma3 = 0.25 * ((3 * g.g122 - g.g111) ** 2 + (3 * g.g112 - g.g222) ** 2)
    return GDecomposition(g1=g1, g3=g3, gamma1=gamma1, gamma3=gamma3)


def mu_invariant(g: GTensor) -> float:
    """Rotation-invariant obstruction to decoupling the pair."""
    return (g.g112 ** 2 + g.g122 ** 2
            - g.g112 * g.g222 - g.g122 * g.g111)


@dataclass(frozen=True)
class DecouplingResult:
    mu: float
    mu_gamma: float           # the same obstruction in Gamma units
    scale: float              # max |g| used for the relative test
    decoupled: bool
    theta_star: float | None  # basis angle killing both coupling terms


def decoupling_invariant(g: GTensor, tol: float = MU_TOL) -> DecouplingResult:
    """Evaluate mu and, when it vanishes, the decoupling angle.

    The coupling components can be rotated away iff the two 2-vectors
    a = (g112, g122) and b = ((g122 - g111)/2, (g222 - g112)/2) are
    parallel; theta_star solves a cos(2 theta) + b sin(2 theta) = 0 and is
    reported in the fundamental domain (-pi/4, pi/4].
    """
    mu = mu_invariant(g)
    scale = g.scale
    mu_gamma = -mu / (4.0 * g.speed ** 2)
    # a tensor at rounding-noise level is trivially decoupled
    decoupled = scale <= g.noise_floor or abs(mu) <= tol * scale ** 2
    theta_star = None
    if decoupled:
        a = np.array([g.g112, g.g122])
        b = 0.5 * np.array([g.g122 - g.g111, g.g222 - g.g112])
        u = a if np.linalg.norm(a) >= np.linalg.norm(b) else b
        norm = np.linalg.norm(u)
        if norm == 0.0:
            theta_star = 0.0
        else:
            u = u / norm
            two_theta = float(np.arctan2(-(a @ u), b @ u))
            theta_star = 0.5 * two_theta
            while theta_star <= -np.pi / 4:
                theta_star += np.pi / 2
            while theta_star > np.pi / 4:
                theta_star -= np.pi / 2
    return DecouplingResult(mu=mu, mu_gamma=mu_gamma, scale=scale,
                            decoupled=decoupled, theta_star=theta_star)


def q_vector(mod: Moduli, n, s: int,
             modes: AcousticModeSet | None = None,
             cond_limit: float = 1e12) -> np.ndarray:
    """First-order polarization corrector of mode ``s``.

    Solves (lam - speed^2 I) q = -psi k k on the orthogonal complement of
    the mode, expanding in the eigenbasis.  Eigen-directions sharing the
    mode's speed are excluded; they may carry no right-hand side, otherwise
    the corrector does not exist and the coupled-pair equations apply.
    """
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n)
    j = _mode_index(s)
    alpha_s = modes.alphas[j]
    k = modes.polarizations[j]
    _, psi, _ = v_derivatives(mod, n)
    rhs = -np.einsum("ace,c,e->a", psi, k, k)
    rhs_norm = float(np.linalg.norm(rhs))
    scale = float(modes.alphas[0])

    q = np.zeros(3)
    used = []
    for i in range(3):
        if i == j:
            continue
        denom = modes.alphas[i] - alpha_s
        comp = float(rhs @ modes.polarizations[i])
        if abs(denom) <= 1e-12 * scale:
            if abs(comp) > 1e-9 * max(rhs_norm, 1e-300):
                raise DegenerateModeError(
                    f"mode {s} shares its speed with another mode that its "
                    "quadratic forcing excites; use the coupled-pair "
                    "evolution equations instead of a single-mode corrector"
                )
            continue
        used.append(abs(denom))
        q += comp / denom * modes.polarizations[i]
    if used:
        cond = max(used) / min(used)
        if cond > cond_limit:
            raise IllConditionedError(
                f"polarization corrector solve has condition number "
                f"{cond:.3e} beyond the limit {cond_limit:.1e}"
            )
    return q


def g_cubic_coefficient(mod: Moduli, n, s: int,
                        modes: AcousticModeSet | None = None,
                        vanish_tol: float = VANISH_TOL) -> float:
    """Cubic nonlinearity coefficient of a single mode with vanishing
    quadratic coefficient.

    Combines the polarization corrector with the fourth energy derivative,
    (3 psi(k,k,q) + pi(k,k,k,k)) / (4 lambda_s).  The prefactor is pinned
    by an independent characterization: with the quadratic coefficient
    zero, the coefficient equals half the curvature of the characteristic
    speed along the mode's simple-wave integral curve, which the test suite
    checks by numerical continuation.
    """
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n)
    j = _mode_index(s)
    lam_s = modes.lambdas6[s - 1]
    k = modes.polarizations[j]
    gamma = gamma_single(mod, n, s, modes=modes)
    if abs(gamma) > max(vanish_tol, 1e-6) * abs(lam_s):
        warnings.warn(
            "quadratic coefficient does not vanish for this mode; the cubic "
            "coefficient is not the leading nonlinearity",
            stacklevel=2,
        )
    q = q_vector(mod, n, s, modes=modes)
    _, psi, pi = v_derivatives(mod, n)
    triple = float(np.einsum("ace,a,c,e->", psi, k, k, q))
    quad = float(np.einsum("aceg,a,c,e,g->", pi, k, k, k, k))
    return (3.0 * triple + quad) / (4.0 * lam_s)


# ---------------------------------------------------------------------------
# Classification of the coupled equations on an acoustic axis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonlinearityProfile:
    """Amplitude-equation description of one wave system at direction n.

    ``kind`` is "longitudinal_single" (quadratic), "shear_single_cubic"
    (cubic), or "degenerate_pair" (coupled quadratic system).  Pair fields
    are None for single-mode profiles and vice versa.  All Gamma values of
    a pair profile refer to the pattern basis obtained by rotating the
    canonical plane basis by ``theta_pattern``.
    """

    kind: str
    n: np.ndarray
    speed: float
    mode_indices: tuple[int, ...]
    canonical_form: str
    gamma: float | None = None            # single-mode quadratic coefficient
    g_cubic: float | None = None          # single-mode cubic coefficient
    g: GTensor | None = None              # canonical-basis pair tensor
    g_pattern: GTensor | None = None      # pattern-basis pair tensor
    theta_pattern: float | None = None
    gamma_s: float | None = None          # self term of the first amplitude
    gamma_s_s2: float | None = None       # mixed term feeding equation one
    gamma_s2_s: float | None = None       # companion-squared term in equation one
    gamma_s2: float | None = None         # self term of the second amplitude
    mu: float | None = None
    mu_gamma: float | None = None
    gamma1: float | None = None
    gamma3: float | None = None
    theta_star: float | None = None
    decoupled: bool | None = None
    coupling_class: str | None = None
    cubic_pair: tuple[float, float] | None = None  # per-polarization cubic terms
    off_axis: bool = False
    transverse_residual: float | None = None
    notes: tuple[str, ...] = field(default=())


def _pattern_angle(g: GTensor, vanish_tol: float) -> float:
    """Smallest angle in [0, pi) minimizing g111(theta)^2 + g122(theta)^2.

    The minimum is what the two-fold-symmetry pattern requires to vanish;
    symmetric materials repeat it at several angles and the smallest one is
    the deterministic representative.
    """
    v4 = g.vector4
    if g.scale == 0.0:
        return 0.0

    def components(theta):
        return g_rotation_matrix(theta) @ v4  # (g111, g222, g112, g122)

    def value(theta):
        r = components(theta)
        return r[0] ** 2 + r[3] ** 2

    def slope(theta):
        # d/dtheta of the components follows from the rotation generator:
        # g111' = 3 g112, g122' = g222 - 2 g112
        r = components(theta)
        return 2.0 * (3.0 * r[0] * r[2] + r[3] * (r[1] - 2.0 * r[2]))

    def polish(theta):
        h = 1e-7
        for _ in range(60):
            vp = slope(theta)
            vpp = (slope(theta + h) - slope(theta - h)) / (2.0 * h)
            if not np.isfinite(vpp) or vpp <= 0.0:
                break
            step = vp / vpp
            theta -= step
            if abs(step) < 1e-15:
                break
        return theta

    thetas = np.linspace(0.0, np.pi, 721, endpoint=False)
    vals = np.array([value(t) for t in thetas])
    minima = [i for i in range(len(thetas))
              if vals[i] <= vals[i - 1] and vals[i] <= vals[(i + 1) % len(thetas)]]
    grid_step = thetas[1] - thetas[0]
    refined = []
    for i in minima:
        res = minimize_scalar(value,
                              bounds=(thetas[i] - grid_step, thetas[i] + grid_step),
                              method="bounded", options={"xatol": 1e-12})
        theta = polish(float(res.x)) % np.pi
        refined.append((theta, value(theta)))
    best = min(v for _, v in refined)
    slack = best + 1e-24 * g.scale ** 2
    return min(t for t, v in refined if v <= slack)


def classify_axis(mod: Moduli, n, tols: Tolerances = Tolerances(),
                  modes: AcousticModeSet | None = None) -> NonlinearityProfile:
    """Classify the coupled shear-pair equations on an acoustic axis.

    The class is decided by which Gamma coefficients vanish in the best
    basis (the pattern angle): all four -> r0 (pure transport), the
    two-fold pattern plus an odd-sum cancellation -> r1 (single-parameter
    coupled system), the two-fold pattern alone -> r2, otherwise r4.  A
    vanishing mu with nonzero g overlays "decoupled_by_identity".
    """
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n, reltol=tols.degeneracy_reltol)
    g = g_tensor(mod, n, modes=modes, reltol=tols.degeneracy_reltol)
    lam = g.speed
    theta_pattern = _pattern_angle(g, tols.vanish_tol)
    gp = rotate_g(g, theta_pattern)
    gamma_s, gamma_s_s2, gamma_s2_s, gamma_s2 = gp.gammas

    gscale = g.scale
    g_nonzero = gscale > g.noise_floor
    gamma_scale = gscale / (2.0 * abs(lam)) if g_nonzero else abs(lam)

    def vanishes(x):
        return abs(x) <= tols.vanish_tol * gamma_scale

    twofold = vanishes(gamma_s) and vanishes(gamma_s2_s)
    if twofold and all(map(vanishes, (gamma_s_s2, gamma_s2))):
        coupling_class = "r0"
        canonical_form = "transport_pair"
    elif twofold and vanishes(gamma_s2 + gamma_s_s2):
        coupling_class = "r1"
        canonical_form = "coupled_threefold"
    elif twofold:
        coupling_class = "r2"
        canonical_form = "coupled_twofold"
    else:
        coupling_class = "r4"
        canonical_form = "coupled_pair"

    dec = decoupling_invariant(g, tol=tols.mu_tol)
    har = decompose_g(g)
    if dec.decoupled and g_nonzero and coupling_class in ("r2", "r4"):
        coupling_class = "decoupled_by_identity"
        canonical_form = "decoupled_burgers_pair"

    cubic_pair = None
    notes = []
    if coupling_class == "r0":
        # no quadratic coupling at all: each in-plane wave is a cubic
        # single wave; report both coefficients
        i, j = modes.degeneracy.pair if modes.degeneracy.pair else (0, 1)
        try:
            cubic_pair = (
                g_cubic_coefficient(mod, n, 2 * i + 1, modes=modes,
                                    vanish_tol=tols.vanish_tol),
                g_cubic_coefficient(mod, n, 2 * j + 1, modes=modes,
                                    vanish_tol=tols.vanish_tol),
            )
        except (DegenerateModeError, IllConditionedError) as exc:
            notes.append(f"cubic coefficients unavailable: {exc}")
    if g.transverse_residual > 1e-8:
        notes.append(
            "quasi-transverse pair: the in-plane polarizations are tilted "
            f"against the propagation direction by |n.k| = {g.transverse_residual:.3e}"
        )

    pair = modes.degeneracy.pair if modes.degeneracy.pair else (0, 1)
    return NonlinearityProfile(
        kind="degenerate_pair", n=n, speed=lam, mode_indices=tuple(pair),
        canonical_form=canonical_form, g=g, g_pattern=gp,
        theta_pattern=theta_pattern,
        gamma_s=gamma_s, gamma_s_s2=gamma_s_s2, gamma_s2_s=gamma_s2_s,
        gamma_s2=gamma_s2, mu=dec.mu, mu_gamma=dec.mu_gamma,
        gamma1=har.gamma1, gamma3=har.gamma3, theta_star=dec.theta_star,
        decoupled=dec.decoupled, coupling_class=coupling_class,
        cubic_pair=cubic_pair, off_axis=g.off_axis,
        transverse_residual=g.transverse_residual, notes=tuple(notes),
    )


def mode_profile(mod: Moduli, n, mode_index: int,
                 tols: Tolerances = Tolerances(),
                 modes: AcousticModeSet | None = None) -> NonlinearityProfile:
    """Single-mode profile: quadratic wave if its Gamma survives, cubic
    wave otherwise."""
    n = as_direction(n)
    if modes is None:
        modes = modes_for_direction(mod, n, reltol=tols.degeneracy_reltol)
    s = 2 * mode_index + 1
    lam = float(modes.lambdas6[s - 1])
    gamma = gamma_single(mod, n, s, modes=modes)
    notes = []
    if abs(gamma) > tols.vanish_tol * abs(lam):
        return NonlinearityProfile(
            kind="longitudinal_single", n=n, speed=lam,
            mode_indices=(mode_index,), canonical_form="burgers", gamma=gamma,
        )
    g_cub = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g_cub = g_cubic_coefficient(mod, n, s, modes=modes,
                                        vanish_tol=tols.vanish_tol)
    except (DegenerateModeError, IllConditionedError) as exc:
        notes.append(f"cubic coefficient unavailable: {exc}")
    return NonlinearityProfile(
        kind="shear_single_cubic", n=n, speed=lam, mode_indices=(mode_index,),
        canonical_form="modified_burgers", gamma=gamma, g_cubic=g_cub,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class DirectionReport:
    """Everything the analyze pipeline knows about one direction."""

    n: np.ndarray
    modes: AcousticModeSet
    longitudinal: NonlinearityProfile
    shear: tuple[NonlinearityProfile, ...]
    tolerances: Tolerances


def analyze_direction(mod: Moduli, n,
                      tols: Tolerances = Tolerances()) -> DirectionReport:
    """Mode set plus nonlinearity profiles for every wave system at n."""
    n = as_direction(n)
    modes = modes_for_direction(mod, n, reltol=tols.degeneracy_reltol)
    dots = np.abs(modes.polarizations @ n)
    long_idx = int(np.argmax(dots))
    longitudinal = mode_profile(mod, n, long_idx, tols=tols, modes=modes)
    if modes.degeneracy.is_degenerate:
        shear = (classify_axis(mod, n, tols=tols, modes=modes),)
    else:
        shear = tuple(
            mode_profile(mod, n, idx, tols=tols, modes=modes)
            for idx in range(3) if idx != long_idx
        )
    return DirectionReport(n=n, modes=modes, longitudinal=longitudinal,
                           shear=shear, tolerances=tols)
