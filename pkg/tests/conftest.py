"""Shared fixtures and independent oracle helpers for the test suite."""

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from elastwave.moduli import Moduli, as_direction, make_cubic_m3m, make_isotropic


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def rotation_about(axis, angle):
    return Rotation.from_rotvec(angle * as_direction(axis)).as_matrix()


def random_rotation(rng):
    return Rotation.random(rng=rng).as_matrix()


def random_unit(rng):
    v = rng.standard_normal(3)
    while np.linalg.norm(v) < 1e-3:
        v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_symmetric_strain(rng, scale=1.0):
    a = rng.standard_normal((3, 3)) * scale
    return 0.5 * (a + a.T)


def symmetrize_c3(c3):
    # one canonical average per sorted triplet keeps equal entries bit-equal
    cache = {}
    out = np.empty((6, 6, 6))
    for i in range(6):
        for j in range(6):
            for k in range(6):
                key = tuple(sorted((i, j, k)))
                if key not in cache:
                    a, b, c = key
                    cache[key] = (c3[a, b, c] + c3[a, c, b] + c3[b, a, c]
                                  + c3[b, c, a] + c3[c, a, b] + c3[c, b, a]) / 6.0
                out[i, j, k] = cache[key]
    return out


def random_triclinic(rng, third_scale=1.0):
    a = rng.standard_normal((6, 6))
    c2 = a @ a.T / 6.0 + 0.5 * np.eye(6)
    c3 = symmetrize_c3(rng.standard_normal((6, 6, 6)) * third_scale)
    return Moduli(c2=c2, c3=c3)


def random_isotropic_constants(rng):
    lam = rng.uniform(0.5, 3.0)
    mu = rng.uniform(0.3, 2.0)
    l, m, n = rng.uniform(-5.0, 5.0, size=3)
    return lam, mu, l, m, n


def random_isotropic(rng):
    return make_isotropic(*random_isotropic_constants(rng))


def random_cubic_constants(rng):
    """Admissible cubic constants with usable eigenvalue separations."""
    while True:
        c44 = rng.uniform(0.3, 2.0)
        c12 = rng.uniform(-0.5, 1.0)
        c11 = c12 + rng.uniform(0.5, 2.5)
        if c11 + 2 * c12 <= 0.05:
            continue
        # keep the shear branches and longitudinal modes well separated for
        # the closed-form comparison denominators
        if abs(c11 - c44) < 0.08:
            continue
        if abs(0.5 * (c11 - c12) - c44) < 0.08:
            continue
        if abs(c12 + c44) < 0.08:
            continue
        break
    c111, c112, c144, c123, c166, c456 = rng.uniform(-5.0, 5.0, size=6)
    return dict(c11=c11, c12=c12, c44=c44, c111=c111, c112=c112,
                c144=c144, c123=c123, c166=c166, c456=c456)


def random_cubic(rng):
    return make_cubic_m3m(**random_cubic_constants(rng))


# --- independent energy oracles ------------------------------------------

def strain_invariants(e):
    i1 = np.trace(e)
    i2 = 0.5 * (np.trace(e) ** 2 - np.trace(e @ e))
    i3 = np.linalg.det(e)
    return i1, i2, i3


def murnaghan_energy(lam, mu, l, m, n, e):
    """Invariant-form isotropic strain energy (quadratic + cubic)."""
    i1, i2, i3 = strain_invariants(e)
    return (0.5 * (lam + 2 * mu) * i1 ** 2 - 2 * mu * i2
            + (l + 2 * m) / 3.0 * i1 ** 3 - 2 * m * i1 * i2 + n * i3)


def cubic_invariants(e):
    i1 = e[0, 0] + e[1, 1] + e[2, 2]
    i2 = e[0, 0] * e[1, 1] + e[1, 1] * e[2, 2] + e[2, 2] * e[0, 0]
    i3 = e[0, 1] ** 2 + e[1, 2] ** 2 + e[2, 0] ** 2
    i4 = e[0, 0] * e[1, 1] * e[2, 2]
    i5 = e[0, 1] * e[1, 2] * e[2, 0]
    i6 = ((e[0, 0] + e[1, 1]) * e[0, 1] ** 2
          + (e[1, 1] + e[2, 2]) * e[1, 2] ** 2
          + (e[2, 2] + e[0, 0]) * e[2, 0] ** 2)
    return i1, i2, i3, i4, i5, i6


def cubic_quadratic_form(c11, c12, c44, e):
    """c_abcd E_ab E_cd for the m3m pattern via crystal invariants."""
    i1, i2, i3, *_ = cubic_invariants(e)
    return c11 * (i1 ** 2 - 2 * i2) + 2 * c12 * i2 + 4 * c44 * i3


def cubic_cubic_form(c111, c112, c144, c123, c166, c456, e):
    """c_abcdef E_ab E_cd E_ef for the m3m pattern via crystal invariants."""
    i1, i2, i3, i4, i5, i6 = cubic_invariants(e)
    return (c111 * (i1 ** 3 - 3 * i1 * i2 + 3 * i4)
            + 3 * c112 * (i1 * i2 - 3 * i4)
            + 12 * c144 * (i1 * i3 - i6)
            + 6 * c123 * i4 + 48 * c456 * i5 + 12 * c166 * i6)


def cubic_energy(k, e):
    return (0.5 * cubic_quadratic_form(k["c11"], k["c12"], k["c44"], e)
            + cubic_cubic_form(k["c111"], k["c112"], k["c144"],
                               k["c123"], k["c166"], k["c456"], e) / 6.0)


# --- finite-difference oracle for the plane-deformation energy -------------

def _directional_derivs(mod, n, d, h=0.35):
    """Exact 2nd/3rd/4th derivatives of t -> W(E(t*d)) at t=0.

    The truncated energy is a degree-6 polynomial in t, so a 7-point
    polynomial fit differentiates it exactly up to rounding.
    """
    from elastwave.moduli import strain_energy, strain_from_gradient

    ts = h * np.arange(-3, 4)
    ys = [strain_energy(mod, strain_from_gradient(t * d, n)) / mod.density
          for t in ts]
    coef = np.polynomial.polynomial.polyfit(ts, ys, 6)
    return 2.0 * coef[2], 6.0 * coef[3], 24.0 * coef[4]


def _sym_multi_index(rank):
    import itertools
    out = []
    for idx in itertools.combinations_with_replacement(range(3), rank):
        perms = set(itertools.permutations(idx))
        out.append((idx, len(perms)))
    return out


def fd_v_derivatives(mod, n, rng, n_dirs=40):
    """Independent reconstruction of the energy-derivative tensors from
    directional derivatives along random directions (least squares on the
    unique symmetric components)."""
    idx2 = _sym_multi_index(2)
    idx3 = _sym_multi_index(3)
    idx4 = _sym_multi_index(4)
    rows2, rows3, rows4, y2, y3, y4 = [], [], [], [], [], []
    for _ in range(n_dirs):
        d = random_unit(rng)
        d2, d3, d4 = _directional_derivs(mod, n, d)
        rows2.append([m * np.prod([d[i] for i in idx]) for idx, m in idx2])
        rows3.append([m * np.prod([d[i] for i in idx]) for idx, m in idx3])
        rows4.append([m * np.prod([d[i] for i in idx]) for idx, m in idx4])
        y2.append(d2)
        y3.append(d3)
        y4.append(d4)
    sol2 = np.linalg.lstsq(np.array(rows2), np.array(y2), rcond=None)[0]
    sol3 = np.linalg.lstsq(np.array(rows3), np.array(y3), rcond=None)[0]
    sol4 = np.linalg.lstsq(np.array(rows4), np.array(y4), rcond=None)[0]

    def unpack(sol, idxs, rank):
        import itertools
        t = np.zeros((3,) * rank)
        for (idx, _), v in zip(idxs, sol):
            for perm in set(itertools.permutations(idx)):
                t[perm] = v
        return t

    return unpack(sol2, idx2, 2), unpack(sol3, idx3, 3), unpack(sol4, idx4, 4)


# --- simple-wave oracle for nonlinearity coefficients ----------------------

def characteristic_speed_curve(mod, n, k0, h, order):
    """Derivatives of the characteristic speed along a mode's simple-wave
    integral curve dm/dsigma = k_s(m), by numerical continuation.

    Returns d(lambda)/d(sigma) at 0 for order=1 and
    0.5 * d^2(lambda)/d(sigma)^2 for order=2.  Independent oracle: uses only
    the state-dependent system matrix and dense eigen-solves.
    """
    from elastwave.nonlinearity import v_derivatives

    lam0, psi, pi = v_derivatives(mod, n)

    def bmat(m):
        return (lam0 + np.einsum("ace,e->ac", psi, m)
                + 0.5 * np.einsum("aceg,e,g->ac", pi, m, m))

    def mode(m, k_prev):
        w, v = np.linalg.eigh(bmat(m))
        i = int(np.argmax(np.abs(v.T @ k_prev)))
        k = v[:, i]
        if k @ k_prev < 0:
            k = -k
        return -np.sqrt(w[i]), k

    def lam_at(sigma, steps=200):
        m = np.zeros(3)
        k = np.asarray(k0, dtype=float).copy()
        if sigma != 0.0:
            ds = sigma / steps
            for _ in range(steps):
                _, k1 = mode(m, k)
                _, k2 = mode(m + 0.5 * ds * k1, k1)
                _, k3 = mode(m + 0.5 * ds * k2, k2)
                _, k4 = mode(m + ds * k3, k3)
                m = m + ds * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                k = k4
        return mode(m, k)[0]

    lp, l0, lm = lam_at(h), lam_at(0.0), lam_at(-h)
    if order == 1:
        return (lp - lm) / (2 * h)
    return 0.5 * (lp - 2 * l0 + lm) / h ** 2


# --- monoclinic materials with an engineered acoustic axis -----------------

_MONO_EVEN_V2 = None
_MONO_EVEN_V3 = None


def _voigt_index_ones():
    # number of Cartesian index-1 occurrences in each Voigt slot
    return np.array([2, 0, 0, 0, 1, 1])


def monoclinic_masks():
    """Entries allowed by a mirror plane normal to the first axis."""
    global _MONO_EVEN_V2, _MONO_EVEN_V3
    if _MONO_EVEN_V2 is None:
        ones = _voigt_index_ones()
        _MONO_EVEN_V2 = (ones[:, None] + ones[None, :]) % 2 == 0
        _MONO_EVEN_V3 = (ones[:, None, None] + ones[None, :, None]
                         + ones[None, None, :]) % 2 == 0
    return _MONO_EVEN_V2, _MONO_EVEN_V3


def random_monoclinic_degenerate(rng, perturb=0.35):
    """Monoclinic moduli tuned so the chosen in-plane direction is an
    acoustic axis whose degenerate plane contains the mirror normal e1.

    Returns (moduli, direction).  The tuning constant is found by a 1-D
    root solve on the shear-eigenvalue gap.
    """
    from elastwave.moduli import voigt4_to_full

    mask2, mask3 = monoclinic_masks()
    while True:
        lam, mu = rng.uniform(0.8, 2.0), rng.uniform(0.5, 1.5)
        base = make_isotropic(lam, mu)
        a2 = rng.standard_normal((6, 6)) * perturb
        c2 = base.c2 + np.where(mask2, 0.5 * (a2 + a2.T), 0.0)
        c3 = np.where(mask3, symmetrize_c3(rng.standard_normal((6, 6, 6)) * 3.0), 0.0)
        if np.linalg.eigvalsh(c2)[0] < 1e-3:
            continue
        phi = rng.uniform(0.3, 1.2)
        n = np.array([0.0, np.cos(phi), np.sin(phi)])

        def gap(t):
            c2t = c2.copy()
            c2t[4, 4] += t  # c_1313: moves only the e1-polarized eigenvalue
            lam_mat = np.einsum("abcd,b,d->ac", voigt4_to_full(c2t), n, n)
            a_e1 = lam_mat[0, 0]
            evals = np.linalg.eigvalsh(lam_mat[1:, 1:])
            return a_e1 - evals[0]

        # the gap is linear in t with slope n3^2 > 0, so a narrow bracket
        # around the analytic crossing always changes sign
        t_guess = -gap(0.0) / n[2] ** 2
        lo, hi = t_guess - 0.05, t_guess + 0.05
        if gap(lo) * gap(hi) > 0:
            continue
        t_star = brentq(gap, lo, hi, xtol=1e-15, rtol=8.9e-16)
        c2t = c2.copy()
        c2t[4, 4] += t_star
        if np.linalg.eigvalsh(c2t)[0] < 1e-4:
            continue
        mod = Moduli(c2=c2t, c3=c3)
        lam_mat = np.einsum("abcd,b,d->ac", mod.c2_full, n, n)
        evals = np.linalg.eigvalsh(lam_mat)
        gaps = np.diff(evals)
        # exactly one coincident pair, the third mode well separated
        if min(gaps) < 1e-9 * evals[-1] and max(gaps) > 1e-3 * evals[-1]:
            return mod, n
