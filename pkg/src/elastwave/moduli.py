"""Elastic constants: storage, constructors, rotation, strain energy, file I/O.

Conventions
-----------
* Voigt compression (11, 22, 33, 23, 13, 12) -> (1..6), zero-based in code.
* Stored constants are plain tensor components; no factor-of-2 engineering
  strains anywhere.  Shear multiplicities are handled inside contraction
  routines by expanding to full tensors.
* Second-order constants live in a symmetric 6x6 matrix, third-order ones in
  a (6,6,6) array symmetric under any permutation of its Voigt indices
  (equivalent to the 56 independent sorted triplets).
* Density defaults to 1.  Wave speeds scale as 1/sqrt(density) and all
  quadratic/cubic amplitude-equation coefficients inherit that scaling
  because the dynamic tensors are divided by density at construction time
  (see :mod:`elastwave.nonlinearity`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DirectionError,
    MaterialError,
    MaterialFormatError,
    PositiveDefinitenessError,
    SymmetryViolationError,
)

# Voigt slot -> index pair, and the flat (3*3) index tricks for fast
# expansion/compression of rank 4 and rank 6 tensors.
VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))
_VOIGT_FLAT = [0, 4, 8, 5, 2, 1]
_UNVOIGT_FLAT = [0, 5, 4, 5, 1, 3, 4, 3, 2]

# Positive definiteness: smallest Voigt eigenvalue must exceed this times
# the largest.
PD_RELTOL = 1e-10

# Orthogonality tolerance for rotation matrices.
ORTHO_TOL = 1e-12


def voigt2_to_full(v6: np.ndarray) -> np.ndarray:
    """Expand a 6-vector of symmetric-tensor components to a 3x3 matrix."""
    v6 = np.asarray(v6, dtype=float)
    return v6[_UNVOIGT_FLAT].reshape(3, 3)


def full_to_voigt2(t: np.ndarray) -> np.ndarray:
    """Compress a symmetric 3x3 matrix to its 6 Voigt components."""
    return np.asarray(t, dtype=float).reshape(9)[_VOIGT_FLAT]


def voigt4_to_full(c: np.ndarray) -> np.ndarray:
    """Expand a 6x6 Voigt matrix to the full (3,3,3,3) tensor."""
    c = np.asarray(c, dtype=float)
    return c[_UNVOIGT_FLAT][:, _UNVOIGT_FLAT].reshape(3, 3, 3, 3)


def full_to_voigt4(c: np.ndarray) -> np.ndarray:
    """Compress a (3,3,3,3) tensor with minor symmetries to Voigt 6x6."""
    flat = np.asarray(c, dtype=float).reshape(9, 9)
    return flat[_VOIGT_FLAT][:, _VOIGT_FLAT]


def voigt6_to_full(c: np.ndarray) -> np.ndarray:
    """Expand a (6,6,6) Voigt array to the full (3,)*6 tensor."""
    c = np.asarray(c, dtype=float)
    return c[_UNVOIGT_FLAT][:, _UNVOIGT_FLAT][:, :, _UNVOIGT_FLAT].reshape((3,) * 6)


def full_to_voigt6(c: np.ndarray) -> np.ndarray:
    """Compress a rank-6 tensor with pairwise minor symmetries to (6,6,6)."""
    flat = np.asarray(c, dtype=float).reshape(9, 9, 9)
    return flat[_VOIGT_FLAT][:, _VOIGT_FLAT][:, :, _VOIGT_FLAT]


def rotate_tensor(t: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Apply the rotation ``r`` to every index of the Cartesian tensor ``t``."""
    out = np.asarray(t, dtype=float)
    for axis in range(out.ndim):
        out = np.moveaxis(np.tensordot(r, out, axes=(1, axis)), 0, axis)
    return out


def as_direction(v) -> np.ndarray:
    """Validate and normalize a propagation direction to a unit 3-vector."""
    n = np.asarray(v, dtype=float).reshape(-1)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise DirectionError(f"direction must be a finite 3-vector, got {v!r}")
    norm = float(np.linalg.norm(n))
    if norm < 1e-300:
        raise DirectionError("direction must be nonzero")
    return n / norm


def strain_from_gradient(m, n) -> np.ndarray:
    """Finite strain produced by the plane-wave displacement gradient m (x) n.

    Returns E = (m (x) n + n (x) m)/2 + |m|^2 (n (x) n)/2, the exact
    symmetric strain of the rank-one deformation gradient increment.
    """
    m = np.asarray(m, dtype=float).reshape(3)
    n = as_direction(n)
    mn = np.outer(m, n)
    return 0.5 * (mn + mn.T) + 0.5 * float(m @ m) * np.outer(n, n)


@dataclass(frozen=True)
class Moduli:
    """Density plus second- and third-order elastic constants (Voigt storage).

    ``c2`` is the symmetric 6x6 matrix of second-order constants, ``c3`` the
    (6,6,6) array of third-order constants symmetric in all Voigt indices.
    Construction validates index symmetry and positive definiteness of the
    second-order part.
    """

    c2: np.ndarray
    c3: np.ndarray
    density: float = 1.0
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        c2 = np.array(self.c2, dtype=float)
        c3 = np.array(self.c3, dtype=float)
        if c2.shape != (6, 6):
            raise MaterialError(f"c2 must be 6x6 Voigt, got shape {c2.shape}")
        if c3.shape != (6, 6, 6):
            raise MaterialError(f"c3 must be (6,6,6) Voigt, got shape {c3.shape}")
        if not (np.isfinite(c2).all() and np.isfinite(c3).all()):
            raise MaterialError("elastic constants must be finite")
        bad = np.argwhere(np.abs(c2 - c2.T) > 0)
        if bad.size:
            i, j = bad[0]
            raise SymmetryViolationError(
                f"c2 Voigt entry ({i + 1}{j + 1}) != ({j + 1}{i + 1})"
            )
        for perm in ((0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
            bad = np.argwhere(np.abs(c3 - np.transpose(c3, perm)) > 0)
            if bad.size:
                i, j, k = bad[0] + 1
                raise SymmetryViolationError(
                    f"c3 Voigt entry ({i}{j}{k}) breaks index-permutation symmetry"
                )
        if not (self.density > 0 and np.isfinite(self.density)):
            raise MaterialError(f"density must be positive, got {self.density}")
        evals = np.linalg.eigvalsh(c2)
        if evals[0] <= PD_RELTOL * max(evals[-1], 0.0):
            raise PositiveDefinitenessError(
                "second-order constants are not positive definite: "
                f"Voigt eigenvalues span [{evals[0]:.3e}, {evals[-1]:.3e}]"
            )
        c2.flags.writeable = False
        c3.flags.writeable = False
        object.__setattr__(self, "c2", c2)
        object.__setattr__(self, "c3", c3)

    @cached_property
    def c2_full(self) -> np.ndarray:
        t = voigt4_to_full(self.c2)
        t.flags.writeable = False
        return t

    @cached_property
    def c3_full(self) -> np.ndarray:
        t = voigt6_to_full(self.c3)
        t.flags.writeable = False
        return t

    def allclose(self, other: "Moduli", rtol: float = 0.0, atol: float = 0.0) -> bool:
        return (
            abs(self.density - other.density) <= atol + rtol * abs(other.density)
            and np.allclose(self.c2, other.c2, rtol=rtol, atol=atol)
            and np.allclose(self.c3, other.c3, rtol=rtol, atol=atol)
        )


def strain_energy(mod: Moduli, strain: np.ndarray) -> float:
    """Stored energy density at the given symmetric strain.

    W = c_abcd E_ab E_cd / 2 + c_abcdef E_ab E_cd E_ef / 6, with the
    expansion cut after the cubic term (no fourth-order constants).
    """
    e = np.asarray(strain, dtype=float)
    quad = np.einsum("abcd,ab,cd->", mod.c2_full, e, e)
    cub = np.einsum("abcdef,ab,cd,ef->", mod.c3_full, e, e, e, optimize=True)
    return 0.5 * quad + cub / 6.0


# Alias classes of nonzero Voigt triplets in the m3m cubic pattern, keyed by
# the canonical constant that fixes each class.
_CUBIC_C2_CLASSES = {
    "11": [(0, 0), (1, 1), (2, 2)],
    "12": [(0, 1), (0, 2), (1, 2)],
    "44": [(3, 3), (4, 4), (5, 5)],
}
_CUBIC_C3_CLASSES = {
    "111": [(0, 0, 0), (1, 1, 1), (2, 2, 2)],
    "112": [(0, 0, 1), (0, 0, 2), (0, 1, 1), (0, 2, 2), (1, 1, 2), (1, 2, 2)],
    "123": [(0, 1, 2)],
    "144": [(0, 3, 3), (1, 4, 4), (2, 5, 5)],
    "166": [(0, 4, 4), (0, 5, 5), (1, 3, 3), (1, 5, 5), (2, 3, 3), (2, 4, 4)],
    "456": [(3, 4, 5)],
}


def _symmetrize3(c3: np.ndarray) -> np.ndarray:
    """Fill a (6,6,6) array from entries given at sorted index triplets."""
    out = np.zeros((6, 6, 6))
    for i in range(6):
        for j in range(6):
            for k in range(6):
                out[i, j, k] = c3[tuple(sorted((i, j, k)))]
    return out


def _sym3_average(c3: np.ndarray) -> np.ndarray:
    """Average a (6,6,6) array over index permutations, bit-exactly symmetric."""
    cache: dict[tuple[int, int, int], float] = {}
    out = np.empty((6, 6, 6))
    for i in range(6):
        for j in range(6):
            for k in range(6):
                key = tuple(sorted((i, j, k)))
                if key not in cache:
                    a, b, c = key
                    vals = (c3[a, b, c], c3[a, c, b], c3[b, a, c],
                            c3[b, c, a], c3[c, a, b], c3[c, b, a])
                    # keep already-symmetric input bit-identical
                    cache[key] = vals[0] if vals.count(vals[0]) == 6 else sum(vals) / 6.0
                out[i, j, k] = cache[key]
    return out


def make_cubic_m3m(c11, c12, c44, c111, c112, c144, c123, c166, c456,
                   density: float = 1.0, name: str | None = None) -> Moduli:
    """Moduli of a cubic m3m crystal from its 3 + 6 independent constants."""
    c2 = np.zeros((6, 6))
    vals2 = {"11": c11, "12": c12, "44": c44}
    for key, slots in _CUBIC_C2_CLASSES.items():
        for i, j in slots:
            c2[i, j] = c2[j, i] = vals2[key]
    c3s = np.zeros((6, 6, 6))
    vals3 = {"111": c111, "112": c112, "123": c123,
             "144": c144, "166": c166, "456": c456}
    for key, slots in _CUBIC_C3_CLASSES.items():
        for ijk in slots:
            c3s[ijk] = vals3[key]
    return Moduli(c2=c2, c3=_symmetrize3(c3s), density=density, name=name)


def make_isotropic(lam, mu, l=0.0, m=0.0, n=0.0,
                   density: float = 1.0, name: str | None = None) -> Moduli:
    """Isotropic moduli from Lame constants and Murnaghan third-order l, m, n.

    The third-order tensor is the cubic pattern constrained by isotropy:
    c111 = 2l + 4m, c112 = 2l, c123 = 2l - 2m + n, c144 = m - n/2,
    c166 = m, c456 = n/4.
    """
    return make_cubic_m3m(
        c11=lam + 2.0 * mu, c12=lam, c44=mu,
        c111=2.0 * l + 4.0 * m, c112=2.0 * l, c123=2.0 * l - 2.0 * m + n,
        c144=m - 0.5 * n, c166=m, c456=0.25 * n,
        density=density, name=name,
    )


def murnaghan_from_cubic(c123: float, c144: float, c456: float) -> tuple[float, float, float]:
    """Invert the isotropic third-order map back to Murnaghan (l, m, n)."""
    n = 4.0 * c456
    m = c144 + 0.5 * n
    l = 0.5 * (c123 + 2.0 * m - n)
    return l, m, n


def rotate_moduli(mod: Moduli, r: np.ndarray) -> Moduli:
    """Moduli of the same material with its frame rotated by ``r``."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or np.max(np.abs(r.T @ r - np.eye(3))) > ORTHO_TOL:
        raise MaterialError("rotation matrix must be orthogonal to 1e-12")
    c2v = full_to_voigt4(rotate_tensor(mod.c2_full, r))
    c3v = full_to_voigt6(rotate_tensor(mod.c3_full, r))
    # the rotated tensor is symmetric only to rounding; restore it exactly
    return Moduli(c2=0.5 * (c2v + c2v.T), c3=_sym3_average(c3v),
                  density=mod.density, name=mod.name)


# ---------------------------------------------------------------------------
# Material files.  JSON schema:
#   { "name": str?, "density": number?, "symmetry": "triclinic" |
#     "isotropic" | "cubic_m3m", "c2": 6x6 array | {"IJ": value},
#     "c3": {"IJK": value}? }
# Unknown top-level keys are rejected.  Map keys may list either index order
# ("12" or "21"); conflicting duplicates raise SymmetryViolationError.
# ---------------------------------------------------------------------------

_ALLOWED_KEYS = {"name", "density", "symmetry", "c2", "c3"}
_SYMMETRIES = ("triclinic", "isotropic", "cubic_m3m")


def _canon_key(key: str, rank: int, what: str) -> tuple[int, ...]:
    if not (isinstance(key, str) and len(key) == rank and key.isdigit()):
        raise MaterialFormatError(f"bad {what} key {key!r}: expected {rank} digits 1-6")
    idx = tuple(sorted(int(ch) - 1 for ch in key))
    if idx[0] < 0 or idx[-1] > 5:
        raise MaterialFormatError(f"bad {what} key {key!r}: digits must be 1-6")
    return idx


def _entries_from_map(mapping: dict, rank: int, what: str) -> dict[tuple[int, ...], float]:
    entries: dict[tuple[int, ...], float] = {}
    for key, value in mapping.items():
        idx = _canon_key(key, rank, what)
        value = float(value)
        if idx in entries and entries[idx] != value:
            label = "".join(str(i + 1) for i in idx)
            raise SymmetryViolationError(
                f"{what} entries for ({label}) conflict: {entries[idx]} vs {value}"
            )
        entries[idx] = value
    return entries


def _c2_from_spec(spec) -> dict[tuple[int, int], float]:
    if isinstance(spec, dict):
        return _entries_from_map(spec, 2, "c2")
    arr = np.asarray(spec, dtype=float)
    if arr.shape != (6, 6):
        raise MaterialFormatError(f"dense c2 must be 6x6, got shape {arr.shape}")
    bad = np.argwhere(arr != arr.T)
    if bad.size:
        i, j = bad[0]
        raise SymmetryViolationError(
            f"dense c2 entry ({i + 1}{j + 1}) != ({j + 1}{i + 1})"
        )
    return {(i, j): float(arr[i, j]) for i in range(6) for j in range(i, 6)}


def _match_pattern(entries: dict, classes: dict, what: str, zero_tol: float = 0.0):
    """Collapse explicit entries onto symmetry alias classes.

    Returns the canonical constants; entries outside every class must be
    zero, entries within one class must agree.
    """
    slot_to_class = {}
    for cname, slots in classes.items():
        for s in slots:
            slot_to_class[s] = cname
    consts: dict[str, float] = {}
    for idx, value in entries.items():
        label = "".join(str(i + 1) for i in idx)
        cname = slot_to_class.get(idx)
        if cname is None:
            if abs(value) > zero_tol:
                raise SymmetryViolationError(
                    f"{what} entry ({label}) must vanish for this symmetry, got {value}"
                )
            continue
        if cname in consts and consts[cname] != value:
            raise SymmetryViolationError(
                f"{what} entry ({label}) = {value} conflicts with equivalent "
                f"entry value {consts[cname]}"
            )
        consts.setdefault(cname, value)
    return consts


def _isotropic_check(consts: dict[str, float], derived: dict[str, float], what: str):
    for key, value in consts.items():
        want = derived[key]
        scale = max(abs(want), abs(value), 1.0)
        if abs(value - want) > 1e-9 * scale:
            raise SymmetryViolationError(
                f"{what} constant {key} = {value} is inconsistent with isotropy "
                f"(expected {want})"
            )


def moduli_from_document(doc: dict) -> Moduli:
    """Build Moduli from a parsed material document (see module docstring)."""
    if not isinstance(doc, dict):
        raise MaterialFormatError("material document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise MaterialFormatError(f"unknown material keys: {sorted(unknown)}")
    symmetry = doc.get("symmetry")
    if symmetry not in _SYMMETRIES:
        raise MaterialFormatError(
            f"symmetry must be one of {_SYMMETRIES}, got {symmetry!r}"
        )
    if "c2" not in doc:
        raise MaterialFormatError("material document must provide c2")
    density = float(doc.get("density", 1.0))
    name = doc.get("name")
    c2_entries = _c2_from_spec(doc["c2"])
    c3_entries = _entries_from_map(doc.get("c3", {}), 3, "c3")

    if symmetry == "triclinic":
        c2 = np.zeros((6, 6))
        for (i, j), v in c2_entries.items():
            c2[i, j] = c2[j, i] = v
        c3s = np.zeros((6, 6, 6))
        for idx, v in c3_entries.items():
            c3s[idx] = v
        return Moduli(c2=c2, c3=_symmetrize3(c3s), density=density, name=name)

    k2 = _match_pattern(c2_entries, _CUBIC_C2_CLASSES, "c2")
    k3 = _match_pattern(c3_entries, _CUBIC_C3_CLASSES, "c3")
    if symmetry == "cubic_m3m":
        return make_cubic_m3m(
            c11=k2.get("11", 0.0), c12=k2.get("12", 0.0), c44=k2.get("44", 0.0),
            c111=k3.get("111", 0.0), c112=k3.get("112", 0.0),
            c144=k3.get("144", 0.0), c123=k3.get("123", 0.0),
            c166=k3.get("166", 0.0), c456=k3.get("456", 0.0),
            density=density, name=name,
        )

    # isotropic: lam/mu from c12/c44, Murnaghan from c123/c144/c456; any
    # dependent constants present must agree with the derived values.
    lam, mu = k2.get("12", 0.0), k2.get("44", 0.0)
    l, m, n = murnaghan_from_cubic(
        k3.get("123", 0.0), k3.get("144", 0.0), k3.get("456", 0.0)
    )
    _isotropic_check(k2, {"11": lam + 2 * mu, "12": lam, "44": mu}, "c2")
    _isotropic_check(
        k3,
        {"111": 2 * l + 4 * m, "112": 2 * l, "123": 2 * l - 2 * m + n,
         "144": m - 0.5 * n, "166": m, "456": 0.25 * n},
        "c3",
    )
    return make_isotropic(lam, mu, l, m, n, density=density, name=name)


def load_material(path) -> Moduli:
    """Load a material JSON file; see module docstring for the schema."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise MaterialFormatError(f"cannot parse material file {path}: {exc}") from exc
    return moduli_from_document(doc)


def material_document(mod: Moduli, name: str | None = None) -> dict:
    """Serializable document equivalent to ``mod`` (generic triclinic form)."""
    c3_map = {}
    for i in range(6):
        for j in range(i, 6):
            for k in range(j, 6):
                v = mod.c3[i, j, k]
                if v != 0.0:
                    c3_map[f"{i + 1}{j + 1}{k + 1}"] = float(v)
    return {
        "name": name if name is not None else (mod.name or "material"),
        "density": float(mod.density),
        "symmetry": "triclinic",
        "c2": [[float(x) for x in row] for row in mod.c2],
        "c3": c3_map,
    }


def save_material(mod: Moduli, path, name: str | None = None) -> None:
    """Write ``mod`` as a material JSON file (round-trips exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(material_document(mod, name=name), fh, indent=2, sort_keys=True)
        fh.write("\n")
