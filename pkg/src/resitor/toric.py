"""Smooth complete fans, degree functions and their toric q-series.

The toric form of a fan with a degree function is

    sum_{m in M} sum_C (-1)^{codim C} prod_{d_i in C} g(m . d_i, zeta_i),

where g(a, zeta) = sum_{k>=0} zeta^k q^{a k} continued analytically (see
:func:`resitor.qseries.qs_geometric`).  The lattice route evaluates the sum
over expanding boxes; for fans coming from Bott towers the theta route
computes the same series as an iterated residue.
"""

import cmath
import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import comb, gcd

import numpy as np
from gmpy2 import mpq

from .bott import BottTower
from .errors import DegreeIntegralOnRay, NotStabilized
from .qseries import COMPLEX, EXACT, QSeries, qs_geometric, rational
from .theta import ThetaIntegrand, half_period_index


def _det(rows):
    """Integer determinant by fraction-free elimination (Bareiss)."""
    M = [list(r) for r in rows]
    n = len(M)
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1] if n else 1


class Fan:
    """A smooth fan given by primitive rays and its maximal cones."""

    def __init__(self, rank, rays, max_cones):
        self.rank = int(rank)
        self.rays = tuple(tuple(int(x) for x in r) for r in rays)
        for i, r in enumerate(self.rays):
            if len(r) != self.rank:
                raise ValueError(f"rays[{i}]: expected {self.rank} coordinates")
            g = 0
            for x in r:
                g = gcd(g, x)
            if g != 1:
                raise ValueError(f"rays[{i}]: ray not primitive")
        mc = []
        for c, cone in enumerate(max_cones):
            cone = tuple(sorted(int(i) for i in cone))
            if len(set(cone)) != len(cone) or any(not 0 <= i < len(self.rays) for i in cone):
                raise ValueError(f"max_cones[{c}]: bad ray indices")
            if len(cone) != self.rank:
                raise ValueError(f"max_cones[{c}]: a smooth complete fan needs {self.rank} rays per maximal cone")
            if abs(_det([self.rays[i] for i in cone])) != 1:
                raise ValueError(f"max_cones[{c}]: cone is not unimodular")
            mc.append(cone)
        if not mc:
            raise ValueError("max_cones: at least one cone is required")
        self.max_cones = tuple(sorted(set(mc)))
        faces = set()
        for cone in self.max_cones:
            for s in range(len(cone) + 1):
                faces.update(itertools.combinations(cone, s))
        self.cones = tuple(sorted(faces, key=lambda c: (len(c), c)))
        self._cone_set = frozenset(self.cones)
        self.divisor_map = None
        self.tower = None

    def is_cone(self, c):
        return tuple(sorted(c)) in self._cone_set

    def codim(self, cone):
        return self.rank - len(cone)

    def to_json(self):
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "max_cones": [list(c) for c in self.max_cones]}

    def __eq__(self, other):
        return (isinstance(other, Fan) and self.rank == other.rank and self.rays == other.rays
                and self.max_cones == other.max_cones)

    def __hash__(self):
        return hash((self.rank, self.rays, self.max_cones))

    def __repr__(self):
        return f"Fan(rank={self.rank}, rays={list(self.rays)}, max_cones={list(self.max_cones)})"


class DegreeFunction:
    """Per-ray degree values alpha_i; zeta_i = exp(2 pi i alpha_i)."""

    def __init__(self, values):
        vals = []
        for v in values:
            if isinstance(v, (complex, float)):
                vals.append(complex(v))
            elif isinstance(v, (list, tuple)):
                vals.append(complex(float(v[0]), float(v[1])))
            else:
                vals.append(rational(v))
        self.values = tuple(vals)

    @classmethod
    def constant(cls, n, value):
        return cls([value] * n)

    def __len__(self):
        return len(self.values)

    @property
    def exact(self):
        return all(not isinstance(v, complex) and half_period_index(v) is not None for v in self.values)

    @property
    def mode(self):
        return EXACT if self.exact else COMPLEX

    def zeta(self, i):
        v = self.values[i]
        if self.exact:
            return mpq(-1) ** half_period_index(v)
        return cmath.exp(2j * cmath.pi * complex(v))

    def integral_rays(self):
        return [i for i, v in enumerate(self.values)
                if not isinstance(v, complex) and v.denominator == 1]

    def to_json(self):
        out = []
        for v in self.values:
            out.append([v.real, v.imag] if isinstance(v, complex) else str(v))
        return out


# builders ---------------------------------------------------------------


def fan_cp(n):
    rays = [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    rays.append(tuple([-1] * n))
    cones = list(itertools.combinations(range(n + 1), n))
    fan = Fan(n, rays, cones)
    fan.tower = BottTower.projective(n)
    fan.divisor_map = tuple((1,) for _ in range(n + 1))
    return fan


def fan_hirzebruch(k):
    """Rays e1, -e1 + k e2, -e2, e2 with divisor classes u, u, v, v - k u."""
    rays = [(1, 0), (-1, k), (0, -1), (0, 1)]
    fan = Fan(2, rays, [(0, 2), (0, 3), (1, 2), (1, 3)])
    fan.tower = BottTower.hirzebruch(k)
    fan.divisor_map = ((1, 0), (1, 0), (0, 1), (-k, 1))
    return fan


def fan_bundle_over_cp(n, jk):
    """CP^2-bundle over CP^2: rays e1..e4, -e1-e2+j e3+k e4, -e3-e4."""
    if n != 2:
        raise ValueError("only the CP^2-bundle over CP^2 is built in")
    j, k = jk
    rays = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1),
            (-1, -1, j, k), (0, 0, -1, -1)]
    cones = [tuple(sorted(set((0, 1, 4)) - {a} | set((2, 3, 5)) - {b}))
             for a in (0, 1, 4) for b in (2, 3, 5)]
    fan = Fan(4, rays, cones)
    fan.tower = BottTower.twisted_milnor(2, (j, k))
    fan.divisor_map = ((1, 0), (1, 0), (-j, 1), (-k, 1), (1, 0), (0, 1))
    return fan


def fan_from_tower(t):
    """Fan of a Bott tower; the ray of x_kj maps to u_k + x_kj, the closing ray of stage k to u_k."""
    n = t.n
    offsets = []
    pos = 0
    for st in t.stages:
        offsets.append(pos)
        pos += st.fiber_dim
    rank = pos
    rays, dmap, stage_rays = [], [], []
    for k, st in enumerate(t.stages):
        idx = []
        for j in range(st.fiber_dim):
            r = [0] * rank
            r[offsets[k] + j] = 1
            rays.append(tuple(r))
            uk = [1 if i == k else 0 for i in range(n)]
            dmap.append(tuple(a + b for a, b in zip(uk, t.twist_form(k, j))) if k else tuple(uk))
            idx.append(len(rays) - 1)
        last = [0] * rank
        for j in range(st.fiber_dim):
            last[offsets[k] + j] = -1
        for l in range(k + 1, n):
            for j in range(t.stages[l].fiber_dim):
                last[offsets[l] + j] = -t.stages[l].twists[j][k]
        rays.append(tuple(last))
        dmap.append(tuple(1 if i == k else 0 for i in range(n)))
        idx.append(len(rays) - 1)
        stage_rays.append(idx)
    cones = []
    for omit in itertools.product(*stage_rays):
        cones.append(tuple(sorted(i for grp in stage_rays for i in grp if i not in omit)))
    fan = Fan(rank, rays, cones)
    fan.tower = t
    fan.divisor_map = tuple(dmap)
    return fan


# lattice route ----------------------------------------------------------


def cone_term(fan, cone, m, deg, q_order):
    """prod over rays of the cone of g(m . d_i, zeta_i)."""
    mode = deg.mode
    out = QSeries.one(q_order, mode)
    for i in cone:
        a = sum(x * y for x, y in zip(m, fan.rays[i]))
        z = deg.zeta(i)
        try:
            g = qs_geometric(a, z, q_order)
        except DegreeIntegralOnRay as exc:
            raise DegreeIntegralOnRay(f"degree integral on ray {i} with m . d = 0") from exc
        out = out * g.to_mode(mode)
    return out


def lattice_term(fan, deg, m, q_order, signs=True):
    """sum_C (-1)^{codim C} cone_term(C, m); a slow reference for one m."""
    total = QSeries.zero(q_order, deg.mode)
    for cone in fan.cones:
        t = cone_term(fan, cone, m, deg, q_order)
        total = total + (t if not signs or fan.codim(cone) % 2 == 0 else -t)
    return total


@dataclass
class LatticePolicy:
    """Box schedule B = start, start + step, ...; accept after ``agree`` quiet shells."""

    start: int = None
    step: int = None
    cap: int = None
    agree: int = 2

    def resolve(self, N):
        n = max(N, 1)
        return (self.start or n, self.step or n, self.cap or 8 * n, self.agree)


def _shell_counts(args):
    """Clamped keys and multiplicities of the shell max|m| in (b_old, b_new] for fixed m_0."""
    m0, b_old, b_new, rays, clamp = args
    r = rays.shape[1]
    rng = np.arange(-b_new, b_new + 1, dtype=np.int64)
    if r == 1:
        rest = np.zeros((1, 0), dtype=np.int64)
    else:
        grids = np.meshgrid(*([rng] * (r - 1)), indexing="ij")
        rest = np.stack([g.ravel() for g in grids], axis=1)
    if abs(m0) <= b_old:
        # inner slice: only points outside the old box are new
        keep = np.abs(rest).max(axis=1, initial=0) > b_old
        rest = rest[keep]
    pts = np.concatenate([np.full((len(rest), 1), m0, dtype=np.int64), rest], axis=1)
    if len(pts) == 0:
        return np.zeros((0, rays.shape[0]), np.int64), np.zeros(0, np.int64)
    a = np.clip(pts @ rays.T, -clamp, clamp)
    keys, counts = np.unique(a, axis=0, return_counts=True)
    return keys, counts


def _merge(parts, nrays):
    parts = [p for p in parts if len(p[0])]
    if not parts:
        return np.zeros((0, nrays), np.int64), np.zeros(0, np.int64)
    keys = np.concatenate([p[0] for p in parts])
    counts = np.concatenate([p[1] for p in parts])
    uk, inv = np.unique(keys, axis=0, return_inverse=True)
    tot = np.zeros(len(uk), np.int64)
    np.add.at(tot, inv.ravel(), counts)
    return uk, tot


class _LatticeEvaluator:
    """Vectorized cone sums over many clamped key vectors at once."""

    def __init__(self, fan, deg, N, signs=True):
        self.fan, self.deg, self.N, self.signs = fan, deg, N, signs
        self.exact = deg.exact
        self.clamp = N + 1
        r = fan.rank
        nr = len(fan.rays)
        width = 2 * self.clamp + 1
        if self.exact:
            # entries are integers or 1/2; scale by 2 per factor
            tab = np.zeros((nr, width, N + 1), dtype=object)
        else:
            tab = np.zeros((nr, width, N + 1), dtype=np.complex128)
        for i in range(nr):
            z = deg.zeta(i)
            for a in range(-self.clamp, self.clamp + 1):
                if a == 0 and z == 1:
                    continue
                g = qs_geometric(a, z, N)
                if self.exact:
                    tab[i, a + self.clamp] = [int(2 * c) for c in g.coeffs]
                else:
                    tab[i, a + self.clamp] = [complex(c) for c in g.coeffs]
        self.table = tab
        self.scale = 2 ** r if self.exact else 1
        children = {}
        for c in fan.cones:
            if c:
                children.setdefault(c[:-1], []).append(c[-1])
        self.children = children
        self.ncones = len(fan.cones)

    def _dtype(self, total_count):
        if not self.exact:
            return np.complex128
        r = self.fan.rank
        bound = (2 ** r) * (2 ** r) * comb(self.N + r, r) * self.ncones * max(total_count, 1)
        return np.int64 if bound < 2 ** 62 else object

    def evaluate(self, keys, counts):
        """sum_k counts[k] * sum_C sign(C) prod_{i in C} g_i(keys[k, i])."""
        N = self.N
        if len(keys) == 0:
            return [0] * (N + 1)
        dtype = self._dtype(int(counts.sum()))
        tab = self.table.astype(dtype) if self.exact else self.table
        U = len(keys)
        idx = keys + self.clamp
        acc = np.zeros((U, N + 1), dtype=dtype)
        r = self.fan.rank
        one = np.zeros((U, N + 1), dtype=dtype)
        one[:, 0] = 1
        stack = [((), one)]
        while stack:
            cone, P = stack.pop()
            sign = -1 if self.signs and (r - len(cone)) % 2 else 1
            mult = sign * (2 ** (r - len(cone)) if self.exact else 1)
            acc += P * mult
            for i in self.children.get(cone, ()):
                G = tab[i][idx[:, i]]
                if self.deg.zeta(i) == 1 and np.any(keys[:, i] == 0):
                    raise DegreeIntegralOnRay(f"degree integral on ray {i} with m . d = 0")
                Q = np.zeros((U, N + 1), dtype=dtype)
                for a in range(N + 1):
                    Q[:, a:] += P[:, a:a + 1] * G[:, :N + 1 - a]
                stack.append((cone + (i,), Q))
        w = counts.astype(dtype).reshape(-1, 1)
        tot = (acc * w).sum(axis=0)
        if self.exact:
            return [mpq(int(x), self.scale) for x in tot]
        return [complex(x) for x in tot]


FLOAT_QUIET = 1e-11


def _quiet(shell, total, mode):
    """A shell changes nothing: exactly in exact mode, up to rounding otherwise."""
    if mode == EXACT:
        return all(x == 0 for x in shell)
    scale = 1 + max(abs(x) for x in total)
    return all(abs(x) <= FLOAT_QUIET * scale for x in shell)


def toric_form_lattice(fan, deg, q_order, policy=None, jobs=1, signs=True):
    """Toric form by summing over expanding boxes until it stabilizes."""
    N = q_order
    if len(deg) != len(fan.rays):
        raise ValueError(f"deg: expected {len(fan.rays)} values, got {len(deg)}")
    bad = deg.integral_rays()
    if bad:
        raise DegreeIntegralOnRay(f"degree is integral on ray {bad[0]}")
    start, step, cap, agree = (policy or LatticePolicy()).resolve(N)
    ev = _LatticeEvaluator(fan, deg, N, signs)
    rays = np.array(fan.rays, dtype=np.int64)
    mode = deg.mode
    total = [mpq(0) if mode == EXACT else 0j] * (N + 1)
    b_old, B, quiet = -1, start, 0
    pool = ProcessPoolExecutor(jobs) if jobs and jobs > 1 else None
    try:
        while True:
            tasks = [(m0, b_old, B, rays, ev.clamp) for m0 in range(-B, B + 1)]
            parts = list(pool.map(_shell_counts, tasks)) if pool else [_shell_counts(t) for t in tasks]
            keys, counts = _merge(parts, len(fan.rays))
            shell = ev.evaluate(keys, counts)
            total = [a + b for a, b in zip(total, shell)]
            if b_old >= 0:
                quiet = quiet + 1 if _quiet(shell, total, mode) else 0
                if quiet >= agree:
                    return QSeries(total, mode)
            b_old, B = B, B + step
            if B > cap:
                raise NotStabilized(f"lattice sum not stabilized through q^{N} within box {b_old} (cap {cap})")
    finally:
        if pool:
            pool.shutdown()


# theta route -------------------------------------------------------------


def toric_form_theta(fan, deg, q_order, mode=None):
    """Toric form of a tower fan as a residue of theta jets over the tower."""
    if fan.divisor_map is None or fan.tower is None:
        raise ValueError("the theta route needs a fan built from a tower (missing divisor map)")
    if len(deg) != len(fan.rays):
        raise ValueError(f"deg: expected {len(fan.rays)} values, got {len(deg)}")
    bad = deg.integral_rays()
    if bad:
        raise DegreeIntegralOnRay(f"degree is integral on ray {bad[0]}")
    if mode is None:
        mode = deg.mode
    t = fan.tower
    ti = ThetaIntegrand(t.vars, q_order, mode)
    for D, alpha in zip(fan.divisor_map, deg.values):
        shift = -alpha
        ti.linear_power(D, 1)
        ti.theta(D, shift, 1)
        ti.theta_prime_at_zero(1)
        ti.theta(D, 0, -1)
        ti.theta_at_zero(shift, -1)
    for vec, mult in t.roots():
        ti.linear_power(vec, -mult)
    return ti.residue()


__all__ = [
    "Fan", "DegreeFunction", "fan_cp", "fan_hirzebruch", "fan_bundle_over_cp", "fan_from_tower",
    "cone_term", "lattice_term", "LatticePolicy", "toric_form_lattice", "toric_form_theta",
]
