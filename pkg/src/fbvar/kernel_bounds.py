"""Numerical certification of the kernel estimates behind the boundedness theory.

For x != y the map t -> t^beta d_t^beta P_t(x, y) is a continuous curve
whose rho-variation norm obeys size bounds (split over three regions of
the square) and a regularity bound after one space derivative.  The same
holds for the conjugated kernel (xy)^(nu+1/2) P_t(x, y) with its own
right-hand sides.  None of the constants is pinned down analytically, so
"pass" means: the observed/bound ratio is finite on the mesh and moves by
less than a declared fraction under refinement of the time grid.

Mesh sweeps also certify the two-sided heat kernel envelope and the decay
of the space derivative of W_t.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import semigroups, variation
from .spectral import mode_values


def region(x, y):
    """Partition of the off-diagonal square: lower / diagonal / upper."""
    if y <= 0.5 * x:
        return "lower"
    if y <= min(1.0, 1.5 * x):
        return "diagonal"
    return "upper"


def size_bound_rhs(nu, x, y):
    """Right-hand side of the variation-norm size estimate, by region."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lower = x ** (-2.0 * (nu + 1.0))
    diag = (x * y) ** (-nu - 0.5) / np.abs(x - y)
    upper = y ** (-2.0 * (nu + 1.0))
    return np.where(y <= 0.5 * x, lower,
                    np.where(y <= np.minimum(1.0, 1.5 * x), diag, upper))


def s_size_bound_rhs(nu, x, y):
    """Size right-hand side for the conjugated kernel family."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lower = y ** (nu + 0.5) / x ** (nu + 1.5)
    diag = 1.0 / np.abs(x - y)
    upper = x ** (nu + 0.5) / y ** (nu + 1.5)
    return np.where(y <= 0.5 * x, lower,
                    np.where(y <= np.minimum(1.0, 1.5 * x), diag, upper))


@dataclass
class BoundReport:
    """Mesh sweep outcome: per-region max observed/bound ratios and stability."""

    check: str
    nu: float
    beta: float
    rho: float
    mesh_size: int
    region_max: dict
    refinement_delta: float
    witness: tuple
    verdict: str
    extras: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"


def default_time_grid(basis, n_points=200, t_lo=1e-3, t_hi=10.0, tol=1e-10):
    """Log-spaced kernel time grid clamped above the certified threshold."""
    t_min = semigroups.poisson_t_min(basis, tol)
    lo = max(t_lo, t_min)
    return np.geomspace(lo, t_hi, int(n_points))[::-1].copy()


def mesh_points(mesh_size):
    m = int(mesh_size)
    return (np.arange(m) + 0.5) / m


def mesh_pairs(mesh_size, exclusion=0.02):
    """Off-diagonal (x, y) pairs; band of width max(exclusion, 1/(2 m)) removed."""
    pts = mesh_points(mesh_size)
    X, Y = np.meshgrid(pts, pts, indexing="ij")
    keep = np.abs(X - Y) >= max(exclusion, 0.5 / mesh_size)
    return X[keep], Y[keep]


def e_rho_kernel_norm(basis, beta, rho, x, y, time_grid=None, flavor="phi"):
    """Grid proxy for the variation norm of t -> t^beta d_t^beta P_t(x, y)."""
    if time_grid is None:
        time_grid = default_time_grid(basis)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    fam = semigroups.kernel_family(basis, time_grid, xs, ys,
                                   kind="poisson", beta=beta, flavor=flavor)
    out = variation.rho_variation_values(fam.reshape(len(time_grid), -1), rho)
    return float(out[0]) if np.isscalar(x) else out.reshape(xs.shape)


class _PairSweep:
    """Mode tables on the unique mesh points, reused across time grids.

    The kernel family over all mesh pairs is mults @ (mode(x_i) * mode(y_j)),
    so the Bessel evaluations happen once per point set instead of once per
    (time grid, offset) combination.
    """

    def __init__(self, basis, points, flavor, h=1e-4):
        self.basis = basis
        self.h = h
        self.center = mode_values(basis, points, flavor)
        self.plus = mode_values(basis, points + h, flavor)
        self.minus = mode_values(basis, points - h, flavor)

    def pair_products(self, ix, iy, offsets=None):
        if offsets is None:
            return self.center[:, ix] * self.center[:, iy]
        if offsets == "x":
            dx = (self.plus - self.minus) / (2.0 * self.h)
            return dx[:, ix] * self.center[:, iy]
        if offsets == "y":
            dy = (self.plus - self.minus) / (2.0 * self.h)
            return self.center[:, ix] * dy[:, iy]
        raise ValueError(offsets)

    def norms(self, beta, rho, times, ix, iy, offsets=None):
        mults = semigroups.poisson_multipliers(self.basis, times, beta)
        fam = mults @ self.pair_products(ix, iy, offsets)
        return variation.rho_variation_values(fam, rho)


def _region_maxima(xs, ys, ratios):
    regions = np.array([region(x, y) for x, y in zip(xs, ys)])
    out = {}
    witness = None
    worst = -math.inf
    for name in ("lower", "diagonal", "upper"):
        mask = regions == name
        if not np.any(mask):
            out[name] = 0.0
            continue
        vals = ratios[mask]
        k = int(np.argmax(vals))
        out[name] = float(vals[k])
        if out[name] > worst:
            worst = out[name]
            witness = (float(xs[mask][k]), float(ys[mask][k]), out[name])
    return out, witness


def _verdict(region_max, delta, stability=0.10):
    finite = all(math.isfinite(v) for v in region_max.values())
    return "pass" if finite and delta < stability else "fail"


def _pair_indices(mesh_size, exclusion=0.02):
    pts = mesh_points(mesh_size)
    I, J = np.meshgrid(np.arange(mesh_size), np.arange(mesh_size),
                       indexing="ij")
    keep = np.abs(pts[I] - pts[J]) >= max(exclusion, 0.5 / mesh_size)
    return pts, I[keep], J[keep]


def size_bound_check(basis, beta, rho, mesh_size=30, time_points=200,
                     stability=0.10):
    """Observed variation norms against the regional size bounds."""
    pts, ix, iy = _pair_indices(mesh_size)
    xs, ys = pts[ix], pts[iy]
    times = default_time_grid(basis, time_points)
    coarse = default_time_grid(basis, time_points // 2)
    sweep = _PairSweep(basis, pts, "phi")
    norms = sweep.norms(beta, rho, times, ix, iy)
    ratios = norms / size_bound_rhs(basis.nu, xs, ys)
    region_max, witness = _region_maxima(xs, ys, ratios)
    norms_c = sweep.norms(beta, rho, coarse, ix, iy)
    with np.errstate(invalid="ignore", divide="ignore"):
        delta = float(np.max(np.abs(norms - norms_c)
                             / np.maximum(norms, 1e-300)))
    return BoundReport("size", basis.nu, float(beta), float(rho),
                       int(mesh_size), region_max, delta, witness,
                       _verdict(region_max, delta, stability))


def regularity_bound_check(basis, beta, rho, mesh_size=20, time_points=200,
                           h=1e-4, stability=0.10):
    """(variation norm of d_x kernel + d_y kernel) * |x-y|^2 (xy)^(nu+1/2)."""
    pts, ix, iy = _pair_indices(mesh_size)
    xs, ys = pts[ix], pts[iy]
    times = default_time_grid(basis, time_points)
    coarse = default_time_grid(basis, time_points // 2)
    sweep = _PairSweep(basis, pts, "phi", h)
    def observed(tgrid):
        return (sweep.norms(beta, rho, tgrid, ix, iy, "x")
                + sweep.norms(beta, rho, tgrid, ix, iy, "y"))
    obs = observed(times)
    scaled = obs * (xs - ys) ** 2 * (xs * ys) ** (basis.nu + 0.5)
    region_max, witness = _region_maxima(xs, ys, scaled)
    obs_c = observed(coarse)
    with np.errstate(invalid="ignore", divide="ignore"):
        delta = float(np.max(np.abs(obs - obs_c) / np.maximum(obs, 1e-300)))
    return BoundReport("regularity", basis.nu, float(beta), float(rho),
                       int(mesh_size), region_max, delta, witness,
                       _verdict(region_max, delta, stability))


def s_nu_bound_check(basis, beta, rho, mesh_size=30, time_points=200,
                     h=1e-4, stability=0.10):
    """Size and regularity sweep for the conjugated kernel family."""
    pts, ix, iy = _pair_indices(mesh_size)
    xs, ys = pts[ix], pts[iy]
    times = default_time_grid(basis, time_points)
    coarse = default_time_grid(basis, time_points // 2)
    sweep = _PairSweep(basis, pts, "psi", h)
    norms = sweep.norms(beta, rho, times, ix, iy)
    ratios = norms / s_size_bound_rhs(basis.nu, xs, ys)
    region_max, witness = _region_maxima(xs, ys, ratios)
    norms_c = sweep.norms(beta, rho, coarse, ix, iy)
    with np.errstate(invalid="ignore", divide="ignore"):
        delta = float(np.max(np.abs(norms - norms_c)
                             / np.maximum(norms, 1e-300)))
    reg = (sweep.norms(beta, rho, times, ix, iy, "x")
           + sweep.norms(beta, rho, times, ix, iy, "y"))
    reg_scaled = reg * (xs - ys) ** 2
    reg_max = float(np.max(reg_scaled))
    report = BoundReport("s_nu", basis.nu, float(beta), float(rho),
                         int(mesh_size), region_max, delta, witness,
                         _verdict(region_max, delta, stability))
    report.extras["regularity_max"] = reg_max
    return report


def heat_envelope_report(basis, times=(0.05, 0.1, 0.5, 1.0, 2.0),
                         mesh_size=20, refine_factor=1.4):
    """Two-sided heat kernel envelope: W_t over the explicit comparison profile.

    Returns the observed [c, C] spread of the ratio and its change under a
    mesh refinement by `refine_factor`.  Refinement densifies the base
    mesh's window [1/(2m), 1 - 1/(2m)] without extending it, so the delta
    measures discretization convergence rather than the slow drift of the
    sampled extrema toward the corners of the square.
    """
    margin = 0.5 / mesh_size

    def spread(m):
        pts = np.linspace(margin, 1.0 - margin, m)
        M = mode_values(basis, pts)
        lam1 = float(basis.zeros[0])
        x = np.repeat(pts, m)
        y = np.tile(pts, m)
        lo, hi = math.inf, -math.inf
        for t in times:
            mult = semigroups.heat_multipliers(basis, [t])[0]
            W = np.einsum("n,ni,nj->ij", mult, M, M).ravel()
            profile = ((1.0 + t) ** (basis.nu + 2.0)
                       / (t + x * y) ** (basis.nu + 0.5)
                       * np.minimum(1.0, (1.0 - x) * (1.0 - y) / t)
                       / math.sqrt(t)
                       * np.exp(-(x - y) ** 2 / (4.0 * t) - lam1 ** 2 * t))
            ratio = W / profile
            lo = min(lo, float(np.min(ratio)))
            hi = max(hi, float(np.max(ratio)))
        return lo, hi

    c0, C0 = spread(mesh_size)
    c1, C1 = spread(int(round(mesh_size * refine_factor)))
    env0, env1 = C0 / c0, C1 / c1
    delta = abs(env1 - env0) / env0
    return {
        "nu": basis.nu, "c": c0, "C": C0, "envelope": env0,
        "envelope_refined": env1, "refinement_delta": delta,
        "positive": c0 > 0.0,
        "verdict": "pass" if (c0 > 0.0 and math.isfinite(env0)
                              and delta < 0.10) else "fail",
    }


def heat_gradient_report(basis, times=(0.05, 0.1, 0.5, 1.0, 2.0),
                         mesh_size=20, h=1e-4, c_gauss=0.125):
    """Decay of d_x W_t: the product |d_x W| (xy)^(nu+1/2) t e^{c (x-y)^2 / t}.

    The Gaussian constant is not specified by the estimate; c_gauss = 1/8
    keeps the probe on the safe side of the expected 1/4 rate.
    """
    pts = mesh_points(mesh_size)
    Md = (mode_values(basis, pts + h) - mode_values(basis, pts - h)) / (2.0 * h)
    M = mode_values(basis, pts)
    x = np.repeat(pts, mesh_size)
    y = np.tile(pts, mesh_size)
    worst = 0.0
    for t in times:
        mult = semigroups.heat_multipliers(basis, [t])[0]
        grad = np.einsum("n,ni,nj->ij", mult, Md, M).ravel()
        prod = np.abs(grad) * (x * y) ** (basis.nu + 0.5) * t \
            * np.exp(c_gauss * (x - y) ** 2 / t)
        worst = max(worst, float(np.max(prod)))
    return {"nu": basis.nu, "max_product": worst, "c_gauss": c_gauss,
            "verdict": "pass" if math.isfinite(worst) else "fail"}


def free_kernel_comparison(basis, mesh_size=20, times=None, refine_factor=1.5):
    """Fitted constant in |W_t - free-space kernel| <= C t near the left edge.

    The sweep covers the square (0, 0.525...)^2, i.e. the slightly inflated
    left half interval, for t in (0, 1].
    """
    if times is None:
        times = np.geomspace(0.05, 1.0, 12)
    edge = 0.25 + 0.25 * 1.05 ** 2

    def fit(m):
        pts = edge * (np.arange(m) + 0.5) / m
        M = mode_values(basis, pts)
        x = np.repeat(pts, m)
        y = np.tile(pts, m)
        best = 0.0
        for t in times:
            mult = semigroups.heat_multipliers(basis, [t])[0]
            W = np.einsum("n,ni,nj->ij", mult, M, M).ravel()
            F = semigroups.free_heat_kernel(basis.nu, t, x, y)
            best = max(best, float(np.max(np.abs(W - F))) / t)
        return best

    C0 = fit(mesh_size)
    C1 = fit(int(round(mesh_size * refine_factor)))
    delta = abs(C1 - C0) / max(C0, 1e-300)
    return {"nu": basis.nu, "C": C0, "C_refined": C1,
            "refinement_delta": delta, "edge": edge,
            "verdict": "pass" if math.isfinite(C0) and delta < 0.25 else "fail"}
