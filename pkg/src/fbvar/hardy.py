"""Atoms for the two Hardy spaces on (0, 1), Hardy averaging operators, and
the norm-equivalence experiments.

Atoms come in two flavors per setting: mean-zero bumps supported on an
interval with sup norm at most measure(I)^-1 ("a"), and normalized
indicators of the dyadic intervals I_j accumulating at the boundary ("b").
The weighted setting uses m_nu = x^(2 nu + 1) dx and the dyadic family
I_j = (1 - 2^-j, 1 - 2^-j-1], j >= 0; the Lebesgue setting adds the left
family I_j = (2^(j-1), 2^j] for j <= -1.

Experiments project atoms on the first n_modes eigenfunctions and drive
the Poisson family through the coefficient path, so no kernel-series time
threshold is involved.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import grid as gridmod, semigroups, spectral, variation
from .grid import LEBESGUE, GridFunction, cumulative_integral, integrate, lp_norm, weighted


class AtomError(ValueError):
    """Invalid atom specification; the message names the violated clause."""


@dataclass(frozen=True)
class AtomSpec:
    """Descriptor of a mean-zero ("a") or dyadic-indicator ("b") atom."""

    setting: str            # "delta_nu" | "s_nu"
    kind: str               # "a" | "b"
    nu: float = 0.0
    j: int = None
    center: float = None
    radius: float = None
    scale: float = 1.0      # height multiplier in (0, 1] for "a" atoms

    def __post_init__(self):
        if self.setting not in ("delta_nu", "s_nu"):
            raise AtomError(f"unknown setting {self.setting!r}")
        if self.kind not in ("a", "b"):
            raise AtomError(f"unknown atom kind {self.kind!r}")
        if not self.nu > -1.0:
            raise AtomError("atoms require nu > -1")


def setting_measure(spec_or_setting, nu=None):
    if isinstance(spec_or_setting, AtomSpec):
        setting, nu = spec_or_setting.setting, spec_or_setting.nu
    else:
        setting = spec_or_setting
    return weighted(nu) if setting == "delta_nu" else LEBESGUE


def measure_of_interval(measure, a, b):
    if measure.kind == "lebesgue":
        return b - a
    e = 2.0 * measure.nu + 2.0
    return (b ** e - a ** e) / e


def dyadic_interval(setting, j):
    """I_j = (1 - 2^-j, 1 - 2^-j-1] for j >= 0; (2^(j-1), 2^j] for j <= -1."""
    j = int(j)
    if j >= 0:
        if setting == "s_nu" and j == 0:
            raise AtomError("the Lebesgue-setting dyadic family excludes j = 0")
        return 1.0 - 2.0 ** (-j), 1.0 - 2.0 ** (-j - 1)
    if setting != "s_nu":
        raise AtomError("negative dyadic indices exist only in the s_nu setting")
    return 2.0 ** (j - 1), 2.0 ** j


def atom_interval(spec):
    if spec.kind == "b":
        if spec.j is None:
            raise AtomError("b-atoms need a dyadic index j")
        return dyadic_interval(spec.setting, spec.j)
    if spec.center is None or spec.radius is None:
        raise AtomError("a-atoms need a center and radius")
    a, b = spec.center - spec.radius, spec.center + spec.radius
    if not (0.0 < a < b < 1.0):
        raise AtomError("a-atom support must be contained in (0, 1)")
    return a, b


def validate_atom_spec(spec):
    atom_interval(spec)
    if spec.kind == "a" and not 0.0 < spec.scale <= 1.0:
        raise AtomError("a-atom scale must lie in (0, 1] to respect the "
                        "sup-norm budget")
    return True


def atom_profile(spec):
    """Breakpoints and piece heights of the atom as a step function.

    b-atoms: measure(I_j)^-1 on I_j.  a-atoms: a two-level step, positive on
    the left half and negative on the right, with heights solving exact mean
    zero in the setting's measure and sup norm scale * measure(I)^-1.
    """
    validate_atom_spec(spec)
    a, b = atom_interval(spec)
    mu = setting_measure(spec)
    if spec.kind == "b":
        height = 1.0 / measure_of_interval(mu, a, b)
        return (a, b), (height,)
    mid = 0.5 * (a + b)
    m_left = measure_of_interval(mu, a, mid)
    m_right = measure_of_interval(mu, mid, b)
    budget = spec.scale / measure_of_interval(mu, a, b)
    # h_left m_left = h_right m_right, max(h_left, h_right) = budget
    if m_left >= m_right:
        h_right = budget
        h_left = budget * m_right / m_left
    else:
        h_left = budget
        h_right = budget * m_left / m_right
    return (a, mid, b), (h_left, -h_right)


def make_atom(spec, grid):
    """Sample the atom on a grid and re-validate the samples.

    The grid must contain the atom's breakpoints among its cell edges,
    otherwise the sampled mean-zero and height constraints would be blurred
    by quadrature; atom_grid builds such grids.
    """
    breaks, heights = atom_profile(spec)
    for bp in breaks:
        if not np.any(np.isclose(grid.edges, bp, rtol=0.0, atol=1e-13)):
            raise AtomError(f"grid cell edges must include the atom "
                            f"breakpoint {bp}")
    vals = np.zeros(grid.size)
    for (lo, hi), h in zip(zip(breaks[:-1], breaks[1:]), heights):
        vals[(grid.nodes > lo) & (grid.nodes <= hi)] = h
    f = GridFunction(grid, vals)
    validate_atom_samples(spec, f)
    return f


def validate_atom_samples(spec, f, mean_tol=1e-10, height_tol=1e-12):
    """Check the sampled atom against its defining clauses."""
    a, b = atom_interval(spec)
    mu = setting_measure(spec)
    budget = 1.0 / measure_of_interval(mu, a, b)
    sup = float(np.max(np.abs(f.values)))
    if sup > budget * (1.0 + height_tol):
        raise AtomError(
            f"sup-norm clause violated: |a|_oo = {sup:.6g} exceeds "
            f"1/measure(I) = {budget:.6g}")
    outside = (f.grid.nodes <= a) | (f.grid.nodes > b)
    if np.any(f.values[outside] != 0.0):
        raise AtomError("support clause violated: nonzero samples outside I")
    if spec.kind == "a":
        mean = integrate(f, mu)
        if abs(mean) > mean_tol * max(1.0, budget):
            raise AtomError(
                f"mean-zero clause violated: integral = {mean:.3e}")
    return True


def atom_grid(nu, specs, points_per_cell=8, n_modes=64):
    """Reference grid whose cell edges include every atom breakpoint."""
    extra = []
    for spec in specs:
        breaks, _ = atom_profile(spec)
        extra.extend(breaks)
    base = spectral.reference_grid(nu, n_modes, points_per_cell)
    edges = np.unique(np.concatenate([base.edges, np.asarray(extra)]))
    return gridmod.grid_from_edges(edges, points_per_cell, grading="atoms")


# ---------------------------------------------------------------------------
# Hardy-type averaging operators


def _first_cell_moments(f, e):
    """Prefix integrals of y^(e-1) f over the first cell (0, a), e > 0.

    f is taken piecewise linear through its cell samples (constant beyond
    the outermost nodes) and the weight is integrated exactly per segment,
    so positivity and linearity survive and constants are handled exactly.
    Returns (prefix at the cell nodes, full first-cell integral).
    """
    g = f.grid
    p = g.points_per_cell
    a = float(g.edges[1])
    y = g.nodes[:p]
    v = np.asarray(f.values[:p], dtype=float)
    prefix = np.empty(p)
    acc = v[0] * y[0] ** e / e
    prefix[0] = acc
    for k in range(p - 1):
        y0, y1 = y[k], y[k + 1]
        beta = (v[k + 1] - v[k]) / (y1 - y0)
        alpha = v[k] - beta * y0
        acc += alpha * (y1 ** e - y0 ** e) / e \
            + beta * (y1 ** (e + 1.0) - y0 ** (e + 1.0)) / (e + 1.0)
        prefix[k + 1] = acc
    full = acc + v[-1] * (a ** e - y[-1] ** e) / e
    return prefix, full


def _first_cell_log_suffix(f):
    """Suffix integrals of f(y)/y from the first-cell nodes up to the edge.

    Same piecewise-linear treatment as _first_cell_moments, with the exact
    log antiderivative per segment.
    """
    g = f.grid
    p = g.points_per_cell
    a = float(g.edges[1])
    y = g.nodes[:p]
    v = np.asarray(f.values[:p], dtype=float)
    suffix = np.empty(p)
    acc = v[-1] * math.log(a / y[-1])
    suffix[-1] = acc
    for k in range(p - 2, -1, -1):
        y0, y1 = y[k], y[k + 1]
        beta = (v[k + 1] - v[k]) / (y1 - y0)
        alpha = v[k] - beta * y0
        acc += alpha * math.log(y1 / y0) + beta * (y1 - y0)
        suffix[k] = acc
    return suffix


def hardy_h0(f, nu):
    """H_0 g(x) = x^(-2 nu - 2) int_0^x y^(2 nu + 1) g(y) dy.

    The first cell touches the singular point of the weight, so the prefix
    there integrates the weight exactly against a piecewise-linear fit of
    g instead of using the generic antiderivative machinery.
    """
    nu = float(nu)
    if not nu > -1.0:
        raise ValueError("nu must exceed -1")
    g = f.grid
    e = 2.0 * nu + 2.0
    p = g.points_per_cell
    weighted_vals = g.nodes ** (e - 1.0) * np.asarray(f.values, float)
    fwd = cumulative_integral(GridFunction(g, weighted_vals)).values.copy()
    prefix, full = _first_cell_moments(f, e)
    first_num = float(np.dot(g.weights[:p], weighted_vals[:p]))
    fwd[p:] += full - first_num
    fwd[:p] = prefix
    return GridFunction(g, fwd * g.nodes ** (-e))


def hardy_hinf(f):
    """H_oo g(x) = int_x^1 g(y) / y dy (computations live on (0, 1)).

    Same first-cell treatment as hardy_h0, keeping the logarithmic growth
    of the suffix exact as x -> 0.
    """
    g = f.grid
    p = g.points_per_cell
    over_y = np.asarray(f.values, float) / g.nodes
    fwd = cumulative_integral(GridFunction(g, over_y)).values
    first_num = float(np.dot(g.weights[:p], over_y[:p]))
    beyond = float(np.dot(g.weights[p:], over_y[p:]))
    out = np.empty(g.size)
    # x past the first cell: suffix = (total past a) - (prefix past a)
    out[p:] = beyond - (fwd[p:] - first_num)
    out[:p] = beyond + _first_cell_log_suffix(f)
    return GridFunction(g, out)


# ---------------------------------------------------------------------------
# experiments


def _experiment_family(setting, basis, f, time_grid):
    flavor = "phi" if setting == "delta_nu" else "psi"
    c = spectral.analyze(f, basis, flavor)
    return semigroups.apply_family(basis, c, time_grid, f.grid,
                                   kind="poisson"), c


def atom_variation_experiment(setting, nu, rho, basis, time_grid,
                              b_indices=(0, 1, 2, 3, 4, 5, 6),
                              n_a_atoms=20, min_radius=2.0 ** -8, seed=0,
                              points_per_cell=8):
    """L1 norms of the Poisson variation field over a family of atoms.

    Reports per-atom norms, the max/min envelope over the family, and the
    trend over the dyadic index.  A uniform bound holds in the limit; the
    experiment certifies a flat envelope at desk scale.  The smallest atom
    scales must stay resolvable by the basis: radius and dyadic width down
    to min_radius need lambda_max ~ 2 pi / min_radius, so the default
    min_radius of 2^-8 wants n_modes >= ~512.
    """
    rng = np.random.default_rng(seed)
    specs = [AtomSpec(setting, "b", nu, j=j) for j in b_indices]
    for _ in range(n_a_atoms):
        j = int(rng.integers(0, 6))
        if setting == "s_nu" and j == 0:
            j = int(rng.choice([-2, -1, 1]))
        lo, hi = dyadic_interval(setting, j)
        width = hi - lo
        r_lo = min(min_radius, 0.25 * width)
        radius = float(rng.uniform(r_lo, 0.45 * width))
        center = float(rng.uniform(lo + radius, hi - radius))
        specs.append(AtomSpec(setting, "a", nu, center=center, radius=radius))
    g = atom_grid(nu, specs, points_per_cell, basis.n_modes)
    mu = setting_measure(setting, nu)
    rows = []
    for spec in specs:
        f = make_atom(spec, g)
        fam, _ = _experiment_family(setting, basis, f, time_grid)
        field = variation.variation_field(fam, "rho_variation", rho=rho)
        norm = lp_norm(field, 1.0, mu)
        rows.append({
            "kind": spec.kind,
            "j": spec.j,
            "center": spec.center,
            "radius": spec.radius,
            "l1_norm": norm,
        })
    norms = np.array([r["l1_norm"] for r in rows])
    b_norms = np.array([r["l1_norm"] for r in rows if r["kind"] == "b"])
    return {
        "setting": setting, "nu": nu, "rho": rho, "seed": seed,
        "atoms": rows,
        "max_norm": float(norms.max()),
        "min_norm": float(norms.min()),
        "envelope": float(norms.max() / norms.min()),
        "b_norms": b_norms.tolist(),
    }


def h1_equivalence_experiment(setting, nu, rho, basis, time_grid,
                              n_functions=12, seed=0, points_per_cell=8,
                              max_terms=4):
    """Ratio of the two H1-defining quantities over random atomic sums.

    Q1 = |f|_1 + |sup_t P_t f|_1 and Q2 = |f|_1 + |V_rho(P) f|_1 are
    equivalent norms; the experiment reports Q1/Q2 over the family and the
    envelope K with 1/K <= Q1/Q2 <= K.  The time grid must contain t = 1 so
    the discrete pointwise bound P_* <= V_rho + |P_1 f| is exact.
    """
    if not np.any(np.isclose(time_grid.times, 1.0)):
        raise ValueError("time grid must contain t = 1")
    rng = np.random.default_rng(seed)
    mu = setting_measure(setting, nu)
    all_specs = []
    combos = []
    for _ in range(n_functions):
        terms = int(rng.integers(1, max_terms + 1))
        combo = []
        for _ in range(terms):
            lam = float(rng.uniform(0.2, 1.0))
            if rng.random() < 0.5:
                j = int(rng.integers(0, 7))
                if setting == "s_nu" and j == 0:
                    j = int(rng.choice([-2, -1, 1]))
                spec = AtomSpec(setting, "b", nu, j=j)
            else:
                j = int(rng.integers(0, 7))
                if setting == "s_nu" and j == 0:
                    j = 1
                lo, hi = dyadic_interval(setting, j)
                width = hi - lo
                radius = float(rng.uniform(0.05 * width, 0.45 * width))
                center = float(rng.uniform(lo + radius, hi - radius))
                spec = AtomSpec(setting, "a", nu, center=center, radius=radius)
            combo.append((lam, spec))
            all_specs.append(spec)
        combos.append(combo)
    g = atom_grid(nu, all_specs, points_per_cell, basis.n_modes)
    i_one = int(np.argmin(np.abs(time_grid.times - 1.0)))
    ratios = []
    rows = []
    for combo in combos:
        vals = np.zeros(g.size)
        for lam, spec in combo:
            vals += lam * make_atom(spec, g).values
        f = GridFunction(g, vals)
        fam, _ = _experiment_family(setting, basis, f, time_grid)
        f1 = lp_norm(f, 1.0, mu)
        p_star = lp_norm(semigroups.maximal_function(fam), 1.0, mu)
        var = lp_norm(variation.variation_field(fam, "rho_variation", rho=rho),
                      1.0, mu)
        p_one = lp_norm(GridFunction(g, fam.values[i_one]), 1.0, mu)
        q1 = f1 + p_star
        q2 = f1 + var
        ratios.append(q1 / q2)
        rows.append({"terms": len(combo), "Q1": q1, "Q2": q2,
                     "P1_l1": p_one, "lower_control_ok":
                     bool(q1 <= q2 + 2.0 * p_one + 1e-12 * q2)})
    ratios = np.array(ratios)
    K = float(max(ratios.max(), 1.0 / ratios.min()))
    return {
        "setting": setting, "nu": nu, "rho": rho, "seed": seed,
        "ratios": ratios.tolist(),
        "K": K,
        "functions": rows,
        "all_lower_control_ok": bool(all(r["lower_control_ok"] for r in rows)),
    }
