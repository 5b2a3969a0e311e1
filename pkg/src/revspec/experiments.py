"""Config-driven experiments.  Each one returns tables, plot series and assertions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from . import pinching
from . import spectral
from .harmonic_poly import build_basis, identity_report, multiplicity, random_samples


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


@dataclass
class Outcome:
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)      # name -> (header, rows)
    series: dict = field(default_factory=dict)      # name -> (xlabel, ylabel, xs, ys)
    assertions: list = field(default_factory=list)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.assertions.append({"name": name, "passed": bool(passed), "detail": detail})


def q(value, quantity: str, module: str):
    """A number with its provenance label."""
    if isinstance(value, (np.floating, np.integer)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        value = repr(value)
    return {"value": value, "quantity": quantity, "module": module}


# --------------------------------------------------------------------------
# parameter schemas


@dataclass(frozen=True)
class Param:
    default: object
    kind: type
    check: Callable | None = None
    rule: str = ""
    is_list: bool = False


def _validate(schema: dict, params: dict) -> dict:
    unknown = set(params) - set(schema)
    if unknown:
        raise ConfigError(f"parameters.{sorted(unknown)[0]}: unknown parameter")
    out = {}
    for key, spec in schema.items():
        val = params.get(key, spec.default)
        path = f"parameters.{key}"
        items = val if spec.is_list else [val]
        if spec.is_list and (not isinstance(val, list) or not val):
            raise ConfigError(f"{path}: expected a non-empty list")
        conv = []
        for i, item in enumerate(items):
            p = f"{path}[{i}]" if spec.is_list else path
            if spec.kind is float and isinstance(item, (int, float)) and not isinstance(item, bool):
                item = float(item)
            elif spec.kind is int and isinstance(item, int) and not isinstance(item, bool):
                pass
            elif spec.kind is str and isinstance(item, str):
                pass
            else:
                raise ConfigError(f"{p}: expected {spec.kind.__name__}, got {item!r}")
            if spec.check is not None and not spec.check(item):
                raise ConfigError(f"{p}: {spec.rule} (got {item!r})")
            conv.append(item)
        out[key] = conv if spec.is_list else conv[0]
    return out


def _pos(x):
    return x > 0


# --------------------------------------------------------------------------
# experiments


def run_sphere_validate(p: dict, seed: int) -> Outcome:
    out = Outcome()
    rows = []
    for n in p["dims"]:
        for R in p["radii"]:
            imm = geo.sphere(R, n)
            K = p["distinct"]
            lam_max = (K - 1) * (n + K - 2) / R**2 * 1.05
            res = spectral.spectrum(imm, lam_max=lam_max, mesh_size=p["mesh"])
            clusters = res.clustered()
            exact = [k * (n + k - 1) / R**2 for k in range(K)]
            ok = len(clusters) >= K
            for k in range(min(K, len(clusters))):
                val, mult, _ = clusters[k]
                rel = abs(val - exact[k]) / max(exact[k], 1.0 / R**2)
                good = rel <= p["rel_tol"] and mult == multiplicity(n, k)
                ok &= good
                rows.append([n, R, k, val, exact[k], mult, multiplicity(n, k), rel])
            out.check(f"sphere n={n} R={R}: first {K} distinct eigenvalues and multiplicities",
                      ok, f"{len(clusters)} clusters found")
            out.results[f"n={n},R={R}"] = {
                "spectrum": res.to_dict(),
                "completeness_bound": q(res.completeness_bound, "completeness_bound", "spectral"),
            }
            out.series[f"eigenvalues_n{n}_R{R}"] = (
                "spectral.index", "spectral.eigenvalue",
                list(range(res.eigenvalues.size)), res.eigenvalues.tolist())
    out.tables["sphere_clusters"] = (
        ["n", "R", "k", "spectral.cluster_value", "harmonic_poly.exact", "spectral.multiplicity",
         "harmonic_poly.multiplicity", "spectral.rel_error"], rows)
    return out


def run_spheroid_sweep(p: dict, seed: int) -> Outcome:
    out = Outcome()
    n = p["n"]
    taus = {k: [] for k in range(1, p["kmax"] + 1)}
    rows = []
    ineq = {}
    for d in p["deltas"]:
        imm = geo.spheroid(1 + d, 1.0, n)
        kmax = p["kmax"]
        lam_max = 1.3 * kmax * (n + kmax - 1) * geo.h2norm(imm) ** 2
        spec = spectral.spectrum(imm, lam_max=lam_max, mesh_size=p["mesh"])
        rep = pinching.pinch_report(imm, spec, p["tau_grid"], kmax, eta=p["eta"])
        suite = pinching.inequality_suite(imm, spec, p["branch"], p["p"])
        ineq[str(d)] = suite.to_dict()
        out.results[f"delta={d}"] = {
            "hk_gap": q(rep.hk_gap, "hk_gap", "pinching"),
            "reilly_gap": q(rep.reilly_gap, "reilly_gap", "pinching"),
            "minimal_tau": {str(k): q(v, f"minimal_tau(k={k})", "pinching")
                            for k, v in rep.minimal_tau.items()},
            "report": rep.to_dict(),
            "inequalities": suite.to_dict(),
        }
        out.check(f"delta={d}: hk_gap >= 1 - 1e-6", rep.hk_gap >= 1 - 1e-6, repr(rep.hk_gap))
        out.check(f"delta={d}: reilly_gap >= 1 - 1e-6", rep.reilly_gap >= 1 - 1e-6,
                  repr(rep.reilly_gap))
        out.check(f"delta={d}: no inequality failure", suite.ok)
        for k, v in rep.minimal_tau.items():
            taus[k].append(v)
            rows.append([d, k, v, rep.hk_gap, rep.reilly_gap])
    order = np.argsort(p["deltas"])[::-1]
    for k, vals in taus.items():
        seq = [vals[i] for i in order]
        mono = all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))
        out.check(f"k={k}: minimal tau non-increasing as delta decreases", mono, repr(seq))
        out.check(f"k={k}: minimal tau at smallest delta < {p['tau_limit']}",
                  seq[-1] < p["tau_limit"], repr(seq[-1]))
        out.series[f"tau_vs_delta_k{k}"] = ("geometry.delta", f"pinching.minimal_tau(k={k})",
                                            [p["deltas"][i] for i in order], seq)
    out.tables["minimal_tau"] = (["geometry.delta", "k", "pinching.minimal_tau",
                                  "pinching.hk_gap", "pinching.reilly_gap"], rows)
    return out


def _budgets(imm, n, k):
    m = n - k
    q_ = geo.lp_norm(imm, "B_op", m)
    r_ = geo.lp_norm(imm, "B_op", m + 1)
    return q_.integral, r_.integral


def run_neck_sweep(p: dict, seed: int) -> Outcome:
    out = Outcome()
    eps_list = p["eps"]
    fam = p["family"]
    n, k = p["n"], p["k"]
    rows = []
    traj = {"lam1": [], "lam2": [], "Hinf": [], "budget": [], "budget_q": [], "H1": [], "Xinf": [],
            "hk": []}
    for e in eps_list:
        if fam == "dumbbell":
            imm = geo.dumbbell(p["spheres"], e, n)
            k_eff = 0
        else:
            imm = geo.bispherical_immersion(n, k, eps=e, a=p["a"])
            k_eff = k
        hs = geo.hsiung_residual(imm)
        Hinf = geo.lp_norm(imm, "H", math.inf).value
        bud, budq = _budgets(imm, n, k_eff)
        h1 = geo.lp_norm(imm, "absH-c", 1, c=1.0).value
        xinf = geo.lp_norm(imm, "X-c", math.inf, c=1.0).value
        radius, _, _ = geo.extrinsic_radius(imm)
        hk = radius * geo.h2norm(imm)
        entry = {
            "hsiung_residual": q(hs, "hsiung_residual", "geometry"),
            "H_sup": q(Hinf, "sup|H|", "geometry"),
            "B_budget": q(bud, f"int|B|^{n - k_eff}", "geometry"),
            "B_budget_q": q(budq, f"int|B|^{n - k_eff + 1}", "geometry"),
            "absH_minus_1_L1": q(h1, "|| |H|-1 ||_1", "geometry"),
            "absX_minus_1_sup": q(xinf, "|| |X|-1 ||_inf", "geometry"),
            "hk_gap": q(hk, "hk_gap", "pinching"),
            "immersion": imm.to_dict(),
        }
        out.check(f"eps={e}: hsiung residual < {p['hsiung_tol']}", hs < p["hsiung_tol"], repr(hs))
        out.check(f"eps={e}: hk_gap >= 1 - 1e-6", hk >= 1 - 1e-6, repr(hk))
        lam1 = lam2 = float("nan")
        if p["spectra"]:
            spec = spectral.spectrum(imm, lam_max=p["lam_max"], mesh_size=p["mesh"])
            ev = spec.eigenvalues
            lam1, lam2 = float(ev[1]), float(ev[2])
            entry["lambda1"] = q(lam1, "lambda_1", "spectral")
            entry["lambda2"] = q(lam2, "lambda_2", "spectral")
            entry["spectrum"] = spec.to_dict()
        out.results[f"eps={e}"] = entry
        for key, v in zip(traj, (lam1, lam2, Hinf, bud, budq, h1, xinf, hk)):
            traj[key].append(v)
        rows.append([e, lam1, lam2, Hinf, bud, budq, h1, xinf, hk, hs])

    order = np.argsort(eps_list)[::-1]
    seq = {key: [v[i] for i in order] for key, v in traj.items()}
    xs = [eps_list[i] for i in order]

    def decreasing(vals):
        return all(b < a for a, b in zip(vals, vals[1:]))

    if p["spectra"]:
        out.check("lambda_1 decreases as eps decreases", decreasing(seq["lam1"]), repr(seq["lam1"]))
        out.check(f"lambda_1 at smallest eps < {p['lam1_limit']}", seq["lam1"][-1] < p["lam1_limit"],
                  repr(seq["lam1"][-1]))
        lo, hi = p["lam2_window"]
        out.check(f"lambda_2 at smallest eps in [{lo}, {hi}]", lo <= seq["lam2"][-1] <= hi,
                  repr(seq["lam2"][-1]))
    if fam == "bispherical":
        out.check("|| |H|-1 ||_1 strictly decreasing", decreasing(seq["H1"]), repr(seq["H1"]))
        out.check("|| |X|-1 ||_inf strictly decreasing", decreasing(seq["Xinf"]), repr(seq["Xinf"]))
        ratio = max(seq["budget"]) / min(seq["budget"])
        out.check("int|B|^(n-k) max/min over sweep < 3", ratio < 3, repr(ratio))
        hr = max(seq["Hinf"]) / min(seq["Hinf"])
        out.check("sup|H| max/min over sweep < 3", hr < 3, repr(hr))
        grow = seq["budget_q"][-1] / seq["budget_q"][0]
        out.check("int|B|^(n-k+1) grows at least 2x", grow >= 2 and decreasing(seq["budget_q"][::-1]),
                  repr(seq["budget_q"]))
        out.results["budget_ratio"] = q(ratio, "max/min int|B|^(n-k)", "geometry")
        out.results["budget_q_growth"] = q(grow, "growth int|B|^(n-k+1)", "geometry")
    for key, label in [("lam1", "spectral.lambda_1"), ("lam2", "spectral.lambda_2"),
                       ("budget", "geometry.int|B|^(n-k)"), ("budget_q", "geometry.int|B|^(n-k+1)"),
                       ("H1", "geometry.|| |H|-1 ||_1"), ("Hinf", "geometry.sup|H|")]:
        if key.startswith("lam") and not p["spectra"]:
            continue
        out.series[f"{key}_vs_eps"] = ("geometry.eps", label, xs, seq[key])
    out.tables["sweep"] = (["geometry.eps", "spectral.lambda_1", "spectral.lambda_2", "geometry.sup|H|",
                            "geometry.int|B|^(n-k)", "geometry.int|B|^(n-k+1)",
                            "geometry.|| |H|-1 ||_1", "geometry.|| |X|-1 ||_inf", "pinching.hk_gap",
                            "geometry.hsiung_residual"], rows)
    return out


def run_neck_tune(p: dict, seed: int) -> Outcome:
    out = Outcome()
    target = p["target"]
    tuned = spectral.tune_neck(target, spectral.cylinder_family(1.0, p["n"]), tuple(p["cylinder_bracket"]),
                               p["mesh"])
    exact = math.pi / math.sqrt(target)
    out.results["cylinder"] = {
        "L": q(tuned.parameter, "tuned_length", "spectral"),
        "L_exact": q(exact, "pi/sqrt(target)", "spectral"),
        "lambda1D": q(tuned.eigenvalue, "lambda_1^D", "spectral"),
    }
    out.check("cylinder length within 1e-5 of pi/sqrt(target)", abs(tuned.parameter - exact) < 1e-5,
              repr(tuned.parameter - exact))
    rows, gaps = [], []
    for L in sorted(p["L"]):
        a = spectral.added_eigenvalue(p["rho"], L, target, n=p["n"], mesh_size=p["mesh"])
        rows.append([a.rho, a.L, a.bulb, a.dirichlet, a.added, a.gap, a.constant])
        gaps.append(a.gap)
        out.results[f"L={L}"] = {
            "bulb_radius": q(a.bulb, "bulb_radius", "spectral"),
            "added": q(a.added, "added_eigenvalue", "spectral"),
            "gap": q(a.gap, "target - added_eigenvalue", "spectral"),
            "C_M1": q(a.constant, "gap*sqrt(L)/(1+target)", "spectral"),
        }
        out.check(f"L={L}: added eigenvalue <= target", a.added <= target, repr(a.added))
    out.check("gap shrinks monotonically as L grows", all(b < a for a, b in zip(gaps, gaps[1:])),
              repr(gaps))
    out.series["gap_vs_L"] = ("spectral.L", "spectral.gap", sorted(p["L"]), gaps)
    out.tables["added_eigenvalue"] = (["geometry.rho", "spectral.L", "spectral.bulb_radius",
                                       "spectral.lambda_1^D", "spectral.added_eigenvalue",
                                       "spectral.gap", "spectral.C_M1"], rows)
    return out


def run_model_spectrum(p: dict, seed: int) -> Outcome:
    out = Outcome()
    n = p["n"]
    sphere_vals = [k * (n + k - 1) for k in range(40)]
    rows = []
    for d in p["d"]:
        res = spectral.model_metric_spectrum(n, d, lam_max=p["lam_max"], mesh_size=p["mesh"])
        ev = res.eigenvalues
        out.results[f"d={d}"] = {"spectrum": res.to_dict()}
        out.series[f"eigenvalues_d{d}"] = ("spectral.index", "spectral.eigenvalue",
                                           list(range(ev.size)), ev.tolist())
        for i, v in enumerate(ev):
            rows.append([d, i, v])
        if d == 1:
            clusters = res.clustered()
            ok = True
            for k, (val, mult, _) in enumerate(clusters):
                if k >= len(sphere_vals) or sphere_vals[k] > p["lam_max"]:
                    break
                ok &= abs(val - sphere_vals[k]) <= p["rel_tol"] * max(sphere_vals[k], 1.0)
                ok &= mult == multiplicity(n, k)
            out.check("d=1 reproduces the round sphere spectrum", ok)
        else:
            novel = [v for v in ev if min(abs(v - s) for s in sphere_vals) > p["novel_gap"]]
            out.results[f"d={d}"]["novel_count"] = q(len(novel), "eigenvalues off the sphere spectrum",
                                                     "spectral")
            out.check(f"d={d}: at least {p['novel_min']} eigenvalues below {p['lam_max']} away from "
                      "the sphere spectrum", len(novel) >= p["novel_min"], repr(novel[:6]))
    out.tables["model_eigenvalues"] = (["d", "index", "spectral.eigenvalue"], rows)
    return out


def run_identity_audit(p: dict, seed: int) -> Outcome:
    out = Outcome()
    rows = []
    for n in p["dims"]:
        pts, dirs = random_samples(n, p["points"], seed=seed)
        for k in range(p["kmax"] + 1):
            rep = identity_report(build_basis(n, k), pts, dirs, tolerance=p["tolerance"])
            rows.append([n, k] + [rep.as_dict()[key] for key in
                                  ("addition_rel_dev", "gradient_rel_dev", "hessian_rel_dev",
                                   "euler_value_rel_dev", "euler_hessian_rel_dev")])
            out.check(f"harmonic identities n={n} k={k}", rep.ok, repr(rep.max_deviation))
    out.tables["harmonic_identities"] = (["n", "k", "harmonic_poly.addition", "harmonic_poly.gradient",
                                          "harmonic_poly.hessian", "harmonic_poly.euler_value",
                                          "harmonic_poly.euler_hessian"], rows)
    hrows = []
    for label, imm in suite_immersions():
        hs = geo.hsiung_residual(imm)
        hrows.append([label, hs])
        out.results[f"hsiung[{label}]"] = q(hs, "hsiung_residual", "geometry")
        out.check(f"hsiung residual {label} < {p['hsiung_tol']}", hs < p["hsiung_tol"], repr(hs))
    out.tables["hsiung"] = (["immersion", "geometry.hsiung_residual"], hrows)
    return out


def suite_immersions():
    """The fixed list of immersions used for suite-wide invariant checks."""
    out = []
    for n in (2, 3):
        for R in (1.0, 2.0):
            out.append((f"sphere(R={R},n={n})", geo.sphere(R, n)))
    for a in (1.05, 1.3, 2.0):
        out.append((f"spheroid({a},1)", geo.spheroid(a, 1.0)))
    out.append(("spheroid(1,1.5)", geo.spheroid(1.0, 1.5)))
    for e in (0.2, 0.1, 0.05, 0.025):
        out.append((f"dumbbell(2,{e})", geo.dumbbell(2, e)))
    out.append(("dumbbell(3,0.1)", geo.dumbbell(3, 0.1)))
    for n, k in ((2, 0), (3, 0), (3, 1), (4, 2)):
        out.append((f"bispherical(n={n},k={k},eps=0.05)", geo.bispherical_immersion(n, k, eps=0.05)))
    out.append(("sphere_with_tube(0.1,0.5)", geo.sphere_with_tube(0.1, 0.5)))
    return out


# --------------------------------------------------------------------------
# registry


def _in(*options):
    return lambda v: v in options


EXPERIMENTS = {
    "sphere-validate": (
        "round sphere spectrum against k(n+k-1)/R^2 with multiplicities",
        {
            "dims": Param([2], int, lambda v: 2 <= v <= 6, "need 2 <= n <= 6", True),
            "radii": Param([1.0], float, _pos, "radius must be positive", True),
            "mesh": Param(2000, int, lambda v: v >= 64, "mesh must be >= 64"),
            "distinct": Param(4, int, lambda v: 1 <= v <= 8, "need 1..8 distinct eigenvalues"),
            "rel_tol": Param(0.005, float, _pos, "tolerance must be positive"),
        },
        run_sphere_validate,
    ),
    "spheroid-pinch-sweep": (
        "pinching gaps, inequality suite and minimal cluster tau on spheroids (1+delta, 1)",
        {
            "n": Param(2, int, lambda v: 2 <= v <= 6, "need 2 <= n <= 6"),
            "deltas": Param([0.2, 0.1, 0.05, 0.02], float, lambda v: 0 < v < 1,
                            "delta must lie in (0, 1)", True),
            "kmax": Param(3, int, lambda v: 1 <= v <= 5, "need 1 <= kmax <= 5"),
            "tau_grid": Param(list(pinching.DEFAULT_TAU_GRID), float, lambda v: 0 < v < 1,
                              "tau must lie in (0, 1)", True),
            "mesh": Param(2000, int, lambda v: v >= 64, "mesh must be >= 64"),
            "eta": Param(0.1, float, lambda v: 0 < v < 1, "eta must lie in (0, 1)"),
            "branch": Param("p", str, _in("hk", "reilly", "p"), "branch is hk, reilly or p"),
            "p": Param(4.0, float, lambda v: v > 2, "p must exceed 2"),
            "tau_limit": Param(0.05, float, _pos, "tau_limit must be positive"),
        },
        run_spheroid_sweep,
    ),
    "dumbbell-sweep": (
        "neck sweeps: eigenvalue collapse on dumbbells, curvature budgets on two-sheet necks",
        {
            "family": Param("dumbbell", str, _in("dumbbell", "bispherical"),
                            "family is dumbbell or bispherical"),
            "spheres": Param(2, int, lambda v: 1 <= v <= 6, "need 1..6 spheres"),
            "n": Param(2, int, lambda v: 2 <= v <= 6, "need 2 <= n <= 6"),
            "k": Param(0, int, lambda v: v >= 0, "k must be >= 0"),
            "eps": Param([0.2, 0.1, 0.05, 0.025], float, _pos, "eps must be positive", True),
            "a": Param(0.3, float, lambda v: 0 < v < math.pi / 10, "a must lie in (0, pi/10)"),
            "mesh": Param(2000, int, lambda v: v >= 64, "mesh must be >= 64"),
            "spectra": Param(1, int, _in(0, 1), "spectra is 0 or 1"),
            "lam_max": Param(3.0, float, _pos, "lam_max must be positive"),
            "lam1_limit": Param(0.15, float, _pos, "lam1_limit must be positive"),
            "lam2_window": Param([1.6, 2.2], float, _pos, "window entries must be positive", True),
            "hsiung_tol": Param(1e-6, float, _pos, "tolerance must be positive"),
        },
        run_neck_sweep,
    ),
    "neck-tune": (
        "Dirichlet tuning of necks and the eigenvalue they add to the unit sphere",
        {
            "n": Param(2, int, _in(2), "only n = 2 tubes are available"),
            "target": Param(3.0, float, _pos, "target must be positive"),
            "cylinder_bracket": Param([0.5, 10.0], float, _pos, "bracket entries must be positive", True),
            "rho": Param(0.05, float, lambda v: 0 < v < 0.2, "rho must lie in (0, 0.2)"),
            "L": Param([2.5, 5.0, 10.0], float, lambda v: v >= 1, "L must be >= 1", True),
            "mesh": Param(3000, int, lambda v: v >= 64, "mesh must be >= 64"),
        },
        run_neck_tune,
    ),
    "model-spectrum": (
        "spectrum of dr^2 + d^2 sin^2 r g_S1 + cos^2 r g_S(n-2)",
        {
            "n": Param(3, int, lambda v: 3 <= v <= 6, "need 3 <= n <= 6"),
            "d": Param([1, 2], int, lambda v: v >= 1, "d must be >= 1", True),
            "lam_max": Param(12.0, float, _pos, "lam_max must be positive"),
            "mesh": Param(2000, int, lambda v: v >= 64, "mesh must be >= 64"),
            "rel_tol": Param(0.005, float, _pos, "tolerance must be positive"),
            "novel_gap": Param(0.05, float, _pos, "novel_gap must be positive"),
            "novel_min": Param(3, int, lambda v: v >= 0, "novel_min must be >= 0"),
        },
        run_model_spectrum,
    ),
    "identity-audit": (
        "harmonic polynomial identities and the mean-curvature integral identity",
        {
            "dims": Param([2, 3, 4], int, lambda v: 2 <= v <= 6, "need 2 <= n <= 6", True),
            "kmax": Param(5, int, lambda v: 0 <= v <= 6, "need 0 <= kmax <= 6"),
            "points": Param(200, int, lambda v: v >= 1, "points must be >= 1"),
            "tolerance": Param(1e-9, float, _pos, "tolerance must be positive"),
            "hsiung_tol": Param(1e-8, float, _pos, "tolerance must be positive"),
        },
        run_identity_audit,
    ),
}


def _cross_checks(name: str, params: dict):
    if name == "dumbbell-sweep":
        if params["family"] == "bispherical":
            if not 0 <= params["k"] <= params["n"] - 2:
                raise ConfigError("parameters.k: need 0 <= k <= n-2")
            for i, e in enumerate(params["eps"]):
                if not e < params["a"]:
                    raise ConfigError(f"parameters.eps[{i}]: eps must be < a = {params['a']} (got {e})")
        else:
            if params["n"] != 2:
                raise ConfigError("parameters.n: dumbbells are built for n = 2 only")
            for i, e in enumerate(params["eps"]):
                if not e < 0.5:
                    raise ConfigError(f"parameters.eps[{i}]: neck waist must be < 0.5 (got {e})")
        if len(params["lam2_window"]) != 2:
            raise ConfigError("parameters.lam2_window: expected [low, high]")
    if name == "neck-tune" and len(params["cylinder_bracket"]) != 2:
        raise ConfigError("parameters.cylinder_bracket: expected [low, high]")


def validate_config(cfg) -> dict:
    """Normalized config, or ConfigError pointing at the violated precondition."""
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(cfg) - {"experiment", "parameters", "output", "seed", "name"}
    if unknown:
        raise ConfigError(f"{sorted(unknown)[0]}: unknown top-level key")
    name = cfg.get("experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {name!r}; "
                          f"expected one of {sorted(EXPERIMENTS)}")
    params = cfg.get("parameters", {})
    if not isinstance(params, dict):
        raise ConfigError("parameters: expected an object")
    schema = EXPERIMENTS[name][1]
    params = _validate(schema, params)
    _cross_checks(name, params)
    seed = cfg.get("seed", 20240611)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed: expected a non-negative integer")
    output = cfg.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output: expected an object")
    formats = output.get("formats", ["json", "csv", "plot"])
    bad = [f for f in formats if f not in ("json", "csv", "plot")]
    if bad:
        raise ConfigError(f"output.formats: unknown format {bad[0]!r}")
    directory = output.get("directory", cfg.get("name", name))
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory: expected a non-empty string")
    return {"experiment": name, "parameters": params, "seed": seed,
            "output": {"directory": directory, "formats": list(formats)}}


def run_experiment(cfg: dict) -> Outcome:
    norm = validate_config(cfg)
    runner = EXPERIMENTS[norm["experiment"]][2]
    np.random.seed(norm["seed"])
    return runner(norm["parameters"], norm["seed"])
