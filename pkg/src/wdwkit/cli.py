"""Command-line entry point: per-module subcommands plus the scenario runner."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime as _dt
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from . import ccr
from . import checks as ck
from . import clifford as cl
from . import geometry as geo
from . import grassmann as gr
from . import hamiltonian as ham
from . import hyperbolic as hyp
from . import localnets as ln

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    """Invalid or missing configuration (exit code 2)."""


def _emit(obj) -> None:
    print(json.dumps(ck.jsonable(obj), indent=2, sort_keys=True))


def _load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def bundled(name: str) -> Path:
    """Path of a file shipped in the scenarios package directory."""
    return Path(str(resources.files("wdwkit") / "scenarios" / name))


def _resolve(path: str) -> Path:
    p = Path(path)
    if not p.exists() and not p.is_absolute() and bundled(path).exists():
        return bundled(path)
    return p


def _gauge(name):
    if name in (None, "none", "trivial"):
        return geo.trivial_gauge(1)
    if name == "su2":
        return geo.su2()
    raise ConfigError(f"unknown gauge group {name!r}")


# --------------------------------------------------------------------------
# module subcommands


def cmd_clifford(args) -> int:
    try:
        rep = cl.build_gamma(args.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    issues = cl.check_clifford(rep)
    out = {**rep.to_json(), "issues": issues}
    if args.dump:
        cl.dump(rep, args.dump)
    _emit(out)
    return EXIT_OK if not issues else EXIT_FAIL


def cmd_grassmann_car(args) -> int:
    try:
        gens = gr.GeneratorSet.spinor(args.n1, args.n2, sites=args.sites)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rep = gr.car_check(gens)
    _emit(rep)
    return EXIT_OK if all(r["status"] == "pass" for r in rep) else EXIT_FAIL


def cmd_geometry_signature(args) -> int:
    cfg = _load_json(args.config)
    try:
        metric = geo.SpatialMetric.from_json(args.config)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad metric config: {exc}") from exc
    ym = _gauge(cfg.get("gauge", "su2"))
    alpha = float(cfg.get("alphaN", 1.0))
    n = metric.n
    rho = np.asarray(cfg.get("rho", np.eye(n)), dtype=float).reshape(n, n)
    pts = metric.g.reshape(-1, n, n)
    rows, ok = [], True
    for i, g in enumerate(pts):
        dw = geo.dewitt(g).signature()
        fm = geo.fiber_metric(g, rho, ym, alphaN=alpha, check=False)
        fs = fm.signature()
        good = dw[0] == 1 and dw[1] == 0 and fs[0] == 1 and fs[1] == 0
        ok &= good
        rows.append({"index": i, "dewitt": list(dw), "fiber": list(fs), "phi": fm.phi, "lorentzian": good})
    _emit({"n": n, "points": rows, "all_lorentzian": ok})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_hamiltonian_check(args) -> int:
    cfg = _load_json(args.config) if args.config else {}
    rng = np.random.default_rng(int(cfg.get("seed", 0)))
    tol = float(cfg.get("tolerance", 1e-7))
    ns = cfg.get("ns", [2, 3])
    states = int(cfg.get("states", 50))
    alpha = float(cfg.get("alphaN", 1.0))
    sectors = ["gravity", "ym", "higgs", "dirac"] if args.sector == "all" else [args.sector]
    ym = geo.su2()
    out = []
    for sector in sectors:
        if sector == "dirac":
            sites = int(cfg.get("sites", 2))
            m = float(cfg.get("m", 0.7))
            A = geo.su2().with_connection(rng.normal(size=(sites, 3, 1)))
            d = ham.h_dirac(sites, 0.4, cl.build_gamma(1), None, A, m, periodic=False)
            herm = float(np.abs(d.one_particle - d.one_particle.conj().T).max())
            fock = d.self_adjoint_residual()
            spec = ham.mass_spectrum(cl.build_gamma(1), m)
            mass = float(np.abs(np.sort(np.abs(spec)) - m).max())
            out += [{"sector": "dirac", "check": "one-particle Hermitian", "residual": herm, "pass": herm <= 1e-10},
                    {"sector": "dirac", "check": "Fock self-adjoint", "residual": fock,
                     "pass": fock <= 1e-10 and d.exact_self_adjoint()},
                    {"sector": "dirac", "check": "mass spectrum +-m", "residual": mass, "pass": mass <= 1e-10}]
            continue
        worst = 0.0
        for n in ns:
            for _ in range(states):
                p = ham.random_point(rng, int(n), ym)
                dim = {"gravity": n * (n + 1) // 2, "ym": ym.n0 * n, "higgs": 2 * ym.n0}[sector]
                worst = max(worst, ham.sector_roundtrip(sector, p, rng.normal(size=dim), alphaN=alpha))
        out.append({"sector": sector, "check": "Legendre round trip", "residual": worst, "pass": worst <= tol})
    _emit(out)
    return EXIT_OK if all(r["pass"] for r in out) else EXIT_FAIL


def _lattice(path) -> hyp.LatticeFiber:
    cfg = _load_json(path)
    try:
        if "h" in cfg and "Nt" not in cfg:
            return hyp.LatticeFiber.flat(float(cfg["h"]), T=float(cfg.get("T", 2.0)), L=float(cfg.get("L", 2.0)),
                                         c=float(cfg.get("c", 0.0)), courant=float(cfg.get("courant", 1.0)),
                                         fiber_dim=int(cfg.get("fiber_dim", 1)))
        return hyp.LatticeFiber.from_config(cfg)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad lattice config {path}: {exc}") from exc


def write_field_csv(path, lat: hyp.LatticeFiber, u) -> None:
    u = hyp.as_field(lat, u)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x"] + [f"u{k}" for k in range(u.shape[2])])
        for n in range(lat.Nt):
            for j in range(lat.Nx):
                w.writerow([f"{lat.t[n]:.12g}", f"{lat.x[j]:.12g}"] + [f"{v:.17g}" for v in u[n, j]])


def _default_source(lat: hyp.LatticeFiber, spec: dict | None):
    T = (lat.Nt - 1) * lat.ht
    spec = spec or {"t0": T / 2, "x0": lat.length / 2, "rt": T / 5, "rx": lat.length / 5}
    return hyp.bump(lat, spec["t0"], spec["x0"], spec["rt"], spec["rx"])


def cmd_hyperbolic_green(args) -> int:
    lat = _lattice(args.config)
    if args.fibers is not None and args.fibers != lat.fiber_dim:
        lat = dataclasses.replace(lat, fiber_dim=args.fibers)
    cfg = _load_json(args.config)
    u = _default_source(lat, cfg.get("source"))
    try:
        Gu = hyp.green_apply(lat, u, args.mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = {"mode": args.mode, "Nt": lat.Nt, "Nx": lat.Nx, "ht": lat.ht, "hx": lat.hx,
           "courant": lat.courant, "max_abs": float(np.abs(Gu).max())}
    box = hyp.support_box(u)
    jp, jm = hyp.causal_sets(lat, box, halo=2)
    cone = {"retarded": jp, "advanced": jm, "pauli_jordan": jp | jm}[args.mode]
    out["support_violation"] = float(np.abs(Gu[~cone]).max() / max(np.abs(Gu).max(), 1e-300)) if (~cone).any() else 0.0
    if args.mode != "pauli_jordan":
        r = hyp.apply_H(lat, Gu) - hyp.as_field(lat, u)
        out["discrete_residual"] = float(np.abs(r[1:-1]).max() / np.abs(u).max())
        if not (np.ptp(lat.a) or np.ptp(lat.b) or np.ptp(lat.c)):
            out["fourth_order_residual"] = hyp.green_residual(lat, u, args.mode)
    out["pass"] = out["support_violation"] <= 1e-12 and out.get("discrete_residual", 0.0) <= 1e-10
    if args.csv:
        write_field_csv(args.csv, lat, Gu)
        out["csv"] = str(args.csv)
    _emit(out)
    return EXIT_OK if out["pass"] else EXIT_FAIL


def _trig(lat, spec):
    return hyp.trig_field(lat, spec["t0"], spec["rt"], int(spec["k"]), spec.get("kind", "cos"))


def cmd_ccr_check(args) -> int:
    cfg = _load_json(args.config)
    try:
        hs = [float(h) for h in cfg.get("resolutions", ck.REFINE)]
        N_max = int(cfg.get("N_max", 6))
        kmax = int(cfg.get("kmax", 4))
        pairs = cfg["pairs"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad ccr config: {exc}") from exc
    fock = ccr.FockSpace(2 * kmax, N_max)
    results = {p["id"]: {"residuals": [], "errors": []} for p in pairs}
    last = {}
    for h in hs:
        lat = hyp.LatticeFiber.flat(h)
        row = (lat.Nt - 1) // 2
        space = ccr.OneParticleSpace.trig(lat, row, kmax=kmax)
        for p in pairs:
            u, v = _trig(lat, p["u"]), _trig(lat, p["v"])
            r = ccr.ccr_commutator_check(lat, space, fock, u, v)
            ex = hyp.trig_omega_exact(lat, p["u"], p["v"])
            results[p["id"]]["residuals"].append(r["residual"])
            results[p["id"]]["errors"].append(abs(r["commutator_scalar"] - ex))
            last[p["id"]] = r
    out = []
    for p in pairs:
        res = results[p["id"]]
        order = min(ck._order(res["residuals"], hs), ck._order(res["errors"], hs, scale=1e-3))
        r = last[p["id"]]
        out.append({"pair_id": p["id"], "omega": r["omega"], "commutator_scalar": r["commutator_scalar"],
                    "residual": r["residual"], "continuum_errors": res["errors"],
                    "order_estimate": order if len(hs) > 1 else None,
                    "pass": r["residual"] <= 1e-9 and (len(hs) < 2 or order >= 1.8)})
    _emit(out)
    return EXIT_OK if all(r["pass"] for r in out) else EXIT_FAIL


def run_haag_kastler(cfg: dict) -> dict:
    """Evaluate the axiom checks described by a Haag-Kastler scenario dict."""
    lat_cfg = cfg.get("lattice", {"h": 1 / 64})
    lat = hyp.LatticeFiber.flat(float(lat_cfg.get("h", 1 / 64)), T=float(lat_cfg.get("T", 2.0)),
                                L=float(lat_cfg.get("L", 2.0)))
    row = int(cfg.get("rows", {}).get("cauchy", (lat.Nt - 1) // 2))
    regions = {k: ln.Region.from_spec(v) for k, v in cfg.get("regions", {}).items()}
    tol = float(cfg.get("tolerance", 1e-6))
    dcfg = cfg.get("dictionary", {"kind": "bumps"})
    if dcfg.get("kind", "bumps") != "bumps":
        raise ConfigError("only the 'bumps' dictionary is supported for region scenarios")
    dictionary = ln.Dictionary()
    for name, reg in regions.items():
        dictionary = dictionary + ln.Dictionary.bumps(lat, reg, per_axis=tuple(dcfg.get("per_axis", (4, 4))),
                                                      prefix=f"{name}.", row=row,
                                                      target_norm=dcfg.get("target_norm", ln.DEFAULT_FIELD_NORM))

    def region(name):
        if name not in regions:
            raise ConfigError(f"unknown region {name!r}")
        return regions[name]

    report = {"lattice": {"Nt": lat.Nt, "Nx": lat.Nx, "h": lat.hx}, "row": row}
    iso = [{"pair": [a, b], **ln.axiom1_isotony_check(lat, region(a), region(b), dictionary)}
           for a, b in cfg.get("isotony", [])]
    report["isotony"] = {"cases": iso, "pass": all(c["pass"] for c in iso)}
    cau = []
    for a, b in cfg.get("causality", []):
        r = ln.axiom3_causality_check(lat, region(a), region(b), dictionary, row=row, tol=tol)
        cau.append({"pair": [a, b], **r})
    ctrl = []
    for a, b in cfg.get("causality_controls", []):
        r = ln.axiom3_causality_check(lat, region(a), region(b), dictionary, row=row, tol=tol,
                                      require_spacelike=False, weyl=False)
        ctrl.append({"pair": [a, b], "max_abs_omega": r["max_abs_omega"],
                     "violation_detected": r["max_abs_omega"] > 10 * tol})
    report["causality"] = {"cases": cau, "controls": ctrl,
                           "pass": all(c["pass"] for c in cau) and all(c["violation_detected"] for c in ctrl)}
    sc = []
    for case in cfg.get("second_causality", []):
        f = case["field"]
        u = hyp.bump(lat, f["t0"], f["x0"], f["rt"], f["rx"])
        r = ln.axiom4_second_causality_check(lat, region(case["dependent"]), region(case["source"]), row, u)
        r.pop("v")
        r["pass"] = r["residual_future"] <= 1e-3 and r["support_ok"]
        sc.append({"dependent": case["dependent"], "source": case["source"], **r})
    report["second_causality"] = {"cases": sc, "pass": all(c["pass"] for c in sc)}
    if "primitivity" in cfg:
        pcfg = cfg["primitivity"]
        space = ccr.OneParticleSpace.trig(lat, row, kmax=int(pcfg.get("kmax", 4)))
        r = ln.axiom2_primitivity_surrogate(lat, space, ln.Dictionary.trig(lat, kmax=int(pcfg.get("kmax", 4))),
                                            N_max=int(pcfg.get("N_max", 6)))
        report["primitivity"] = {**r, "pass": r["trivial"]}
    report["pass"] = all(v["pass"] for v in report.values() if isinstance(v, dict) and "pass" in v)
    return report


def cmd_haag_kastler(args) -> int:
    cfg = _load_json(args.scenario)
    try:
        report = run_haag_kastler(cfg)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad Haag-Kastler scenario: {exc}") from exc
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_FAIL


# --------------------------------------------------------------------------
# scenario runner


def load_scenario(path) -> tuple[dict, Path]:
    path = _resolve(path)
    scenario = _load_json(path)
    schema = json.loads(bundled("scenario.schema.json").read_text())
    try:
        jsonschema.validate(scenario, schema)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"{path}: schema violation at {list(exc.absolute_path)}: {exc.message}") from exc
    ids = scenario_checks(scenario)
    for key in ("parameters", "tolerances", "min_orders"):
        for cid in scenario.get(key, {}):
            if cid != "*" and cid not in ck.REGISTRY:
                raise ConfigError(f"{key} refers to unknown check {cid!r}")
    for cid, params in scenario.get("parameters", {}).items():
        unknown = set(params) - set(ck.REGISTRY[cid].defaults)
        if unknown:
            raise ConfigError(f"{cid}: unknown parameters {sorted(unknown)}")
    for dump in scenario.get("field_dumps", []):
        lp = path.parent / dump["lattice"]
        if not lp.exists():
            raise ConfigError(f"field dump {dump['name']!r}: lattice file {lp} not found")
    if not ids:
        raise ConfigError("scenario selects no checks")
    return scenario, path


def scenario_checks(scenario: dict) -> list[str]:
    """Check ids in declared order: explicit list, else registry order filtered by module."""
    if "checks" in scenario:
        unknown = [c for c in scenario["checks"] if c not in ck.REGISTRY]
        if unknown:
            raise ConfigError(f"unknown check ids {unknown}")
        return list(scenario["checks"])
    modules = scenario.get("modules")
    ordered = sorted(ck.REGISTRY, key=lambda c: c)
    if modules is None:
        return ordered
    return [c for m in modules for c in ordered if ck.REGISTRY[c].module == m]


def _task(scenario: dict, cid: str) -> tuple[dict, float]:
    seed = int(scenario.get("seed", 0))
    tol = scenario.get("tolerances", {})
    mo = scenario.get("min_orders", {})
    t0 = time.perf_counter()
    try:
        rec = ck.run_check(cid, seed=seed, params=scenario.get("parameters", {}).get(cid),
                           tolerance=tol.get(cid, tol.get("*")), min_order=mo.get(cid, mo.get("*")))
    except Exception as exc:  # surfaced in the report with the failing check id
        c = ck.REGISTRY[cid]
        rec = {"id": cid, "relation": c.relation, "module": c.module, "pass": False,
               "error": f"{type(exc).__name__}: {exc}"}
    return rec, time.perf_counter() - t0


def run_scenario(scenario: dict, parallel: bool = False, workers: int | None = None) -> dict:
    ids = scenario_checks(scenario)
    if parallel and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=workers or min(len(ids), os.cpu_count() or 1)) as ex:
            results = list(ex.map(_task, [scenario] * len(ids), ids))
    else:
        results = [_task(scenario, cid) for cid in ids]
    records = [r for r, _ in results]
    npass = sum(r["pass"] for r in records)
    body = {"toolkit": "wdwkit", "version": __version__, "scenario": scenario["name"],
            "seed": int(scenario.get("seed", 0)), "records": records,
            "summary": {"checks": len(records), "passed": npass, "failed": len(records) - npass,
                        "pass": npass == len(records)}}
    meta = {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "runtime_s": round(sum(t for _, t in results), 3),
            "check_runtime_s": {cid: round(t, 3) for cid, (_, t) in zip(ids, results)},
            "parallel": bool(parallel)}
    return {"body": body, "meta": meta}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3g}"
    return "" if v is None else str(v)


def markdown_summary(report: dict) -> str:
    body = report["body"]
    s = body["summary"]
    lines = [f"# Scenario `{body['scenario']}`", "",
             f"{s['passed']}/{s['checks']} checks passed (seed {body['seed']}, wdwkit {body['version']}).", "",
             "| check | measured | tolerance | order | min order | result |",
             "|---|---|---|---|---|---|"]
    for r in body["records"]:
        if "error" in r:
            lines.append(f"| `{r['id']}` | error: {r['error']} | | | | FAIL |")
            continue
        lines.append(f"| `{r['id']}` | {_fmt(r['measured'])} | {_fmt(r['tolerance'])} | "
                     f"{_fmt(r['order_estimate'])} | {_fmt(r['min_order'])} | {'pass' if r['pass'] else 'FAIL'} |")
    lines += ["", f"Generated {report['meta']['timestamp']}, runtime {report['meta']['runtime_s']} s.", ""]
    return "\n".join(lines)


def _dump_fields(scenario: dict, base: Path, out: Path) -> list[str]:
    written = []
    for d in scenario.get("field_dumps", []):
        lat = _lattice(base / d["lattice"])
        u = _default_source(lat, d.get("source"))
        path = out / f"{d['name']}.csv"
        write_field_csv(path, lat, hyp.green_apply(lat, u, d.get("mode", "retarded")))
        written.append(str(path))
    return written


def cmd_run(args) -> int:
    scenario, path = load_scenario(args.scenario)
    report = run_scenario(scenario, parallel=args.parallel, workers=args.workers)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report["meta"]["field_dumps"] = _dump_fields(scenario, path.parent, out)
        (out / "report.json").write_text(json.dumps(ck.jsonable(report), indent=2, sort_keys=True) + "\n")
        (out / "summary.md").write_text(markdown_summary(report))
        print(markdown_summary(report))
    else:
        _emit(report)
    return EXIT_OK if report["body"]["summary"]["pass"] else EXIT_FAIL


def cmd_list_checks(args) -> int:
    cat = ck.catalog()
    if args.json:
        _emit(cat)
    else:
        for c in cat:
            print(f"{c['id']:45s} {c['relation']}")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wdwkit", description=__doc__)
    p.add_argument("--version", action="version", version=f"wdwkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("clifford", help="build and verify gamma matrices")
    s.add_argument("--n", type=int, required=True, help="spatial dimension")
    s.add_argument("--dump", help="write the matrices as JSON to this path")
    s.set_defaults(func=cmd_clifford)

    s = sub.add_parser("grassmann", help="Grassmann algebra checks")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("car-check", help="exact CAR verification")
    c.add_argument("--n1", type=int, required=True)
    c.add_argument("--n2", type=int, required=True)
    c.add_argument("--sites", type=int, default=1)
    c.set_defaults(func=cmd_grassmann_car)

    s = sub.add_parser("geometry", help="DeWitt and fiber metric signatures")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("signature")
    c.add_argument("--config", required=True, help="grid metric JSON {n, h, points}")
    c.set_defaults(func=cmd_geometry_signature)

    s = sub.add_parser("hamiltonian", help="Hamiltonian sector checks")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("check")
    c.add_argument("--sector", choices=["gravity", "ym", "higgs", "dirac", "all"], default="all")
    c.add_argument("--config")
    c.set_defaults(func=cmd_hamiltonian_check)

    s = sub.add_parser("hyperbolic", help="lattice Green operators")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("green")
    c.add_argument("--mode", choices=["retarded", "advanced", "pauli_jordan"], default="retarded")
    c.add_argument("--config", required=True, help="lattice JSON")
    c.add_argument("--csv", help="dump the response field as CSV (t, x, components)")
    c.add_argument("--fibers", type=int, help="independent fiber components per lattice point")
    c.set_defaults(func=cmd_hyperbolic_green)

    s = sub.add_parser("ccr", help="CCR commutator checks")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("check")
    c.add_argument("--config", required=True)
    c.set_defaults(func=cmd_ccr_check)

    s = sub.add_parser("haag-kastler", help="local-net axiom checks")
    gsub = s.add_subparsers(dest="action", required=True)
    c = gsub.add_parser("run")
    c.add_argument("--scenario", required=True)
    c.set_defaults(func=cmd_haag_kastler)

    s = sub.add_parser("run", help="run a scenario of registered checks")
    s.add_argument("scenario", help="scenario JSON (bundled names such as full-suite.json are found)")
    s.add_argument("--parallel", action="store_true")
    s.add_argument("--workers", type=int)
    s.add_argument("--out", help="directory for report.json, summary.md and field dumps")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("list-checks", help="catalog of check ids")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_list_checks)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
