"""Command line front end: every run is driven by one JSON manifest.

Outputs embed the manifest hash and are written with sorted keys, so
re-running a manifest reproduces byte-identical JSON and CSV.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import multiprocessing
import os
import pickle
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .bicombing import BicombingTable, axiom_suite, frac_str, lambda_constant, on_geodesic_triples, sample_pairs, sample_triples
from .cusped import CuspedSpace, build_cusped, default_depth
from .errors import BudgetExceeded, CuspworkError, InputError
from .grouppair import GroupPair, cayley_ball, enumerate_subgroups

DEFAULTS: dict[str, Any] = {
    "ball_radius": 4,
    "depth": 2,
    "R": 2,
    "R0": 1,
    "rho": 1,
    "margin": 1,
    "max_index": 3,
    "complex": "wedge",
    "budget": 50,
    "subgroup": "H1.0",
    "map": "minimized",
    "local_depth": 2,
    "seeds": {"pairs": 0, "triples": 1, "local": 2},
    "samples": {"pairs": 500, "triples": 500, "local": 200},
}


# --------------------------------------------------------------------------
# manifest
# --------------------------------------------------------------------------


def _read_json(path: Path) -> Any:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


class Manifest:
    def __init__(self, data: dict, base: Path):
        if not isinstance(data, dict):
            raise InputError("manifest must be a JSON object")
        unknown = set(data) - set(DEFAULTS) - {"presentation", "output_dir", "lambda"}
        if unknown:
            raise InputError(f"unknown manifest keys: {sorted(unknown)}")
        cfg = json.loads(json.dumps(DEFAULTS))
        for k, v in data.items():
            if isinstance(v, dict) and isinstance(cfg.get(k), dict):
                cfg[k].update(v)
            else:
                cfg[k] = v
        pres = data.get("presentation")
        if isinstance(pres, str):
            pres = _read_json(base / pres)
        if not isinstance(pres, dict):
            raise InputError("manifest needs a presentation (inline object or file path)")
        cfg["presentation"] = pres
        if cfg["depth"] is None:
            cfg["depth"] = default_depth(cfg["ball_radius"])
        self.pair = GroupPair.from_json(pres)
        self.cfg = cfg
        self.output_dir = base / data.get("output_dir", "out")

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        p = Path(path)
        return cls(_read_json(p), p.parent)

    def __getitem__(self, key):
        return self.cfg[key]

    @property
    def canonical(self) -> dict:
        return {"tool_version": __version__, **self.cfg}

    @property
    def hash(self) -> str:
        blob = json.dumps(self.canonical, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def lam(self) -> Fraction | None:
        v = self.cfg.get("lambda")
        return None if v is None else Fraction(str(v))


def _dump(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    with p.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return p


def _stamp(m: Manifest, command: str, body: dict) -> dict:
    return {"command": command, "manifest_sha256": m.hash, "tool_version": __version__, **body}


# --------------------------------------------------------------------------
# cached builders
# --------------------------------------------------------------------------


def build_space(m: Manifest) -> CuspedSpace:
    key = hashlib.sha256(
        json.dumps([__version__, m["presentation"], m["ball_radius"], m["depth"]], sort_keys=True).encode()
    ).hexdigest()
    cache = os.environ.get("CUSPWORK_CACHE_DIR")
    if cache:
        path = Path(cache) / f"cusped-{key}.pkl"
        if path.exists():
            with path.open("rb") as fh:
                return pickle.load(fh)
    cusp = build_cusped(cayley_ball(m.pair, m["ball_radius"]), None, m["depth"])
    if cache:
        Path(cache).mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        with tmp.open("wb") as fh:
            pickle.dump(cusp, fh)
        tmp.replace(path)
    return cusp


def _interior(cusp: CuspedSpace, margin: int) -> list[int]:
    return [v for v in range(cusp.n) if cusp.base_length(v) <= cusp.ball.radius - margin]


def local_constants(cusp: CuspedSpace, table: BicombingTable, m: Manifest):
    """On-geodesic triples and lambda at the manifest's rho."""
    pairs = sample_pairs(_interior(cusp, m["margin"]), m["samples"]["local"], m["seeds"]["local"])
    triples = on_geodesic_triples(table, pairs, cusp.depth, m["local_depth"], 1, m["seeds"]["local"])
    return triples, lambda_constant(table, triples, m["rho"])


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_build_cusped(m: Manifest, out: Path, args) -> int:
    cusp = build_space(m)
    body = {
        "ball_radius": m["ball_radius"],
        "depth": m["depth"],
        "vertices": cusp.n,
        "edges": len(cusp.graph.edges),
        "horoballs": len(cusp.horoballs),
        "approximate_horoballs": cusp.approximate,
        "census": cusp.census(),
    }
    _write(out, "census.json", _dump(_stamp(m, "build-cusped", body)))
    _write(out, "cusped.dot", cusp.to_dot())
    print(f"build-cusped: {cusp.n} vertices, {len(cusp.graph.edges)} edges -> {out}")
    return 0


def cmd_check_bicombing(m: Manifest, out: Path, args) -> int:
    cusp = build_space(m)
    table = BicombingTable(cusp.graph)
    inner = _interior(cusp, m["margin"])
    pairs = sample_pairs(inner, m["samples"]["pairs"], m["seeds"]["pairs"])
    triples = sample_triples(inner, m["samples"]["triples"], m["seeds"]["triples"])
    local, _ = local_constants(cusp, table, m)
    gens = [(i,) for i in range(1, m.pair.group.rank + 1)]
    trs = [lambda v, g=g: cusp.translate(g, v) for g in gens]
    res = axiom_suite(table, pairs, triples, local, trs, rho=m["rho"])
    _write(out, "constants.json", _dump(_stamp(m, "check-bicombing", res.to_json())))
    k = res.constants
    print(f"check-bicombing: defect {frac_str(k.delta_defect)}, lambda {frac_str(k.lam)} at rho {k.rho}")
    return 0


def _resolution_for(m: Manifest, ctx=None):
    from .resolution import (CuspContext, cover_complex, initial_map, minimize_displacement,
                             presentation_complex, resolve, scrambled_map)

    if ctx is None:
        ctx = CuspContext(build_space(m))
    subs = {H.label: H for H in enumerate_subgroups(m.pair, max(1, int(m["subgroup"][1:].split(".")[0])))}
    H = subs.get(m["subgroup"])
    if H is None:
        raise InputError(f"unknown subgroup label {m['subgroup']!r}")
    qc = cover_complex(presentation_complex(m.pair, m["complex"]), H, m.pair.group)
    choice = m["map"]
    phi = initial_map(qc, m.pair.group)
    cert = None
    if choice == "minimized":
        mres = minimize_displacement(qc.complex, phi, ctx, m["budget"])
        phi, cert = mres.phi, mres.certificate
    elif isinstance(choice, dict) and "scrambled" in choice:
        phi = scrambled_map(qc, ctx, 1, int(choice["scrambled"]))
    elif choice != "initial":
        raise InputError(f"unknown map choice {choice!r}")
    return resolve(qc, phi, ctx, m["margin"]), cert


def cmd_resolve(m: Manifest, out: Path, args) -> int:
    from .patterns import weight_total
    from .resolution import check_resolution, coverage_radius, resolution_spread, track_checks

    res, cert = _resolution_for(m)
    spread = resolution_spread(res)
    rep = check_resolution(res, spread)
    tr = track_checks(res)
    body = {
        "subgroup": m["subgroup"],
        "complex": m["complex"],
        "volume": res.qc.volume,
        "local_minimum_certificate": cert,
        "connectors": len(res.pattern.connectors),
        "segments": len(res.pattern.segments),
        "checks": {"R1": "pass", "R4": "pass", "R5": "pass", "T1": "pass", "T2": "pass",
                   "R3": "pass" if not rep.r3_violations else "fail"},
        "r3_tolerance": spread,
        "r3_violations": len(rep.r3_violations),
        "tracks": tr.tracks,
        "t4": tr.t4,
        "t4_pairs": tr.t4_pairs,
        "weight": frac_str(weight_total(res.pattern)),
        "weight_by_depth": {str(R): frac_str(weight_total(res.filtered(R))) for R in range(res.ctx.cusp.max_depth + 1)},
        "coverage_R": coverage_radius(res, m["margin"]),
    }
    _write(out, "resolution.json", _dump(_stamp(m, "resolve", body)))
    _write(out, "pattern.json", _dump(res.pattern.to_json()))
    print(f"resolve: {m['subgroup']} weight {body['weight']} tracks {tr.tracks} -> {out}")
    return 0 if not rep.r3_violations else 1


def cmd_reduce(args) -> int:
    from .patterns import Pattern, defect_total, perfect_reduce, weight_total

    data = _read_json(Path(args.pattern))
    p = Pattern.from_json(data)
    red = perfect_reduce(p)
    body = {
        "command": "reduce",
        "tool_version": __version__,
        "input_sha256": hashlib.sha256(Path(args.pattern).read_bytes()).hexdigest(),
        "weight_before": frac_str(red.weight_before),
        "weight_after": frac_str(red.weight_after),
        "defect_before": frac_str(red.defect_before),
        "defect_after": frac_str(defect_total(red.pattern)),
        "weight_check": frac_str(weight_total(red.pattern)),
        "pattern": red.pattern.to_json(),
    }
    out = Path(args.out) if args.out else Path(args.pattern).with_name("reduced.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(_dump(body), encoding="utf-8")
    print(f"reduce: weight {body['weight_before']} -> {body['weight_after']}, defect {body['defect_before']} -> 0")
    return 0


_WORKER: dict = {}


def _worker_init(manifest_cfg, lam):
    from .resolution import CuspContext

    m = Manifest({k: v for k, v in manifest_cfg.items()}, Path("."))
    _WORKER.update(m=m, ctx=CuspContext(build_space(m)), lam=lam)


def _worker_row(H):
    from .resolution import survey_row

    return survey_row(_WORKER["m"].pair, H, _WORKER["ctx"], _survey_config(_WORKER["m"], _WORKER["lam"]))


def _survey_config(m: Manifest, lam):
    from .resolution import SurveyConfig

    return SurveyConfig(m["ball_radius"], m["depth"], m["R"], m["R0"], m["rho"], lam, m["margin"],
                        m["complex"], m["max_index"], m["budget"])


def cmd_survey(m: Manifest, out: Path, args) -> int:
    from .resolution import CuspContext, SurveyRow, summarize, survey_row

    try:
        subs = enumerate_subgroups(m.pair, m["max_index"])
    except BudgetExceeded as exc:
        subs = list(exc.completed or [])
    lam = m.lam()
    ctx = None
    if lam is None:
        ctx = CuspContext(build_space(m))
        _, lam = local_constants(ctx.cusp, ctx.table, m)
    if args.jobs > 1 and len(subs) > 1:
        cfg = dict(m.cfg)
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            mp_context=multiprocessing.get_context("spawn"),  # numba's OpenMP layer is not fork-safe
            initializer=_worker_init,
            initargs=(cfg, lam),
        ) as pool:
            rows = list(pool.map(_worker_row, subs))
    else:
        ctx = ctx or CuspContext(build_space(m))
        conf = _survey_config(m, lam)
        rows = [survey_row(m.pair, H, ctx, conf) for H in subs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SurveyRow.CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_row())
    summ = summarize(rows)
    body = {
        "rows": summ.rows,
        "lambda": frac_str(lam),
        "min_w_over_index": frac_str(summ.min_w_over_index),
        "max_w_over_index": frac_str(summ.max_w_over_index),
        "band_ratio": frac_str(summ.band_ratio),
        "vol_over_index_constant": summ.vol_over_index_constant,
        "errors": summ.errors,
        "lower_bound_ok": all(r.lower_bound is None or r.lower_bound <= r.w_leq_R for r in rows),
    }
    _write(out, "survey.csv", buf.getvalue())
    _write(out, "survey_summary.json", _dump(_stamp(m, "survey", body)))
    print(f"survey: {summ.rows} rows, band {body['band_ratio']}, errors {summ.errors} -> {out}")
    return 0


REPORT_SKIP = {"report.json"}


def cmd_report(m: Manifest, out: Path, args) -> int:
    files = []
    stale = []
    for p in sorted(out.glob("*")):
        if p.name in REPORT_SKIP or p.suffix not in {".json", ".csv"}:
            continue
        entry = {"file": p.name, "sha256": hashlib.sha256(p.read_bytes()).hexdigest()}
        if p.suffix == ".json":
            data = _read_json(p)
            h = data.get("manifest_sha256") if isinstance(data, dict) else None
            if h is not None and h != m.hash:
                stale.append(p.name)
            entry["command"] = data.get("command") if isinstance(data, dict) else None
        files.append(entry)
    body = {"files": files, "stale": stale}
    _write(out, "report.json", _dump(_stamp(m, "report", body)))
    for f in files:
        print(f"{f['file']}: {f['sha256'][:16]}")
    if stale:
        print(f"stale outputs (different manifest): {', '.join(stale)}")
        return 1
    return 0


COMMANDS = {
    "build-cusped": cmd_build_cusped,
    "check-bicombing": cmd_check_bicombing,
    "resolve": cmd_resolve,
    "survey": cmd_survey,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cuspwork", description="Cusped spaces, bicombings and pattern surveys.")
    parser.add_argument("--version", action="version", version=f"cuspwork {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("manifest", help="run manifest (JSON)")
        sp.add_argument("--out", help="output directory (default: manifest output_dir)")
        if name == "survey":
            sp.add_argument("--jobs", type=int, default=1, help="worker processes for survey rows")
    rp = sub.add_parser("reduce")
    rp.add_argument("pattern", help="pattern JSON")
    rp.add_argument("--out", help="output file (default: reduced.json next to the input)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reduce":
            return cmd_reduce(args)
        m = Manifest.load(args.manifest)
        out = Path(args.out) if args.out else m.output_dir
        return COMMANDS[args.command](m, out, args)
    except CuspworkError as exc:
        print(f"cuspwork {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
