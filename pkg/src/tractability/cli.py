"""Command-line front end.

Usage::

    tractability <command> CONFIG [--d-max N] [--budget N] [--tail-tol X]
                 [--jobs N] [--format json|csv|text] [--seed N] [--output PATH]

The exit code reports operational status only (0 ok, 2 config error,
3 budget exceeded); mathematical verdicts live in the payload.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from .complexity import complexity_curve
from .conditions import check_equivalence_prop1, evaluate
from .config import (
    COMMANDS,
    FORMATS,
    RunConfig,
    flatten_rows,
    load_config_file,
    parse_h,
    parse_spectrum,
    parse_tfun,
    to_jsonable,
)
from .errors import BracketInvalid, BudgetExceeded, ConfigError, InvalidSpec, SpectrumError
from .families import curated_families, get_curated
from .search import bisect_scalar_p, pareto_pq
from .tfun import TFUN_FAMILIES, validate_h, validate_tfun

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3


def cmd_complexity(cfg: RunConfig):
    eps = cfg.get("eps")
    if eps is None:
        raise ConfigError("complexity needs an 'eps' list")
    if isinstance(eps, dict):
        rng = np.random.default_rng(cfg.seed)
        n = int(eps.get("sample", 10))
        lo, hi = np.log10(float(eps["low"])), np.log10(float(eps["high"]))
        eps = sorted((10 ** rng.uniform(lo, hi, n)).tolist(), reverse=True)
    fam = cfg.spectrum()
    cap = int(cfg.get("cap", 10**7))
    rows = []
    for d in (cfg.get("dims") or [1]):
        for e, n in complexity_curve(fam(int(d)), [float(x) for x in eps], cap):
            rows.append({"d": int(d), "eps": e, "n": n})
    return {"rows": rows}


def cmd_check(cfg: RunConfig):
    cs = cfg.condition()
    v = evaluate(cs)
    return v.to_dict()


def cmd_search(cfg: RunConfig):
    s = dict(cfg.get("search") or {})
    kind = s.get("kind", "bisect")
    fam = cfg.spectrum()
    tf = cfg.tfun()
    common = dict(budget=int(cfg.get("budget", 10**6)), d_range=cfg.d_range(),
                  tail_tol=float(cfg.get("tail_tol", 1e-6)), jobs=int(cfg.get("jobs", 1)))
    condition = s.get("condition", "strong" if kind == "bisect" else "tract")
    if kind == "bisect":
        if "p_range" not in s:
            raise ConfigError("bisect search needs 'p_range'")
        r = bisect_scalar_p(fam, tf, condition, tuple(s["p_range"]), float(s.get("tol", 0.02)),
                            component=int(s.get("component", 0)), **common)
    elif kind == "pareto":
        r = pareto_pq(fam, tf, condition, tuple(s.get("p_grid", (0.5, 1.0, 2.0))),
                      tuple(s.get("q_grid", (0.0, 1.0, 2.0))), **common)
    else:
        raise ConfigError(f"unknown search kind {kind!r}")
    return r.to_dict()


def cmd_verify_equivalence(cfg: RunConfig):
    eq = dict(cfg.get("equivalence") or {})
    fams = eq.get("families", "curated")
    targets = []
    if fams == "curated":
        targets = [(fs.id, fs.spectrum()) for fs in curated_families() if fs.equivalence is not None]
    else:
        for f in fams:
            if isinstance(f, str):
                fs = get_curated(f)
                targets.append((fs.id, fs.spectrum()))
            else:
                targets.append((f.get("name", f["id"]), parse_spectrum(f)))
    tf = parse_tfun(cfg.raw["tfun"]) if "tfun" in cfg.raw else None
    reports = []
    for name, fam in targets:
        rep = check_equivalence_prop1(fam, tf, eq.get("sweeps"), cfg.d_range(),
                                      int(cfg.get("budget", 10**6)),
                                      tail_tol=float(cfg.get("tail_tol", 1e-6)), name=name,
                                      jobs=int(cfg.get("jobs", 1)))
        reports.append(rep.to_dict())
    return {"rows": [{"family": r["family"], "status": r["status"]} for r in reports],
            "reports": reports}


def cmd_validate(cfg: RunConfig):
    v = dict(cfg.get("validate") or {})
    tfs = v.get("tfun")
    hs = v.get("h")
    if tfs is None and hs is None:
        tfs = "all"
        hs = ["exp", {"family": "exp-power", "r": 2}]
    rows = []
    if tfs == "all":
        tfs = [{"family": fam, "p": [1.0] * cls.n_params} for fam, cls in TFUN_FAMILIES.items()]
    for spec in tfs or []:
        tf = parse_tfun(spec)
        rep = validate_tfun(tf)
        rows.append({"kind": "tfun", "spec": tf.to_config(), **rep.to_dict()})
    for spec in hs or []:
        h = parse_h(spec)
        rep = validate_h(h)
        rows.append({"kind": "h", "spec": h.to_config(), **rep.to_dict()})
    return {"rows": rows}


HANDLERS = {
    "complexity": cmd_complexity,
    "check": cmd_check,
    "search": cmd_search,
    "verify-equivalence": cmd_verify_equivalence,
    "validate": cmd_validate,
}


def render(command: str, cfg: RunConfig, result) -> str:
    payload = to_jsonable({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config_echo": cfg.echo(),
        "result": result,
    })
    if cfg.format == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    rows = flatten_rows(payload["result"])
    cols: List[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    cell = lambda v: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: cell(r.get(k, "")) for k in cols})
        return buf.getvalue()
    table = [[str(c) for c in cols]] + [[str(cell(r.get(k, ""))) for k in cols] for r in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(cols))]
    text = "\n".join("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in table) + "\n"
    res = payload["result"]
    if isinstance(res, dict) and "kind" in res:
        text += f"verdict: {res['kind']}  sup_over_d: {res.get('sup_over_d')}\n"
    return text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tractability", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("config", help="YAML or JSON run configuration")
    ap.add_argument("--d-max", type=int)
    ap.add_argument("--budget", type=int)
    ap.add_argument("--tail-tol", type=float)
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--format", choices=FORMATS)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--output", "-o", help="write the report here instead of stdout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        raw = load_config_file(args.config)
        overrides = {k: v for k, v in (("d_max", args.d_max), ("budget", args.budget),
                                       ("tail_tol", args.tail_tol), ("jobs", args.jobs))
                     if v is not None}
        fmt = args.format or raw.get("format", "json")
        if fmt not in FORMATS:
            raise ConfigError(f"unknown format {fmt!r}")
        cfg = RunConfig(args.command, raw, fmt, args.seed if args.seed is not None else raw.get("seed"),
                        overrides)
        result = HANDLERS[args.command](cfg)
        text = render(args.command, cfg, result)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, InvalidSpec, SpectrumError, BracketInvalid, OSError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
