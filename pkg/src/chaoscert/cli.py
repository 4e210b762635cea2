"""Command-line frontend.

Subcommands: explore, certify-dpd, certify-visit, certify-chaos,
certify-chain, certify-markov, replay, render.  Exit codes: 0 = Certified,
1 = Refuted, 2 = Inconclusive, 3 = usage or config error.  Worker
parallelism is bounded by the CHAOS_CERT_THREADS environment variable;
--budget caps the per-stage sub-box count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time

from . import document as docmod
from .certify import (
    CertifySettings,
    Verdict,
    certify_chain,
    certify_chaos,
    certify_markov,
    certify_ndpd,
    certify_visit,
)
from .errors import ChaosCertError, InconclusiveError, RefutationError, SchemaMismatch
from .explore import ExploreParams, propose_candidates, rotation_field
from .render import render_to_file

EXIT_CERTIFIED = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

_VERDICT_CODE = {
    Verdict.CERTIFIED: EXIT_CERTIFIED,
    Verdict.REFUTED: EXIT_REFUTED,
    Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="chaoscert",
        description="Rigorous certification of rotational chaos for annulus maps.",
    )
    sub = ap.add_subparsers(dest="command")

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        return p

    for name, help_ in (
        ("certify-dpd", "certify the n-disjoint-pair-of-disks conditions"),
        ("certify-chaos", "full pipeline: dpd + visits + criterion table"),
    ):
        p = add(name, help_)
        p.add_argument("--config", required=True)
        p.add_argument("--out", help="certificate output path (JSON)")
        p.add_argument("--budget", type=int, help="per-stage sub-box cap")

    p = add("certify-visit", "certify a visiting orbit between two boxes")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--budget", type=int)
    p.add_argument("--source", help="source box name (default from config)")
    p.add_argument("--target", help="target box name (default from config)")

    p = add("certify-chain", "verify a periodic-disk-chain certificate")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--budget", type=int)

    p = add("certify-markov", "verify Markovian-crossing certificates")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--budget", type=int)

    p = add("explore", "propose candidate box pairs (non-rigorous)")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=".",
                   help="directory for candidate config fragments")
    p.add_argument("--rho-min", type=int, default=3)

    p = add("replay", "re-check a certificate document")
    p.add_argument("--cert", required=True)
    p.add_argument("--deep", action="store_true",
                   help="also re-derive witness images via the map backend")

    p = add("render", "emit an SVG figure from a certificate or config")
    p.add_argument("--cert")
    p.add_argument("--config")
    p.add_argument("--view", choices=("annulus", "cover"), default="annulus")
    p.add_argument("--out", required=True)
    return ap


def _load_config(path: str, budget: int | None) -> docmod.RunConfig:
    cfg = docmod.RunConfig.load(path)
    if budget is not None:
        sub = dataclasses.replace(cfg.subdivision, max_boxes=budget)
        cfg.subdivision = sub
        cfg.certify = dataclasses.replace(cfg.certify, subdivision=sub)
    return cfg


def _emit(doc: dict, out: str | None, default_name: str) -> None:
    path = out or default_name
    docmod.dump_document(doc, path)
    print(f"certificate written to {path}")


def _cmd_dpd(args) -> int:
    cfg = _load_config(args.config, args.budget)
    m = cfg.build_map()
    cert = certify_ndpd(m, cfg.box("U0"), cfg.box("U1"), cfg.n, cfg.certify)
    doc = docmod.dpd_document(cert, cfg.raw)
    _emit(doc, args.out, "dpd_certificate.json")
    print(f"verdict: {cert.verdict.value}  k0={cert.k0} k1={cert.k1} "
          f"rho={cert.rho} (|rho|={cert.rho_abs})")
    for r in cert.reasons:
        print(f"  note: {r}")
    return _VERDICT_CODE[cert.verdict]


def _cmd_chaos(args) -> int:
    cfg = _load_config(args.config, args.budget)
    if cfg.declared is None:
        raise SchemaMismatch("$.declared is required for certify-chaos "
                             "(all three hypotheses, no defaults)")
    m = cfg.build_map()
    cert = certify_chaos(m, cfg.box("U0"), cfg.box("U1"), cfg.n,
                         cfg.declared, cfg.certify)
    doc = docmod.chaos_document(cert, cfg.raw)
    _emit(doc, args.out, "chaos_certificate.json")
    print(f"verdict: {cert.verdict.value}  applied: {cert.applied_criterion}")
    print(f"rho = {cert.dpd.rho} (|rho| = {cert.dpd.rho_abs}, "
          f"relabeled = {cert.relabeled})")
    if cert.implied_interval:
        a, b = cert.implied_interval
        print(f"implied rotation interval: [{a}, {b}]  (length {b - a})")
    print(cert.conclusion)
    return _VERDICT_CODE[cert.verdict]


def _cmd_visit(args) -> int:
    cfg = _load_config(args.config, args.budget)
    vs = cfg.visit or {}
    src_name = args.source or vs.get("source", "U0")
    tgt_name = args.target or vs.get("target", "U1")
    m = cfg.build_map()
    t0 = time.time()
    try:
        w = certify_visit(m, cfg.box(src_name), cfg.box(tgt_name),
                          cfg.certify.max_m, cfg.certify,
                          source_name=src_name, target_name=tgt_name)
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}")
        return EXIT_INCONCLUSIVE
    raw = dict(cfg.raw)
    raw["visit"] = {"source": src_name, "target": tgt_name}
    doc = docmod.visit_document(w, raw,
                                counters={"wall_time_s": round(time.time() - t0, 3)})
    _emit(doc, args.out, "visit_certificate.json")
    print(f"verdict: certified  m = {w.m}")
    return EXIT_CERTIFIED


def _cmd_chain(args) -> int:
    cfg = _load_config(args.config, args.budget)
    spec = cfg.chain
    if not spec:
        raise SchemaMismatch("config has no $.chain block")
    disks = [docmod._parse_box(d, f"$.chain.disks[{i}]")
             for i, d in enumerate(spec.get("disks", []))]
    cert = certify_chain(cfg.build_map(), int(spec.get("q", 1)),
                         int(spec.get("p", 0)), disks,
                         [int(e) for e in spec.get("exponents", [])],
                         cfg.certify)
    doc = docmod.chain_document(cert, cfg.raw)
    _emit(doc, args.out, "chain_certificate.json")
    print(f"verdict: {cert.verdict.value}")
    print(cert.conclusion)
    for r in cert.reasons:
        print(f"  note: {r}")
    return _VERDICT_CODE[cert.verdict]


def _cmd_markov(args) -> int:
    cfg = _load_config(args.config, args.budget)
    spec = cfg.markov
    if not spec:
        raise SchemaMismatch("config has no $.markov block")
    rect = docmod._parse_box(spec.get("rect"), "$.markov.rect")
    cert = certify_markov(cfg.build_map(), rect, int(spec.get("n_iter", 1)),
                          [int(s) for s in spec.get("shifts", [])],
                          cfg.certify)
    doc = docmod.markov_document(cert, cfg.raw)
    _emit(doc, args.out, "markov_certificate.json")
    print(f"verdict: {cert.verdict.value}  symbols = {cert.horseshoe_symbols}")
    for r in cert.results:
        status = "certified" if r.certified else f"not crossing ({r.reason})"
        print(f"  shift {r.shift}: {status}")
    if cert.entropy_lower_bound:
        print(f"entropy lower bound: {cert.entropy_lower_bound:.6f}")
    return _VERDICT_CODE[cert.verdict]


def _cmd_explore(args) -> int:
    import os

    cfg = _load_config(args.config, None)
    ex = cfg.explore or {}
    m = cfg.build_map()
    params = ExploreParams(
        eps=ex.get("eps"), box_scale=ex.get("box_scale"),
        max_m=int(ex.get("max_m", cfg.certify.max_m)),
        samples=int(ex.get("samples", 256)), seed=cfg.seed,
    )
    fld = rotation_field(
        m, float(ex.get("y_lo", -1.0)), float(ex.get("y_hi", 1.0)),
        nx=int(ex.get("nx", 32)), ny=int(ex.get("ny", 32)),
        iterates=int(ex.get("iterates", 60)),
    )
    rho_min = int(ex.get("rho_min", args.rho_min))
    cands = propose_candidates(m, fld, rho_min, n=cfg.n, params=params)
    if not cands:
        print("no candidates found")
        return EXIT_INCONCLUSIVE
    os.makedirs(args.out_dir, exist_ok=True)
    for i, c in enumerate(cands[:8]):
        frag = dict(cfg.raw)
        frag["boxes"] = {
            "U0": {"x": [c.U0.x.lo.hex(), c.U0.x.hi.hex()],
                   "y": [c.U0.y.lo.hex(), c.U0.y.hi.hex()]},
            "U1": {"x": [c.U1.x.lo.hex(), c.U1.x.hi.hex()],
                   "y": [c.U1.y.lo.hex(), c.U1.y.hi.hex()]},
        }
        frag["n"] = c.n
        frag.pop("explore", None)
        path = f"{args.out_dir}/candidate_{i:03d}.json"
        with open(path, "w") as fh:
            json.dump(frag, fh, indent=1, sort_keys=True)
            fh.write("\n")
        flag = " [no visit seeds]" if c.flagged() else ""
        print(f"{path}: predicted rho = {c.predicted_rho} "
              f"(k0={c.k0}, k1={c.k1}), robustness {c.robustness:.4f}{flag}")
    return EXIT_CERTIFIED


def _cmd_replay(args) -> int:
    doc = docmod.load_document(args.cert)
    failures = docmod.replay(doc, deep=args.deep)
    if failures:
        print("replay FAILED:")
        for f in failures:
            print(f"  mismatch: {f}")
        return EXIT_INCONCLUSIVE
    print(f"replay ok: verdict {doc['verdict']} stands")
    return _VERDICT_CODE[Verdict(doc["verdict"])]


def _cmd_render(args) -> int:
    if bool(args.cert) == bool(args.config):
        raise SchemaMismatch("render needs exactly one of --cert / --config")
    if args.cert:
        src = docmod.load_document(args.cert)
    else:
        src = docmod.RunConfig.load(args.config)
    render_to_file(src, args.view, args.out)
    print(f"figure written to {args.out}")
    return EXIT_CERTIFIED


_COMMANDS = {
    "certify-dpd": _cmd_dpd,
    "certify-chaos": _cmd_chaos,
    "certify-visit": _cmd_visit,
    "certify-chain": _cmd_chain,
    "certify-markov": _cmd_markov,
    "explore": _cmd_explore,
    "replay": _cmd_replay,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract here is 3
        return EXIT_USAGE if exc.code not in (0,) else 0
    if not args.command:
        ap.print_help()
        return EXIT_USAGE
    handler = _COMMANDS[args.command]
    try:
        return handler(args)
    except SchemaMismatch as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"file error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RefutationError as exc:
        print(f"refuted: {exc}", file=sys.stderr)
        return EXIT_REFUTED
    except InconclusiveError as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except ChaosCertError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
