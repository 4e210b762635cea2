"""Config parsing, certificate documents, serialization and replay.

Configs and certificates are JSON.  Every interval endpoint in a
certificate is stored as hexadecimal float text, so documents round-trip
bit-exactly and a replay can re-run the interval checks on the precise
numbers that were certified.  Map parameters keep their decimal spelling
from the config; the kernel turns them into enclosures of the exact
decimal values.

Replay is two-tier: the default pass re-checks every stored inclusion,
disjointness and table condition with the interval kernel only (no ODE
integration), plus an integrity hash over the evidence tree; --deep also
re-derives witness images and stage enclosures through the map backend.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict
from fractions import Fraction

from .certify import (
    CertifySettings,
    ChainCertificate,
    ChaosCertificate,
    DeclaredHypotheses,
    DpdCertificate,
    MarkovCertificate,
    ShiftCertificate,
    Verdict,
    VisitWitness,
    _iterate_box_tight,
    _overlap_translates,
)
from .errors import ReplayMismatch, SchemaMismatch
from .flow import IntegrationSettings
from .geometry import (
    EnclosureSet,
    LiftedBox,
    annulus_disjoint,
    inessential_union,
)
from .interval import Box2, Interval
from .maps import LiftedAnnulusMap, SubdivisionSettings, make_map

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# hex-float encoding
# ---------------------------------------------------------------------------


def _enc_f(x: float) -> str:
    return float(x).hex()


def _dec_f(s) -> float:
    if isinstance(s, str):
        return float.fromhex(s)
    return float(s)


def enc_interval(iv: Interval) -> list[str]:
    return [_enc_f(iv.lo), _enc_f(iv.hi)]


def enc_box(b: Box2) -> dict:
    return {"x": enc_interval(b.x), "y": enc_interval(b.y)}


def dec_box(d: dict) -> Box2:
    return Box2(Interval(_dec_f(d["x"][0]), _dec_f(d["x"][1])),
                Interval(_dec_f(d["y"][0]), _dec_f(d["y"][1])))


def enc_lifted(lb: LiftedBox) -> dict:
    return {"box": enc_box(lb.planar), "shift": lb.shift}


def dec_lifted(d: dict) -> LiftedBox:
    return LiftedBox(dec_box(d["box"]), int(d["shift"]))


def enc_eset(es: EnclosureSet) -> dict:
    return {"stage": es.stage, "source": es.source,
            "members": [enc_lifted(m) for m in es.members]}


def dec_eset(d: dict) -> EnclosureSet:
    return EnclosureSet(tuple(dec_lifted(m) for m in d["members"]),
                        stage=int(d["stage"]), source=d.get("source", ""))


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

_MAP_KINDS = {"pendulum", "standard-map", "rigid-twist"}
_TOP_KEYS = {"schema_version", "map", "boxes", "n", "declared", "settings",
             "seed", "visit", "chain", "markov", "explore"}
_MAP_KEYS = {"kind", "params", "lift_offset", "circumference"}
_SETTINGS_KEYS = {"integration", "subdivision", "witness_depth",
                  "witness_start_depth", "max_m", "float_grid",
                  "float_samples"}
_INTEGRATION_KEYS = {"taylor_order", "h_init", "h_min", "picard_inflation",
                     "max_picard_retries", "fixed_step", "v_max"}
_SUBDIV_KEYS = {"target_width", "max_boxes", "flow_segments", "raster_pitch",
                "anchor_ratio"}
_DECLARED_KEYS = {"area_preserving", "nonwandering", "birkhoff_related_ends"}


def _reject_unknown(d: dict, allowed: set, path: str) -> None:
    for key in d:
        if key not in allowed:
            raise SchemaMismatch(f"unknown field {path}.{key}")


def _num(v, path: str) -> float:
    try:
        if isinstance(v, str) and v.lower().startswith(("0x", "-0x")):
            return float.fromhex(v)
        return float(v)
    except (TypeError, ValueError) as exc:
        raise SchemaMismatch(f"bad number at {path}: {v!r}") from exc


def _parse_box(d, path: str) -> Box2:
    try:
        if isinstance(d, dict):
            xs, ys = d["x"], d["y"]
        else:
            xs, ys = d[0], d[1]
        return Box2(
            Interval(_num(xs[0], path), _num(xs[1], path)),
            Interval(_num(ys[0], path), _num(ys[1], path)),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise SchemaMismatch(f"bad box at {path}: {d!r}") from exc


class RunConfig:
    """Validated run configuration (schema-versioned; unknown fields are
    rejected with the offending path)."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise SchemaMismatch("config root must be an object")
        _reject_unknown(raw, _TOP_KEYS, "$")
        if int(raw.get("schema_version", -1)) != SCHEMA_VERSION:
            raise SchemaMismatch(
                f"schema_version must be {SCHEMA_VERSION} "
                f"(got {raw.get('schema_version')!r})")
        self.raw = raw

        map_spec = raw.get("map")
        if not isinstance(map_spec, dict):
            raise SchemaMismatch("missing $.map object")
        _reject_unknown(map_spec, _MAP_KEYS, "$.map")
        kind = map_spec.get("kind")
        if kind not in _MAP_KINDS:
            raise SchemaMismatch(f"$.map.kind must be one of {sorted(_MAP_KINDS)}")
        self.map_kind = kind
        self.map_params = dict(map_spec.get("params", {}))
        self.lift_offset = int(map_spec.get("lift_offset", 0))

        self.boxes: dict[str, Box2] = {}
        for name, spec in (raw.get("boxes") or {}).items():
            self.boxes[name] = _parse_box(spec, f"$.boxes.{name}")

        self.n = int(raw.get("n", 1))
        self.seed = int(raw.get("seed", 0))

        decl = raw.get("declared")
        if decl is not None:
            _reject_unknown(decl, _DECLARED_KEYS, "$.declared")
            missing = _DECLARED_KEYS - set(decl)
            if missing:
                raise SchemaMismatch(
                    f"$.declared must set all of {sorted(_DECLARED_KEYS)}; "
                    f"missing {sorted(missing)}")
            self.declared = DeclaredHypotheses(
                area_preserving=bool(decl["area_preserving"]),
                nonwandering=bool(decl["nonwandering"]),
                birkhoff_related_ends=bool(decl["birkhoff_related_ends"]),
            )
        else:
            self.declared = None

        st = raw.get("settings") or {}
        _reject_unknown(st, _SETTINGS_KEYS, "$.settings")
        integ = st.get("integration") or {}
        _reject_unknown(integ, _INTEGRATION_KEYS, "$.settings.integration")
        sub = st.get("subdivision") or {}
        _reject_unknown(sub, _SUBDIV_KEYS, "$.settings.subdivision")
        self.integration = IntegrationSettings(
            taylor_order=int(integ.get("taylor_order", 4)),
            h_init=(None if integ.get("h_init") is None
                    else _num(integ["h_init"], "$.settings.integration.h_init")),
            h_min=(None if integ.get("h_min") is None
                   else _num(integ["h_min"], "$.settings.integration.h_min")),
            picard_inflation=_num(integ.get("picard_inflation", 1.1), "picard"),
            max_picard_retries=int(integ.get("max_picard_retries", 8)),
            fixed_step=bool(integ.get("fixed_step", False)),
            v_max=_num(integ.get("v_max", 12.0), "v_max"),
        )
        self.subdivision = SubdivisionSettings(
            target_width=_num(sub.get("target_width", 0.1), "target_width"),
            max_boxes=int(sub.get("max_boxes", 2 ** 14)),
            flow_segments=int(sub.get("flow_segments", 8)),
            raster_pitch=(None if sub.get("raster_pitch") is None
                          else _num(sub["raster_pitch"], "raster_pitch")),
            anchor_ratio=int(sub.get("anchor_ratio", 8)),
        )
        self.certify = CertifySettings(
            subdivision=self.subdivision,
            witness_depth=int(st.get("witness_depth", 46)),
            witness_start_depth=int(st.get("witness_start_depth", 6)),
            max_m=int(st.get("max_m", 60)),
            float_grid=int(st.get("float_grid", 24)),
            float_samples=int(st.get("float_samples", 256)),
            seed=self.seed,
        )
        self.visit = raw.get("visit")
        self.chain = raw.get("chain")
        self.markov = raw.get("markov")
        self.explore = raw.get("explore")

    @staticmethod
    def load(path: str) -> "RunConfig":
        with open(path) as fh:
            try:
                raw = json.load(fh, parse_float=str)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"invalid JSON in {path}: {exc}") from exc
        return RunConfig(raw)

    def build_map(self) -> LiftedAnnulusMap:
        return make_map(self.map_kind, self.map_params,
                        lift_offset=self.lift_offset,
                        integration=self.integration)

    def box(self, name: str) -> Box2:
        if name not in self.boxes:
            raise SchemaMismatch(f"config defines no box named {name!r}")
        return self.boxes[name]


# ---------------------------------------------------------------------------
# certificate documents
# ---------------------------------------------------------------------------


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _integrity(payload: dict) -> str:
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


def _enc_shift_cert(sc: ShiftCertificate) -> dict:
    return {
        "k": sc.k,
        "witness": enc_box(sc.witness),
        "witness_image": enc_lifted(sc.witness_image),
        "overlap_translates": list(sc.overlap_translates),
        "enclosure": enc_eset(sc.enclosure),
    }


def _enc_visit(w: VisitWitness) -> dict:
    return {
        "seed": enc_box(w.seed), "m": w.m,
        "final_enclosure": enc_box(w.final_enclosure),
        "final_shift": w.final_shift,
        "target_translate": w.target_translate,
        "source": w.source_name, "target": w.target_name,
    }


def dpd_document(cert: DpdCertificate, config: dict) -> dict:
    evidence = {
        "n": cert.n,
        "k0": cert.k0, "k1": cert.k1, "rho": cert.rho,
        "shift0": _enc_shift_cert(cert.shift0) if cert.shift0 else None,
        "shift1": _enc_shift_cert(cert.shift1) if cert.shift1 else None,
        "chain0": [enc_eset(es) for es in cert.chain0],
        "chain1": [enc_eset(es) for es in cert.chain1],
        "disjointness": [[i, j, bool(v)] for (i, j), v in sorted(cert.disjointness.items())],
        "inessential": {"U0": cert.inessential0, "U1": cert.inessential1},
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "dpd",
        "config": config,
        "verdict": cert.verdict.value,
        "rho": cert.rho,
        "rho_abs": cert.rho_abs,
        "reasons": list(cert.reasons),
        "evidence": evidence,
        "counters": dict(cert.stats),
    }
    doc["integrity"] = _integrity({"config": config, "evidence": evidence,
                                   "verdict": doc["verdict"]})
    return doc


def visit_document(w: VisitWitness, config: dict, counters: dict | None = None) -> dict:
    evidence = {"witness": _enc_visit(w)}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "visit",
        "config": config,
        "verdict": Verdict.CERTIFIED.value,
        "evidence": evidence,
        "counters": counters or {},
    }
    doc["integrity"] = _integrity({"config": config, "evidence": evidence,
                                   "verdict": doc["verdict"]})
    return doc


def chaos_document(cert: ChaosCertificate, config: dict) -> dict:
    dpd_doc = dpd_document(cert.dpd, config)
    evidence = {
        "dpd": dpd_doc["evidence"],
        "visit_01": _enc_visit(cert.visit_01) if cert.visit_01 else None,
        "visit_10": _enc_visit(cert.visit_10) if cert.visit_10 else None,
        "declared": asdict(cert.declared),
        "relabeled": cert.relabeled,
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "chaos",
        "config": config,
        "verdict": cert.verdict.value,
        "dpd_verdict": cert.dpd.verdict.value,
        "rho": cert.dpd.rho,
        "rho_abs": cert.dpd.rho_abs,
        "applied_criterion": cert.applied_criterion,
        "implied_interval": ([str(cert.implied_interval[0]),
                              str(cert.implied_interval[1])]
                             if cert.implied_interval else None),
        "conclusion": cert.conclusion,
        "reason": cert.reason,
        "visit_errors": list(cert.visit_errors),
        "evidence": evidence,
        "counters": dict(cert.dpd.stats),
    }
    doc["integrity"] = _integrity({"config": config, "evidence": evidence,
                                   "verdict": doc["verdict"],
                                   "applied": cert.applied_criterion})
    return doc


def chain_document(cert: ChainCertificate, config: dict) -> dict:
    evidence = {
        "q": cert.q, "p": cert.p,
        "disks": [enc_box(b) for b in cert.disks],
        "exponents": list(cert.exponents),
        "free_enclosures": [enc_eset(es) for es in cert.free_enclosures],
        "connections": [{"witness": enc_box(w), "image": enc_lifted(img)}
                        for (w, img) in cert.connections],
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "chain",
        "config": config,
        "verdict": cert.verdict.value,
        "conclusion": cert.conclusion,
        "reasons": list(cert.reasons),
        "evidence": evidence,
        "counters": {},
    }
    doc["integrity"] = _integrity({"config": config, "evidence": evidence,
                                   "verdict": doc["verdict"]})
    return doc


def markov_document(cert: MarkovCertificate, config: dict) -> dict:
    evidence = {
        "rect": enc_box(cert.rect),
        "n_iter": cert.n_iter,
        "results": [{"shift": r.shift, "certified": r.certified,
                     "orientation": r.orientation, "reason": r.reason}
                    for r in cert.results],
        "left_enclosure": enc_eset(cert.left_enclosure),
        "right_enclosure": enc_eset(cert.right_enclosure),
        "full_enclosure": enc_eset(cert.full_enclosure),
    }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "markov",
        "config": config,
        "verdict": cert.verdict.value,
        "horseshoe_symbols": cert.horseshoe_symbols,
        "entropy_lower_bound": cert.entropy_lower_bound,
        "evidence": evidence,
        "counters": {},
    }
    doc["integrity"] = _integrity({"config": config, "evidence": evidence,
                                   "verdict": doc["verdict"]})
    return doc


def dump_document(doc: dict, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_document(path: str) -> dict:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"certificate schema_version must be {SCHEMA_VERSION}")
    if "kind" not in doc or "evidence" not in doc or "integrity" not in doc:
        raise SchemaMismatch("certificate missing kind/evidence/integrity")
    return doc


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def _require(ok: bool, msg: str, failures: list[str]) -> None:
    if not ok:
        failures.append(msg)


def _replay_integrity(doc: dict, failures: list[str]) -> None:
    payload = {"config": doc["config"], "evidence": doc["evidence"],
               "verdict": doc["verdict"]}
    if doc["kind"] == "chaos":
        payload["applied"] = doc.get("applied_criterion")
    _require(_integrity(payload) == doc.get("integrity"),
             "integrity hash mismatch (evidence was altered)", failures)


def _replay_shift(tag: str, sc: dict, U: Box2, circ: Interval,
                  failures: list[str]) -> None:
    witness = dec_box(sc["witness"])
    wimg = dec_lifted(sc["witness_image"])
    k = int(sc["k"])
    _require(U.contains_box(witness), f"{tag}: witness box not inside the box", failures)
    target = U.translate_x(circ * (k - wimg.shift))
    _require(wimg.planar.strictly_inside(target),
             f"{tag}: witness image not strictly inside translate {k}", failures)
    eset = dec_eset(sc["enclosure"])
    overlaps = _overlap_translates(eset, U, circ)
    _require(overlaps == [k],
             f"{tag}: stored enclosure overlaps translates {overlaps}, "
             f"expected exactly [{k}]", failures)
    _require(list(sc["overlap_translates"]) == overlaps,
             f"{tag}: stored overlap list does not match enclosure", failures)


def _replay_dpd_evidence(ev: dict, U0: Box2, U1: Box2, circ: Interval,
                         verdict: str, failures: list[str]) -> None:
    n = int(ev["n"])
    chain0 = [dec_eset(d) for d in ev["chain0"]]
    chain1 = [dec_eset(d) for d in ev["chain1"]]
    if verdict == Verdict.CERTIFIED.value:
        _require(ev["shift0"] is not None and ev["shift1"] is not None,
                 "certified dpd lacks shift certificates", failures)
        if ev["shift0"]:
            _replay_shift("U0", ev["shift0"], U0, circ, failures)
        if ev["shift1"]:
            _replay_shift("U1", ev["shift1"], U1, circ, failures)
        _require(len(chain0) == n + 1 and len(chain1) == n + 1,
                 "stored chains have wrong stage count", failures)
        if ev["shift0"] and ev["shift1"]:
            k0, k1 = int(ev["shift0"]["k"]), int(ev["shift1"]["k"])
            _require(ev["rho"] == k1 - k0, "stored rho != k1 - k0", failures)
        got = {(int(i), int(j)): bool(v) for i, j, v in ev["disjointness"]}
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                _require(got.get((i, j), False),
                         f"disjointness table incomplete at ({i},{j})", failures)
                if len(chain0) > i and len(chain1) > j:
                    _require(annulus_disjoint(chain0[i], chain1[j], circ),
                             f"stored enclosures f^{i}(U0), f^{j}(U1) are not "
                             "provably disjoint", failures)
        _require(bool(ev["inessential"]["U0"]) and bool(ev["inessential"]["U1"]),
                 "certified dpd lacks inessentiality flags", failures)
        if chain0:
            _require(inessential_union(chain0, circ),
                     "stored U0 chain fails the inessentiality re-check", failures)
        if chain1:
            _require(inessential_union(chain1, circ),
                     "stored U1 chain fails the inessentiality re-check", failures)
        if chain0 and chain0[0].members:
            _require(chain0[0].members[0].planar.contains_box(U0)
                     and U0.contains_box(chain0[0].members[0].planar),
                     "chain0 stage 0 is not the configured U0", failures)
        if chain1 and chain1[0].members:
            _require(chain1[0].members[0].planar.contains_box(U1)
                     and U1.contains_box(chain1[0].members[0].planar),
                     "chain1 stage 0 is not the configured U1", failures)


def _replay_visit_evidence(tag: str, w: dict, source: Box2, target: Box2,
                           circ: Interval, max_m: int, failures: list[str]) -> None:
    seed = dec_box(w["seed"])
    final = dec_box(w["final_enclosure"])
    fshift = int(w["final_shift"])
    k = int(w["target_translate"])
    _require(seed.strictly_inside(source) or source.contains_box(seed),
             f"{tag}: seed not inside the source box", failures)
    _require(int(w["m"]) >= 1 and int(w["m"]) <= max_m,
             f"{tag}: iterate count out of range", failures)
    tgt = target.translate_x(circ * (k - fshift))
    _require(final.strictly_inside(tgt),
             f"{tag}: final enclosure not strictly inside the target interior",
             failures)


def _replay_chain_evidence(ev: dict, circ: Interval, verdict: str,
                           failures: list[str]) -> None:
    disks = [dec_box(d) for d in ev["disks"]]
    for i in range(len(disks)):
        for j in range(i + 1, len(disks)):
            _require(disks[i].is_disjoint(disks[j]),
                     f"disks {i},{j} are not planar-disjoint", failures)
    frees = [dec_eset(d) for d in ev["free_enclosures"]]
    if verdict == Verdict.CERTIFIED.value:
        _require(len(frees) == len(disks), "free enclosure count mismatch", failures)
        for i, es in enumerate(frees):
            for mm in es.members:
                _require(mm.materialize(circ).is_disjoint(disks[i]),
                         f"stored H(V{i}) enclosure is not disjoint from V{i}",
                         failures)
        conns = ev["connections"]
        _require(len(conns) == len(disks), "connection count mismatch", failures)
        for i, conn in enumerate(conns):
            w = dec_box(conn["witness"])
            img = dec_lifted(conn["image"])
            nxt = disks[(i + 1) % len(disks)]
            _require(disks[i].contains_box(w),
                     f"connection {i}: witness not inside V{i}", failures)
            tgt = nxt.translate_x(circ * (-img.shift))
            _require(img.planar.strictly_inside(tgt),
                     f"connection {i}: image not strictly inside V{(i+1) % len(disks)}",
                     failures)


def _replay_markov_evidence(ev: dict, circ: Interval, failures: list[str]) -> None:
    rect = dec_box(ev["rect"])
    e_left = dec_eset(ev["left_enclosure"])
    e_right = dec_eset(ev["right_enclosure"])
    e_full = dec_eset(ev["full_enclosure"])
    for res in ev["results"]:
        if not res["certified"]:
            continue
        s = int(res["shift"])
        tx = rect.x + circ * s
        band = all(mm.planar.y.strictly_inside(rect.y) for mm in e_full.members)
        _require(band, f"shift {s}: stored image leaves the y band", failures)
        lx = [mm.materialize(circ).x for mm in e_left.members]
        rx = [mm.materialize(circ).x for mm in e_right.members]
        if res["orientation"] == "direct":
            ok = all(iv.hi < tx.lo for iv in lx) and all(iv.lo > tx.hi for iv in rx)
        else:
            ok = all(iv.hi < tx.lo for iv in rx) and all(iv.lo > tx.hi for iv in lx)
        _require(ok, f"shift {s}: stored edge enclosures do not straddle", failures)


def replay(doc: dict, deep: bool = False) -> list[str]:
    """Re-check a certificate document.  Returns a list of failure messages
    (empty = replay passed).  The default pass uses only the interval
    kernel and the stored evidence; deep re-derives enclosures and witness
    images through the map backend."""
    failures: list[str] = []
    _replay_integrity(doc, failures)
    try:
        cfg = RunConfig(doc["config"])
    except SchemaMismatch as exc:
        failures.append(f"embedded config invalid: {exc}")
        return failures
    m = cfg.build_map()
    circ = m.circ
    kind = doc["kind"]
    ev = doc["evidence"]

    if kind == "dpd":
        _replay_dpd_evidence(ev, cfg.box("U0"), cfg.box("U1"), circ,
                             doc["verdict"], failures)
    elif kind == "visit":
        vs = doc["config"].get("visit") or {}
        src = cfg.box(vs.get("source", "U0"))
        tgt = cfg.box(vs.get("target", "U1"))
        _replay_visit_evidence("visit", ev["witness"], src, tgt, circ,
                               cfg.certify.max_m, failures)
    elif kind == "chaos":
        _replay_dpd_evidence(ev["dpd"], cfg.box("U0"), cfg.box("U1"), circ,
                             doc.get("dpd_verdict", doc["verdict"]), failures)
        if doc.get("applied_criterion"):
            rho = ev["dpd"].get("rho")
            n = int(ev["dpd"]["n"])
            from .certify import admissible

            _require(rho is not None and admissible(n, abs(rho)),
                     "applied criterion with inadmissible (n, rho)", failures)
            decl = ev["declared"]
            if doc["applied_criterion"] == "area_preserving_ends":
                _require(bool(decl["area_preserving"])
                         and bool(decl["birkhoff_related_ends"]),
                         "declared hypotheses do not support the applied criterion",
                         failures)
                _require(ev["visit_01"] is not None and ev["visit_10"] is not None,
                         "applied criterion requires both visits", failures)
            else:
                _require(bool(decl["nonwandering"]),
                         "declared hypotheses do not support the applied criterion",
                         failures)
            want = [str(Fraction(1, n)), str(Fraction(abs(rho)) - Fraction(1, n))]
            _require(doc.get("implied_interval") == want,
                     "implied interval does not match [1/n, |rho| - 1/n]", failures)
        for tag, key, pair in (("visit U0->U1", "visit_01", ("U0", "U1")),
                               ("visit U1->U0", "visit_10", ("U1", "U0"))):
            if ev.get(key):
                _replay_visit_evidence(tag, ev[key], cfg.box(pair[0]),
                                       cfg.box(pair[1]), circ,
                                       cfg.certify.max_m, failures)
    elif kind == "chain":
        _replay_chain_evidence(ev, circ, doc["verdict"], failures)
    elif kind == "markov":
        _replay_markov_evidence(ev, circ, failures)
    else:
        failures.append(f"unknown certificate kind {kind!r}")

    if deep and not failures:
        failures.extend(_deep_replay(doc, cfg, m))
    return failures


def _deep_replay(doc: dict, cfg: RunConfig, m: LiftedAnnulusMap) -> list[str]:
    """Re-derive witness images through the map backend and confirm the
    stored conclusions still hold."""
    failures: list[str] = []
    kind = doc["kind"]
    ev = doc["evidence"]
    circ = m.circ

    def recheck_witness(tag, wbox: Box2, power: int, target: Box2, k: int):
        img = _iterate_box_tight(m, LiftedBox(wbox, 0), power)
        tgt = target.translate_x(circ * (k - img.shift))
        _require(img.planar.strictly_inside(tgt),
                 f"{tag}: re-derived witness image exits the target interior",
                 failures)

    if kind in ("dpd", "chaos"):
        dev = ev if kind == "dpd" else ev["dpd"]
        for tag, key, box in (("U0", "shift0", cfg.box("U0")),
                              ("U1", "shift1", cfg.box("U1"))):
            if dev.get(key):
                recheck_witness(f"{tag} self-return", dec_box(dev[key]["witness"]),
                                1, box, int(dev[key]["k"]))
    if kind == "chaos":
        for key, (sn, tn) in (("visit_01", ("U0", "U1")),
                              ("visit_10", ("U1", "U0"))):
            if ev.get(key):
                w = ev[key]
                recheck_witness(f"{key}", dec_box(w["seed"]), int(w["m"]),
                                cfg.box(tn), int(w["target_translate"]))
    if kind == "visit":
        w = ev["witness"]
        vs = doc["config"].get("visit") or {}
        recheck_witness("visit", dec_box(w["seed"]), int(w["m"]),
                        cfg.box(vs.get("target", "U1")),
                        int(w["target_translate"]))
    if kind == "chain":
        q, p = int(ev["q"]), int(ev["p"])
        disks = [dec_box(d) for d in ev["disks"]]
        for i, conn in enumerate(ev["connections"]):
            mi = int(ev["exponents"][i])
            w = dec_box(conn["witness"])
            img = _iterate_box_tight(m, LiftedBox(w, 0), q * mi)
            img = LiftedBox(img.planar, img.shift - p * mi)
            nxt = disks[(i + 1) % len(disks)]
            tgt = nxt.translate_x(circ * (-img.shift))
            _require(img.planar.strictly_inside(tgt),
                     f"connection {i}: re-derived image exits the next disk",
                     failures)
    return failures
