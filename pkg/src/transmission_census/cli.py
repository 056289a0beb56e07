"""``transmission-census`` command line front end.

Exit codes: 0 success, 1 a check ran but failed (free-region violations,
non-flat symbol), 2 invalid configuration or media violating the
c1*n1 != c2*n2 requirement, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

from .census import (C_FREE, DELTA0, MIN_SIDE, census, free_region_scan, mode_limit,
                     weyl_constants)
from .ellipt import verify_ellipticity
from .errors import ConditionError, NumericalError
from .modal import MediumPair, ModalDeterminant, angular_weight, classify
from .winding import ContourRect, locate_zeros, winding_number

EXIT_OK, EXIT_CHECK, EXIT_CONDITION, EXIT_NUMERICAL = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


_MEDIA_KEYS = ("dimension", "radius", "c1", "n1", "c2", "n2")


@dataclass(frozen=True)
class RunConfig:
    media: dict
    output_dir: str = "."
    r_max: float = 32.0
    n_samples: int = 8
    epsilon: float = 0.05
    delta0: float = DELTA0
    band_constant: float = C_FREE
    free_region_C: object = "auto"
    free_region_r: float = 10.0
    min_side: float = MIN_SIDE
    symbol_grid: int = 32
    seed: int = 0

    def pair(self) -> MediumPair:
        return MediumPair(**self.media)


def _real(key, v, *, positive=True):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a JSON number, got {v!r}")
    if not math.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"{key} must be a finite positive number, got {v!r}")
    return float(v)


def _integer(key, v, lo):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be a JSON integer, got {v!r}")
    if v < lo:
        raise ConfigError(f"{key} must be >= {lo}, got {v!r}")
    return v


def parse_config(doc) -> RunConfig:
    """Validate a decoded JSON document; unknown keys and numeric strings are rejected."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    extra = sorted(set(doc) - known)
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(extra)}")
    if "media" not in doc:
        raise ConfigError("config needs a 'media' object")
    media = doc["media"]
    if not isinstance(media, dict):
        raise ConfigError("media must be a JSON object")
    bad = sorted(set(media) ^ set(_MEDIA_KEYS))
    if bad:
        raise ConfigError(f"media must have exactly the keys {', '.join(_MEDIA_KEYS)}")
    clean_media = {"dimension": _integer("media.dimension", media["dimension"], 2)}
    if clean_media["dimension"] not in (2, 3):
        raise ConfigError("media.dimension must be 2 or 3")
    for k in _MEDIA_KEYS[1:]:
        v = media[k]
        _real(f"media.{k}", v)
        clean_media[k] = v
    out = {"media": clean_media}
    for k in ("r_max", "epsilon", "delta0", "band_constant", "free_region_r", "min_side"):
        if k in doc:
            out[k] = _real(k, doc[k])
    for k, lo in (("n_samples", 1), ("symbol_grid", 16), ("seed", 0)):
        if k in doc:
            out[k] = _integer(k, doc[k], lo)
    if "free_region_C" in doc:
        v = doc["free_region_C"]
        out["free_region_C"] = v if v == "auto" else _real("free_region_C", v)
    if "output_dir" in doc:
        if not isinstance(doc["output_dir"], str) or not doc["output_dir"]:
            raise ConfigError("output_dir must be a non-empty string")
        out["output_dir"] = doc["output_dir"]
    cfg = RunConfig(**out)
    if cfg.r_max < 8:
        raise ConfigError("r_max must be >= 8")
    if cfg.epsilon > 0.2:
        raise ConfigError("epsilon must lie in (0, 0.2]")
    if cfg.free_region_r < 2:
        raise ConfigError("free_region_r must be >= 2")
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)


# ------------------------------------------------------------- output --

def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _num(x) -> str:
    return repr(int(x)) if isinstance(x, int) else repr(float(x))


def _records_json(records):
    return [z.to_dict() for z in records]


def census_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "N", "weyl", "residual"])
    for r, n, wy, res in zip(report.r_grid, report.counts, report.weyl, report.residuals):
        w.writerow([_num(r), _num(int(n)), _num(wy), _num(res)])
    return buf.getvalue()


# ----------------------------------------------------------- commands --

def cmd_census(cfg: RunConfig) -> int:
    media = cfg.pair()
    profile = classify(media)
    rep = census(media, cfg.r_max, cfg.n_samples, cfg.epsilon, delta0=cfg.delta0,
                 c_free=cfg.band_constant, min_side=cfg.min_side, seed=cfg.seed)
    out = Path(cfg.output_dir)
    summary = {
        "media": media.to_dict(),
        "conditions": {"holds_1_5": profile.holds_1_5, "holds_1_6": profile.holds_1_6,
                       "holds_1_8": profile.holds_1_8, "holds_1_9": profile.holds_1_9},
        "tau1": rep.tau.tau1, "tau2": rep.tau.tau2, "tau_total": rep.tau.total,
        "kappa": rep.kappa_used, "epsilon": rep.epsilon,
        "fitted_exponent": rep.fitted_exponent, "exponent_bound": rep.exponent_bound,
        "m_max": rep.m_max, "delta0": cfg.delta0, "band_constant": cfg.band_constant,
        "bands": rep.bands, "dyadic": rep.dyadic, "eigenvalue_count": len(rep.records),
        "warnings": rep.warnings,
    }
    _write_atomic(out / "census.csv", census_csv(rep))
    _write_atomic(out / "eigenvalues.json", _json(_records_json(rep.records)))
    _write_atomic(out / "summary.json", _json(summary))
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def cmd_locate(cfg: RunConfig, re_lo, re_hi, im_lo, im_hi) -> int:
    media = cfg.pair()
    classify(media)
    box = ContourRect(complex(re_lo, im_lo), complex(re_hi, im_hi), cfg.min_side)
    reach = max(abs(box.lo), abs(box.hi), abs(complex(re_lo, im_hi)), abs(complex(re_hi, im_lo)))
    symmetric = im_lo == -im_hi
    records = []
    for m in range(mode_limit(media, max(1.0, math.sqrt(reach))) + 1):
        det = ModalDeterminant(media, m)
        wn = winding_number(det, box)
        for zc, _ in wn.detours:
            print(f"warning: mode {m}: zero near {zc:.12g} on the box edge; "
                  f"contour nudged, zero counted inside", file=sys.stderr)
        if wn.count:
            found = locate_zeros(det, box, mode=m, angular_weight=angular_weight(media.dimension, m),
                                 symmetric=symmetric, seed=cfg.seed, total=wn.count)
            for z in found:
                if abs(z.lam) >= cfg.delta0:
                    z.degenerate = det.dirichlet_degenerate(z.lam)
                    records.append(z)
    records.sort(key=lambda z: z.sort_key())
    _write_atomic(Path(cfg.output_dir) / "eigenvalues.json", _json(_records_json(records)))
    return EXIT_OK


def cmd_free_region(cfg: RunConfig) -> int:
    media = cfg.pair()
    rep = free_region_scan(media, cfg.free_region_C, cfg.free_region_r, delta0=cfg.delta0,
                           min_side=cfg.min_side, seed=cfg.seed)
    doc = {"C": rep.C, "requested_C": cfg.free_region_C, "r": cfg.free_region_r,
           "kappa": rep.kappa, "boxes_scanned": rep.boxes_scanned,
           "violations": _records_json(rep.violations),
           "min_modulus_floor": rep.min_modulus_floor, "minimal_C": rep.minimal_C}
    _write_atomic(Path(cfg.output_dir) / "free_region.json", _json(doc))
    return EXIT_OK if not rep.violations else EXIT_CHECK


def cmd_symbol_check(cfg: RunConfig) -> int:
    media = cfg.pair()
    rep = verify_ellipticity(media, cfg.symbol_grid, cfg.delta0)
    doc = dict(rep.to_dict(), delta0=cfg.delta0, media=media.to_dict())
    _write_atomic(Path(cfg.output_dir) / "symbols.json", _json(doc))
    return EXIT_OK if rep.flat else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transmission-census",
                                description="Count and locate interior transmission eigenvalues.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("census", "sample N(r) and compare with the Weyl law"),
                       ("locate", "locate eigenvalues in a rectangle"),
                       ("free-region", "scan the eigenvalue-free region"),
                       ("symbol-check", "check ellipticity of the boundary symbol")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="path to the JSON run configuration")
        if name == "locate":
            for flag in ("--re-lo", "--re-hi", "--im-lo", "--im-hi"):
                sp.add_argument(flag, type=float, required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "census":
            return cmd_census(cfg)
        if args.command == "locate":
            return cmd_locate(cfg, args.re_lo, args.re_hi, args.im_lo, args.im_hi)
        if args.command == "free-region":
            return cmd_free_region(cfg)
        return cmd_symbol_check(cfg)
    except ConditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except NumericalError as exc:
        print(f"error: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
