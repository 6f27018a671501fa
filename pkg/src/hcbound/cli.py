"""Command line entry point: ``hcbound certify | verify | demo``.

Every run writes into a fresh directory ``<out>/<command>-<UTC timestamp>``;
existing directories are never reused.  Exit codes: 0 success, 2 usage or
mismatched input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .certificate import LowerBoundCertificate, structure_hash
from .errors import HCBoundError
from .pipeline import build_pipeline
from .verify import DEFAULT_TOLERANCES, VerifyConfig, positivity_counterexample_demo, sample_verify

log = logging.getLogger("hcbound")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 3
    blocks: Optional[list] = None
    family: str = "sl"
    seed: int = 0
    samples: int = 200
    radii: dict = field(default_factory=lambda: {"min_exp": 0.0, "max_exp": 3.0, "count": 20})
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "runs"
    structure_given: bool = False

    def validate(self):
        if self.family != "sl":
            raise UsageError(f"unsupported algebra family {self.family!r}; only 'sl' is available")
        if not isinstance(self.n, int) or self.n < 2:
            raise UsageError(f"n must be an integer >= 2, got {self.n!r}")
        if self.blocks is None:
            self.blocks = [1] * self.n
        if not self.blocks or any((not isinstance(b, int)) or b <= 0 for b in self.blocks):
            raise UsageError(f"blocks must be positive integers, got {self.blocks!r}")
        if sum(self.blocks) != self.n:
            raise UsageError(f"blocks {self.blocks} do not sum to n = {self.n}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise UsageError("seed must be an unsigned 64-bit integer")
        if not isinstance(self.samples, int) or self.samples < 1:
            raise UsageError("samples must be >= 1")
        for k in ("min_exp", "max_exp", "count"):
            if k not in self.radii:
                raise UsageError(f"radii.{k} missing")
        if int(self.radii["count"]) < 1 or self.radii["max_exp"] < self.radii["min_exp"]:
            raise UsageError("radii must have count >= 1 and max_exp >= min_exp")
        for k, v in self.tolerances.items():
            if not isinstance(v, (int, float)) or v <= 0:
                raise UsageError(f"tolerance {k} must be positive, got {v!r}")
        return self

    def to_dict(self) -> dict:
        return {
            "algebra": {"family": self.family, "n": self.n},
            "blocks": list(self.blocks),
            "seed": self.seed,
            "samples": self.samples,
            "radii": dict(self.radii),
            "tolerances": dict(self.tolerances),
            "output_dir": self.output_dir,
        }

    def verify_config(self) -> VerifyConfig:
        return VerifyConfig(seed=self.seed, samples=self.samples,
                            min_exp=float(self.radii["min_exp"]),
                            max_exp=float(self.radii["max_exp"]),
                            count=int(self.radii["count"]),
                            tolerances=dict(self.tolerances))


def _parse_blocks(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"blocks must be comma separated integers: {text!r}")


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        alg = doc.get("algebra", {})
        cfg.family = alg.get("family", cfg.family)
        if "n" in alg:
            cfg.n = alg["n"]
            cfg.structure_given = True
        if "blocks" in doc:
            cfg.blocks = list(doc["blocks"])
            cfg.structure_given = True
        cfg.seed = doc.get("seed", cfg.seed)
        cfg.samples = doc.get("samples", cfg.samples)
        cfg.radii.update(doc.get("radii", {}))
        cfg.tolerances.update(doc.get("tolerances", {}))
        cfg.output_dir = doc.get("output_dir", cfg.output_dir)
        if "blocks" in doc and "n" not in alg:
            cfg.n = sum(cfg.blocks)
    if args.n is not None:
        cfg.n = args.n
        cfg.structure_given = True
        if args.blocks is None and cfg.blocks is not None and sum(cfg.blocks) != cfg.n:
            cfg.blocks = None
    if args.blocks is not None:
        cfg.blocks = args.blocks
        cfg.structure_given = True
        if args.n is None:
            cfg.n = sum(args.blocks)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    return cfg


def new_run_dir(root: str, command: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%fZ")
    base = Path(root) / f"{command}-{stamp}"
    path = base
    i = 1
    while path.exists():
        path = base.with_name(f"{base.name}-{i}")
        i += 1
    path.mkdir(parents=True)
    return path


def _write_json(path: Path, doc) -> None:
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2, sort_keys=True) + "\n"
    path.write_text(text, encoding="utf-8")


def _error_doc(kind: str, message: str, **extra) -> dict:
    doc = {"error": kind, "message": message}
    doc.update(extra)
    return doc


def _fail(code: int, doc: dict, run_dir: Optional[Path] = None) -> int:
    if run_dir is not None:
        _write_json(run_dir / "error.json", doc)
    print(json.dumps(doc, sort_keys=True), file=sys.stderr)
    return code


def cmd_certify(cfg: RunConfig) -> int:
    run_dir = new_run_dir(cfg.output_dir, "certify")
    _write_json(run_dir / "config.json", cfg.to_dict())
    try:
        pipe = build_pipeline(cfg.n, cfg.blocks, cfg.tolerances)
    except HCBoundError as exc:
        return _fail(EXIT_NUMERIC, _error_doc(type(exc).__name__, str(exc),
                                              config=cfg.to_dict()), run_dir)
    if pipe.trivial:
        log.warning("single block %s: n_P = 0, emitting the trivial certificate", cfg.blocks)
    path = run_dir / "certificate.json"
    _write_json(path, pipe.cert.to_json())
    print(json.dumps({"run_dir": str(run_dir), "certificate": str(path),
                      "final_hc": pipe.cert.final_hc, "final_psi": pipe.cert.final_psi}))
    return EXIT_OK


def cmd_verify(cfg: RunConfig, cert_path: str) -> int:
    try:
        cert = LowerBoundCertificate.from_json(Path(cert_path).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        return _fail(EXIT_USAGE, _error_doc("CertificateUnreadable", str(exc)))
    cert_hash = structure_hash(cert.algebra["family"], cert.algebra["n"], cert.blocks)
    if cert.build_info.get("structure_hash") != cert_hash:
        return _fail(EXIT_USAGE, _error_doc("CertificateCorrupt",
                                            "structure hash does not match algebra/blocks"))
    if cfg.structure_given:
        want = structure_hash(cfg.family, cfg.n, cfg.blocks)
        if want != cert_hash:
            return _fail(EXIT_USAGE, _error_doc(
                "CertificateMismatch", "certificate does not match the configured algebra/blocks",
                certificate={"algebra": cert.algebra, "blocks": list(cert.blocks)},
                config={"algebra": {"family": cfg.family, "n": cfg.n}, "blocks": cfg.blocks}))
    else:
        cfg.family = cert.algebra["family"]
        cfg.n = int(cert.algebra["n"])
        cfg.blocks = list(cert.blocks)
    run_dir = new_run_dir(cfg.output_dir, "verify")
    _write_json(run_dir / "config.json", cfg.to_dict())
    try:
        pipe = build_pipeline(cfg.n, cfg.blocks, cfg.tolerances)
        report = sample_verify(pipe.module, pipe.gs, cert, cfg.verify_config())
    except HCBoundError as exc:
        return _fail(EXIT_NUMERIC, _error_doc(type(exc).__name__, str(exc)), run_dir)
    _write_json(run_dir / "report.json", report.to_json())
    print(json.dumps({"run_dir": str(run_dir), "report": str(run_dir / "report.json"),
                      "passed": report.passed, "violations": report.violations}))
    return EXIT_OK if report.passed else EXIT_NUMERIC


def cmd_demo(cfg: RunConfig) -> int:
    run_dir = new_run_dir(cfg.output_dir, "demo")
    _write_json(run_dir / "demo.json", positivity_counterexample_demo())
    print(json.dumps({"run_dir": str(run_dir), "demo": str(run_dir / "demo.json")}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override its values")
    common.add_argument("--seed", type=int, help="sampling seed (unsigned 64-bit)")
    common.add_argument("--out", help="root directory for run outputs (default: runs)")
    common.add_argument("--blocks", type=_parse_blocks, help="block sizes, e.g. 1,1,1")
    common.add_argument("--n", type=int, help="matrix size of sl(n)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="hcbound",
        description="Certified lower bounds for a_Pbar(exp X)^rho_P on block parabolics of sl(n).")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{certify,verify,demo}")
    sub.add_parser("certify", parents=[common], help="build and write certificate.json")
    pv = sub.add_parser("verify", parents=[common],
                        help="sample-check a certificate against psi and the oracle")
    pv.add_argument("certificate", help="path to certificate.json")
    sub.add_parser("demo", parents=[common],
                   help="positive polynomial with no polynomial lower bound")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        if args.command != "demo":
            cfg.validate()
    except UsageError as exc:
        return _fail(EXIT_USAGE, _error_doc("UsageError", str(exc)))
    if args.command == "certify":
        return cmd_certify(cfg)
    if args.command == "verify":
        return cmd_verify(cfg, args.certificate)
    return cmd_demo(cfg)


if __name__ == "__main__":
    sys.exit(main())
