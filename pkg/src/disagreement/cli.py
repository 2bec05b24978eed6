"""Command line entry point.

    python -m disagreement synthetic --repeats 2 --iters 20000 --out runs/syn
    python -m disagreement mnist47 --mnist-dir ~/data/mnist --mu 0.4 --out runs/m47
    python -m disagreement fetch --mnist-dir ~/data/mnist

Every subcommand prints a one-line JSON summary on stdout. Failures print a
JSON object with an ``error`` key on stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import gzip
import hashlib
import json
import logging
import shutil
import sys
import urllib.request
from pathlib import Path

from .core import RejectedInput
from .harness import EXPERIMENTS, ExperimentConfig, load_config, run_experiment
from .mnist import MNIST_FILES

log = logging.getLogger("disagreement")

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CHECKSUM = 4
EXIT_INTERNAL = 1

# sha256 of the uncompressed standard IDX files
MNIST_SHA256 = {
    "train-images-idx3-ubyte": "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db",
    "train-labels-idx1-ubyte": "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5",
    "t10k-images-idx3-ubyte": "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7",
    "t10k-labels-idx1-ubyte": "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2",
}
DEFAULT_MIRROR = "https://ossci-datasets.s3.amazonaws.com/mnist/"


class ChecksumError(RuntimeError):
    pass


def sha256_of(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_source(source: str, name: str) -> bytes:
    """Bytes of ``name`` from a directory or URL prefix; ``.gz`` variants are tried too."""
    if "://" not in source:
        root = Path(source)
        for cand in (root / name, root / (name + ".gz")):
            if cand.is_file():
                raw = cand.read_bytes()
                return gzip.decompress(raw) if cand.suffix == ".gz" else raw
        raise FileNotFoundError(f"{name} not found under {root}")
    prefix = source if source.endswith("/") else source + "/"
    last = None
    for suffix in (".gz", ""):
        try:
            with urllib.request.urlopen(prefix + name + suffix, timeout=60) as resp:
                raw = resp.read()
            return gzip.decompress(raw) if suffix else raw
        except OSError as exc:  # URLError subclasses OSError
            last = exc
    raise FileNotFoundError(f"could not download {name} from {prefix}: {last}")


def fetch_mnist(dest, source: str = DEFAULT_MIRROR) -> dict:
    """Copy the four IDX files into ``dest`` and verify their sha256 digests.

    Files already present with the right digest are left alone. A file whose
    digest does not match is not written.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    status = {}
    for name in (f for pair in MNIST_FILES.values() for f in pair):
        target = dest / name
        if target.is_file() and sha256_of(target) == MNIST_SHA256[name]:
            status[name] = "present"
            continue
        blob = _read_source(source, name)
        digest = hashlib.sha256(blob).hexdigest()
        if digest != MNIST_SHA256[name]:
            raise ChecksumError(f"{name}: sha256 {digest} does not match {MNIST_SHA256[name]}")
        tmp = target.with_suffix(".part")
        tmp.write_bytes(blob)
        shutil.move(tmp, target)
        status[name] = "fetched"
    return status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, json.dumps({"status": "error", "error": "usage", "message": message}) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="disagreement", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", type=Path, help="flat JSON config; flags override its values")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mu", type=float, help="single noise level instead of the default sweep")
        sp.add_argument("--iters", type=int, dest="N", help="iterations per run (N)")
        sp.add_argument("--repeats", type=int)
        sp.add_argument("--out", dest="output_dir", help="output directory for CSV/JSON files")
        sp.add_argument("--mnist-dir", dest="mnist_dir")
        sp.add_argument("--no-traces", action="store_true", help="skip per-iteration trace CSVs")
    fp = sub.add_parser("fetch", help="download MNIST IDX files and verify checksums")
    fp.add_argument("--mnist-dir", dest="mnist_dir", required=True, help="destination directory")
    fp.add_argument("--source", default=DEFAULT_MIRROR, help="URL prefix or local directory")
    return p


def _config_from_args(args) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in ("seed", "mu", "N", "repeats", "output_dir", "mnist_dir")}
    if args.no_traces:
        overrides["write_traces"] = False
    if args.config is not None:
        cfg = load_config(args.config, **overrides)
        if cfg.experiment != args.command:
            raise RejectedInput(f"config is for {cfg.experiment!r} but subcommand is {args.command!r}")
        return cfg
    return ExperimentConfig(args.command, **{k: v for k, v in overrides.items() if v is not None})


def _summary(result) -> dict:
    out = {"status": "ok", "experiment": result.config.experiment}
    if result.config.output_dir:
        out["output_dir"] = str(result.config.output_dir)
    if "pass" in result.report:
        out["pass"] = result.report["pass"]
    if result.rows:
        out["rows"] = len(result.rows)
    curves = result.report.get("curves", {})
    if curves:
        out["summary"] = {k: {"best": v["best"], "final_phase": v["final_phase"]} for k, v in curves.items()}
    return out


def _fail(kind: str, msg: str, code: int) -> int:
    print(json.dumps({"status": "error", "error": kind, "message": msg}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s", stream=sys.stderr)
    try:
        if args.command == "fetch":
            status = fetch_mnist(args.mnist_dir, args.source)
            print(json.dumps({"status": "ok", "files": status}))
            return 0
        result = run_experiment(_config_from_args(args))
    except ChecksumError as exc:
        return _fail("checksum", str(exc), EXIT_CHECKSUM)
    except FileNotFoundError as exc:
        return _fail("missing_data", str(exc), EXIT_DATA)
    except (RejectedInput, TypeError, json.JSONDecodeError) as exc:
        return _fail("config", str(exc), EXIT_CONFIG)
    except Exception as exc:  # noqa: BLE001 - last resort, still machine-readable
        log.exception("unexpected failure")
        return _fail("internal", f"{type(exc).__name__}: {exc}", EXIT_INTERNAL)
    print(json.dumps(_summary(result)))
    return 0
