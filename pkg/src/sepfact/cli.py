"""Command-line interface.

    sepfact <command> --in PATH --out PATH [--seed N] [--eps-rank X]
                      [--count N] [--dims MxN] [--k K] [--svg PATH] [--side A|B]

Exit status is 0 on success, 2 when the input is valid but outside the
guaranteed regime, and 1 on malformed input or a violated precondition.
Reports are UTF-8 JSON with a fixed key order; without ``--out`` they go to
standard output.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from . import io
from .automorphisms import canonicalize, word_from_json
from .decomposition import certify_vk, coarse_decompose, recover
from .errors import ContractError, RegimeError, SchemaError, SepfactError
from .experiment import render_histogram_svg, sample_experiment
from .faces import face_of_ensemble, face_relation
from .numerics import Tolerance
from .septests import ppt_test
from .states import DensityMatrix, Dims, density_of, validate_state

log = logging.getLogger("sepfact")

COMMANDS = ("construct", "certify", "recover", "coarse", "face", "relation", "canon", "ppt", "sample")
EXIT_OK, EXIT_CONTRACT, EXIT_REGIME = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    command: str
    input_path: Path | None = None
    output_path: Path | None = None
    seed: int = 0
    eps_rank: float | None = None
    sample_count: int = 100
    dims: Dims | None = None
    k: int | None = None
    svg_path: Path | None = None
    side: str = "B"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ContractError(f"unknown command {self.command!r}")
        if self.sample_count < 1:
            raise ContractError("--count must be at least 1")
        if not -(2**63) <= self.seed < 2**64:
            raise ContractError("--seed must fit in 64 bits")


class RegimeRejection(RegimeError):
    """Raised by a command whose report is complete but signals a rejection."""

    def __init__(self, report):
        self.report = report
        super().__init__(report.get("reason", "rejected"))


def _dims_of(doc, cfg: RunConfig, size: int) -> Dims:
    if isinstance(doc, dict) and "m" in doc and "n" in doc:
        return io.dims_from_json(doc, "matrix")
    if cfg.dims is not None:
        return cfg.dims
    d = math.isqrt(size)
    if d * d != size:
        raise SchemaError("matrix.m", "factor dims missing; pass --dims MxN")
    return Dims(d, d)


def _load_state(cfg: RunConfig, tol: Tolerance) -> DensityMatrix:
    doc = _load(cfg)
    mat = io.matrix_from_json(doc)
    dims = _dims_of(doc, cfg, mat.shape[0])
    if mat.shape != (dims.total, dims.total):
        raise SchemaError("matrix.rows", f"a {dims} state needs a {dims.total}x{dims.total} matrix")
    return validate_state(mat, dims, tol)


def _load(cfg: RunConfig):
    if cfg.input_path is None:
        raise ContractError(f"{cfg.command} needs --in PATH")
    return io.load_file(cfg.input_path)


def _construct(cfg, tol):
    ens = io.ensemble_from_json(_load(cfg))
    rho = density_of(ens)
    return {"m": ens.dims.m, "n": ens.dims.n, **io.matrix_to_json(rho.mat)}


def _certify(cfg, tol):
    cert = certify_vk(io.ensemble_from_json(_load(cfg)), tol)
    report = cert.to_json()
    if not cert.valid:
        raise RegimeRejection({"error": "NotInRegime", **report})
    return report


def _recover(cfg, tol):
    rho = _load_state(cfg, tol)
    rec = recover(rho, tol, cfg.seed)
    return {
        "ensemble": io.ensemble_to_json(rec.ensemble),
        "residual": rec.residual,
        "retries": rec.retries,
        "certificate": rec.certificate.to_json(),
    }


def _coarse(cfg, tol):
    return coarse_decompose(io.ensemble_from_json(_load(cfg)), tol).to_json()


def _face(cfg, tol):
    return face_of_ensemble(io.ensemble_from_json(_load(cfg)), tol).to_json()


def _relation(cfg, tol):
    doc = _load(cfg)
    dims = io.dims_from_json(doc, "relation")
    vecs = doc.get("vectors") if isinstance(doc, dict) else None
    if not isinstance(vecs, list) or len(vecs) != 2:
        raise SchemaError("relation.vectors", "expected exactly two product vectors")
    pv1, pv2 = (io.product_vector_from_json(v, dims, f"relation.vectors[{i}]") for i, v in enumerate(vecs))
    return {"relation": face_relation(pv1, pv2, tol).value}


def _canon(cfg, tol):
    doc = _load(cfg)
    if isinstance(doc, dict):
        dims = io.dims_from_json(doc, "word")
        if "word" not in doc:
            raise SchemaError("word.word", "missing")
        word = word_from_json(doc["word"], dims)
    else:
        word = word_from_json(doc, cfg.dims)
    return canonicalize(word, tol).to_json()


def _ppt(cfg, tol):
    return ppt_test(_load_state(cfg, tol), cfg.side, tol).to_json()


def _sample(cfg, tol):
    if cfg.dims is None or cfg.k is None:
        raise ContractError("sample needs --dims MxN and --k K")
    report = sample_experiment(cfg.dims, cfg.k, cfg.sample_count, cfg.seed, tol)
    if cfg.svg_path is not None:
        render_histogram_svg(report["smallest_margin"], cfg.svg_path)
    return report


_HANDLERS = {
    "construct": _construct,
    "certify": _certify,
    "recover": _recover,
    "coarse": _coarse,
    "face": _face,
    "relation": _relation,
    "canon": _canon,
    "ppt": _ppt,
    "sample": _sample,
}


def _emit(cfg: RunConfig, report) -> None:
    text = io.dumps(report)
    if cfg.output_path is None:
        sys.stdout.write(text)
    else:
        Path(cfg.output_path).write_text(text, encoding="utf-8")


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute one command; returns the exit code and the emitted report."""
    try:
        tol = Tolerance.from_env(eps_rank=cfg.eps_rank)
        report = _HANDLERS[cfg.command](cfg, tol)
        code = EXIT_OK
    except RegimeRejection as exc:
        report, code = exc.report, EXIT_REGIME
    except RegimeError as exc:
        report, code = {"error": type(exc).__name__, "reason": str(exc)}, EXIT_REGIME
    except (SepfactError, ValueError, OSError) as exc:
        report, code = {"error": type(exc).__name__, "reason": str(exc)}, EXIT_CONTRACT
        if isinstance(exc, SchemaError):
            report["field"] = exc.field
    if code != EXIT_OK:
        log.error("%s: %s", report.get("error"), report.get("reason", ""))
    try:
        _emit(cfg, report)
    except OSError as exc:
        log.error("cannot write report: %s", exc)
        return EXIT_CONTRACT, report
    return code, report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors are contract errors, never the regime status
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONTRACT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sepfact", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--in", dest="input_path", type=Path)
    p.add_argument("--out", dest="output_path", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps-rank", type=float)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--dims", type=str)
    p.add_argument("--k", type=int)
    p.add_argument("--svg", dest="svg_path", type=Path)
    p.add_argument("--side", choices=("A", "B"), default="B")
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="sepfact: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command,
            input_path=args.input_path,
            output_path=args.output_path,
            seed=args.seed,
            eps_rank=args.eps_rank,
            sample_count=args.count,
            dims=Dims.parse(args.dims) if args.dims else None,
            k=args.k,
            svg_path=args.svg_path,
            side=args.side,
        )
    except ContractError as exc:
        log.error("%s", exc)
        return EXIT_CONTRACT
    code, _ = run(cfg)
    return code


if __name__ == "__main__":
    sys.exit(main())
