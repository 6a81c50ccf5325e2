"""Command-line entry point.

Exit codes: 0 fair / success, 10 unfair, 2 bad flags, 3 I/O failure,
4 unparseable dataset, 5 zero-mass certificate.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time

from . import generators as gen
from . import io as fio
from .auditor import AuditConfig, Verdict, audit, evaluate_certificate
from .core import AuditInputError, EmptyGroupError
from .metrics import hoeffding_sample_size
from .oracle import ORACLES

EXIT_OK, EXIT_FLAGS, EXIT_IO, EXIT_DATA, EXIT_EMPTY, EXIT_UNFAIR = 0, 2, 3, 4, 5, 10

log = logging.getLogger("halfspace_audit")


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="halfspace-audit",
                                description="Audit a classifier for halfspace subgroup unfairness.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("--kind", required=True,
                   choices=["gaussian-planted", "clwe-alt", "clwe-null", "table1"])
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--n", type=int, default=10000)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--T", type=float, default=0.3)
    g.add_argument("--sigma", type=float)
    g.add_argument("--mu-plant", type=float, default=0.5)

    a = sub.add_parser("audit", help="audit the labels in a dataset file")
    a.add_argument("--data", required=True)
    a.add_argument("--a", type=float, default=0.5)
    a.add_argument("--b", type=float, default=0.5)
    a.add_argument("--grid", type=int, default=1)
    a.add_argument("--epsilon", type=float, default=0.05)
    a.add_argument("--delta", type=float, default=0.05)
    a.add_argument("--oracle", choices=sorted(ORACLES), default="chow")
    a.add_argument("--mode", choices=["constructive", "nonconstructive"], default="constructive")
    a.add_argument("--gamma-prime", type=float, default=0.05)
    a.add_argument("--seed", type=int, required=True)
    a.add_argument("--out")

    e = sub.add_parser("eval-cert", help="measure a certificate on a dataset")
    e.add_argument("--data", required=True)
    e.add_argument("--certificate", required=True)
    e.add_argument("--confidence", type=float, default=0.95)

    s = sub.add_parser("estimate", help="Hoeffding sample sizes and delta budget")
    s.add_argument("--epsilon", type=float, required=True)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--grid", type=int, default=1)
    return p


def _load(path):
    try:
        return fio.read_dataset(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc}") from None
    except (fio.DatasetFormatError, AuditInputError) as exc:
        raise CliError(EXIT_DATA, f"cannot parse {path}: {exc}") from None


def _write(path, text):
    try:
        fio.atomic_write(path, text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc}") from None


def cmd_generate(args) -> int:
    if args.kind != "table1" and args.seed is None:
        raise CliError(EXIT_FLAGS, "--seed is required")
    try:
        witnesses = None
        if args.kind == "table1":
            data = gen.table_example_dataset()
        elif args.kind == "gaussian-planted":
            data, _ = gen.planted_dataset(args.d, args.n, args.seed, args.mu_plant, args.noise)
        else:
            spec = gen.ClweSpec.random(args.d, args.n, args.T, args.seed, args.sigma)
            hyp = "alternative" if args.kind == "clwe-alt" else "null"
            inst = gen.clwe_instance(spec, hyp)
            data, witnesses = inst.dataset, inst.witnesses
    except AuditInputError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    _write(args.out, fio.dataset_to_csv(data))
    if witnesses is not None:
        _write(args.out + ".witnesses.json", fio.witnesses_to_json(witnesses))
    print(f"wrote {data.n} rows (d={data.d}) to {args.out}")
    return EXIT_OK


def cmd_audit(args) -> int:
    try:
        cfg = AuditConfig(a=args.a, b=args.b, n=args.grid, epsilon=args.epsilon, delta=args.delta,
                          oracle=args.oracle, mode=args.mode, gamma_threshold=args.gamma_prime,
                          seed=args.seed)
    except AuditInputError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    data = _load(args.data)
    start = time.perf_counter()
    try:
        report = audit(data, cfg)
    except AuditInputError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    runtime_ms = (time.perf_counter() - start) * 1000.0
    if args.out:
        # runtime stays out of the file so that reruns are byte-identical
        _write(args.out, fio.report_to_json(report))
    g = report.gamma_hat
    print(f"verdict: {report.verdict.value}")
    print(f"gamma_hat: {g.point:.5f} +/- {g.half_width:.5f} (confidence {g.confidence:.4f})")
    print(f"best mu: {report.best.mu:.4f} ({len(report.trace)} grid points, oracle {cfg.oracle})")
    cert = report.published_certificate
    if cert is not None:
        print(f"certificate: normal={[round(v, 6) for v in cert.normal.tolist()]} "
              f"threshold={cert.threshold:.6f}")
    print(f"runtime_ms: {runtime_ms:.1f}", file=sys.stderr)
    return EXIT_UNFAIR if report.verdict is Verdict.UNFAIR else EXIT_OK


def cmd_eval_cert(args) -> int:
    if not 0.0 < args.confidence < 1.0:
        raise CliError(EXIT_FLAGS, "--confidence must lie in (0, 1)")
    data = _load(args.data)
    try:
        certs = fio.read_certificates(args.certificate)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {args.certificate}: {exc}") from None
    except fio.ReportFormatError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    out = []
    for h in certs:
        if h.d != data.d:
            raise CliError(EXIT_DATA, f"certificate has d={h.d}, dataset has d={data.d}")
        try:
            m = evaluate_certificate(data, None, h, args.confidence)
        except EmptyGroupError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_EMPTY
        out.append({"certificate": fio.halfspace_to_dict(h), **fio.measurement_to_dict(m)})
    sys.stdout.write(fio.dumps(out[0] if len(out) == 1 else {"measurements": out}))
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        n_samples = hoeffding_sample_size(args.epsilon, args.delta)
    except AuditInputError as exc:
        raise CliError(EXIT_FLAGS, str(exc)) from None
    if args.grid < 1:
        raise CliError(EXIT_FLAGS, "--grid must be >= 1")
    print(f"{'epsilon':<22}{args.epsilon}")
    print(f"{'delta':<22}{args.delta}")
    print(f"{'grid n':<22}{args.grid}")
    print(f"{'hoeffding N':<22}{n_samples}")
    print(f"{'per-call delta':<22}{args.delta / (2 * args.grid):.6g}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "audit": cmd_audit,
            "eval-cert": cmd_eval_cert, "estimate": cmd_estimate}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
