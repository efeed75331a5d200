"""Command line: ``contactkit {validate,run,eval,synth,config init}``.

Exit codes: 0 success, 2 validation failure, 3 pipeline error, 4 evaluation error.
The default config path comes from $CONTACTKIT_CONFIG when --config is absent.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import pipeline
from .bundle import SHAPES
from .config import load_config
from .errors import ContactKitError, ValidationError

EXIT_OK, EXIT_VALIDATION, EXIT_PIPELINE, EXIT_EVAL = 0, 2, 3, 4


def build_parser():
    p = argparse.ArgumentParser(prog="contactkit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check a scene bundle for missing or inconsistent files")
    v.add_argument("--bundle", required=True)

    r = sub.add_parser("run", help="contact maps and pseudo poses for every intent of a bundle")
    r.add_argument("--bundle", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--config")
    r.add_argument("--intent", type=int, help="only this intent id")
    r.add_argument("--threads", type=int, default=1)

    e = sub.add_parser("eval", help="episode metrics over a directory of JSONL logs")
    e.add_argument("--logs", required=True)
    e.add_argument("--maps", required=True, help="directory holding contact_map_<k>.json files")
    e.add_argument("--config")
    e.add_argument("--out", help="report path; printed to stdout when absent")

    s = sub.add_parser("synth", help="write a synthetic four-view scene bundle")
    s.add_argument("--shape", choices=SHAPES, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--resolution", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--intents", type=int, default=1)

    c = sub.add_parser("config", help="configuration helpers")
    csub = c.add_subparsers(dest="action", required=True)
    ci = csub.add_parser("init", help="write the default configuration")
    ci.add_argument("--out", default="contactkit.json")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "validate":
        findings = pipeline.cmd_validate(args.bundle)
        for f in findings:
            print(f)
        return EXIT_VALIDATION if findings else EXIT_OK

    if args.command == "run":
        try:
            cfg = load_config(args.config)
            names = pipeline.cmd_run(args.bundle, cfg, args.out, args.intent, args.threads)
        except ValidationError as exc:
            print(exc, file=sys.stderr)
            return EXIT_VALIDATION
        except (ContactKitError, ValueError, OSError) as exc:
            print(f"run failed: {exc}", file=sys.stderr)
            return EXIT_PIPELINE
        for n in names:
            print(n)
        return EXIT_OK

    if args.command == "eval":
        try:
            cfg = load_config(args.config)
            report = pipeline.cmd_eval(args.logs, args.maps, cfg, args.out)
        except (ContactKitError, ValueError, OSError, KeyError) as exc:
            print(f"eval failed: {exc}", file=sys.stderr)
            return EXIT_EVAL
        if args.out is None:
            print(json.dumps(report, indent=1, sort_keys=True))
        return EXIT_OK

    if args.command == "synth":
        try:
            out = pipeline.cmd_synth(args.shape, args.out, args.resolution, args.seed, args.intents)
        except (ContactKitError, ValueError, OSError) as exc:
            print(f"synth failed: {exc}", file=sys.stderr)
            return EXIT_PIPELINE
        print(out)
        return EXIT_OK

    if args.command == "config":
        print(pipeline.cmd_config_init(args.out))
        return EXIT_OK
    return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
