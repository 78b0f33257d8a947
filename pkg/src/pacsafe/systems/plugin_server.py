"""Serve a built-in benchmark over the plugin protocol.

    python -m pacsafe.systems.plugin_server vinc

This is both a reference implementation of the protocol for authors of
external simulators and the fixture used to check that certification
through a plugin matches in-process certification.  ``--fault`` injects
protocol failures for testing the client.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .benchmarks import BUILTIN_NAMES, builtin


def handle(system, request: dict) -> dict:
    op = request.get("op")
    if op == "info":
        return {"name": system.name, "n": system.n, "n_d": system.n_d,
                "safe_set": system.safe_set.to_dict()}
    if op == "step":
        x = np.asarray(request["x"], dtype=np.float64)
        d = np.asarray(request["d"], dtype=np.float64)
        return {"x_next": system.step(x, d).tolist()}
    if op == "sample_d":
        return {"d": system.sample_d_hint(int(request["seed_hint"])).tolist()}
    return {"error": f"unknown op {op!r}"}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("system", choices=BUILTIN_NAMES)
    ap.add_argument("--fault", choices=("malformed", "hang", "short"),
                    help="misbehave on the first step request")
    args = ap.parse_args(argv)
    system = builtin(args.system)
    for line in sys.stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            if args.fault and request.get("op") == "step":
                if args.fault == "malformed":
                    sys.stdout.write("{not json\n")
                elif args.fault == "hang":
                    time.sleep(3600)
                else:
                    sys.stdout.write(json.dumps({"x_next": [0.0]}) + "\n")
                sys.stdout.flush()
                continue
            reply = handle(system, request)
        except (KeyError, TypeError, ValueError) as exc:
            reply = {"error": str(exc)}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
