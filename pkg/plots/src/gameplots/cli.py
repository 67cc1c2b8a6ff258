"""Command-line entry point: ``plots --spec spec.json``.

The spec file holds either one figure object or ``{"figures": [...]}``.
Each object carries ``inputs`` (CSV paths), ``kind``, ``out``, and optional
``labels``.  Relative input/output paths resolve against the spec file's
directory, so a results directory can carry its own plotting spec.

Exit codes: 0 on success, 2 for an unreadable or invalid spec, 1 when
rendering fails (schema mismatch, empty inputs).
"""

import argparse
import json
import os
import sys

from .figures import FigureSpec, render


def _resolve(base, path):
    return path if os.path.isabs(path) else os.path.join(base, path)


def load_specs(path):
    """FigureSpec list from a JSON spec file.  Raises ValueError on any
    structural problem; FigureSpec validation covers the rest."""
    try:
        with open(path) as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ValueError(f"cannot read spec file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"spec file is not valid JSON: {exc}") from exc

    if isinstance(payload, dict) and "figures" in payload:
        entries = payload["figures"]
    elif isinstance(payload, dict):
        entries = [payload]
    else:
        entries = payload
    if not isinstance(entries, list) or not entries:
        raise ValueError("spec file must hold a figure object or a non-empty list")

    base = os.path.dirname(os.path.abspath(path))
    specs = []
    for n, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ValueError(f"figure {n}: expected an object, got {type(entry).__name__}")
        for key in ("inputs", "kind", "out"):
            if key not in entry:
                raise ValueError(f"figure {n}: missing required key {key!r}")
        unknown = set(entry) - {"inputs", "kind", "out", "labels"}
        if unknown:
            raise ValueError(f"figure {n}: unknown keys {sorted(unknown)}")
        inputs = entry["inputs"]
        if isinstance(inputs, str):
            inputs = [inputs]
        specs.append(
            FigureSpec(
                inputs=tuple(_resolve(base, p) for p in inputs),
                kind=entry["kind"],
                out=_resolve(base, entry["out"]),
                labels=tuple(entry["labels"]) if entry.get("labels") else None,
            )
        )
    return specs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render figures and tables from experiment artifacts."
    )
    parser.add_argument("--spec", required=True, help="JSON figure spec file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        specs = load_specs(args.spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for spec in specs:
        try:
            written = render(spec)
        except Exception as exc:
            print(f"error rendering {spec.kind} -> {spec.out}: {exc}", file=sys.stderr)
            return 1
        print(f"wrote {written}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
