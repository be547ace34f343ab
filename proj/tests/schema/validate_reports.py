#!/usr/bin/env python3
"""Runs the CLI on the bundled configs and validates every report and
emitted config against the published JSON schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema
from referencing import Registry, Resource


def main() -> int:
    cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
    docs = root / "docs"
    config_schema = json.loads((docs / "config.schema.json").read_text())
    report_schema = json.loads((docs / "report.schema.json").read_text())
    registry = Registry().with_resource(config_schema["$id"], Resource.from_contents(config_schema))
    report_validator = jsonschema.Draft202012Validator(report_schema, registry=registry)
    config_validator = jsonschema.Draft202012Validator(config_schema)

    configs = sorted((root / "configs").glob("*.config"))
    failures = 0

    def check(validator, doc, what):
        nonlocal failures
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.path))
        for e in errors:
            print(f"FAIL {what}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"ok   {what}")

    def run(*args):
        out = subprocess.run([cli, *args], capture_output=True, text=True)
        if out.returncode != 0:
            raise SystemExit(f"{' '.join(args)} exited {out.returncode}: {out.stderr}")
        return json.loads(out.stdout)

    for cfg in configs:
        check(config_validator, json.loads(cfg.read_text()), f"config {cfg.name}")
        check(report_validator, run("simulate", str(cfg)), f"simulate {cfg.name}")
        check(report_validator, run("simulate", str(cfg), "--timing"), f"simulate --timing {cfg.name}")

    check(report_validator, run("plan", "--band", "4e6:10e6", "--detbw", "5e5"), "plan")
    check(report_validator, run("plan", "--band", "4e6:10e6", "--detbw", "5e5", "--validate"),
          "plan --validate")
    check(report_validator, run("plan", "--band", "5e6:5e6", "--detbw", "5e5"), "plan empty band")
    check(report_validator,
          run("montecarlo", str(root / "configs" / "paper-n1.config"), "--duration", "0.2",
              "--trials", "2", "--seed", "3"),
          "montecarlo")
    check(config_validator, run("fit", "--target-i", "0.41", "--target-e", "0.64"), "fit output")
    check(config_validator, run("fit", "--target-i", "1", "--target-e", "1"), "fit vacuum output")

    with tempfile.TemporaryDirectory() as tmp:
        bad = pathlib.Path(tmp) / "bad.config"
        bad.write_text('{"source": {"pump": 0.5}}')
        doc = json.loads(bad.read_text())
        if config_validator.is_valid(doc):
            print("FAIL schema accepts an unknown key")
            failures += 1
        else:
            print("ok   schema rejects an unknown key")

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
