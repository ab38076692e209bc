"""Validate the JSON output of every subcommand against the shipped schema."""
import json
import subprocess
import sys

import jsonschema

RUNS = [
    ["density", "--d", "3", "--n", "2", "--points", "4"],
    ["density", "--d", "2", "--n", "3", "--r-min", "0.5", "--r-max", "1.5", "--points", "3"],
    ["density", "--d", "2", "--n", "4", "--route", "mc", "--samples", "10000", "--timing"],
    ["constant", "--d", "3", "--q", "3"],
    ["constant", "--d", "2", "--q", "4"],
    ["variance", "--d", "3", "--q", "3", "--freq-grid", "25,50"],
    ["variance", "--geometry", "spherical", "--q", "3", "--R", "3.141592653589793", "--freq", "11"],
    ["variance", "--d", "2", "--q", "3", "--freq", "20", "--method", "mc", "--trials", "200", "--resolution", "8"],
]


def main():
    exe, schema_path = sys.argv[1], sys.argv[2]
    with open(schema_path) as f:
        schema = json.load(f)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    for args in RUNS:
        proc = subprocess.run([exe, *args, "--format", "json"], capture_output=True, text=True)
        if proc.returncode != 0:
            print("FAIL exit", proc.returncode, " ".join(args), proc.stderr.strip())
            failures += 1
            continue
        errors = list(validator.iter_errors(json.loads(proc.stdout)))
        print("ok  " if not errors else "FAIL", " ".join(args))
        for e in errors:
            print("    ", e.message)
        failures += bool(errors)
    # A document that breaks the contract must be rejected.
    if validator.is_valid({"inputs": {}, "results": [], "meta": {"seed": 1}}):
        print("FAIL schema accepts a document without meta.version")
        failures += 1
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
