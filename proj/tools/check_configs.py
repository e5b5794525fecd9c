"""Validates the bundled configs against `rotframe schema` and checks CLI exit codes."""
import json
import pathlib
import subprocess
import sys

import jsonschema


def main():
    exe, config_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schema = json.loads(subprocess.run([exe, "schema"], check=True, capture_output=True, text=True).stdout)
    jsonschema.Draft7Validator.check_schema(schema)
    validator = jsonschema.Draft7Validator(schema)
    bad = 0
    files = sorted(config_dir.glob("*.json"))
    for path in files:
        errors = list(validator.iter_errors(json.loads(path.read_text())))
        for e in errors:
            print(f"{path.name}: {e.message}")
        bad += len(errors)
    # The schema must also reject what the parser rejects.
    for doc in ({"experiment": "orbit-invariants"},
                {"experiment": "orbit-invariants", "seed": 1, "params": {"sampels": 3}},
                {"experiment": "n1-spectrum", "seed": 1}):
        if validator.is_valid(doc):
            print(f"schema accepts invalid {doc}")
            bad += 1

    listing = subprocess.run([exe, "list"], capture_output=True, text=True)
    if listing.returncode != 0 or len(listing.stdout.splitlines()) != 8:
        print("list failed")
        bad += 1
    missing = subprocess.run([exe, "run", str(config_dir / "missing.json")], capture_output=True, text=True)
    if missing.returncode != 2:
        print(f"missing config exit code {missing.returncode}")
        bad += 1
    print(f"{len(files)} configs checked, {bad} problems")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
