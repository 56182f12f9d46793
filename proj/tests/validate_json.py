"""Runs each command with --format json and validates against the shipped schema."""
import json
import subprocess
import sys

import jsonschema

tool, schema_path = sys.argv[1], sys.argv[2]
with open(schema_path) as f:
    schema = json.load(f)

runs = [
    ["survival", "--scheme", "direct", "--omega", "10", "--n-points", "21"],
    ["survival", "--scheme", "cmu:0.5,0.5", "--omega", "2", "--duration", "100"],
    ["sweep", "--omegas", "0,1,10"],
    ["cloud", "--scheme", "mru", "--omega", "10"],
    ["cloud", "--scheme", "direct", "--n", "20"],
    ["distance", "--omegas", "5", "--upsilons", "1", "--duration", "100"],
    ["search", "--omega", "5", "--n-radii", "2", "--n-phases", "2", "--duration", "100"],
]
for args in runs:
    out = subprocess.run([tool, "--format", "json", *args], capture_output=True, text=True, check=True)
    doc = json.loads(out.stdout)
    jsonschema.validate(doc, schema)
    width = len(doc["columns"])
    assert all(len(r) == width for r in doc["rows"]), args
    print("ok", " ".join(args))
