#!/usr/bin/env python3
"""Validate the recipe manifest, every recipe config and any report JSON given on the command line."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(__file__).resolve().parent.parent
schemas = root / "docs" / "schema"


def load(p):
    with open(p) as f:
        return json.load(f)


def check(instance, schema_name, label):
    try:
        jsonschema.validate(instance, load(schemas / schema_name))
    except jsonschema.ValidationError as e:
        print(f"FAIL {label}: {e.message}")
        return False
    print(f"ok   {label}")
    return True


manifest = root / "recipes" / "recipes.json"
ok = check(load(manifest), "recipes.schema.json", manifest.name)
for r in load(manifest)["recipes"]:
    ok &= check(load(manifest.parent / r["config"]), "experiment_config.schema.json", r["config"])
for extra in sys.argv[1:]:
    ok &= check(load(extra), "report.schema.json", extra)
sys.exit(0 if ok else 1)
