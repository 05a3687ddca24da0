#!/usr/bin/env python3
"""Download the ordinal benchmark tables listed in datasets.tsv and verify them.

Each manifest row names a dataset with its expected shape. Rows without a URL
are reported and skipped. A row without a checksum is downloaded and its
SHA-256 printed so it can be pinned; a pinned checksum that does not match is
an error. Data lands in data/<name>.csv next to this script's parent directory.
"""

import argparse
import csv
import hashlib
import sys
import urllib.request
from pathlib import Path

HERE = Path(__file__).resolve().parent


def manifest(path):
    with open(path, newline="") as f:
        rows = (line for line in f if not line.startswith("#") and line.strip())
        for r in csv.reader(rows, delimiter="\t"):
            r += [""] * (6 - len(r))
            yield {"name": r[0], "instances": int(r[1]), "features": int(r[2]),
                   "classes": int(r[3]), "url": r[4].strip(), "sha256": r[5].strip()}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--manifest", type=Path, default=HERE / "datasets.tsv")
    ap.add_argument("--dest", type=Path, default=HERE.parent / "data")
    ap.add_argument("--only", nargs="*", help="dataset names to fetch")
    args = ap.parse_args()

    args.dest.mkdir(parents=True, exist_ok=True)
    failed = False
    for d in manifest(args.manifest):
        if args.only and d["name"] not in args.only:
            continue
        if not d["url"]:
            print(f"{d['name']}: no URL pinned, skipped")
            continue
        target = args.dest / f"{d['name']}.csv"
        if not target.exists():
            with urllib.request.urlopen(d["url"]) as resp:
                target.write_bytes(resp.read())
        digest = hashlib.sha256(target.read_bytes()).hexdigest()
        if not d["sha256"]:
            print(f"{d['name']}: sha256 {digest} (not pinned)")
        elif digest != d["sha256"]:
            print(f"{d['name']}: checksum mismatch, got {digest}", file=sys.stderr)
            failed = True
            continue
        with open(target, newline="") as f:
            rows = sum(1 for _ in csv.reader(f)) - 1
        if rows != d["instances"]:
            print(f"{d['name']}: {rows} rows, expected {d['instances']}", file=sys.stderr)
            failed = True
        else:
            print(f"{d['name']}: ok ({rows} rows)")
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
