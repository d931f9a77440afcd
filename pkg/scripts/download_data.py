"""Fetch the three public UCI datasets used by the real-data recipes.

Writes ``shuttle.trn``, ``kddcup.data`` and ``Skin_NonSkin.txt`` into the
target directory. The Shuttle archive ships its training split in Unix
``compress`` format, which is expanded with ``gzip -dc``.

    python3 scripts/download_data.py --out data/raw
"""
from __future__ import annotations

import argparse
import gzip
import io
import shutil
import subprocess
import sys
import urllib.request
import zipfile
from pathlib import Path

SOURCES = {
    "shuttle": "https://archive.ics.uci.edu/static/public/148/statlog+shuttle.zip",
    "kdd": "http://kdd.ics.uci.edu/databases/kddcup99/kddcup.data.gz",
    "skin": "https://archive.ics.uci.edu/static/public/229/skin+segmentation.zip",
}


def fetch(url: str) -> bytes:
    print(f"downloading {url}", file=sys.stderr)
    with urllib.request.urlopen(url, timeout=120) as resp:
        return resp.read()


def member(archive: zipfile.ZipFile, suffix: str) -> bytes:
    names = [n for n in archive.namelist() if n.endswith(suffix)]
    if not names:
        raise FileNotFoundError(f"no member ending in {suffix!r}; archive has {archive.namelist()}")
    return archive.read(names[0])


def get_shuttle(out: Path) -> Path:
    raw = member(zipfile.ZipFile(io.BytesIO(fetch(SOURCES["shuttle"]))), "shuttle.trn.Z")
    text = subprocess.run(["gzip", "-dc"], input=raw, capture_output=True, check=True).stdout
    dest = out / "shuttle.trn"
    dest.write_bytes(text)
    return dest


def get_kdd(out: Path) -> Path:
    dest = out / "kddcup.data"
    with urllib.request.urlopen(SOURCES["kdd"], timeout=120) as resp, gzip.GzipFile(fileobj=resp) as gz:
        with dest.open("wb") as fh:
            shutil.copyfileobj(gz, fh)
    return dest


def get_skin(out: Path) -> Path:
    dest = out / "Skin_NonSkin.txt"
    dest.write_bytes(member(zipfile.ZipFile(io.BytesIO(fetch(SOURCES["skin"]))), "Skin_NonSkin.txt"))
    return dest


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/raw")
    ap.add_argument("--only", choices=sorted(SOURCES), action="append")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    getters = {"shuttle": get_shuttle, "kdd": get_kdd, "skin": get_skin}
    for name in args.only or sorted(SOURCES):
        print(getters[name](out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
