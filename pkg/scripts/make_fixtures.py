"""Write the tiny CI fixtures in the Shuttle, KDD Cup 99 and Skin file layouts.

The rows are synthetic (random numbers with the right shape and label
vocabulary), not excerpts of the real datasets.
"""
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def shuttle(rng):
    # 9 integer features + class label, whitespace separated
    counts = {"1": 120, "4": 40, "5": 20, "6": 3, "7": 4}
    rows = []
    for label, c in counts.items():
        base = rng.integers(-20, 100, size=9)
        for _ in range(c):
            rows.append(" ".join(str(int(v)) for v in base + rng.integers(-5, 6, size=9)) + f" {label}")
    rng.shuffle(rows)
    (OUT / "shuttle_sample.trn").write_text("\n".join(rows) + "\n")


def kdd(rng):
    # 41 features (3 categorical) + label with trailing dot, comma separated
    labels = ["smurf."] * 90 + ["neptune."] * 50 + ["normal."] * 40 + ["back."] * 6 + ["teardrop."] * 4
    rng.shuffle(labels)
    rows = []
    for lab in labels:
        feats = [str(round(float(v), 2)) for v in rng.gamma(2.0, 3.0, size=41)]
        feats[1] = str(rng.choice(["tcp", "udp", "icmp"]))
        feats[2] = str(rng.choice(["http", "private", "ecr_i"]))
        feats[3] = str(rng.choice(["SF", "S0", "REJ"]))
        for b in (6, 11, 20, 21):
            feats[b] = str(int(rng.integers(0, 2)))
        rows.append(",".join(feats + [lab]))
    (OUT / "kdd_sample.csv").write_text("\n".join(rows) + "\n")


def skin(rng):
    # B, G, R in 0..255 + class 1/2, tab separated
    rows = []
    for _ in range(200):
        bgr = rng.integers(0, 256, size=3)
        rows.append("\t".join(str(int(v)) for v in bgr) + f"\t{int(rng.integers(1, 3))}")
    (OUT / "skin_sample.txt").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240101)
    shuttle(rng)
    kdd(rng)
    skin(rng)
