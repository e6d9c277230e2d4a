"""Write the WDBC dataset to CSV in the UCI column layout.

scikit-learn bundles the same 569-row UCI table; only the original patient
ids are missing there, so sequential ids are written instead.

    python scripts/make_wdbc_csv.py data/wdbc.csv
"""
import csv
import sys

from sklearn.datasets import load_breast_cancer

STATS = {"mean": "mean", "error": "se", "worst": "worst"}
BASES = [
    "radius", "texture", "perimeter", "area", "smoothness", "compactness",
    "concavity", "concave points", "symmetry", "fractal_dimension",
]


def column_names():
    return [f"{base}_{suffix}" for suffix in STATS.values() for base in BASES]


def main(path):
    data = load_breast_cancer()
    names = column_names()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "diagnosis", *names])
        for i, (row, target) in enumerate(zip(data.data, data.target), start=1):
            # sklearn encodes malignant as 0
            writer.writerow([i, "M" if target == 0 else "B", *(repr(float(v)) for v in row)])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/wdbc.csv")
