"""Write the three benchmark files in UCI format under ./data (or --out).

The UCI repository is not reachable from every build machine, so the files are
rebuilt from packaged copies:

* iris.data: scikit-learn's copy, with samples 35 and 38 set back to the
  values of the UCI file (scikit-learn corrects them).
* wine.data: scikit-learn's copy, class label (1-3) in the first column.
* dermatology.data: the KEEL copy shipped in the ``keel-ds`` wheel. It already
  omits the 8 samples with a missing age, and its label column is a binary
  KEEL relabeling rather than the 6 disease classes. Labels are not used by the
  analysis.

Usage: python scripts/prepare_data.py [--out data] [--keel-wheel PATH]
"""
import argparse
import hashlib
import zipfile
from importlib import resources
from pathlib import Path

from sklearn.datasets import load_iris, load_wine

KEEL_MEMBER = "keel_ds/data/imbalanced/raw/dermatology-6.dat"
IRIS_UCI_ROWS = {34: (4.9, 3.1, 1.5, 0.1), 37: (4.9, 3.1, 1.5, 0.1)}
IRIS_NAMES = ("Iris-setosa", "Iris-versicolor", "Iris-virginica")


def _fmt(v: float) -> str:
    return f"{v:g}"


def iris_text() -> str:
    ds = load_iris()
    lines = []
    for i, (row, y) in enumerate(zip(ds.data, ds.target)):
        row = IRIS_UCI_ROWS.get(i, row)
        lines.append(",".join([*(f"{v:.1f}" for v in row), IRIS_NAMES[y]]))
    return "\n".join(lines) + "\n"


def wine_text() -> str:
    ds = load_wine()
    return "\n".join(",".join([str(y + 1), *(_fmt(v) for v in row)]) for row, y in zip(ds.data, ds.target)) + "\n"


def dermatology_text(wheel: Path | None) -> str:
    if wheel is not None:
        with zipfile.ZipFile(wheel) as z:
            raw = z.read(KEEL_MEMBER).decode()
    else:
        raw = resources.files("keel_ds").joinpath(KEEL_MEMBER.split("/", 1)[1]).read_text()
    lines = [ln.strip() for ln in raw.splitlines() if ln.strip() and not ln.startswith("@")]
    return "\n".join(lines) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--keel-wheel", type=Path, help="keel_ds wheel file (default: the installed keel_ds package)")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, text in (("iris.data", iris_text()), ("wine.data", wine_text()),
                       ("dermatology.data", dermatology_text(args.keel_wheel))):
        path = args.out / name
        path.write_text(text)
        print(f"{path}: {len(text.splitlines())} rows, sha256 {hashlib.sha256(text.encode()).hexdigest()}")


if __name__ == "__main__":
    main()
