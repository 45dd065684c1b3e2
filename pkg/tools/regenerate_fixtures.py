"""Regenerate the bundled CSV fixtures from scikit-learn's copies.

Development-time helper only; the package itself never imports sklearn.
The three tables are the canonical UCI Machine Learning Repository datasets
(Iris; Optical Recognition of Handwritten Digits; Breast Cancer Wisconsin
Diagnostic) exactly as redistributed by scikit-learn.

Run from the repo root:  python tools/regenerate_fixtures.py
"""

from pathlib import Path

from sklearn.datasets import load_breast_cancer, load_digits, load_iris

OUT = Path(__file__).resolve().parent.parent / "src" / "flqdsnn" / "data"


def fmt(value: float) -> str:
    # integers stay integral so the digits fixture doesn't balloon
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def write(name: str, features, labels, columns) -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    path = OUT / f"{name}.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(list(columns) + ["label"]) + "\n")
        for row, label in zip(features, labels):
            handle.write(",".join(fmt(v) for v in row) + f",{int(label)}\n")
    print(f"wrote {path} ({features.shape[0]} rows x {features.shape[1]} features)")


def main() -> None:
    iris = load_iris()
    write(
        "iris",
        iris.data,
        iris.target,
        ["sepal_length", "sepal_width", "petal_length", "petal_width"],
    )

    digits = load_digits()
    write("digits", digits.data, digits.target, [f"p{i:02d}" for i in range(64)])

    cancer = load_breast_cancer()
    write(
        "breast_cancer",
        cancer.data,
        cancer.target,
        [n.replace(" ", "_") for n in cancer.feature_names],
    )


if __name__ == "__main__":
    main()
