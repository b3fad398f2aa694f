"""Regenerate the committed CLI fixtures.

Writes deterministic CSV inputs (values rounded to 6 decimals so the
files round-trip exactly) and the golden machine-format outputs the CLI
tests compare against byte for byte.  Run from the repository root:

    python3 tests/fixtures/generate.py

Regenerating the goldens is only legitimate after an intentional,
reviewed change to the report format.
"""

import os
import subprocess
import sys

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))


def save(name, arr):
    np.savetxt(os.path.join(HERE, name), np.round(arr, 6), delimiter=",",
               fmt="%.6f")


def main():
    rng = np.random.default_rng(20240817)

    # regular 8 x 3 instance
    x = np.round(rng.normal(size=(8, 3)), 6)
    beta = np.array([[1.0], [-0.5], [2.0]])
    root = np.round(rng.normal(size=(8, 8)), 6)
    omega = np.round(root @ root.T / 8.0 + 0.5 * np.eye(8), 6)
    chol = np.linalg.cholesky(omega)
    y = np.round(x @ beta + chol @ rng.normal(size=(8, 1)), 6)
    save("design.csv", x)
    save("response.csv", y)
    save("dispersion.csv", omega)
    with open(os.path.join(HERE, "restrictions.csv"), "w") as f:
        f.write("1,1,0,3\n")
    with open(os.path.join(HERE, "inconsistent_restrictions.csv"), "w") as f:
        f.write("1,0,0,1\n2,0,0,3\n")

    # deficient design repaired by nothing: column 3 duplicates column 1,
    # and the committed restriction row lies inside the deficient span
    x_bad = x.copy()
    x_bad[:, 2] = x_bad[:, 0]
    y_bad = np.round(x_bad @ np.array([[1.0], [2.0], [1.0]]), 6)
    save("design_collinear.csv", x_bad)
    save("response_collinear.csv", y_bad)
    with open(os.path.join(HERE, "useless_restrictions.csv"), "w") as f:
        f.write("1,0,1,0\n")

    # malformed matrix: ragged third row
    with open(os.path.join(HERE, "bad_rows.csv"), "w") as f:
        f.write("1.0,2.0\n3.0,4.0\n5.0\n")

    # SUR systems, 3 equations x 5 periods, 2 covariates each.  The
    # period dispersion is built from generators orthogonal to (1,1,1)
    # with entries that are exact binary fractions, so its null
    # direction survives both the 6-decimal file format and float
    # parsing exactly.  Responses carry full precision: they must sit
    # in the admissible range of the parsed design to the ulp.
    n, m = 3, 5
    b1 = np.array([[1.0], [-1.0], [0.0]])
    b2 = np.array([[1.0], [1.0], [-2.0]])
    sigma = b1 @ b1.T + 0.5 * (b2 @ b2.T)
    save("sigma.csv", sigma)

    def write_sur(name, designs, coeffs):
        rows = ["equation,period,response,x1,x2"]
        for i in range(len(designs)):
            bi = coeffs[2 * i:2 * i + 2]
            for t in range(designs[i].shape[0]):
                yv = float(designs[i][t] @ bi)
                rows.append(f"{i + 1},{t + 1},{yv!r},"
                            f"{designs[i][t, 0]:.6f},{designs[i][t, 1]:.6f}")
        with open(os.path.join(HERE, name), "w") as f:
            f.write("\n".join(rows) + "\n")
        return rows

    sur_beta = np.array([1.0, 0.5, -1.0, 2.0, 0.25, 1.5])

    # equation 2 collinear within itself: rank test has a witness
    designs = [np.round(rng.normal(size=(m, 2)), 6) for _ in range(n)]
    col = np.round(rng.normal(size=(m, 1)), 6)
    designs[1] = np.hstack([col, 2.0 * col])
    write_sur("sur.csv", designs, sur_beta)

    # well-posed variant plus an explicit restriction that copies the
    # period-1 implicit row but bumps its right side by one
    designs_ok = [np.round(rng.normal(size=(m, 2)), 6) for _ in range(n)]
    write_sur("sur_ok.csv", designs_ok, sur_beta)
    g_row = np.concatenate([d[0] for d in designs_ok])
    g_rhs = sum(float(d[0] @ sur_beta[2 * i:2 * i + 2])
                for i, d in enumerate(designs_ok))
    with open(os.path.join(HERE, "conflicting_sur_restrictions.csv"), "w") as f:
        f.write(",".join(repr(float(v)) for v in g_row) + f",{g_rhs + 1.0!r}\n")

    # fixed-effects panel, 3 equations x 4 periods, 2 covariates
    n, m = 3, 4
    fe_beta = np.array([1.5, -0.7])
    effects = [0.3, -0.2, 0.8]
    rows = ["equation,period,response,x1,x2"]
    for i in range(n):
        xi = np.round(rng.normal(size=(m, 2)), 6)
        for t in range(m):
            yv = float(xi[t] @ fe_beta) + effects[i] \
                + round(0.1 * float(rng.normal()), 6)
            rows.append(f"{i + 1},{t + 1},{yv:.6f},{xi[t, 0]:.6f},{xi[t, 1]:.6f}")
    with open(os.path.join(HERE, "panel.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")
    root = np.round(rng.normal(size=(m, m)), 6)
    save("panel_sigma.csv", np.round(root @ root.T / m + 0.5 * np.eye(m), 6))
    save("panel_sigma_bad.csv", np.diag([1.0, 1.0, 1.0, -0.5]))

    # golden machine outputs
    goldens = {
        "golden_estimate.json": [
            "estimate", "--design", "design.csv", "--response", "response.csv",
            "--dispersion", "dispersion.csv", "--restrictions",
            "restrictions.csv", "--method", "rgls", "--output", "machine"],
        "golden_diagnose.json": [
            "diagnose", "--design", "design.csv", "--response", "response.csv",
            "--dispersion", "dispersion.csv", "--restrictions",
            "restrictions.csv", "--output", "machine"],
        "golden_panel.json": [
            "panel", "--panel", "panel.csv", "--sigma", "panel_sigma.csv",
            "--output", "machine"],
        "golden_simulate.json": [
            "simulate", "--scenario", "regular-gls", "--reps", "120",
            "--seed", "7", "--output", "machine"],
    }
    for name, argv in goldens.items():
        out = subprocess.run([sys.executable, "-m", "gmls"] + argv,
                             cwd=HERE, capture_output=True)
        if out.returncode != 0:
            raise SystemExit(f"{name}: exit {out.returncode}: {out.stderr.decode()}")
        with open(os.path.join(HERE, name), "wb") as f:
            f.write(out.stdout)
    print("fixtures written to", HERE)


if __name__ == "__main__":
    main()
