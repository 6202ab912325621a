#!/usr/bin/env python3
"""Solve LP files written by `fraglink emit-lp` with SciPy's HiGHS backend.

Writes one JSON document with the optimal point and objective per input
file. Used to regenerate tests/golden/*.json:

    tools/solve_lp_golden.py tests/golden/two_node_undamped.lp \
        tests/golden/two_node_damped.lp > tests/golden/two_node_optimum.json
"""

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np
import scipy
from scipy.optimize import linprog

NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


def parse_expression(text):
    terms = {}
    sign, coef = 1.0, 1.0
    for token in text.split():
        if token in "+-":
            sign = -1.0 if token == "-" else 1.0
        elif NAME.match(token):
            terms[token] = terms.get(token, 0.0) + sign * coef
            sign, coef = 1.0, 1.0
        else:
            coef = float(token)
    return terms


def parse_lp(text):
    section = None
    objective, rows, bounds, order = "", [], {}, []
    pending = None
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        if line in ("Maximize", "Subject To", "Bounds", "End"):
            section = line
            continue
        if section == "Maximize":
            objective += " " + line.split(":", 1)[-1]
        elif section == "Subject To":
            pending = line if pending is None else pending + " " + line
            if "<=" in pending:
                name, body = pending.split(":", 1)
                lhs, rhs = body.split("<=")
                rows.append((name.strip(), parse_expression(lhs), float(rhs)))
                pending = None
        elif section == "Bounds":
            parts = line.split()
            order.append(parts[0])
            bounds[parts[0]] = (None, None) if parts[1] == "free" else (float(parts[2]),) * 2
    return parse_expression(objective), rows, bounds, order


def solve(path):
    objective, rows, bounds, order = parse_lp(Path(path).read_text())
    index = {name: k for k, name in enumerate(order)}
    c = np.zeros(len(order))
    for name, coef in objective.items():
        c[index[name]] = -coef  # linprog minimizes
    a = np.zeros((len(rows), len(order)))
    b = np.zeros(len(rows))
    for r, (_, terms, rhs) in enumerate(rows):
        for name, coef in terms.items():
            a[r, index[name]] = coef
        b[r] = rhs
    result = linprog(c, A_ub=a, b_ub=b, bounds=[bounds[n] for n in order], method="highs")
    if result.status != 0:
        sys.exit(f"{path}: {result.message}")
    return {
        "lp": Path(path).name,
        "objective": -result.fun,
        "point": {name: float(result.x[index[name]]) for name in order},
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("lp_files", nargs="+")
    args = parser.parse_args()
    doc = {
        "solver": f"scipy {scipy.__version__} linprog(method='highs')",
        "solutions": [solve(p) for p in args.lp_files],
    }
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
