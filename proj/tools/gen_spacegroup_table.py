#!/usr/bin/env python3
"""Regenerate data/spacegroups.dat from spglib's Hall-setting database.

For each space-group number the first (standard) Hall setting is taken and
reduced to a small generating set; the library closes the set on load.
"""
import sys
from fractions import Fraction

import numpy as np
import spglib


def frac(x):
    f = Fraction(x).limit_denominator(24) % 1
    return f


def key(rot, tr):
    return (tuple(int(v) for v in rot.flatten()), tuple(frac(t) for t in tr))


def compose(a, b):
    ra, ta = a
    rb, tb = b
    r = np.array(ra).reshape(3, 3) @ np.array(rb).reshape(3, 3)
    t = np.array(ra).reshape(3, 3) @ np.array([float(x) for x in tb]) + np.array([float(x) for x in ta])
    return key(r, t)


def closure(gens):
    ident = key(np.eye(3, dtype=int), np.zeros(3))
    group = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                p = compose(g, h)
                if p not in group:
                    group.add(p)
                    nxt.append(p)
        frontier = nxt
    return group


def triplet(op):
    rot, tr = op
    r = np.array(rot).reshape(3, 3)
    parts = []
    for i in range(3):
        s = ""
        for j, ax in enumerate("xyz"):
            c = r[i, j]
            if c == 1:
                s += ("+" if s else "") + ax
            elif c == -1:
                s += "-" + ax
            elif c != 0:
                raise ValueError("rotation entries must be 0/+-1 in the standard settings")
        t = tr[i]
        if t != 0:
            s += f"+{t.numerator}/{t.denominator}"
        parts.append(s)
    return ",".join(parts)


def main():
    first_hall = {}
    for h in range(1, 531):
        t = spglib.get_spacegroup_type(h)
        first_hall.setdefault(t.number, h)
    out = [
        "# crystalign space-group generator table",
        "# version: 1",
        "# source: standard (first) Hall setting of each type, spglib database",
        "# format: number | Hermann-Mauguin symbol | generators as x,y,z triplets separated by ';'",
    ]
    for number in range(1, 231):
        h = first_hall[number]
        t = spglib.get_spacegroup_type(h)
        d = spglib.get_symmetry_from_database(h)
        ops = [key(r, tr) for r, tr in zip(d["rotations"], d["translations"])]
        full = set(ops)
        gens = []
        for op in sorted(ops, key=lambda o: (o[0] == tuple(np.eye(3, dtype=int).flatten()) and all(x == 0 for x in o[1]), o)):
            if closure(gens) == full:
                break
            if op not in closure(gens):
                gens.append(op)
        assert closure(gens) == full, number
        # Drop redundant generators.
        i = 0
        while i < len(gens):
            trial = gens[:i] + gens[i + 1:]
            if trial and closure(trial) == full:
                gens = trial
            else:
                i += 1
        out.append(f"{number} | {t.international_short} | " + "; ".join(triplet(g) for g in gens))
    sys.stdout.write("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
