#!/usr/bin/env python3
"""Regenerate the symmetry test fixtures from spglib.

hall_settings.dat: every Hall setting of the 230 types as a generator list,
so the fingerprint can be checked for setting independence.
symmetry_oracle.dat: one random structure per space-group type (conventional
cell, expanded to P1) with spglib's number at symprec 1e-3.
"""
import sys
import random
from fractions import Fraction

import numpy as np
import spglib

sys.path.insert(0, __file__.rsplit("/", 1)[0])
from gen_spacegroup_table import key, closure, triplet  # noqa: E402


def hall_settings():
    out = ["# hall | number | generators"]
    for h in range(1, 531):
        t = spglib.get_spacegroup_type(h)
        d = spglib.get_symmetry_from_database(h)
        ops = [key(r, tr) for r, tr in zip(d["rotations"], d["translations"])]
        full = set(ops)
        gens = []
        for op in ops:
            if closure(gens) == full:
                break
            if op not in closure(gens):
                gens.append(op)
        out.append(f"{h} | {t.number} | " + "; ".join(triplet(g) for g in gens))
    return out


def lattice_for(number, rng):
    a, b, c = (rng.uniform(3.5, 7.0) for _ in range(3))
    if number <= 2:
        return a, b, c, rng.uniform(70, 110), rng.uniform(70, 110), rng.uniform(70, 110)
    if number <= 15:
        return a, b, c, 90, rng.uniform(95, 120), 90
    if number <= 74:
        return a, b, c, 90, 90, 90
    if number <= 142:
        return a, a, c, 90, 90, 90
    if number <= 194:
        return a, a, c, 90, 90, 120
    return a, a, a, 90, 90, 90


def orbit(ops, x):
    pts = []
    for r, t in ops:
        y = (r @ x + t) % 1.0
        if all(np.abs(((y - q) + 0.5) % 1.0 - 0.5).max() > 1e-6 for q in pts):
            pts.append(y)
    return pts


def lattice_matrix(a, b, c, al, be, ga):
    al, be, ga = np.radians([al, be, ga])
    v = np.sqrt(1 - np.cos(al) ** 2 - np.cos(be) ** 2 - np.cos(ga) ** 2 + 2 * np.cos(al) * np.cos(be) * np.cos(ga))
    return np.array([[a, 0, 0], [b * np.cos(ga), b * np.sin(ga), 0],
                     [c * np.cos(be), c * (np.cos(al) - np.cos(be) * np.cos(ga)) / np.sin(ga), c * v / np.sin(ga)]])


def structures(seed=20241015):
    rng = random.Random(seed)
    first_hall = {}
    for h in range(1, 531):
        first_hall.setdefault(spglib.get_spacegroup_type(h).number, h)
    out = ["# number | spglib number at 1e-3, then a CIF-lite block ending with </CIF>"]
    for number in range(1, 231):
        d = spglib.get_symmetry_from_database(first_hall[number])
        ops = list(zip(d["rotations"], d["translations"]))
        for attempt in range(200):
            params = list(lattice_for(number, rng))
            grow = max(1.0, (len(ops) / 8.0) ** (1.0 / 3.0))
            params[:3] = [x * grow for x in params[:3]]
            m = lattice_matrix(*params)
            species, frac = [], []
            for el in ["Na", "Cl"][: rng.choice([1, 2])]:
                pts = orbit(ops, np.array([rng.random() for _ in range(3)]))
                species += [el] * len(pts)
                frac += pts
            if len(frac) > 200:
                continue
            f = np.array(frac)
            dfr = f[:, None, :] - f[None, :, :]
            dfr -= np.round(dfr)
            shifts = np.array(np.meshgrid([-1, 0, 1], [-1, 0, 1], [-1, 0, 1])).T.reshape(-1, 3)
            dist = np.linalg.norm((dfr[:, :, None, :] + shifts[None, None]) @ m, axis=-1)
            dist[np.arange(len(f)), np.arange(len(f)), 13] = 1e9
            ok = dist.min() >= 1.0
            if not ok:
                continue
            z = [11 if e == "Na" else 17 for e in species]
            got = spglib.get_symmetry_dataset((m, np.array(frac), z), symprec=1e-3)
            if got is None or got.number != number:
                continue
            break
        else:
            raise RuntimeError(f"no structure for {number}")
        lines = [f"{number} | {got.number}", "<CIF>P1", " ".join(f"{x:.10f}" for x in params[:3]),
                 " ".join(f"{x:.10f}" for x in params[3:])]
        for el, f in zip(species, frac):
            lines.append(f"{el} 1 " + " ".join(f"{x % 1.0:.12f}" for x in f))
        lines[-1] += "</CIF>"
        out.extend(lines)
    return out


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "hall"
    lines = hall_settings() if target == "hall" else structures()
    sys.stdout.write("\n".join(lines) + "\n")
