#!/usr/bin/env python3
"""Regenerate the committed FCIDUMP fixtures and their sidecar metadata.

Usage: python3 generate.py [manifest.json] [output_dir]

Each manifest entry produces <label>.fcidump (canonical RHF orbitals) and
<label>.json holding geometry, basis and reference energies.
"""
import json
import math
import os
import sys

import pyscf
from pyscf import cc, fci, gto, scf
from pyscf.tools import fcidump

BASIS_WHITELIST = {"sto-3g", "6-31g", "cc-pvdz"}
FCI_DIM_LIMIT = 2_000_000


def atoms_for(spec):
    r = spec["bond_bohr"]
    mol = spec["molecule"]
    if mol == "H2":
        return [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]
    if mol == "H4":
        return [("H", (0.0, 0.0, i * r)) for i in range(4)]
    if mol == "LiH":
        return [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))]
    if mol == "N2":
        return [("N", (0.0, 0.0, 0.0)), ("N", (0.0, 0.0, r))]
    if mol == "H2O":
        half = math.radians(spec["angle_deg"]) / 2.0
        return [
            ("O", (0.0, 0.0, 0.0)),
            ("H", (r * math.sin(half), 0.0, r * math.cos(half))),
            ("H", (-r * math.sin(half), 0.0, r * math.cos(half))),
        ]
    raise ValueError(f"unknown molecule {mol}")


def generate(spec, outdir):
    if spec["basis"] not in BASIS_WHITELIST:
        raise ValueError(f"basis {spec['basis']} not in whitelist")
    if spec["bond_bohr"] <= 0:
        raise ValueError("bond length must be positive")
    mol = gto.M(atom=atoms_for(spec), basis=spec["basis"], unit="Bohr", verbose=0)
    mf = scf.RHF(mol)
    mf.conv_tol = 1e-12
    mf.max_cycle = 500
    mf.kernel()
    if not mf.converged:
        mf = scf.newton(mf).run()
    fcipath = os.path.join(outdir, spec["label"] + ".fcidump")
    meta = {
        "label": spec["label"],
        "molecule": spec["molecule"],
        "basis": spec["basis"],
        "orbitals": "canonical",
        "geometry": {"bond_bohr": spec["bond_bohr"]},
        "norb": int(mol.nao),
        "nelec": int(mol.nelectron),
        "e_hf": float(mf.e_tot),
        "generator": f"pyscf {pyscf.__version__}",
    }
    if "angle_deg" in spec:
        meta["geometry"]["angle_deg"] = spec["angle_deg"]
    try:
        fcidump.from_scf(mf, fcipath, tol=1e-15)
        norb = mf.mo_coeff.shape[1]
        na = mol.nelectron // 2
        dim = math.comb(norb, na) ** 2
        if dim <= FCI_DIM_LIMIT:
            solver = fci.FCI(mf)
            solver.conv_tol = 1e-12
            meta["e_fci"] = float(solver.kernel()[0])
        mycc = cc.CCSD(mf)
        mycc.conv_tol = 1e-12
        mycc.conv_tol_normt = 1e-10
        mycc.max_cycle = 500
        mycc.kernel()
        meta["ccsd_converged"] = bool(mycc.converged)
        meta["e_ccsd"] = float(mycc.e_tot)
        if mycc.converged:
            meta["e_ccsd_t"] = float(mycc.e_tot + mycc.ccsd_t())
    except Exception:
        if os.path.exists(fcipath):
            os.remove(fcipath)
        raise
    with open(os.path.join(outdir, spec["label"] + ".json"), "w") as fh:
        json.dump(meta, fh, indent=2)
        fh.write("\n")
    print(spec["label"], meta.get("e_hf"), meta.get("e_fci"), meta.get("e_ccsd"))


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    manifest = sys.argv[1] if len(sys.argv) > 1 else os.path.join(here, "manifest.json")
    outdir = sys.argv[2] if len(sys.argv) > 2 else os.path.join(here, "..", "..", "fixtures")
    os.makedirs(outdir, exist_ok=True)
    with open(manifest) as fh:
        specs = json.load(fh)
    for spec in specs:
        generate(spec, outdir)


if __name__ == "__main__":
    main()
