#!/usr/bin/env python3
"""Cross-check exported models against HiGHS.

For every .bench file and phase count, exports the model with `mphase --export-lp`,
solves the relaxation and the integer program with HiGHS and compares the optima
with the built-in solver's report.

    python3 tools/crosscheck_lp.py --mphase build/tools/mphase --dir benchmarks --phases 2,3,4
"""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import highspy


def highs_optimum(path, relax):
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", 0.0)
    if relax:
        h.setOptionValue("solve_relaxation", True)
    h.readModel(str(path))
    h.run()
    if h.getModelStatus() != highspy.HighsModelStatus.kOptimal:
        return None
    return h.getInfo().objective_function_value


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--mphase", default="build/tools/mphase")
    ap.add_argument("--dir", default="benchmarks")
    ap.add_argument("--phases", default="2,3,4")
    ap.add_argument("--modes", default="baseline,fanout,holdsafe")
    ap.add_argument("--time-limit", default="300")
    args = ap.parse_args()

    failed = 0
    with tempfile.TemporaryDirectory() as tmp:
        lp = pathlib.Path(tmp) / "model.lp"
        for bench in sorted(pathlib.Path(args.dir).glob("*.bench")):
            for mode in args.modes.split(","):
                for n in args.phases.split(","):
                    cmd = [args.mphase, "--input", str(bench), "--phases", n, "--mode", mode,
                           "--export-lp", str(lp), "--report", "json", "--no-timing",
                           "--time-limit", args.time_limit]
                    run = subprocess.run(cmd, capture_output=True, text=True)
                    if run.returncode != 0:
                        print(f"{bench.stem} {mode} N={n}: mphase exit {run.returncode}: {run.stderr.strip()}")
                        failed += 1
                        continue
                    rep = json.loads(run.stdout)
                    ours_lp, ours_ilp = rep["lp_objective"], rep["dffs"]["ilp"]
                    their_lp, their_ilp = highs_optimum(lp, True), highs_optimum(lp, False)
                    # our LP objective is printed with 6 decimals
                    ok = their_lp is not None and abs(their_lp - ours_lp) < 1e-5
                    if rep["ilp_status"] == "optimal":
                        ok = ok and their_ilp is not None and abs(their_ilp - ours_ilp) < 1e-6
                    print(f"{'ok  ' if ok else 'DIFF'} {bench.stem:10} {mode:9} N={n}  "
                          f"LP {ours_lp:.4f}/{their_lp if their_lp is None else round(their_lp, 4)}  "
                          f"ILP {ours_ilp}/{their_ilp if their_ilp is None else round(their_ilp)}")
                    failed += not ok
    print(f"{failed} mismatches")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
