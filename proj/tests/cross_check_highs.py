#!/usr/bin/env python3
"""Solves exported MPS models with HiGHS and compares objectives with the
embedded solver. Exits 77 (skipped) when highspy is not installed.

usage: cross_check_highs.py <gridxpand-cli> <data-dir> <scratch-dir>
"""
import json
import pathlib
import subprocess
import sys

try:
    import highspy
except ImportError:
    print("highspy not installed; skipping")
    sys.exit(77)

CASES = [
    ("tutorial.json", ["--scenario", "base", "--cs", "on"]),
    ("tutorial.json", ["--scenario", "highload", "--cs", "on", "--siting", "fixed:end"]),
    ("deferral.json", ["--scenario", "highload", "--cs", "off"]),
    ("deferral.json", ["--scenario", "highload", "--cs", "on"]),
    ("hosting.json", ["--scenario", "highpv", "--cs", "on"]),
    ("oracle/oracle-branch5.json", ["--scenario", "base", "--cs", "on"]),
    ("oracle/oracle-vr4.json", ["--scenario", "highload", "--cs", "off"]),
]


def main():
    cli, data, scratch = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    scratch.mkdir(parents=True, exist_ok=True)
    failures = 0
    for i, (feeder, args) in enumerate(CASES):
        mps = scratch / f"case{i}.mps"
        proc = subprocess.run([cli, "export-mps", str(data / "feeders" / feeder), *args, "--gap", "0",
                               "--solve", "--out", str(mps)], capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"{feeder} {args}: export failed: {proc.stderr.strip()}")
            failures += 1
            continue
        ours = json.loads(proc.stderr.strip().splitlines()[-1])
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("mip_rel_gap", 0.0)
        h.setOptionValue("mip_abs_gap", 0.0)
        h.readModel(str(mps))
        h.run()
        status = h.modelStatusToString(h.getModelStatus())
        theirs = h.getInfo().objective_function_value
        rel = abs(theirs - ours["objective"]) / max(1.0, abs(theirs))
        ok = status == "Optimal" and ours["status"] == "optimal" and rel <= 1e-6
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {feeder} {' '.join(args)}: embedded {ours['objective']!r} "
              f"HiGHS {theirs!r} ({status}), rel {rel:.1e}")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
