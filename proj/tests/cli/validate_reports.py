"""Runs the t1moco binary end to end and validates its JSON output against the shipped schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def run(binary, *args, expect=0):
    proc = subprocess.run([binary, *args], capture_output=True, text=True)
    if proc.returncode != expect:
        sys.exit(f"{' '.join(args)}: exit {proc.returncode}, expected {expect}\n{proc.stderr}")
    return proc


def main():
    binary, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    schemas = {name: json.loads((schema_dir / f"{name}.schema.json").read_text())
               for name in ("eval_report", "fit_report", "diagnostic")}
    for schema in schemas.values():
        jsonschema.Draft202012Validator.check_schema(schema)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = pathlib.Path(tmp)
        phantom, solution, baseline = tmp / "phantom", tmp / "solution", tmp / "baseline"
        run(binary, "phantom", "--seed", "5", "--out", str(phantom), "--rows", "64", "--cols", "64", "--frames", "5")
        run(binary, "fit", "--in", str(phantom / "series.json"), "--masks", str(phantom / "masks.json"),
            "--out", str(solution), "--outer-iterations", "2")
        run(binary, "fit-uncorrected", "--in", str(phantom / "series.json"), "--out", str(baseline))
        for directory in (solution, baseline):
            jsonschema.validate(json.loads((directory / "fit_report.json").read_text()), schemas["fit_report"])

        for extra in ([], ["--truth", str(phantom / "phantom.json")], ["--hausdorff", "p95", "--pooled-r2"]):
            for directory in (solution, baseline):
                proc = run(binary, "eval", "--solution", str(directory / "solution.json"),
                           "--masks", str(phantom / "masks.json"), *extra)
                report = json.loads(proc.stdout)
                jsonschema.validate(report, schemas["eval_report"])
                if ("--truth" in extra) != ("t1_rmse_ms" in report):
                    sys.exit("t1_rmse_ms presence does not follow --truth")

        for args, code in ((["fit", "--bogus"], 2), (["fit", "--in", str(tmp / "absent.json"), "--out", str(tmp / "x")], 4)):
            proc = run(binary, *args, expect=code)
            jsonschema.validate(json.loads(proc.stderr.splitlines()[0]), schemas["diagnostic"])
    print("all reports validate")


if __name__ == "__main__":
    main()
