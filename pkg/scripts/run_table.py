"""Train every mode on one or more problems and print the epoch/NRMSE comparison.

Writes a regular results directory, so `gapinn report` and `gapinn export`
work on the output afterwards. Desk-scale overrides apply to every run.

Example:
    python3 scripts/run_table.py poisson helmholtz --seeds 0 1 2 --eta-p 1e-3 --n-interior 2000
"""

import argparse
import sys

from gapinn import cli
from gapinn.config import ExperimentConfig, preset_config, save_config
from gapinn.training import MODES


def main(argv=None) -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("problems", nargs="+")
    ap.add_argument("--modes", nargs="+", default=list(MODES), choices=MODES)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--output-dir", default="results/table")
    ap.add_argument("--eta-p", type=float)
    ap.add_argument("--n-interior", type=int)
    ap.add_argument("--max-epochs", type=int, help="cap for the TC-terminated modes")
    ap.add_argument("--fallback-reference", action="store_true")
    args = ap.parse_args(argv)

    runs = []
    for problem in args.problems:
        for mode in args.modes:
            kw = {}
            if args.eta_p is not None:
                kw["eta_P"] = args.eta_p
            if args.n_interior is not None:
                kw["n_interior"] = args.n_interior
            if args.max_epochs is not None and mode != "dgm":
                kw["max_epochs"] = args.max_epochs
            if args.fallback_reference:
                kw["reference_resolution"] = "coarse"
            runs.append(preset_config(problem, mode, **kw))
    exp = ExperimentConfig(runs=runs, seeds=args.seeds, output_dir=args.output_dir,
                           fallback_reference=args.fallback_reference, name="table")
    path = f"{args.output_dir.rstrip('/')}.yaml"
    save_config(exp, path)
    status = cli.main(["run", path])
    cli.main(["report", args.output_dir])
    return status


if __name__ == "__main__":
    sys.exit(main())
