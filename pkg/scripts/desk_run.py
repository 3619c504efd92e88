"""Run one preset configuration with desk-scale overrides and print progress.

Example:
    python3 scripts/desk_run.py helmholtz pinn --eta-p 1e-3 --n-interior 2000 --seeds 0 1 2
"""

import argparse
import json
import time

from gapinn.config import preset_config
from gapinn.training import Trainer


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("problem")
    ap.add_argument("mode")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--eta-p", type=float)
    ap.add_argument("--eta-g", type=float)
    ap.add_argument("--eta-d", type=float)
    ap.add_argument("--n-interior", type=int)
    ap.add_argument("--n-boundary", type=int)
    ap.add_argument("--max-epochs", type=int)
    ap.add_argument("--tc", type=float)
    ap.add_argument("--generator", type=int, nargs=2)
    ap.add_argument("--nrmse-every", type=int)
    ap.add_argument("--log-every", type=int, default=250)
    ap.add_argument("--fallback-reference", action="store_true")
    args = ap.parse_args()

    names = dict(eta_p="eta_P", eta_g="eta_G", eta_d="eta_D", n_interior="n_interior", n_boundary="n_boundary",
                 max_epochs="max_epochs", tc="tc", generator="generator", nrmse_every="nrmse_every")
    overrides = {dst: getattr(args, src) for src, dst in names.items() if getattr(args, src) is not None}
    if args.fallback_reference:
        overrides.update(fallback_reference=True, reference_resolution="coarse")

    for seed in args.seeds:
        cfg = preset_config(args.problem, args.mode, seed=seed, **overrides)
        t0 = time.perf_counter()

        def progress(tr):
            if tr.epoch % args.log_every == 0:
                extra = f"  NRMSE {tr.record.last('NRMSE'):.4e}" if "NRMSE" in tr.record.columns else ""
                print(f"  {tr.epoch:6d}  L_PINN {tr.record.last('L_PINN'):.4e}{extra}  "
                      f"{time.perf_counter() - t0:7.1f}s", flush=True)

        rec = Trainer(cfg).run(progress)
        out = {"seed": seed, **rec.summary(), "L_PINN": rec.last("L_PINN") if rec.rows else None,
               "seconds": round(time.perf_counter() - t0, 1)}
        print(json.dumps(out), flush=True)


if __name__ == "__main__":
    main()
