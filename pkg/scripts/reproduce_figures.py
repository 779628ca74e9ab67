"""Run the figure presets and print per-configuration median infidelities.

    python3 scripts/reproduce_figures.py --scale desk --out-dir results
"""

import argparse
import pathlib
import time

from sgqst.harness import FIGURES, SCALES, emit_report, figure_preset, run_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--figures", nargs="+", choices=FIGURES, default=list(FIGURES))
    parser.add_argument("--scale", choices=SCALES, default="desk")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.figures:
        start = time.perf_counter()
        reports = [run_experiment(cfg, workers=args.workers) for cfg in figure_preset(name, args.scale, args.seed)]
        emit_report(reports, "csv", out / f"{name}-{args.scale}.csv")
        emit_report(reports, "json", out / f"{name}-{args.scale}.json")
        print(f"{name} ({args.scale}, {time.perf_counter() - start:.1f}s)")
        for rep in reports:
            c, s = rep.config, rep.final_summary
            print(f"  {c.config_id:<24} d={c.d} N={c.N} K={c.K} lam={c.lam} "
                  f"median={s['median']:.3e} iqr=[{s['q25']:.3e}, {s['q75']:.3e}]")


if __name__ == "__main__":
    main()
