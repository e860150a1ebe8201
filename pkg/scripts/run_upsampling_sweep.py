"""Design error against the upsampling ratio L (N = 16 so every L divides it)."""

import argparse
from pathlib import Path

from sddisc.analysis import format_float, sweep_upsampling
from sddisc.lifting import DesignSpec
from sddisc.models import elliptic_target, lowpass_signal_model


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--N", type=int, default=16)
    ap.add_argument("--L", default="1,2,4,8,16")
    ap.add_argument("--gamma-tol", type=float, default=1e-3)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    Ls = [int(x) for x in args.L.split(",")]
    base = DesignSpec(N=args.N, gamma_rel_tol=args.gamma_tol)
    points = sweep_upsampling(elliptic_target(), lowpass_signal_model(), base.h, base.m,
                              args.N, Ls, base=base)
    lines = ["L,gamma,gamma_certified,error_norm"]
    for p in points:
        lines.append(",".join([str(p.L), format_float(p.gamma), format_float(p.gamma_certified),
                               format_float(p.error_norm)]))
        print(f"L = {p.L:2d}  gamma = {p.gamma:.6g}  error norm = {p.error_norm:.6g}")
    (out / "upsampling_sweep.csv").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
