#!/usr/bin/env python3
"""Print the finite-depth trace of a point of the triadic interval samples.

    python3 scripts/triadic_trace.py --point 1/2 --levels 4
"""
import argparse

from invpers import trace_point, triadic_fas


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--point", default="1/2", help="point label, e.g. 0, 1/3, 1/2")
    ap.add_argument("--levels", type=int, default=4)
    args = ap.parse_args()

    fas = triadic_fas(args.levels, include_half=args.point == "1/2")
    X = fas.space
    if args.point not in X.index:
        ap.error(f"{args.point} is not a sample point at depth {args.levels}")
    for t in trace_point(fas, X.index[args.point]):
        eps = fas.level(t.index).epsilon
        star = ", ".join(X.point_ids[i] for i in t.star)
        mark = "stable" if t.stabilized else "      "
        print(f"n={t.index}  eps={eps:.5f}  {mark}  d_H={t.hausdorff:.5f}  X*={{{star}}}")


if __name__ == "__main__":
    main()
