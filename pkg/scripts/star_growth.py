#!/usr/bin/env python3
"""Hub-update cost on a growing star, per epsilon.

Builds a star R(0,i), S(i,0) in bands, probes the cost of toggling the
closing edge T(0,0) after each band, and subtracts the cost of an
unconnected probe so only the size-dependent part remains. At epsilon 1
the residual doubles with the spoke count; smaller epsilons cap it.
"""

import argparse

from trimaint.driver import Driver, make_engine


def probe_costs(epsilon, bands):
    drv = Driver(make_engine("d0", epsilon))
    spokes = 0
    rows = []
    for band, n in enumerate(bands):
        while spokes < n:
            spokes += 1
            drv.on_update("R", (0, spokes), 1)
            drv.on_update("S", (spokes, 0), 1)
        off = (9000 + band, 9500 + band)
        base = drv.on_update("T", off, 1)["total"]
        drv.on_update("T", off, -1)
        cost = drv.on_update("T", (0, 0), 1)["total"]
        drv.on_update("T", (0, 0), -1)
        rows.append(cost - base)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--bands", default="32,64,128,256,512,1024,2048")
    ap.add_argument("--epsilons", default="1,0.5")
    args = ap.parse_args()
    bands = [int(tok) for tok in args.bands.split(",")]
    epsilons = [float(tok) for tok in args.epsilons.split(",")]
    cols = {eps: probe_costs(eps, bands) for eps in epsilons}
    header = "spokes" + "".join(f"  eps={eps:g}" for eps in epsilons)
    print(header)
    for i, n in enumerate(bands):
        print(f"{n:6d}" + "".join(f"  {cols[eps][i]:7d}" for eps in epsilons))


if __name__ == "__main__":
    main()
