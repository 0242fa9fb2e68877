#!/usr/bin/env python3
"""Reproduce every reference artifact in one sweep.

Writes, under --out (default ./out):
  tables/<id>/        table_<id>.csv + report.json for tables I..V
  figures/            figure_fig{4,5,6}.csv
  equilibria/<tag>/   equilibrium.json per (code, pe) instance
  oracle/             exact best-response audit on the enumerable code

Exit code is nonzero if any step fails its hard tolerance.
"""

import argparse
import sys
from pathlib import Path

from signguard import cli
from signguard.evaluate import REFERENCE_CODES, REFERENCE_PE_GRID


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out", help="output directory (default: ./out)")
    parser.add_argument(
        "--skip-oracle", action="store_true",
        help="skip the full-space best-response audit (the slowest step)",
    )
    args = parser.parse_args()
    out = Path(args.out)

    worst = 0
    for table in ("I", "II", "III", "IV", "V"):
        worst = max(worst, cli.main(["tables", table, "--out", str(out / "tables" / table)]))
    for figure in ("fig4", "fig5", "fig6"):
        worst = max(worst, cli.main(["figures", figure, "--out", str(out / "figures")]))
    for code in REFERENCE_CODES:
        flag = f"{code.n},{code.k},{code.d},{code.q}"
        for pe in REFERENCE_PE_GRID:
            tag = f"{code.n}-{code.k}-{code.d}-{code.q}-pe{pe}"
            worst = max(
                worst,
                cli.main(["solve", "--code", flag, "--pe", str(pe),
                          "--out", str(out / "equilibria" / tag)]),
            )
    if not args.skip_oracle:
        worst = max(
            worst,
            cli.main(["oracle", "--code", "7,3,5,8", "--pe", "0.05",
                      "--out", str(out / "oracle")]),
        )
    print(f"done; artifacts under {out} (worst exit code {worst})")
    return worst


if __name__ == "__main__":
    sys.exit(main())
