#!/usr/bin/env python3
"""Write the synthetic input-output fixture as CSV files for the ``wiod`` command."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from mlnetreg.fixtures import (  # noqa: E402
    N_COMMUNITIES,
    N_COUNTRIES,
    N_SECTORS,
    build_synthetic_io_bundle,
    long_format_rows,
)
from mlnetreg.ingest import write_csv_table, write_supra  # noqa: E402
from mlnetreg.monitoring import log_system_info, setup_logging  # noqa: E402

HELP_TEXT = """\
Usage: python tools/write_io_fixture.py --out-dir <dir> [--seed 2014] [--long]

Writes flows.csv (dense NL x NL grid), covariates.csv and communities.csv.
Run the pipeline on them with:
  python -m mlnetreg wiod --flows <dir>/flows.csv --covariates <dir>/covariates.csv \\
      --communities <dir>/communities.csv --vif-threshold 5
Add --average-by sector when the covariates were written with --long.
"""


def _build_cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Write the synthetic input-output fixture.", epilog=HELP_TEXT,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--seed", type=int, default=2014)
    parser.add_argument("--sectors", type=int, default=N_SECTORS)
    parser.add_argument("--countries", type=int, default=N_COUNTRIES)
    parser.add_argument("--communities", type=int, default=N_COMMUNITIES)
    parser.add_argument(
        "--long",
        action="store_true",
        help="Write covariates as sector x country rows (use with --average-by sector).",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_cli_parser().parse_args(list(argv) if argv is not None else None)
    setup_logging()

    bundle = build_synthetic_io_bundle(
        args.seed,
        n_sectors=args.sectors,
        n_countries=args.countries,
        n_communities=args.communities,
    )
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    write_supra(out_dir / "flows.csv", bundle.supra)
    names = [bundle.response_name, *bundle.covariate_names]
    if args.long:
        write_csv_table(out_dir / "covariates.csv", long_format_rows(bundle, args.seed), ["sector", "country", *names])
    else:
        rows = [
            {"node": node + 1, bundle.response_name: float(bundle.response[node]),
             **dict(zip(bundle.covariate_names, bundle.covariates[node].tolist()))}
            for node in range(bundle.n_nodes)
        ]
        write_csv_table(out_dir / "covariates.csv", rows, ["node", *names])
    write_csv_table(
        out_dir / "communities.csv",
        [{"node": node + 1, "community": int(label)} for node, label in enumerate(bundle.communities.labels)],
        ["node", "community"],
    )

    summary = f"Wrote {bundle.n_nodes}-sector, {bundle.n_layers}-country fixture to {out_dir}"
    log_system_info(summary, metadata={"seed": args.seed})
    print(summary)
    return 0


if __name__ == "__main__":  # pragma: no cover - CLI entry point
    raise SystemExit(main())
