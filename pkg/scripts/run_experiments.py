#!/usr/bin/env python3
"""Run the packaged studies from a JSON config and write CSV outputs.

Equivalent to `bagcv sim --input CONFIG --output OUT`, kept as a script so
the full-scale configs in configs/ can be driven from a shell loop:

    python3 scripts/run_experiments.py configs/sampling_d1_full.json out/d1.csv

Full-scale configs take hours; the desk-scale ones finish in minutes.
"""

import sys

from bagcv.cli import main as cli_main


def main(argv):
    if len(argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    config, output = argv
    return cli_main(["sim", "--input", config, "--output", output])


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
