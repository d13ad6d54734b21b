"""Regenerate the figure set (SVG plus data CSV per plot).

    python scripts/reproduce_figures.py --out figures
"""

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from cmsquad import cli
from cmsquad.figures import FIGURE_SET


@dataclass
class Config:
    out: Path = Path("figures")
    grid: int = 400


def main(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    for job in FIGURE_SET:
        if cfg.grid != job.grid:
            job = type(job)(job.weight, job.kind, job.n, job.x0, cfg.grid)
        code = cli.main(job.argv(cfg.out))
        if code:
            return code
    return 0


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--grid", type=int, default=Config.grid)
    a = p.parse_args()
    sys.exit(main(Config(a.out, a.grid)))
