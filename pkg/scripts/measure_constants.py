"""Measure the constants of every verification suite across degrees and weights.

    python scripts/measure_constants.py --out results --weights ramp,step --n 4,8,16,32
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from cmsquad import verify, weightfn


@dataclass
class Config:
    out: Path = Path("results")
    weights: list = field(default_factory=lambda: ["constant", "ramp", "step"])
    ns: list = field(default_factory=lambda: [4, 8, 16])
    grid: int = 200
    suite: list = field(default_factory=lambda: list(verify.DEFAULT_SUITE))
    eps: float = 0.2


def main(cfg):
    cfg.out.mkdir(parents=True, exist_ok=True)
    failed = []
    for name in cfg.weights:
        spec = weightfn.load(name)
        reports = verify.run_suite(spec, cfg.suite, cfg.ns, cfg.grid, cfg.eps)
        (cfg.out / f"{Path(name).stem}.txt").write_text(verify.text_report(reports), encoding="utf-8")
        (cfg.out / f"{Path(name).stem}.csv").write_text(verify.csv_report(reports), encoding="utf-8")
        status = "ok" if verify.all_passed(reports) else "FAILED"
        print(f"{name}: {len(reports)} checks, {status}")
        if status != "ok":
            failed.append(name)
    return 1 if failed else 0


def _list(text, conv=str):
    return [conv(v) for v in text.split(",") if v.strip()]


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Config.out)
    p.add_argument("--weights", type=_list, default=Config().weights)
    p.add_argument("--n", dest="ns", type=lambda s: _list(s, int), default=Config().ns)
    p.add_argument("--grid", type=int, default=Config.grid)
    p.add_argument("--suite", type=_list, default=Config().suite)
    p.add_argument("--eps", type=float, default=Config.eps)
    a = p.parse_args()
    sys.exit(main(Config(a.out, a.weights, a.ns, a.grid, a.suite, a.eps)))
