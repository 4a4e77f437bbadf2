"""Write the bundled example models, regexes and scenario files.

Usage: python3 scripts/make_fixtures.py [OUT_DIR]   (default: fixtures/)
"""
import sys
from pathlib import Path

from finwffa import instruments as ins
from finwffa.automaton import dumps
from finwffa.regex import print_regex

MODELS = {
    "limit.wffa": ins.build_limit_order(),
    "bond.wffa": ins.build_bond(5, 100, 95),
    "ddm.wffa": ins.build_ddm(),
    "eurocall.wffa": ins.build_euro_call("long", 2, 50),
    "eurocall_short.wffa": ins.build_euro_call("short", 2, 50),
    "amercall.wffa": ins.build_american_call(2, 50),
    "bullspread.wffa": ins.build_bull_spread(1, 50, 3, 60),
}

REGEXES = {
    "bond.wfre": ins.bond_regex(5, 100, 95),
    "amercall.wfre": ins.american_call_regex(2, 50),
}

SCENARIOS = {
    "limit.csv": "# limit order at 50 for 10 shares\n"
                 "w1, a:51, a:53, a:48, a:46\n"
                 "w2, a:51, a:53, a:51, a:52\n"
                 "w3, a:51, c:0\n",
    "bond.csv": "# discount factors per period\n"
                "two, cpn:0.9, fin:0.8\n"
                "default, cpn:0.9, dfl:0.5\n"
                "three, cpn:0.95, cpn:0.9, fin:0.85\n",
    "ddm.csv": "held, div:2, div:1.5, sell:90\n"
               "sold, sell:95\n",
    "prices.csv": "low, bot:40\n"
                  "at, bot:50\n"
                  "mid, bot:55\n"
                  "high, bot:70\n"
                  "path, bot:40, bot:60, bot:55\n",
}

PAIRS = [
    ("limit.wffa", "limit.csv"),
    ("bond.wffa", "bond.csv"),
    ("ddm.wffa", "ddm.csv"),
    ("eurocall.wffa", "prices.csv"),
    ("eurocall_short.wffa", "prices.csv"),
    ("amercall.wffa", "prices.csv"),
    ("bullspread.wffa", "prices.csv"),
]

BOND_PARAMS = '{"coupon": 5, "face": 100, "spots": [0.01, 0.02, 0.03]}\n'


def write_all(out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    files = {name: dumps(A) for name, A in MODELS.items()}
    files.update({name: print_regex(R) + "\n" for name, R in REGEXES.items()})
    files.update(SCENARIOS)
    files["bond_params.json"] = BOND_PARAMS
    written = []
    for name, text in files.items():
        p = out / name
        p.write_text(text)
        written.append(p)
    return written


if __name__ == "__main__":
    target = Path(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
    for p in write_all(target):
        print(p)
