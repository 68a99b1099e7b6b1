"""Generate cases/case73_sys.m: three 24-bus areas plus a tie bus.

Areas use bus ids 101-124, 201-224, 301-324; bus 325 sits inside the
area3-area1 tie corridor.  Area 3 drops one circuit of the 20-23 parallel
pair and four ties are added (107-203, 223-318, 318-325, 325-121), giving
73 buses, 99 generators, 117 branches, and exactly two bridges (207-208,
307-308).  Area cost multipliers 1.00/1.01/0.99 break inter-area symmetry.
"""

import os
import re

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "src", "scuc_cnr", "cases")

COST_MULT = {1: 1.00, 2: 1.01, 3: 0.99}
LOAD_SCALE = 2850.0 / 2265.0  # per-area peak back to 2850 MW (system peak 8550)
DROPPED = {(3, 37)}  # (area, branch row of the second 20-23 circuit)
TIES = [
    (107, 203, 0.0700, 500, 600),
    (223, 318, 0.0740, 500, 600),
    (318, 325, 0.0520, 500, 600),
    (325, 121, 0.0480, 500, 600),
]


def parse_case24():
    with open(os.path.join(CASES, "case24_sys.m")) as fh:
        text = fh.read()
    tables = {}
    for name in ("bus", "gen", "branch", "gencost"):
        m = re.search(rf"mpc\.{name} = \[\n(.*?)\n\];", text, re.S)
        rows = []
        for line in m.group(1).splitlines():
            line = line.strip().rstrip(";")
            if line:
                rows.append([float(tok) for tok in line.split()])
        tables[name] = rows
    return tables


def main():
    t = parse_case24()
    bus_rows, gen_rows, branch_rows, cost_rows = [], [], [], []
    for area in (1, 2, 3):
        off = area * 100
        for row in t["bus"]:
            r = row[:]
            r[0] += off
            r[2] = round(r[2] * LOAD_SCALE, 2)
            bus_rows.append(r)
        for grow, crow in zip(t["gen"], t["gencost"]):
            g = grow[:]
            g[0] += off
            gen_rows.append(g)
            c = crow[:]
            c[4] = round(c[4] * COST_MULT[area], 4)  # linear $/MWh
            cost_rows.append(c)
        for i, row in enumerate(t["branch"], start=1):
            if (area, i) in DROPPED:
                continue
            r = row[:]
            r[0] += off
            r[1] += off
            branch_rows.append(r)
    bus_rows.append([325, 1, 0, 0, 0, 0, 1, 1, 0, 230, 1, 1.05, 0.95])
    for f, to, x, ra, rb in TIES:
        branch_rows.append([f, to, round(x / 8, 4), x, 0, ra, rb, rb, 0, 0, 1, -360, 360])

    def fmt(v):
        return f"{v:g}"

    out = [
        "function mpc = case73_sys",
        "% Three-area 73-bus reliability test system, DC unit-commitment variant.",
        "% Generated by scripts/make_case73.py from case24_sys.m.",
        "mpc.version = '2';",
        "mpc.baseMVA = 100;",
        "mpc.bus = [",
    ]
    out += ["\t" + "\t".join(fmt(v) for v in r) + ";" for r in bus_rows]
    out += ["];", "mpc.gen = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r) + ";" for r in gen_rows]
    out += ["];", "mpc.branch = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r) + ";" for r in branch_rows]
    out += ["];", "mpc.gencost = ["]
    out += ["\t" + "\t".join(fmt(v) for v in r) + ";" for r in cost_rows]
    out += ["];", ""]
    dest = os.path.join(CASES, "case73_sys.m")
    with open(dest, "w") as fh:
        fh.write("\n".join(out))
    print("wrote", dest, f"({len(bus_rows)} buses, {len(gen_rows)} gens, {len(branch_rows)} branches)")


if __name__ == "__main__":
    main()
