"""Generate cases/case2383_synth.m: a synthetic national-scale test case.

Summary statistics match the published Polish system: 2,383 buses, 327
generators, 2,895 branches with exactly 644 radial branches (bridges),
~30.1 GW generation capacity and a 21,538 MW system peak.  The graph is a
bridgeless ring-plus-chords core of 1,739 buses with 644 single-attached
spur buses.  Line ratings are sized from a proportional-dispatch DC flow at
peak so the case is lightly loaded, like the original.

Deterministic (fixed seed); real data is not redistributed here.
"""

import os

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
CASES = os.path.join(HERE, "..", "src", "scuc_cnr", "cases")

N_BUS = 2383
N_CORE = 1739
N_SPUR = N_BUS - N_CORE  # 644
N_GEN = 327
N_BRANCH = 2895
PEAK_LOAD = 21538.0
GEN_CAPACITY = 30053.0


def main():
    rng = np.random.default_rng(20240512)
    core = np.arange(1, N_CORE + 1)

    edges = [(int(core[i]), int(core[(i + 1) % N_CORE])) for i in range(N_CORE)]
    seen = {tuple(sorted(e)) for e in edges}
    n_chords = N_BRANCH - N_SPUR - N_CORE  # 512
    while len(edges) < N_CORE + n_chords:
        u, v = rng.integers(1, N_CORE + 1, size=2)
        # chords prefer short span so the graph looks grid-like, not random
        v = int((u + rng.integers(2, 40)) % N_CORE + 1)
        u = int(u)
        key = tuple(sorted((u, v)))
        if u == v or key in seen:
            continue
        seen.add(key)
        edges.append((u, v))
    for spur in range(N_CORE + 1, N_BUS + 1):
        anchor = int(rng.integers(1, N_CORE + 1))
        edges.append((anchor, spur))
    assert len(edges) == N_BRANCH

    # loads: ~62% of buses carry load; spur buses are light feeders
    load = np.zeros(N_BUS)
    loaded = rng.random(N_BUS) < 0.62
    load[loaded] = rng.gamma(2.0, 9.0, size=loaded.sum())
    load *= PEAK_LOAD / load.sum()
    load = np.round(load, 2)
    load[0] += round(PEAK_LOAD - load.sum(), 2)

    # generators on distinct core buses; capacity snapped to the target
    gen_buses = rng.choice(core, size=N_GEN, replace=False)
    gen_buses.sort()
    sizes = rng.choice([35.0, 55.0, 90.0, 120.0, 215.0, 370.0, 560.0], size=N_GEN,
                       p=[0.18, 0.2, 0.2, 0.17, 0.13, 0.08, 0.04])
    sizes *= GEN_CAPACITY / sizes.sum()
    sizes = np.round(sizes, 1)
    sizes[0] += round(GEN_CAPACITY - sizes.sum(), 1)
    pmin = np.round(sizes * 0.25, 1)
    lin_cost = np.round(rng.uniform(15.5, 19.5, size=N_GEN), 2)
    lin_cost[rng.random(N_GEN) < 0.08] = 0.8  # a few hydro-like cheap units

    reactance = np.round(rng.uniform(0.01, 0.2, size=N_BRANCH), 4)

    # proportional dispatch at peak -> DC flows -> ratings with headroom
    import sys

    sys.path.insert(0, os.path.join(HERE, "..", "src"))
    from scuc_cnr import case_io, network_model as nm

    inj = -load.copy()
    scale = load.sum() / sizes.sum()
    for b, s in zip(gen_buses, sizes):
        inj[b - 1] += s * scale
    inj -= inj.sum() / N_BUS

    buses = tuple(case_io.Bus(int(i + 1), float(load[i])) for i in range(N_BUS))
    branches = tuple(
        case_io.Branch(k + 1, int(f), int(t), float(reactance[k]), 1.0, 1.1)
        for k, (f, t) in enumerate(edges)
    )
    gens = tuple(
        case_io.Generator(i + 1, int(b), float(pmin[i]), float(sizes[i]), float(lin_cost[i]),
                          50.0, 500.0, float(sizes[i]), 1, 1)
        for i, b in enumerate(gen_buses)
    )
    profile = np.outer(load, [1.0])
    case = case_io.GridCase("tmp", buses, branches, gens, 100.0, profile,
                            {b.id: i for i, b in enumerate(buses)})
    topo = nm.Topology.from_case(case)
    sens = nm.SensitivityMatrices(topo)
    flows = np.abs(sens.flows_for(inj))
    rate_a = np.maximum(120.0, np.ceil(flows * 1.7 / 10.0) * 10.0)
    rate_b = np.round(rate_a * 1.15, 0)

    out = [
        "function mpc = case2383_synth",
        "% Synthetic national-scale case: 2383 buses, 327 gens, 2895 branches,",
        "% 644 radial branches. Generated by scripts/make_polish_scale.py.",
        "mpc.version = '2';",
        "mpc.baseMVA = 100;",
        "mpc.bus = [",
    ]
    for i in range(N_BUS):
        out.append(f"\t{i + 1}\t1\t{load[i]:g}\t0\t0\t0\t1\t1\t0\t220\t1\t1.1\t0.9;")
    out += ["];", "mpc.gen = ["]
    for i in range(N_GEN):
        out.append(
            f"\t{gen_buses[i]}\t0\t0\t0\t0\t1\t100\t1\t{sizes[i]:g}\t{pmin[i]:g}"
            f"\t0\t0\t0\t0\t0\t0\t{sizes[i]:g}\t0\t0\t0\t0\t1\t1;"
        )
    out += ["];", "mpc.branch = ["]
    for k, (f, t) in enumerate(edges):
        out.append(
            f"\t{f}\t{t}\t0\t{reactance[k]:g}\t0\t{rate_a[k]:g}\t{rate_b[k]:g}\t0\t0\t0\t1\t-360\t360;"
        )
    out += ["];", "mpc.gencost = ["]
    for i in range(N_GEN):
        out.append(f"\t2\t500\t0\t2\t{lin_cost[i]:g}\t50;")
    out += ["];", ""]
    dest = os.path.join(CASES, "case2383_synth.m")
    with open(dest, "w") as fh:
        fh.write("\n".join(out))
    print("wrote", dest)


if __name__ == "__main__":
    main()
