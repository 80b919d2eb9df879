"""Reproducible experiment driver: seeding, scheduling, persistence.

Every stochastic quantity derives from (master seed, job path) via a hash, so
data outputs are a pure function of the configuration and identical across
worker counts.  CSV is the interchange format for sweep data, JSON for scalar
results and manifests.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import decoder, fss, lattice, noise_model, presets, spin_glass

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2

DECODE_SWEEP_HEADER = ["d", "p", "q", "r", "trials", "failures", "rate", "stderr"]
MC_RUN_HEADER = [
    "case", "p", "L", "T", "xi_over_L", "err",
    "sweep_acc", "swap_acc", "invalid_samples",
]
PHASE_HEADER = ["case", "p", "T_c", "err"]


def job_seed(master_seed: int, job_path: str) -> int:
    """Counter-based per-job seed; stable under grid re-partitioning."""
    digest = hashlib.sha256(f"{master_seed}/{job_path}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _fmt(x) -> str:
    # repr gives the shortest round-trip form, keeping CSVs byte-stable
    return repr(float(x)) if isinstance(x, float) else str(x)


def write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()


class Manifest:
    """Run manifest written before data and finalized after."""

    def __init__(self, out_dir: Path, config: dict):
        self.path = out_dir / "manifest.json"
        self.data = {
            "tool": "replab 0.1.0",
            "config": config,
            "config_hash": config_hash(config),
            "status": "incomplete",
            "started_at": time.time(),
        }
        self.write()

    def write(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finalize(self, **extra) -> None:
        self.data.update(extra)
        self.data["status"] = "complete"
        self.data["wall_clock_s"] = time.time() - self.data["started_at"]
        self.write()


def run_jobs(jobs: list, worker, n_workers: int) -> list:
    """Execute (job_id, payload) pairs; results returned in job order.

    A failed job is retried once, then the run aborts.
    """
    results = {}
    if n_workers <= 1:
        for job_id, payload in jobs:
            results[job_id] = _run_one(worker, job_id, payload)
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = {pool.submit(worker, payload): (job_id, payload) for job_id, payload in jobs}
            for fut in futures:
                job_id, payload = futures[fut]
                try:
                    results[job_id] = fut.result()
                except Exception:
                    results[job_id] = worker(payload)  # one retry, in-process
    return [results[job_id] for job_id, _ in jobs]


def _run_one(worker, job_id, payload):
    try:
        return worker(payload)
    except Exception:
        return worker(payload)  # one retry


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_rates(args) -> int:
    if args.case is not None:
        rates = presets.case_rates(args.case, args.p if args.p is not None else 0.0)
    elif args.p is not None:
        rates = noise_model.EffectiveRates(p=args.p, q=args.q or 0.0, r=args.r or 0.0)
    else:
        params = noise_model.CircuitNoiseParams(
            p_sp=args.p_sp, p_id=args.p_id, p_1=args.p_1, p_m=args.p_m, p_2=args.p_2
        )
        rates = noise_model.effective_rates_from_circuit(params)
    probs = noise_model.fundamental_probs(rates)
    out = {
        "p": rates.p,
        "q": rates.q,
        "r": rates.r,
        "pi": list(probs.as_tuple()),
    }
    try:
        coup = noise_model.nishimori_couplings(probs, normalization=args.normalization)
        out.update(
            kappa=[coup.kappa0, coup.kappa1, coup.kappa2, coup.kappa3],
            J=[coup.J1, coup.J2, coup.J3],
            T_N=coup.T_N,
            normalization=coup.policy,
        )
    except noise_model.InfiniteCouplingError as exc:
        out.update(kappa=None, J=None, T_N=None, infinite_coupling=exc.which)
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_sample(args) -> int:
    dims = lattice.LatticeDims(d=args.d, T=args.rounds)
    rates = noise_model.EffectiveRates(p=args.p, q=args.q, r=args.r)
    sample = lattice.sample_disorder(dims, rates, args.seed)
    chain = lattice.chain_from_disorder(sample)
    defects = lattice.syndrome_volume(chain)
    payload = lattice.serialize_chain(chain)
    payload["defects"] = defects.astype(int).tolist()
    payload["seed"] = args.seed
    print(json.dumps(payload))
    return EXIT_OK


def _decode_block(payload: dict) -> int:
    dims = lattice.LatticeDims(d=payload["d"], T=payload["d"])
    rates = noise_model.EffectiveRates(p=payload["p"], q=payload["q"], r=payload["r"])
    return decoder.failure_count(dims, rates, payload["trials"], payload["seed"])


def cmd_decode_sweep(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    d_list = [int(x) for x in args.d_list.split(",")]
    p_grid = [float(x) for x in args.p_grid.split(",")]
    config = {
        "subcommand": "decode-sweep",
        "case": args.case,
        "d_list": d_list,
        "p_grid": p_grid,
        "trials": args.trials,
        "block": args.block,
        "seed": args.seed,
    }
    manifest = Manifest(out_dir, config)

    jobs = []
    for d in d_list:
        for p in p_grid:
            rates = presets.case_rates(args.case, p)
            n_blocks = math.ceil(args.trials / args.block)
            for b in range(n_blocks):
                n = min(args.block, args.trials - b * args.block)
                path = f"decode/{args.case}/d{d}/p{p!r}/block{b}"
                jobs.append(
                    (
                        (d, p, b),
                        {
                            "d": d,
                            "p": rates.p,
                            "q": rates.q,
                            "r": rates.r,
                            "trials": n,
                            "seed": job_seed(args.seed, path),
                        },
                    )
                )
    counts = run_jobs(jobs, _decode_block, args.workers)

    rows = []
    for d in d_list:
        for p in p_grid:
            rates = presets.case_rates(args.case, p)
            failures = sum(
                c for (jid, _), c in zip(jobs, counts) if jid[0] == d and jid[1] == p
            )
            rate = failures / args.trials
            stderr = math.sqrt(max(rate * (1 - rate), 1.0 / args.trials) / args.trials)
            rows.append([d, p, rates.q, rates.r, args.trials, failures, rate, stderr])
    csv_path = out_dir / "decode_sweep.csv"
    write_csv(csv_path, DECODE_SWEEP_HEADER, rows)
    manifest.finalize(rows=len(rows), data=["decode_sweep.csv"])
    print(csv_path)
    return EXIT_OK


def _mc_job(payload: dict):
    rates = presets.case_rates(payload["case"], payload["p"])
    if payload["p"] == 0.0:
        J = presets.case_couplings(payload["case"], 0.0)
        bond = spin_glass.clean_bond_lattice(payload["L"], J)
    else:
        bond = spin_glass.build_bond_lattice(payload["L"], rates, seed=payload["seed"])
    schedule = spin_glass.McSchedule(
        temperatures=np.array(payload["temperatures"]),
        n_met=payload["n_met"],
        n_rounds=payload["n_rounds"],
        therm_fraction=payload["therm_fraction"],
        n_bins=payload["n_bins"],
    )
    series = spin_glass.run_disorder_sample(bond, schedule, seed=payload["seed"] + 1)
    return {
        "g0": series.g0_mean().tolist(),
        "gq": series.gq_mean().tolist(),
        "sweep_acc": series.sweep_acceptance.tolist(),
        "swap_acc": series.swap_acceptance,
    }


def _ladder_for(case: str, p: float, args) -> np.ndarray:
    if args.t_min is not None and args.t_max is not None:
        return np.geomspace(args.t_min, args.t_max, args.n_temps)
    J = presets.case_couplings(case, p)
    return fss.default_temperature_ladder(J, n_temps=args.n_temps)


def cmd_mc_run(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    L_list = [int(x) for x in args.L_list.split(",")]
    p_grid = [float(x) for x in args.p_grid.split(",")]
    config = {
        "subcommand": "mc-run",
        "case": args.case,
        "L_list": L_list,
        "p_grid": p_grid,
        "samples": args.samples,
        "n_met": args.n_met,
        "n_rounds": args.n_rounds,
        "n_temps": args.n_temps,
        "n_bins": args.n_bins,
        "t_min": args.t_min,
        "t_max": args.t_max,
        "seed": args.seed,
    }
    manifest = Manifest(out_dir, config)

    nishimori = {}
    for p in p_grid:
        if p > 0:
            nishimori[repr(p)] = fss.nishimori_line(args.case, p)

    jobs = []
    ladders = {}
    for p in p_grid:
        ladders[p] = _ladder_for(args.case, p, args).tolist()
        for L in L_list:
            for s in range(args.samples):
                path = f"mc/{args.case}/p{p!r}/L{L}/sample{s}"
                jobs.append(
                    (
                        (p, L, s),
                        {
                            "case": args.case,
                            "p": p,
                            "L": L,
                            "temperatures": ladders[p],
                            "n_met": args.n_met,
                            "n_rounds": args.n_rounds,
                            "therm_fraction": 0.5,
                            "n_bins": args.n_bins,
                            "seed": job_seed(args.seed, path),
                        },
                    )
                )
    results = run_jobs(jobs, _mc_job, args.workers)
    by_key = {jid: res for (jid, _), res in zip(jobs, results)}

    rows = []
    for p in p_grid:
        temps = ladders[p]
        for L in L_list:
            g0 = np.array([by_key[(p, L, s)]["g0"] for s in range(args.samples)])
            gq = np.array([by_key[(p, L, s)]["gq"] for s in range(args.samples)])
            sweep_acc = np.mean([by_key[(p, L, s)]["sweep_acc"] for s in range(args.samples)], axis=0)
            swap_acc = float(np.mean([by_key[(p, L, s)]["swap_acc"] for s in range(args.samples)]))
            for k, T in enumerate(temps):
                value, err = fss.xi_over_l_from_bins(g0[:, k], gq[:, k], L)
                invalid = 0
                if value is None:
                    value, err, invalid = math.nan, math.nan, args.samples
                rows.append(
                    [args.case, p, L, T, value, err, float(sweep_acc[k]), swap_acc, invalid]
                )
    csv_path = out_dir / "mc_run.csv"
    write_csv(csv_path, MC_RUN_HEADER, rows)
    manifest.finalize(
        rows=len(rows),
        data=["mc_run.csv"],
        nishimori_T=nishimori,
        ladders={repr(p): ladders[p] for p in p_grid},
    )
    print(csv_path)
    return EXIT_OK


def _read_csv(path: Path) -> list:
    with open(path) as fh:
        return list(csv.DictReader(fh))


def _require_columns(rows: list, needed: list, path) -> None:
    if not rows:
        return
    missing = [c for c in needed if c not in rows[0]]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}; expected {needed}")


def curve_family_from_mc(rows: list, case: str, p: float) -> fss.CurveFamily:
    sel = [r for r in rows if r["case"] == case and float(r["p"]) == p]
    sizes = sorted({int(r["L"]) for r in sel})
    temps = sorted({float(r["T"]) for r in sel})
    values, errors = {}, {}
    for L in sizes:
        by_t = {float(r["T"]): r for r in sel if int(r["L"]) == L}
        values[L] = np.array([float(by_t[t]["xi_over_L"]) for t in temps])
        errors[L] = np.array([float(by_t[t]["err"]) for t in temps])
    return fss.CurveFamily(x=np.array(temps), sizes=sizes, values=values, errors=errors)


def curve_family_from_decode(rows: list) -> fss.CurveFamily:
    sizes = sorted({int(r["d"]) for r in rows})
    ps = sorted({float(r["p"]) for r in rows})
    values, errors = {}, {}
    for d in sizes:
        by_p = {float(r["p"]): r for r in rows if int(r["d"]) == d}
        values[d] = np.array([float(by_p[p]["rate"]) for p in ps])
        errors[d] = np.array([float(by_p[p]["stderr"]) for p in ps])
    return fss.CurveFamily(x=np.array(ps), sizes=sizes, values=values, errors=errors)


def cmd_fss(args) -> int:
    rows = _read_csv(Path(args.input))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    estimates = []
    phase_rows = []
    if args.kind == "mc":
        _require_columns(rows, MC_RUN_HEADER, args.input)
        keys = sorted({(r["case"], float(r["p"])) for r in rows})
        for case, p in keys:
            family = curve_family_from_mc(rows, case, p)
            try:
                est = fss.find_crossing(family, provenance={"case": case, "p": p})
                estimates.append(
                    {"case": case, "p": p, "T_c": est.value, "err": est.uncertainty, "method": est.method}
                )
                phase_rows.append([case, p, est.value, est.uncertainty])
            except fss.NoCrossing as exc:
                estimates.append({"case": case, "p": p, "T_c": None, "no_crossing": str(exc)})
    else:
        _require_columns(rows, DECODE_SWEEP_HEADER, args.input)
        family = curve_family_from_decode(rows)
        est = fss.find_crossing(family, provenance={"kind": "decode"})
        estimates.append({"p_c": est.value, "err": est.uncertainty, "method": est.method})

    with open(out_dir / "thresholds.json", "w") as fh:
        json.dump(estimates, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if phase_rows:
        write_csv(out_dir / "phase_diagram.csv", PHASE_HEADER, phase_rows)
    print(out_dir / "thresholds.json")
    return EXIT_OK


def cmd_report(args) -> int:
    run_dir = Path(args.run_dir)
    report = {"run_dir": str(run_dir)}
    manifest = run_dir / "manifest.json"
    if manifest.exists():
        report["manifest"] = json.loads(manifest.read_text())
    thresholds = run_dir / "thresholds.json"
    if thresholds.exists():
        report["thresholds"] = json.loads(thresholds.read_text())
    for name in ("decode_sweep.csv", "mc_run.csv", "phase_diagram.csv"):
        if (run_dir / name).exists():
            report.setdefault("data", []).append(name)
    out = run_dir / "report.json"
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _default_workers() -> int:
    env = os.environ.get("REPLAB_WORKERS")
    if env:
        return int(env)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="replab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_rates = sub.add_parser("rates", help="circuit params or presets -> (p,q,r) and couplings")
    p_rates.add_argument("--p-sp", type=float, default=0.0)
    p_rates.add_argument("--p-id", type=float, default=0.0)
    p_rates.add_argument("--p-1", dest="p_1", type=float, default=0.0)
    p_rates.add_argument("--p-m", type=float, default=0.0)
    p_rates.add_argument("--p-2", dest="p_2", type=float, default=0.0)
    p_rates.add_argument("--case", choices=presets.CASES)
    p_rates.add_argument("--p", type=float)
    p_rates.add_argument("--q", type=float)
    p_rates.add_argument("--r", type=float)
    p_rates.add_argument("--normalization", default="J1", choices=["J1", "max"])
    p_rates.set_defaults(func=cmd_rates)

    p_sample = sub.add_parser("sample", help="sample one error chain and its syndrome")
    p_sample.add_argument("--d", type=int, required=True)
    p_sample.add_argument("--rounds", type=int, required=True)
    p_sample.add_argument("--p", type=float, required=True)
    p_sample.add_argument("--q", type=float, required=True)
    p_sample.add_argument("--r", type=float, required=True)
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.set_defaults(func=cmd_sample)

    p_dec = sub.add_parser("decode-sweep", help="logical error rates over a (d, p) grid")
    p_dec.add_argument("--case", choices=presets.CASES, required=True)
    p_dec.add_argument("--d-list", required=True)
    p_dec.add_argument("--p-grid", required=True)
    p_dec.add_argument("--trials", type=int, required=True)
    p_dec.add_argument("--block", type=int, default=2500)
    p_dec.add_argument("--seed", type=int, default=0)
    p_dec.add_argument("--out", required=True)
    p_dec.add_argument("--workers", type=int, default=_default_workers())
    p_dec.set_defaults(func=cmd_decode_sweep)

    p_mc = sub.add_parser("mc-run", help="disorder-averaged xi_L/L over a (p, L, T) grid")
    p_mc.add_argument("--case", choices=presets.CASES, required=True)
    p_mc.add_argument("--p-grid", required=True)
    p_mc.add_argument("--L-list", required=True)
    p_mc.add_argument("--samples", type=int, required=True)
    p_mc.add_argument("--n-met", type=int, default=800)
    p_mc.add_argument("--n-rounds", type=int, default=10000)
    p_mc.add_argument("--n-temps", type=int, default=24)
    p_mc.add_argument("--n-bins", type=int, default=10)
    p_mc.add_argument("--t-min", type=float)
    p_mc.add_argument("--t-max", type=float)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument("--out", required=True)
    p_mc.add_argument("--workers", type=int, default=_default_workers())
    p_mc.set_defaults(func=cmd_mc_run)

    p_fss = sub.add_parser("fss", help="crossing analysis of sweep CSVs")
    p_fss.add_argument("--in", dest="input", required=True)
    p_fss.add_argument("--kind", choices=["mc", "decode"], default="mc")
    p_fss.add_argument("--out", required=True)
    p_fss.set_defaults(func=cmd_fss)

    p_rep = sub.add_parser("report", help="bundle manifest and results of a run directory")
    p_rep.add_argument("run_dir")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USER if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, noise_model.InfiniteCouplingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
