"""Command line entry: run orchestration and report emission.

Exit codes: 0 all checks certified or diagnostic, 1 configuration error,
2 any check violated.  Reports are deterministic for a fixed config and
seed; figures render next to the delimited output.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from fractions import Fraction

from . import certify, engine, plots, report
from .config import RunConfig, load_config, stationary_selftest_config
from .errors import ConfigError
from .markov import WeightSpec


def _threads() -> int:
    raw = os.environ.get("DDM_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _status(records) -> str:
    return "violated" if any(r.status == "violated" for r in records) else "ok"


def _base_payload(cfg: RunConfig, mode: str) -> dict:
    return {
        "mode": mode,
        "seed": cfg.seed,
        "config": cfg.raw,
        "horizon": cfg.horizon.as_dict(),
    }


def run_phi(cfg: RunConfig, out: str):
    records = []
    brackets = []
    results = []
    for q in cfg.queries:
        br, recs = certify.phi_bracket(
            cfg.model, q, cfg.horizon, eps_ladder=cfg.eps_ladder or None
        )
        records.extend(recs)
        brackets.append(br)
        seq = engine.phi_shift_sequence(cfg.model, q, cfg.horizon, n_max=3)
        horizons = [engine.Horizon(d, cfg.horizon.length)
                    for d in range(cfg.horizon.depth + 1)]
        chain, chain_ok = engine.horizon_chain(cfg.model, q, horizons)
        if not chain_ok:
            records.append(certify.CheckRecord(
                "horizon-monotonicity", {"query": q.literal()}, 0.0, 1.0, -1.0,
                "violated", "growing the horizon raised the truncated minimum",
            ))
        results.append({
            "bracket": br.as_report(),
            "shift_sequence": seq.as_report(),
            "horizon_chain": {"values": chain, "monotone": chain_ok},
        })
    payload = _base_payload(cfg, "phi")
    payload["results"] = results
    payload["checks"] = [r.as_report() for r in records]
    payload["status"] = _status(records)
    report.write_json(out + "-phi.json", payload)
    plots.bracket_figure(brackets, out + "-phi.png", "certified brackets")
    return records


def run_entropy(cfg: RunConfig, out: str):
    records = []
    results = []
    for q in cfg.queries:
        recs, ent, off = certify.entropy_identity_checks(
            cfg.model, q, cfg.horizon, cfg.eps_ladder or None
        )
        records.extend(recs)
        bar = engine.construction_shift_sequence(
            cfg.model, q, cfg.horizon, certify.WEIGHT_ENTROPY,
            ent.eps_ladder[-1], n_max=2, label="entropy",
        )
        results.append({
            "entropy": ent.as_report(),
            "entropy_offset": off.as_report(),
            "entropy_shifted": bar.as_report(),
        })
        if not ent.monotone() or not off.monotone():
            records.append(certify.CheckRecord(
                "eps-monotonicity", {"query": q.literal()}, 0.0, 1.0, -1.0,
                "violated", "eps ladder produced a non-monotone sequence",
            ))
    payload = _base_payload(cfg, "entropy")
    payload["results"] = results
    payload["checks"] = [r.as_report() for r in records]
    payload["status"] = _status(records)
    report.write_json(out + "-entropy.json", payload)
    return records


SCAN_HEADER = ["alpha", "h_value", "psi2", "fwd_diff", "eql_bound_residual"]


def run_scan(cfg: RunConfig, out: str):
    records = []
    rational = cfg.model.precision == "rational"
    for i, q in enumerate(cfg.queries):
        rows, recs = certify.alpha_scan(
            cfg.model, q, cfg.alpha_grid, cfg.horizon,
            eps=cfg.eps_ladder[-1] if cfg.eps_ladder else None,
            threads=_threads(),
        )
        records.extend(recs)
        suffix = "" if len(cfg.queries) == 1 else f"-q{i}"
        csv_rows = [
            [r.alpha, r.h_value, r.psi2, r.fwd_diff, r.eql_bound_residual]
            for r in rows
        ]
        report.write_csv(out + f"-scan{suffix}.csv", SCAN_HEADER, csv_rows,
                         rational_siblings=rational)
        plots.scan_figure(rows, out + f"-scan{suffix}.png",
                          f"power-family scan at {q.literal()}")
        payload = _base_payload(cfg, "hellinger-scan")
        payload["query"] = q.literal()
        payload["rows"] = [r.as_report() for r in rows]
        payload["checks"] = [r.as_report() for r in recs]
        payload["status"] = _status(recs)
        report.write_json(out + f"-scan{suffix}.json", payload)
    return records


DERIV_HEADER = [
    "alpha0", "alpha", "h0", "h1", "quotient", "psi2_right", "psi2_target",
    "delta_schedule", "eps_schedule", "psi2_left", "psi2_cross_left",
]


def run_derivative(cfg: RunConfig, out: str):
    records = []
    q = cfg.queries[0]
    rows, recs = certify.derivative_study(
        cfg.model, q, cfg.alpha_grid, cfg.horizon,
        eps=cfg.eps_ladder[-1] if cfg.eps_ladder else None,
    )
    records.extend(recs)
    csv_rows = [[r[k] for k in DERIV_HEADER] for r in rows]
    rational = cfg.model.precision == "rational"
    report.write_csv(out + "-derivative.csv", DERIV_HEADER, csv_rows,
                     rational_siblings=rational)
    plots.derivative_figure(rows, out + "-derivative.png",
                            f"derivative study at {q.literal()}")
    payload = _base_payload(cfg, "derivative")
    payload["query"] = q.literal()
    payload["rows"] = rows
    payload["checks"] = [r.as_report() for r in recs]
    payload["status"] = _status(recs)
    report.write_json(out + "-derivative.json", payload)
    return records


def run_certify(cfg: RunConfig, out: str):
    model, horizon = cfg.model, cfg.horizon
    records = []
    brackets = []
    results = {}
    eps_ladder = cfg.eps_ladder or None
    for q in cfg.queries:
        br, recs = certify.phi_bracket(model, q, horizon, eps_ladder=eps_ladder)
        records.extend(recs)
        brackets.append(br)
    results["brackets"] = [b.as_report() for b in brackets]
    for q in cfg.queries:
        for alpha in (0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1):
            rec, _ = certify.hellinger_product_check(
                model, float(alpha), q, horizon, eps_ladder
            )
            records.append(rec)
        eml_recs, ent, off = certify.entropy_identity_checks(model, q, horizon, eps_ladder)
        records.extend(eml_recs)
        for lad in (ent, off):
            ok = lad.monotone()
            records.append(certify.CheckRecord(
                "eps-monotonicity", {"query": q.literal(), "construction": lad.construction},
                1.0 if ok else 0.0, 1.0, 0.0 if ok else -1.0,
                "certified" if ok else "violated",
                "shrinking eps never lowers the constrained minimum",
            ))
    q0 = cfg.queries[0]
    ref = engine.phi_reference(model, q0, horizon)
    eps_floor = (cfg.eps_ladder or engine.default_eps_ladder(ref))[-1]
    chain_recs, count = certify.cover_chain_checks(
        model, q0, horizon, eps_floor, [0, 0.25, 0.5, 0.75, 1], limit=500
    )
    records.extend(chain_recs)
    results["cover_chain_count"] = count
    lam0 = model.lam(q0)
    upper0 = brackets[0].upper.value
    limit = min(1.0, math.e * float(lam0) / float(upper0)) if upper0 > 0 else 1.0
    mt_alphas = [a for a in (0.25, 0.5, 0.75) if a < limit]
    for a in mt_alphas:
        records.extend(certify.hellinger_exp_lower_check(model, a, q0, horizon, eps_floor))
    bd_report, bd_recs = certify.boundedness_equivalence(model, horizon)
    records.extend(bd_recs)
    results["boundedness"] = bd_report
    if cfg.alpha_grid:
        rows, scan_recs = certify.alpha_scan(
            model, q0, cfg.alpha_grid, horizon, eps=eps_floor, threads=_threads()
        )
        records.extend(scan_recs)
        results["scan"] = [r.as_report() for r in rows]
    records.extend(certify.interpolation_checks(
        model, q0, horizon, 0.25, 0.5, 0.75, 0.5, eps_floor
    ))
    part_report, part_recs = certify.partition_divergence_bound(model, horizon, eps_ladder)
    records.extend(part_recs)
    results["partition_route"] = part_report
    # nested chain: grow the word length first, then the depth, so every
    # step enlarges the cover family and the proven direction applies
    nested = [engine.Horizon(0, l) for l in range(1, horizon.length + 1)]
    nested += [engine.Horizon(d, horizon.length) for d in range(1, horizon.depth + 1)]
    hz_values, hz_ok = engine.horizon_chain(model, q0, nested)
    results["horizon_chain"] = hz_values
    records.append(certify.CheckRecord(
        "horizon-monotonicity", {"query": q0.literal()},
        1.0 if hz_ok else 0.0, 1.0, 0.0 if hz_ok else -1.0,
        "certified" if hz_ok else "violated",
        "growing the horizon never raises the truncated minimum",
    ))
    payload = _base_payload(cfg, "certify")
    payload["results"] = results
    payload["checks"] = [r.as_report() for r in records]
    payload["status"] = _status(records)
    report.write_json(out + "-certify.json", payload)
    plots.bracket_figure(brackets, out + "-certify.png", "certified brackets")
    return records


def run_selftest(cfg: RunConfig, out: str | None):
    model, horizon = cfg.model, cfg.horizon
    lines = []
    ok = True

    def check(name, cond):
        nonlocal ok
        lines.append(f"{'PASS' if cond else 'FAIL'}  {name}")
        ok = ok and cond

    z = model.density()
    check("density identically one", all(v == 1 for v in z))
    ks = model.k_star()
    check("tail supremum integral exactly zero", ks.exact_zero)
    X = cfg.queries[0]
    br, _ = certify.phi_bracket(model, X, horizon)
    check("bracket at the full space is exactly [1,1]",
          br.lower.value == 1 and br.upper.value == 1
          and isinstance(br.lower.value, Fraction) and isinstance(br.upper.value, Fraction))
    ent = engine.relative_entropy(model, X, horizon)
    check("entropy estimates identically zero", all(v == 0 for v in ent.values))
    flat = all(
        engine.constrained_minimum(
            model, X, WeightSpec(a, 0), engine.default_eps_ladder(Fraction(1))[-1],
            horizon,
        ).value == 1
        for a in cfg.alpha_grid
    )
    check("power family identically one across the grid", flat)
    for line in lines:
        print(line)
    if out:
        report.write_json(out + "-selftest.json", {
            "mode": "selftest",
            "lines": lines,
            "status": "ok" if ok else "violated",
        })
    return ok


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ddm-lab",
        description="finite-horizon laboratory for dynamically defined measures",
    )
    parser.add_argument("mode", choices=[
        "phi", "entropy", "hellinger-scan", "derivative", "certify", "selftest",
    ])
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out", help="output path prefix (overrides config)")
    parser.add_argument("--seed", type=int, help="seed recorded in reports")
    parser.add_argument("--unsafe-large", action="store_true",
                        help="lift the hard caps on N, D, L")
    args = parser.parse_args(argv)

    try:
        if args.config:
            cfg = load_config(args.config, args.unsafe_large)
        elif args.mode == "selftest":
            cfg = stationary_selftest_config()
        else:
            raise ConfigError("$", "--config is required for this mode")
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.output
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.reason}", file=sys.stderr)
        return 1

    if args.mode == "selftest":
        return 0 if run_selftest(cfg, out) else 2

    runners = {
        "phi": run_phi,
        "entropy": run_entropy,
        "hellinger-scan": run_scan,
        "derivative": run_derivative,
        "certify": run_certify,
    }
    records = runners[args.mode](cfg, out)
    violated = [r for r in records if r.status == "violated"]
    for r in violated:
        print(f"VIOLATED {r.claim}: residual {float(r.residual)}", file=sys.stderr)
    print(f"{args.mode}: {len(records)} checks, "
          f"{len(violated)} violated -> {out}-{'scan' if args.mode == 'hellinger-scan' else args.mode}.*")
    return 2 if violated else 0


if __name__ == "__main__":
    sys.exit(main())
