"""Command-line driver: parameter design, chain simulation, mining, attack sweeps.

Subcommands:

    params    derive decay-rate / depth-0 bonus from a halving period and a
              target network bonus
    simulate  event-driven chain simulation with a miner roster
    mine      certified mining of one block from a job file
    attack    closed-form vs Monte Carlo 51%-attack table over a (q, L) grid
    validate  replay and fully re-validate an exported chain file

Every output document embeds the resolved inputs and the seed, so any run can
be reproduced from its output alone.  Errors exit nonzero with a one-line
JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import List, Optional, Sequence

from por import attacksim, certmine, chainsim, consensus, reputation


# -- config plumbing ---------------------------------------------------------


def load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def parse_chain_config(doc: dict):
    """(base_target, ReputationParams, TransitionSchedule) from a config doc."""
    base_target = int(doc["base_target"], 16)
    params = reputation.ReputationParams.from_json_dict(doc["reputation"])
    if "schedule" in doc:
        schedule = consensus.TransitionSchedule.from_json_dict(doc["schedule"])
    else:
        schedule = consensus.TransitionSchedule.immediate(params.total_bonus)
    return base_target, params, schedule


def chain_config_dict(
    base_target: int,
    params: reputation.ReputationParams,
    schedule: consensus.TransitionSchedule,
) -> dict:
    return {
        "base_target": hex(base_target),
        "reputation": params.to_json_dict(),
        "schedule": schedule.to_json_dict(),
    }


def _write_output(doc, out: Optional[str]) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# -- params ------------------------------------------------------------------


def cmd_params(halving_blocks: int, target_total_bonus: float) -> dict:
    """Calibrate the bonus sequence from a halving period in blocks."""
    if halving_blocks < 1:
        raise ValueError("halving_blocks must be >= 1")
    chi = math.log(2.0) / halving_blocks
    params = reputation.ReputationParams.from_target(target_total_bonus, chi)
    daily_decay = -math.expm1(-144.0 * chi)  # 144 blocks/day at 10-min blocks
    return {
        "inputs": {
            "halving_blocks": halving_blocks,
            "target_total_bonus": target_total_bonus,
        },
        "chi": chi,
        "lambda0": params.lambda0,
        "total_bonus": params.total_bonus,
        "window_blocks": params.window_blocks,
        "daily_decay": daily_decay,
        "reputation": params.to_json_dict(),
    }


# -- simulate ----------------------------------------------------------------


def _params_from_sim_config(doc: dict) -> reputation.ReputationParams:
    rep = doc["reputation"]
    if "halving_blocks" in rep:
        chi = math.log(2.0) / int(rep["halving_blocks"])
        return reputation.ReputationParams.from_target(
            float(rep["total_bonus"]), chi
        )
    return reputation.ReputationParams.from_json_dict(rep)


def cmd_simulate(config: dict, seed: Optional[int] = None) -> dict:
    """Run the exponential-race chain simulation described by ``config``."""
    params = _params_from_sim_config(config)
    miners = [
        chainsim.MinerSpec(
            name=m["name"],
            hashrate=float(m["hashrate"]),
            use_bonus=bool(m.get("use_bonus", True)),
            steady_state_bonus=(
                float(m["steady_state_bonus"])
                if m.get("steady_state_bonus") is not None
                else None
            ),
        )
        for m in config["miners"]
    ]
    resolved_seed = seed if seed is not None else int(config.get("seed", 0))
    report = chainsim.simulate_chain(
        params=params,
        miners=miners,
        blocks=int(config["blocks"]),
        difficulty=float(config["difficulty"]),
        seed=resolved_seed,
    )
    return {
        "config": config,
        "seed": resolved_seed,
        "reputation": params.to_json_dict(),
        "total_time": report.total_time,
        "expected_hashes": report.expected_hashes,
        "realized_hashes": report.realized_hashes,
        "miners": [
            {
                "name": m.name,
                "hashrate": m.hashrate,
                "blocks_won": m.blocks_won,
                "win_share": m.win_share,
                "final_bonus": m.final_bonus,
            }
            for m in report.miners
        ],
        "chain": [
            {"height": i + 1, "miner": miners[w].name, "interval": dt}
            for i, (w, dt) in enumerate(zip(report.winners, report.intervals))
        ],
    }


# -- mine --------------------------------------------------------------------


def parse_job(doc: dict, coinbase_address: bytes) -> certmine.MiningJob:
    template = certmine.HeaderTemplate(
        height=int(doc["height"]),
        parent_hash=bytes.fromhex(doc["parent_hash"]),
        payload_commitment=bytes.fromhex(doc["payload_commitment"]),
        timestamp=int(doc["timestamp"]),
        coinbase_address=coinbase_address,
    )
    return certmine.MiningJob(
        header_template=template,
        target=int(doc["target"], 16),
        max_iterations=int(doc["max_iterations"]),
    )


def cmd_mine(keypair: certmine.MinerKeypair, job_doc: dict, seed: int) -> dict:
    job = parse_job(job_doc, keypair.public_address)
    result = certmine.mine_certified(keypair, job, seed)
    out = {
        "job": job_doc,
        "seed": seed,
        "coinbase_address": keypair.public_address.hex(),
        "found": result.found,
        "iterations": result.iterations,
    }
    if result.found:
        assert result.header is not None
        out["header"] = result.header.to_json_dict()
        out["block_hash"] = consensus.block_hash(result.header).hex()
    return out


# -- attack ------------------------------------------------------------------


def cmd_attack(
    q_values: Sequence[float],
    lambda_values: Sequence[float],
    trials: int,
    seed: int,
) -> dict:
    scenarios = [
        attacksim.AttackScenario.from_share(q=q, total_bonus=lam)
        for lam in lambda_values
        for q in q_values
    ]
    rows = attacksim.sweep(scenarios, trials, seed)
    return {
        "inputs": {
            "q_values": list(q_values),
            "lambda_values": list(lambda_values),
            "trials": trials,
            "seed": seed,
        },
        "critical_fractions": {
            repr(lam): attacksim.critical_fraction(lam) for lam in lambda_values
        },
        "rows": rows,
    }


def attack_rows_to_csv(rows: List[dict]) -> str:
    buf = io.StringIO()
    fields = ["lambda", "q", "closed_form", "empirical", "half_width", "trials", "seed"]
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row[k] for k in fields})
    return buf.getvalue()


# -- validate ----------------------------------------------------------------


def cmd_validate(chain_text: str, config: dict) -> dict:
    base_target, params, schedule = parse_chain_config(config)
    headers = consensus.import_chain(chain_text)
    state = consensus.replay_chain(params, schedule, base_target, headers)
    return {
        "ok": True,
        "config": chain_config_dict(base_target, params, schedule),
        "height": state.tip_height,
        "blocks": len(state.headers),
        "tip_hash": state.tip_hash().hex(),
    }


# -- argument parsing --------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="por", description="Proof-of-Reputation toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="calibrate the reputation bonus sequence")
    p.add_argument("--halving-blocks", type=int, required=True)
    p.add_argument("--total-bonus", type=float, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("simulate", help="event-driven chain simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("mine", help="certified-mine one block from a job file")
    p.add_argument("--key", required=True, help="key file (JSON)")
    p.add_argument("--job", required=True, help="mining job file (JSON)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("attack", help="51%-attack sweep over a (q, lambda) grid")
    p.add_argument("--q", type=float, nargs="+", required=True)
    p.add_argument("--lam", type=float, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("validate", help="replay and validate a chain export")
    p.add_argument("--chain", required=True, help="newline-delimited JSON headers")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "params":
            _write_output(cmd_params(args.halving_blocks, args.total_bonus), args.out)
        elif args.command == "simulate":
            _write_output(cmd_simulate(load_json(args.config), args.seed), args.out)
        elif args.command == "mine":
            keypair = certmine.MinerKeypair.load(args.key)
            _write_output(cmd_mine(keypair, load_json(args.job), args.seed), args.out)
        elif args.command == "attack":
            doc = cmd_attack(args.q, args.lam, args.trials, args.seed)
            if args.format == "csv":
                text = attack_rows_to_csv(doc["rows"])
                if args.out is None or args.out == "-":
                    sys.stdout.write(text)
                else:
                    with open(args.out, "w") as fh:
                        fh.write(text)
            else:
                _write_output(doc, args.out)
        elif args.command == "validate":
            with open(args.chain) as fh:
                chain_text = fh.read()
            _write_output(cmd_validate(chain_text, load_json(args.config)), args.out)
        return 0
    except (ValueError, KeyError, OSError, consensus.ValidationError) as exc:
        reason = getattr(exc, "reason", None)
        err = {"error": type(exc).__name__, "message": str(exc)}
        if reason is not None:
            err["reason"] = reason
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
