"""Command line interface.

Subcommands::

    simulate   draw synthetic response data from a DINA configuration
    estimate   fit a Q-matrix to a response file (exhaustive or split search)
    verify     rank, difference-identity, and identifiability checks for a Q
    tmatrix    dump a response-rate design matrix as TSV
    alpha      dump empirical joint success rates as TSV

Every command is a pure function of its input files, flags, and seed. Exit
codes: 0 success, 2 ambiguity (estimation ties or failed verification
checks), 3 validation problems, 4 enumeration budget exceeded.

Item indices shown to users (combo labels, --groups) are 1-based; the Python
API underneath is 0-based throughout. Flags override values from an optional
--config JSON file; keys in that file must match flag names (dashes as
underscores), anything else is rejected.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    ProfileDistribution,
    QMatrix,
    is_complete,
)
from .estimator import (
    DEFAULT_TIE_TOL,
    AlignmentError,
    DegenerateSampleError,
    EstimationResult,
    check_identifiability,
    estimate_q,
    estimate_q_unknown_c,
    split_estimate,
)
from .simulator import ResponseData, SimConfig, compute_alpha, simulate
from .tmatrix import (
    ComboOrder,
    DinaParams,
    build_d,
    build_t,
    build_t_augmented,
    build_t_slip,
    build_t_slip_guess,
    completeness_block,
    guess_vector,
)

EXIT_OK = 0
EXIT_TIES = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4

_RANK_TOL = 1e-10
_IDENTITY_TOL = 1e-12


class CliError(Exception):
    """User-facing validation failure; maps to exit code 3."""


class _Parser(argparse.ArgumentParser):
    # argparse usage errors are validation failures, not exit code 2
    def error(self, message: str) -> None:  # type: ignore[override]
        raise CliError(message)


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {what} file {path}: {exc}") from exc


def _load_q(path: str | None) -> QMatrix:
    if path is None:
        raise CliError("--q is required")
    try:
        return QMatrix.from_text(_read_text(path, "Q-matrix"))
    except ValueError as exc:
        raise CliError(f"bad Q-matrix file {path}: {exc}") from exc


def _load_responses(path: str | None) -> ResponseData:
    if path is None:
        raise CliError("--responses is required")
    try:
        return ResponseData.from_text(_read_text(path, "response"))
    except ValueError as exc:
        raise CliError(f"bad response file {path}: {exc}") from exc


def _parse_rates(value, m: int, name: str) -> np.ndarray:
    """Rate vectors arrive as "0.8,0.7,...", a single broadcast value, or a
    JSON list via --config."""
    if value is None:
        raise CliError(f"--{name} is required here")
    if isinstance(value, (int, float)):
        vals = [float(value)] * m
    elif isinstance(value, str):
        try:
            vals = [float(p) for p in value.split(",") if p.strip()]
        except ValueError as exc:
            raise CliError(f"bad --{name} value {value!r}") from exc
        if len(vals) == 1:
            vals = vals * m
    elif isinstance(value, list):
        vals = [float(v) for v in value]
    else:
        raise CliError(f"bad --{name} value {value!r}")
    if len(vals) != m:
        raise CliError(f"--{name} needs {m} values, got {len(vals)}")
    if min(vals) < 0.0 or max(vals) > 1.0:
        raise CliError(f"--{name} values must lie in [0, 1]")
    return np.array(vals)


def _load_pstar(value, k: int) -> ProfileDistribution:
    if value is None:
        raise CliError("--pstar is required here")
    mapping = value
    if isinstance(value, str):
        candidate = Path(value)
        try:
            text = candidate.read_text() if candidate.is_file() else value
        except OSError as exc:
            raise CliError(f"cannot read p* file {value}: {exc}") from exc
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"--pstar is neither a readable file nor JSON: {exc}") from exc
    if not isinstance(mapping, dict):
        raise CliError("--pstar must be a JSON object of profile label to probability")
    try:
        return ProfileDistribution.from_dict(k, mapping)
    except ValueError as exc:
        raise CliError(f"bad profile distribution: {exc}") from exc


def _parse_groups(value) -> list[list[int]]:
    """1-based comma lists from flags (repeatable) or lists via config;
    returned 0-based."""
    groups = []
    for grp in value:
        if isinstance(grp, str):
            try:
                items = [int(p) for p in grp.split(",") if p.strip()]
            except ValueError as exc:
                raise CliError(f"bad --groups value {grp!r}") from exc
        else:
            items = [int(v) for v in grp]
        if any(i < 1 for i in items):
            raise CliError("group item indices are 1-based")
        groups.append([i - 1 for i in items])
    return groups


def _apply_config(args: argparse.Namespace, keys: list[str]) -> None:
    if getattr(args, "config", None) is None:
        return
    try:
        cfg = json.loads(_read_text(args.config, "config"))
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError("config file must hold a JSON object")
    unknown = sorted(set(cfg) - set(keys))
    if unknown:
        raise CliError(f"unknown config keys: {', '.join(unknown)}")
    for key in keys:
        if key in cfg and getattr(args, key, None) is None:
            setattr(args, key, cfg[key])


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _emit_json(report: dict, out: str | None) -> None:
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", out)


def _require(args: argparse.Namespace, names: list[str]) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise CliError(f"--{name.replace('_', '-')} is required")


# ---------------------------------------------------------------------------
# subcommands

_SIMULATE_KEYS = ["q", "pstar", "c", "g", "n", "seed", "out"]


def _cmd_simulate(args: argparse.Namespace) -> int:
    _apply_config(args, _SIMULATE_KEYS)
    _require(args, ["q", "pstar", "c", "g", "n", "out"])
    if args.seed is None:
        raise CliError("--seed is required: every stochastic command must be seeded")
    q = _load_q(args.q)
    params = DinaParams(_parse_rates(args.c, q.m, "c"), _parse_rates(args.g, q.m, "g"))
    p_star = _load_pstar(args.pstar, q.k)
    config = SimConfig(q=q, params=params, p_star=p_star, n=int(args.n), seed=int(args.seed))
    responses, _ = simulate(config)
    out = Path(args.out)
    out.write_text(responses.to_text())
    meta = {
        "schema": "simulate_meta.v1",
        "q": q.row_strings(),
        "c": [float(v) for v in params.c],
        "g": [float(v) for v in params.g],
        "p_star": p_star.as_dict(),
        "n": config.n,
        "seed": config.seed,
        "m": q.m,
        "k": q.k,
        "out": str(out),
        "version": __version__,
    }
    Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out} ({config.n} subjects, {q.m} items) and {out}.meta.json")
    return EXIT_OK


_ESTIMATE_KEYS = [
    "responses", "k", "mode", "c", "g", "groups", "workers",
    "budget", "tie_tol", "seed", "out",
]


def _estimate_report(
    mode: str,
    result: EstimationResult | None,
    *,
    q_hat: QMatrix,
    seed,
    wall: float,
    groups=None,
) -> dict:
    return {
        "schema": "estimate_report.v1",
        "mode": mode,
        "q_hat": q_hat.row_strings(),
        "score": None if result is None else float(result.score),
        "ties": [] if result is None else [t.row_strings() for t in result.ties],
        "p_tilde": None if result is None else result.p_tilde.as_dict(),
        "c_hat": (
            None
            if result is None or result.c_hat is None
            else [float(v) for v in result.c_hat]
        ),
        "n_candidates": None if result is None else result.n_candidates,
        "groups": groups,
        "seed": None if seed is None else int(seed),
        "wall_time": wall,
    }


def _cmd_estimate(args: argparse.Namespace) -> int:
    _apply_config(args, _ESTIMATE_KEYS)
    _require(args, ["responses", "k", "mode"])
    responses = _load_responses(args.responses)
    m, k = responses.m, int(args.k)
    if k < 1:
        raise CliError("--k must be positive")
    mode = args.mode
    if mode not in ("noiseless", "known-cg", "known-g"):
        raise CliError(f"unknown mode {mode!r}")
    params = None
    g = None
    if mode == "noiseless":
        if args.c is not None or args.g is not None:
            raise CliError("mode noiseless fixes c=1 and g=0; drop --c/--g")
        params = DinaParams.noiseless(m)
    elif mode == "known-cg":
        params = DinaParams(_parse_rates(args.c, m, "c"), _parse_rates(args.g, m, "g"))
        sep = np.abs(params.c - params.g).min()
        if sep == 0.0:
            raise CliError(
                "mode known-cg requires c_i != g_i for every item "
                "(capable and guessing rates must separate)"
            )
    else:
        if args.c is not None:
            raise CliError("mode known-g estimates c; drop --c")
        g = _parse_rates(args.g, m, "g")
    budget = DEFAULT_BUDGET if args.budget is None else int(args.budget)
    tie_tol = DEFAULT_TIE_TOL if args.tie_tol is None else float(args.tie_tol)
    workers = None if args.workers is None else int(args.workers)
    t0 = time.perf_counter()

    if args.groups:
        groups = _parse_groups(args.groups)
        q_hat = split_estimate(
            responses, groups, k,
            params=params, g=g, budget=budget, tie_tol=tie_tol, workers=workers,
        )
        report = _estimate_report(
            mode, None, q_hat=q_hat, seed=args.seed,
            wall=time.perf_counter() - t0,
            groups=[[i + 1 for i in grp] for grp in groups],
        )
        _emit_json(report, args.out)
        return EXIT_OK

    alpha = compute_alpha(responses, ComboOrder.saturated(m))
    if mode == "known-g":
        result = estimate_q_unknown_c(
            alpha, g, k, budget=budget, tie_tol=tie_tol, workers=workers
        )
    else:
        result = estimate_q(
            alpha, params, k, budget=budget, tie_tol=tie_tol, workers=workers
        )
    report = _estimate_report(
        mode, result, q_hat=result.q_hat, seed=args.seed,
        wall=time.perf_counter() - t0,
    )
    _emit_json(report, args.out)
    return EXIT_TIES if len(result.ties) > 1 else EXIT_OK


_VERIFY_KEYS = ["q", "c", "g", "pstar", "budget", "out"]


def _cmd_verify(args: argparse.Namespace) -> int:
    _apply_config(args, _VERIFY_KEYS)
    _require(args, ["q", "c", "g", "pstar"])
    q = _load_q(args.q)
    params = DinaParams(_parse_rates(args.c, q.m, "c"), _parse_rates(args.g, q.m, "g"))
    p_star = _load_pstar(args.pstar, q.k)
    budget = DEFAULT_BUDGET if args.budget is None else int(args.budget)
    t0 = time.perf_counter()
    checks: dict[str, dict] = {}

    complete = is_complete(q)
    checks["completeness"] = {"passed": bool(complete)}

    if complete:
        block = completeness_block(q)
        minsv = float(np.linalg.svd(block, compute_uv=False).min())
        checks["leading_block"] = {"passed": minsv > _RANK_TOL, "min_singular_value": minsv}
    else:
        checks["leading_block"] = {
            "passed": None,
            "skipped": "Q-matrix is incomplete; leading block undefined",
        }

    order = ComboOrder.saturated(q.m)
    aug = build_t_augmented(q, params, order)
    aug_minsv = float(np.linalg.svd(np.asarray(aug.values), compute_uv=False).min())
    checks["augmented_rank"] = {
        "passed": aug_minsv > _RANK_TOL,
        "min_singular_value": aug_minsv,
        "min_rate_separation": float(np.abs(params.c - params.g).min()),
    }

    # difference identity at the given rates plus a few seeded random draws
    rng = np.random.default_rng(20240915)
    worst = 0.0
    trials = [(params.c, params.g)]
    trials += [(rng.uniform(0, 1, q.m), rng.uniform(0, 1, q.m)) for _ in range(3)]
    for c_t, g_t in trials:
        d = build_d(g_t, order)
        aug_t = build_t_augmented(q, DinaParams(c_t, g_t), order)
        diff = build_t_slip(q, np.asarray(c_t) - np.asarray(g_t), order)
        target = np.column_stack([np.zeros(len(order)), diff.values])
        worst = max(worst, float(np.abs(d.values @ aug_t.values - target).max()))
    checks["difference_identity"] = {"passed": worst <= _IDENTITY_TOL, "max_abs_error": worst}

    if complete:
        report_id = check_identifiability(q, params, p_star, budget=budget)
        checks["identifiability"] = {
            "passed": bool(report_id.identifiable),
            "min_delta": report_id.min_delta,
            "threshold": report_id.threshold,
            "flagged": [",".join(c.row_strings()) for c in report_id.flagged],
            "deltas": {
                ",".join(c.row_strings()): float(dlt) for c, dlt in report_id.deltas
            },
            "notes": list(report_id.notes),
        }
    else:
        checks["identifiability"] = {
            "passed": None,
            "skipped": "completeness check failed; identifiability probe needs a complete Q-matrix",
        }

    all_passed = all(chk.get("passed") is True for chk in checks.values())
    report = {
        "schema": "verify_report.v1",
        "q": q.row_strings(),
        "c": [float(v) for v in params.c],
        "g": [float(v) for v in params.g],
        "p_star": p_star.as_dict(),
        "all_passed": all_passed,
        "checks": checks,
        "wall_time": time.perf_counter() - t0,
    }
    _emit_json(report, args.out)
    return EXIT_OK if all_passed else EXIT_TIES


_TMATRIX_KEYS = ["q", "variant", "c", "g", "out"]


def _cmd_tmatrix(args: argparse.Namespace) -> int:
    _apply_config(args, _TMATRIX_KEYS)
    _require(args, ["q", "variant"])
    q = _load_q(args.q)
    order = ComboOrder.saturated(q.m)
    variant = args.variant
    if variant == "plain":
        if args.c is not None or args.g is not None:
            raise CliError("variant plain takes no --c/--g")
        t = build_t(q, order)
    elif variant == "slip":
        if args.g is not None:
            raise CliError("variant slip takes no --g")
        t = build_t_slip(q, _parse_rates(args.c, q.m, "c"), order)
    elif variant in ("slip-guess", "augmented"):
        params = DinaParams(_parse_rates(args.c, q.m, "c"), _parse_rates(args.g, q.m, "g"))
        t = build_t_slip_guess(q, params, order) if variant == "slip-guess" else build_t_augmented(q, params, order)
    else:
        raise CliError(f"unknown variant {variant!r}")
    _emit(t.to_tsv(), args.out)
    return EXIT_OK


_ALPHA_KEYS = ["responses", "out"]


def _cmd_alpha(args: argparse.Namespace) -> int:
    _apply_config(args, _ALPHA_KEYS)
    _require(args, ["responses"])
    responses = _load_responses(args.responses)
    alpha = compute_alpha(responses, ComboOrder.saturated(responses.m))
    lines = ["combo\trate"]
    lines += [
        f"{lab}\t{repr(float(r))}"
        for lab, r in zip(alpha.order.labels(), alpha.rates)
    ]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dinaq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dinaq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="draw synthetic DINA response data")
    p_sim.add_argument("--q", help="Q-matrix file (one 0/1 row per item)")
    p_sim.add_argument("--pstar", help="profile distribution: JSON file or inline JSON")
    p_sim.add_argument("--c", help="capable success rates, comma separated or one broadcast value")
    p_sim.add_argument("--g", help="guessing rates, same format as --c")
    p_sim.add_argument("--n", type=int, help="number of subjects")
    p_sim.add_argument("--seed", type=int, help="run seed (required)")
    p_sim.add_argument("--out", help="response file to write")
    p_sim.add_argument("--config", help="JSON config; flags override its keys")
    p_sim.set_defaults(handler=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="fit a Q-matrix to response data")
    p_est.add_argument("--responses", help="response file")
    p_est.add_argument("--k", type=int, help="number of attributes to fit")
    p_est.add_argument("--mode", help="noiseless | known-cg | known-g")
    p_est.add_argument("--c", help="capable success rates (mode known-cg)")
    p_est.add_argument("--g", help="guessing rates (modes known-cg, known-g)")
    p_est.add_argument(
        "--groups", action="append",
        help="split estimation: 1-based item list like 1,2,3,4; repeat per group",
    )
    p_est.add_argument("--workers", type=int, help="parallel scoring processes")
    p_est.add_argument("--budget", type=int, help="candidate enumeration budget")
    p_est.add_argument("--tie-tol", dest="tie_tol", type=float, help="tie tolerance on scores")
    p_est.add_argument("--seed", type=int, help="echoed into the report")
    p_est.add_argument("--out", help="report JSON path (default stdout)")
    p_est.add_argument("--config", help="JSON config; flags override its keys")
    p_est.set_defaults(handler=_cmd_estimate)

    p_ver = sub.add_parser("verify", help="rank and identifiability checks for a Q-matrix")
    p_ver.add_argument("--q", help="Q-matrix file")
    p_ver.add_argument("--c", help="capable success rates")
    p_ver.add_argument("--g", help="guessing rates")
    p_ver.add_argument("--pstar", help="profile distribution: JSON file or inline JSON")
    p_ver.add_argument("--budget", type=int, help="candidate enumeration budget")
    p_ver.add_argument("--out", help="report JSON path (default stdout)")
    p_ver.add_argument("--config", help="JSON config; flags override its keys")
    p_ver.set_defaults(handler=_cmd_verify)

    p_tm = sub.add_parser("tmatrix", help="dump a response-rate design matrix")
    p_tm.add_argument("--q", help="Q-matrix file")
    p_tm.add_argument(
        "--variant", help="plain | slip | slip-guess | augmented",
    )
    p_tm.add_argument("--c", help="capable success rates (slip variants)")
    p_tm.add_argument("--g", help="guessing rates (slip-guess, augmented)")
    p_tm.add_argument("--out", help="TSV path (default stdout)")
    p_tm.add_argument("--config", help="JSON config; flags override its keys")
    p_tm.set_defaults(handler=_cmd_tmatrix)

    p_al = sub.add_parser("alpha", help="dump empirical joint success rates")
    p_al.add_argument("--responses", help="response file")
    p_al.add_argument("--out", help="TSV path (default stdout)")
    p_al.add_argument("--config", help="JSON config; flags override its keys")
    p_al.set_defaults(handler=_cmd_alpha)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (AlignmentError, DegenerateSampleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
