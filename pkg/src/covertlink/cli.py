"""Command-line front end: runs experiments and serializes their results.

Subcommands: ``bounds`` (analytic audit of a budget), ``detect``,
``reliability``, ``scaling``, ``converse``.  Experiment subcommands require
``--seed`` and ``--out``; each writes one CSV plus a ``manifest.json`` echoing
the effective configuration, the seed, UTC timestamps, and a SHA-256 digest
of every emitted data file.  Reruns with identical configuration are
byte-identical except for the manifest timestamps (which are not part of any
digest).

Exit codes: 0 success, 2 configuration error, 3 experiment infeasible at
every grid point, 4 output I/O failure.

Options may also come from ``--config FILE`` holding flat ``key = value``
lines ('#' starts a comment); explicit flags override file values.  Floats in
CSV output carry 17 significant digits, enough to round-trip IEEE doubles.
``COVERTLINK_THREADS`` caps worker parallelism (0 or unset = auto); results
do not depend on it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .bounds import (
    BPSK,
    FULL_CODEBOOK,
    GAUSSIAN,
    KEYED_BPSK,
    KNOWN_FLOOR,
    SPARSE,
    SPARSE_KEY,
    UNKNOWN_DECAY,
    BudgetInfeasibleError,
    FloorModel,
    achievable_rate,
    covert_power_budget,
    decoding_error_bound,
    key_cost,
    tv_taylor_bound,
)
from .detector import DetectionScenario, estimate_detection_errors
from .simulator import (
    ExperimentConfig,
    run_converse_sweep,
    run_reliability,
    run_square_root_scaling,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

_GRID_RE = re.compile(r"^(\d+):(\d+):x(\d+)$")


def _conv_int(text: str) -> int:
    return int(text)


def _conv_float(text: str) -> float:
    value = float(text)
    if value != value and text.strip().lower() != "nan":
        raise ValueError(f"bad float {text!r}")
    return value


def _conv_grid(text: str) -> tuple[int, ...]:
    """Parse 'N' or 'start:stop:xK' into a strictly increasing n grid."""
    text = text.strip()
    if text.isdigit():
        return (int(text),)
    match = _GRID_RE.match(text)
    if not match:
        raise ValueError(
            f"bad n grid {text!r}: expected an integer or start:stop:xK"
        )
    start, stop, factor = (int(g) for g in match.groups())
    if start < 1 or stop < start or factor < 2:
        raise ValueError(f"bad n grid {text!r}: need 1 <= start <= stop and K >= 2")
    grid = []
    n = start
    while n <= stop:
        grid.append(n)
        n *= factor
    return tuple(grid)


def _conv_choice(*allowed: str):
    def conv(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"expected one of {allowed}, got {text!r}")
        return text

    return conv


@dataclass(frozen=True)
class _Opt:
    name: str  # flag name, without leading dashes
    conv: object
    default: str | None = None
    help: str = ""


_BUDGET_OPTS = [
    _Opt("scheme", _conv_choice(GAUSSIAN, BPSK, SPARSE), GAUSSIAN, "signaling scheme"),
    _Opt("eps", _conv_float, "0.1", "detectability slack epsilon in (0,1)"),
    _Opt("sigma-w-hat", _conv_float, "1", "calibrated/reference warden noise power"),
    _Opt("f-mode", _conv_choice(KNOWN_FLOOR, UNKNOWN_DECAY), KNOWN_FLOOR,
         "noise-floor knowledge model"),
    _Opt("f-exponent", _conv_float, "0.25", "decay exponent for unknown_decay"),
    _Opt("a-sq", _conv_float, None, "fixed occupied-symbol power for sparse budgets"),
]

_CHANNEL_OPTS = [
    _Opt("sigma-w", _conv_float, "1", "warden noise power"),
    _Opt("sigma-b", _conv_float, "1", "receiver noise power"),
]

_OPTIONS: dict[str, list[_Opt]] = {
    "bounds": [
        _Opt("n", _conv_grid, None, "block length or grid start:stop:xK"),
        *_BUDGET_OPTS,
        *_CHANNEL_OPTS,
        _Opt("rho", _conv_float, "0.9", "rate margin in (0,1)"),
        _Opt("message-bits", _conv_int, "8", "message size for key accounting"),
        _Opt("out", str, None, "output directory (optional for bounds)"),
    ],
    "detect": [
        _Opt("n", _conv_grid, None, "block length (single value)"),
        _Opt("detector", _conv_choice("radiometer", "lrt"), None, "detector under test"),
        _Opt("trials", _conv_int, "1000", "episodes per hypothesis"),
        _Opt("alpha-star", _conv_float, "0.05", "radiometer false-alarm target"),
        _Opt("power", _conv_float, None, "explicit occupied-symbol power"),
        _Opt("tau", _conv_float, "1", "occupancy for explicit sparse power"),
        _Opt("message-bits", _conv_int, "4", "codebook size for codeword episodes"),
        *_BUDGET_OPTS,
        *_CHANNEL_OPTS,
        _Opt("seed", _conv_int, None, "master seed"),
        _Opt("out", str, None, "output directory"),
    ],
    "reliability": [
        _Opt("n", _conv_grid, None, "block length grid"),
        _Opt("trials", _conv_int, "1000", "episodes per grid point"),
        _Opt("message-bits", _conv_int, "8", "bits per codeword"),
        _Opt("refresh", _conv_int, "10", "episodes per codebook draw"),
        _Opt("rho", _conv_float, "0.9", "rate margin (config echo)"),
        _Opt("alpha-star", _conv_float, "0.05", "radiometer target (config echo)"),
        *_BUDGET_OPTS,
        *_CHANNEL_OPTS,
        _Opt("seed", _conv_int, None, "master seed"),
        _Opt("out", str, None, "output directory"),
    ],
    "scaling": [
        _Opt("n", _conv_grid, None, "block length grid (>= 4 octaves)"),
        _Opt("rho", _conv_float, "0.9", "rate margin in (0,1)"),
        _Opt("alpha-star", _conv_float, "0.05", "radiometer target"),
        _Opt("message-bits", _conv_int, "8", "spot-check message size cap"),
        _Opt("refresh", _conv_int, "10", "episodes per codebook draw"),
        _Opt("spot-trials", _conv_int, "400", "LRT spot-check episodes"),
        _Opt("spot-decode-trials", _conv_int, "100", "decoding spot-check episodes"),
        *_BUDGET_OPTS,
        *_CHANNEL_OPTS,
        _Opt("seed", _conv_int, None, "master seed"),
        _Opt("out", str, None, "output directory"),
    ],
    "converse": [
        _Opt("n", _conv_grid, None, "block length grid"),
        _Opt("trials", _conv_int, "1000", "episodes per hypothesis per grid point"),
        _Opt("alpha-star", _conv_float, "0.05", "radiometer false-alarm target"),
        _Opt("power-coeff", _conv_float, "1", "codeword power coefficient"),
        _Opt("power-exponent", _conv_float, "-0.25", "codeword power exponent"),
        _Opt("gamma", _conv_float, "1", "fraction of slots used by the keyless scheme"),
        _Opt("rate-exponent", _conv_float, "-0.25", "attempted rate exponent"),
        _Opt("message-bits", _conv_int, "2", "codebook size for codeword episodes"),
        *_CHANNEL_OPTS,
        _Opt("seed", _conv_int, None, "master seed"),
        _Opt("out", str, None, "output directory"),
    ],
}

_EXPERIMENT_SUBCOMMANDS = ("detect", "reliability", "scaling", "converse")


@dataclass
class RunManifest:
    """Everything needed to audit or reproduce one CLI run."""

    subcommand: str
    config: dict
    master_seed: int | None
    started_utc: str
    finished_utc: str = ""
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "tool": "covertlink",
            "version": __version__,
            "subcommand": self.subcommand,
            "config": self.config,
            "master_seed": self.master_seed,
            "started_utc": self.started_utc,
            "finished_utc": self.finished_utc,
            "outputs": self.outputs,
            "results": self.results,
        }
        return json.dumps(payload, indent=2) + "\n"


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, int):
        return str(value)
    text = str(value)
    if any(c in text for c in ",\n\r\""):
        raise ValueError(f"CSV value {text!r} needs quoting, which is not supported")
    return text


def emit_csv(records, path) -> None:
    """Write homogeneous record dicts as CSV with 17-significant-digit floats."""
    records = list(records)
    if not records:
        raise ValueError("emit_csv needs at least one record")
    header = list(records[0].keys())
    lines = [",".join(header)]
    for record in records:
        if list(record.keys()) != header:
            raise ValueError("records are not homogeneous")
        lines.append(",".join(_format_value(v) for v in record.values()))
    Path(path).write_text("\n".join(lines) + "\n")


def _append_csv_comment(path, text: str) -> None:
    with open(path, "a") as fh:
        fh.write(f"# {text}\n")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ValueError(f"cannot read config file {path}: {err}")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _merge_options(subcommand: str, cli_values: dict, file_values: dict):
    """Resolve each option: explicit flag, else config file, else default."""
    opts = _OPTIONS[subcommand]
    known = {o.name for o in opts}
    for key in file_values:
        if key not in known:
            raise ValueError(f"unknown config key {key!r} for {subcommand}")
    raw: dict[str, str | None] = {}
    converted: dict[str, object] = {}
    for opt in opts:
        dest = opt.name.replace("-", "_")
        text = cli_values.get(dest)
        if text is None:
            text = file_values.get(opt.name, opt.default)
        raw[opt.name] = text
        if text is None:
            converted[opt.name] = None
            continue
        try:
            converted[opt.name] = opt.conv(text)
        except ValueError as err:
            raise ValueError(f"bad value for --{opt.name}: {err}")
    return raw, converted


def _require(converted: dict, names, subcommand: str) -> None:
    for name in names:
        if converted.get(name) is None:
            raise ValueError(f"{subcommand} requires --{name}")


def _floor_model(cfg: dict) -> FloorModel:
    return FloorModel(cfg["f-mode"], cfg["sigma-w-hat"], cfg["f-exponent"])


def _estimate_fields(prefix: str, estimate) -> dict:
    if estimate is None:
        return {f"{prefix}_hat": None, f"{prefix}_ci": None}
    return {f"{prefix}_hat": estimate.point, f"{prefix}_ci": estimate.ci_half_width}


def _bounds_rows(cfg: dict):
    rows = []
    floor = _floor_model(cfg)
    any_feasible = False
    for n in cfg["n"]:
        row = {
            "n": n,
            "scheme": cfg["scheme"],
            "epsilon": cfg["eps"],
            "c": 2.0 * cfg["eps"] * 2.0**0.5,
            "f_mode": cfg["f-mode"],
            "f_of_n": floor.f_of_n(n),
            "feasible": False,
            "min_feasible_n": None,
            "symbol_power": None,
            "average_power": None,
            "tau": None,
            "tv_bound": None,
            "tv_clamped": None,
            "rate": None,
            "bits": None,
            "decode_bound": None,
            "decode_bound_clamped": None,
            "keystream_bits": None,
            "position_bits": None,
            "codebook_bits": None,
            "total_key_bits": None,
        }
        try:
            budget = covert_power_budget(
                n, cfg["eps"], cfg["scheme"], floor, cfg["a-sq"]
            )
        except BudgetInfeasibleError as err:
            row["min_feasible_n"] = err.min_n
            rows.append(row)
            continue
        any_feasible = True
        tv = tv_taylor_bound(budget, cfg["sigma-w"])
        rate = achievable_rate(budget, cfg["sigma-b"], cfg["rho"])
        decode = decoding_error_bound(n, rate, budget, cfg["sigma-b"])
        if cfg["scheme"] == GAUSSIAN:
            cost = key_cost(FULL_CODEBOOK, n, message_bits=cfg["message-bits"])
        elif cfg["scheme"] == BPSK:
            cost = key_cost(KEYED_BPSK, n)
        else:
            cost = key_cost(SPARSE_KEY, n, tau=budget.tau)
        row.update(
            feasible=True,
            symbol_power=budget.symbol_power,
            average_power=budget.average_power,
            tau=budget.tau,
            tv_bound=tv.value,
            tv_clamped=tv.clamped,
            rate=rate,
            bits=n * rate,
            decode_bound=decode.value,
            decode_bound_clamped=decode.clamped,
            keystream_bits=cost.keystream_bits,
            position_bits=cost.position_bits,
            codebook_bits=cost.codebook_bits,
            total_key_bits=cost.total_bits,
        )
        rows.append(row)
    return rows, any_feasible


def _run_bounds(cfg: dict, out: Path | None, manifest: RunManifest) -> int:
    rows, any_feasible = _bounds_rows(cfg)
    label = "P_f" if cfg["scheme"] == GAUSSIAN else "a_sq"
    for row in rows:
        if row["feasible"]:
            print(
                f"n={row['n']}: {label} = {row['symbol_power']:.6g}, "
                f"tv bound = {row['tv_bound']:.6g}, rate = {row['rate']:.6g} b/use, "
                f"key bits = {row['total_key_bits']:.6g}"
            )
        else:
            print(f"n={row['n']}: infeasible (smallest admissible n = {row['min_feasible_n']})")
    if out is not None:
        emit_csv(rows, out / "bounds.csv")
        manifest.results["rows"] = len(rows)
        _finish_manifest(manifest, out, ["bounds.csv"])
    return EXIT_OK if any_feasible else EXIT_INFEASIBLE


def _run_detect(cfg: dict, out: Path, manifest: RunManifest) -> int:
    if len(cfg["n"]) != 1:
        raise ValueError("detect takes a single --n, not a grid")
    n = cfg["n"][0]
    explicit = cfg["power"] is not None
    budget = None
    if explicit:
        power, tau = cfg["power"], cfg["tau"]
    else:
        budget = covert_power_budget(
            n, cfg["eps"], cfg["scheme"], _floor_model(cfg), cfg["a-sq"]
        )
        power, tau = budget.symbol_power, budget.tau
    scenario = DetectionScenario(
        scheme=cfg["scheme"],
        n=n,
        sigma_w_sq=cfg["sigma-w"],
        power=power,
        tau=tau,
        alpha_star=cfg["alpha-star"],
        message_bits=cfg["message-bits"],
        budget=budget,
    )
    report = estimate_detection_errors(cfg["detector"], scenario, cfg["trials"], cfg["seed"])
    row = {
        "detector": report.detector,
        "scheme": scenario.scheme,
        "n": n,
        "sigma_w_sq": scenario.sigma_w_sq,
        "power": power,
        "tau": tau,
        "trials": report.trials,
        **_estimate_fields("alpha", report.alpha_hat),
        **_estimate_fields("beta", report.beta_hat),
        "alpha_bound": report.alpha_bound,
        "beta_bound": report.beta_bound,
        "beta_bound_vacuous": report.beta_bound_vacuous,
        "tv_bound": report.tv_bound,
        "err_sum": report.alpha_hat.point + report.beta_hat.point,
    }
    print(
        f"{report.detector} at n={n}: alpha_hat = {report.alpha_hat.point:.4f}, "
        f"beta_hat = {report.beta_hat.point:.4f}"
    )
    emit_csv([row], out / "detect.csv")
    manifest.results["alpha_hat"] = report.alpha_hat.point
    manifest.results["beta_hat"] = report.beta_hat.point
    _finish_manifest(manifest, out, ["detect.csv"])
    return EXIT_OK


def _experiment_config(cfg: dict, subcommand: str) -> ExperimentConfig:
    kwargs = dict(
        n_grid=cfg["n"],
        master_seed=cfg["seed"],
        sigma_w_sq=cfg["sigma-w"],
        sigma_b_sq=cfg["sigma-b"],
        alpha_star=cfg["alpha-star"],
    )
    if subcommand in ("reliability", "scaling"):
        kwargs.update(
            scheme=cfg["scheme"],
            epsilon=cfg["eps"],
            rho=cfg["rho"],
            f_mode=cfg["f-mode"],
            f_exponent=cfg["f-exponent"],
            sigma_w_floor_sq=cfg["sigma-w-hat"],
            sparse_amplitude_sq=cfg["a-sq"],
            message_bits=cfg["message-bits"],
            codebook_refresh=cfg["refresh"],
        )
    if subcommand == "reliability":
        kwargs.update(trials=cfg["trials"])
    if subcommand == "scaling":
        kwargs.update(
            spot_trials=cfg["spot-trials"],
            spot_decode_trials=cfg["spot-decode-trials"],
        )
    if subcommand == "converse":
        kwargs.update(
            trials=cfg["trials"],
            converse_power_coeff=cfg["power-coeff"],
            converse_power_exponent=cfg["power-exponent"],
            converse_gamma=cfg["gamma"],
            converse_rate_exponent=cfg["rate-exponent"],
            converse_message_bits=cfg["message-bits"],
        )
    return ExperimentConfig(**kwargs)


def _run_reliability(cfg: dict, out: Path, manifest: RunManifest) -> int:
    records = run_reliability(_experiment_config(cfg, "reliability"))
    rows = []
    for rec in records:
        rows.append(
            {
                "n": rec.n,
                "scheme": rec.scheme,
                "feasible": rec.feasible,
                "min_feasible_n": rec.min_feasible_n,
                "symbol_power": rec.symbol_power,
                "tau": rec.tau,
                "rate": rec.rate,
                "trials": rec.trials,
                "errors": rec.errors,
                **_estimate_fields("p_e", rec.p_e_hat),
                "bound": None if rec.bound is None else rec.bound.value,
                "bound_clamped": None if rec.bound is None else rec.bound.clamped,
            }
        )
        if rec.feasible:
            print(
                f"n={rec.n}: p_e_hat = {rec.p_e_hat.point:.4f} "
                f"(bound {'n/a' if rec.bound is None else format(rec.bound.value, '.4g')})"
            )
        else:
            print(f"n={rec.n}: infeasible")
    emit_csv(rows, out / "reliability.csv")
    manifest.results["feasible_rows"] = sum(r.feasible for r in records)
    _finish_manifest(manifest, out, ["reliability.csv"])
    return EXIT_OK if any(r.feasible for r in records) else EXIT_INFEASIBLE


def _run_scaling(cfg: dict, out: Path, manifest: RunManifest) -> int:
    result = run_square_root_scaling(_experiment_config(cfg, "scaling"))
    rows = []
    for row in result.rows:
        spot_lrt = row.spot_lrt
        spot = row.spot_decode
        rows.append(
            {
                "n": row.n,
                "feasible": row.feasible,
                "min_feasible_n": row.min_feasible_n,
                "symbol_power": row.symbol_power,
                "tau": row.tau,
                "rate": row.rate,
                "bits": row.bits,
                "spot_lrt_trials": None if spot_lrt is None else spot_lrt.trials,
                **_estimate_fields(
                    "spot_alpha", None if spot_lrt is None else spot_lrt.alpha_hat
                ),
                **_estimate_fields(
                    "spot_beta", None if spot_lrt is None else spot_lrt.beta_hat
                ),
                "spot_tv_bound": None if spot_lrt is None else spot_lrt.tv_bound,
                "spot_decode_bits": None if spot is None else spot.message_bits,
                "spot_decode_trials": None if spot is None else spot.trials,
                "spot_decode_errors": None if spot is None else spot.errors,
                **_estimate_fields(
                    "spot_decode_p_e", None if spot is None else spot.p_e_hat
                ),
                "spot_decode_bound": None if spot is None else spot.bound.value,
                "spot_decode_bound_clamped": None if spot is None else spot.bound.clamped,
            }
        )
    emit_csv(rows, out / "scaling.csv")
    slope_text = "" if result.slope is None else f"{result.slope:.17g}"
    stderr_text = "" if result.slope_stderr is None else f"{result.slope_stderr:.17g}"
    _append_csv_comment(
        out / "scaling.csv",
        f"fitted_slope={slope_text} slope_stderr={stderr_text} "
        f"rows={sum(r.feasible for r in result.rows)}",
    )
    if result.slope is not None:
        print(f"fitted log-log slope = {result.slope:.4f} (stderr {result.slope_stderr:.4f})")
    manifest.results["fitted_slope"] = result.slope
    manifest.results["slope_stderr"] = result.slope_stderr
    _finish_manifest(manifest, out, ["scaling.csv"])
    return EXIT_OK if any(r.feasible for r in result.rows) else EXIT_INFEASIBLE


def _run_converse(cfg: dict, out: Path, manifest: RunManifest) -> int:
    rows_out = []
    for row in run_converse_sweep(_experiment_config(cfg, "converse")):
        rows_out.append(
            {
                "n": row.n,
                "p_k": row.p_k,
                "threshold_t": row.threshold_t,
                "d": row.d,
                "trials": row.trials,
                **_estimate_fields("alpha", row.alpha_hat),
                **_estimate_fields("beta", row.beta_hat),
                "alpha_bound": row.alpha_bound,
                "beta_bound": row.beta_bound,
                "beta_bound_vacuous": row.beta_bound_vacuous,
                "err_sum": row.alpha_hat.point + row.beta_hat.point,
                "rate": row.rate,
                "fano_message_error_lower": row.fano.message_error_lower,
                "fano_overall_error_lower": row.fano.overall_error_lower,
                "fano_clamped": row.fano.clamped,
                "goodput_upper": row.goodput.value,
                "goodput_clamped": row.goodput.clamped,
            }
        )
        print(
            f"n={row.n}: alpha_hat = {row.alpha_hat.point:.4f}, "
            f"beta_hat = {row.beta_hat.point:.4f}, "
            f"beta bound = {'vacuous' if row.beta_bound_vacuous else row.beta_bound}"
        )
    emit_csv(rows_out, out / "converse.csv")
    manifest.results["rows"] = len(rows_out)
    _finish_manifest(manifest, out, ["converse.csv"])
    return EXIT_OK


def _finish_manifest(manifest: RunManifest, out: Path, filenames) -> None:
    manifest.finished_utc = datetime.now(timezone.utc).isoformat()
    manifest.outputs = [
        {
            "path": name,
            "sha256": _sha256(out / name),
            "bytes": (out / name).stat().st_size,
        }
        for name in filenames
    ]
    (out / "manifest.json").write_text(manifest.to_json())


_RUNNERS = {
    "bounds": _run_bounds,
    "detect": _run_detect,
    "reliability": _run_reliability,
    "scaling": _run_scaling,
    "converse": _run_converse,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertlink",
        description="Covert-link bound and simulation toolkit",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, opts in _OPTIONS.items():
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", default=None, help="flat key = value config file")
        for opt in opts:
            sub.add_argument(f"--{opt.name}", default=None, help=opt.help)
    return parser


def dispatch(argv) -> int:
    """Parse, run, and serialize one CLI invocation; returns the exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK

    subcommand = args.subcommand
    try:
        file_values = (
            _parse_config_file(args.config) if args.config is not None else {}
        )
        raw, cfg = _merge_options(subcommand, vars(args), file_values)
        _require(cfg, ["n"], subcommand)
        if subcommand in _EXPERIMENT_SUBCOMMANDS:
            _require(cfg, ["seed", "out"], subcommand)
        if subcommand == "detect":
            _require(cfg, ["detector"], subcommand)
            eps_given = vars(args).get("eps") is not None or "eps" in file_values
            if cfg["power"] is not None and eps_given:
                raise ValueError("detect takes either --power or --eps, not both")
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    out = None
    if cfg.get("out") is not None:
        out = Path(cfg["out"])
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            print(f"output error: {err}", file=sys.stderr)
            return EXIT_IO

    # The output directory names where results land, not what they are, so it
    # stays out of the config echo: identically configured runs match even
    # when written to different places.
    manifest = RunManifest(
        subcommand=subcommand,
        config={k: v for k, v in raw.items() if v is not None and k != "out"},
        master_seed=cfg.get("seed"),
        started_utc=datetime.now(timezone.utc).isoformat(),
    )
    try:
        return _RUNNERS[subcommand](cfg, out, manifest)
    except BudgetInfeasibleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as err:
        print(f"output error: {err}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
