"""Command-line front end.

Three commands over a shared flag set:

  analyze     rank / pseudoinverse / optimal-constraint report for one
              information matrix, from a matx file or a model config
  certify     run every inequality certificate and write one CSV row per
              theorem; nonzero exit when a certificate fails
  experiment  sample random minimum constraints for a singular matrix
              and record the trace of each constrained bound

Input is either a matx matrix file or a flat key = value model config;
command-line flags override file values. Every run writes a manifest
that can be fed back through --input to reproduce the run bit for bit.
All randomness fans out from one seed through labeled streams. Exit
codes: 0 success, 2 invalid input, 3 numerical failure, 4 certificate
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .constraint import (
    optimal_affine_constraint,
    sample_minimum_constraints,
    save_constraint_spec,
)
from .crb import constrained_crb, unconstrained_crb
from .errors import (
    CrbKitError,
    DegenerateParameter,
    FullRankFim,
    InvalidInput,
    InvalidMatrix,
    InvalidModel,
    NumericalFailure,
    SamplingExhausted,
)
from .fim import fim_gaussian_mean, fim_monte_carlo
from .matlin import (
    DEFAULT_PSD_TOL_REL,
    DEFAULT_RANK_TOL_REL,
    as_sym_matrix,
    null_complement,
    orthonormal_columns,
    pinv_via_basis,
    ranked_svd,
)
from .matx import format_float, load_matrix, parse_matrix, save_matrix
from .statmodel import BlindChannelModel, gaussian_location
from .verify import (
    DEFAULT_MARGIN_TOL,
    counterexample_check,
    certificates_to_csv,
    merge_certificates,
    random_rank_deficient_psd,
    verify_constraint_equivalence,
    verify_eigen_dominance,
    verify_min_rank,
    verify_poincare,
    verify_trace_bound,
    write_certificate_witnesses,
)

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_CERTIFICATE = 4

CSV_VERSION_LINE = "# crb-kit v1"

DEFAULT_SEED = 0
DEFAULT_COUNT = 100
DEFAULT_SAMPLES = 10000
DEFAULT_OUT = "crbkit_run"

# Fixed per-matrix case counts for certify.
CERTIFY_CONSTRAINTS_PER_MATRIX = 20
CERTIFY_EQUIVALENCE_ALTS = 3
CERTIFY_MIN_RANK_TRIALS = 5

MODEL_KINDS = ("blind_channel", "gaussian_location")

CONFIG_KEYS = {
    "command",
    "version",
    "input",
    "model",
    "s_len",
    "h_len",
    "dim",
    "noise_var",
    "theta",
    "seed",
    "count",
    "samples",
    "rank_tol",
    "psd_tol",
    "margin_tol",
    "fim_method",
}


class CliError(Exception):
    """Error with an exit code; the message names the failing stage."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _label_key(label: str) -> int:
    digest = hashlib.sha256(label.encode("ascii")).digest()
    return int.from_bytes(digest[:4], "big")


def derived_rng(seed: int, label: str, index: int = 0) -> np.random.Generator:
    """Random stream derived from (seed, component label, index)."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(_label_key(label), index))
    return np.random.default_rng(seq)


def derived_seed(seed: int, label: str, index: int = 0) -> int:
    """Integer sub-seed derived from (seed, component label, index)."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(_label_key(label), index))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass
class RunConfig:
    """Fully resolved run parameters."""

    command: str
    input_kind: str  # "matrix" | "model" | "suite"
    matrix: np.ndarray | None = None
    model_kind: str | None = None
    model_params: dict = field(default_factory=dict)
    theta: np.ndarray | None = None
    seed: int = DEFAULT_SEED
    count: int = DEFAULT_COUNT
    n_samples: int = DEFAULT_SAMPLES
    fim_method: str = "analytic"
    rank_tol_rel: float = DEFAULT_RANK_TOL_REL
    psd_tol_rel: float = DEFAULT_PSD_TOL_REL
    margin_tol: float = DEFAULT_MARGIN_TOL
    output_dir: Path = Path(DEFAULT_OUT)

    def validate(self) -> None:
        if self.command not in ("analyze", "certify", "experiment"):
            raise InvalidInput(f"unknown command {self.command!r}")
        if self.input_kind not in ("matrix", "model", "suite"):
            raise InvalidInput(f"unknown input kind {self.input_kind!r}")
        if self.input_kind == "suite" and self.command != "certify":
            raise InvalidInput(f"{self.command} requires --input or --model")
        for name, value in (
            ("rank_tol", self.rank_tol_rel),
            ("psd_tol", self.psd_tol_rel),
            ("margin_tol", self.margin_tol),
        ):
            if not value > 0.0:
                raise InvalidInput(f"{name} must be positive, got {value}")
        if self.count < 1:
            raise InvalidInput(f"count must be positive, got {self.count}")
        if self.fim_method not in ("analytic", "monte_carlo"):
            raise InvalidInput(f"fim_method must be analytic or monte_carlo, got {self.fim_method!r}")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat key = value lines; # starts a comment."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise InvalidInput(f"config line {number} is not 'key = value': {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise InvalidInput(f"unknown config key {key!r} on line {number}")
        values[key] = value.strip()
    return values


def _sniff_is_config(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        return "=" in line
    return False


def _parse_float(values: dict[str, str], key: str) -> float | None:
    if key not in values:
        return None
    try:
        return float(values[key])
    except ValueError as exc:
        raise InvalidInput(f"config key {key} is not a number: {values[key]!r}") from exc


def _parse_int(values: dict[str, str], key: str) -> int | None:
    if key not in values:
        return None
    try:
        return int(values[key])
    except ValueError as exc:
        raise InvalidInput(f"config key {key} is not an integer: {values[key]!r}") from exc


def _pick(flag, file_value, default):
    if flag is not None:
        return flag
    if file_value is not None:
        return file_value
    return default


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge CLI flags over config-file values into a RunConfig."""
    file_values: dict[str, str] = {}
    matrix: np.ndarray | None = None
    input_kind = "suite"
    model_kind: str | None = None

    if args.input is not None and args.model is not None:
        raise InvalidInput("pass exactly one of --input and --model")

    if args.input is not None:
        path = Path(args.input)
        if not path.is_file():
            raise InvalidInput(f"no such input file: {path}")
        text = path.read_text(encoding="ascii")
        if _sniff_is_config(text):
            file_values = parse_config_text(text)
            if "model" in file_values and "input" in file_values:
                raise InvalidInput("config names both a model and an input matrix")
            if "model" in file_values:
                model_kind = file_values["model"]
                input_kind = "model"
            elif "input" in file_values:
                ref = (path.parent / file_values["input"]).resolve()
                matrix = load_matrix(ref)
                input_kind = "matrix"
            else:
                raise InvalidInput("config names neither a model nor an input matrix")
        else:
            matrix = parse_matrix(text)
            input_kind = "matrix"
    elif args.model is not None:
        model_kind = args.model
        input_kind = "model"

    if model_kind is not None and model_kind not in MODEL_KINDS:
        raise InvalidInput(f"unknown model {model_kind!r}; choose from {MODEL_KINDS}")

    model_params: dict = {}
    if model_kind == "blind_channel":
        model_params["s_len"] = _pick(None, _parse_int(file_values, "s_len"), 3)
        model_params["h_len"] = _pick(None, _parse_int(file_values, "h_len"), 3)
        model_params["noise_var"] = _pick(None, _parse_float(file_values, "noise_var"), 1.0)
    elif model_kind == "gaussian_location":
        model_params["dim"] = _pick(None, _parse_int(file_values, "dim"), 4)
        model_params["noise_var"] = _pick(None, _parse_float(file_values, "noise_var"), 1.0)

    theta = None
    if "theta" in file_values:
        try:
            theta = np.array([float(v) for v in file_values["theta"].split()])
        except ValueError as exc:
            raise InvalidInput(f"config key theta is not a vector: {file_values['theta']!r}") from exc

    config = RunConfig(
        command=args.command,
        input_kind=input_kind,
        matrix=matrix,
        model_kind=model_kind,
        model_params=model_params,
        theta=theta,
        seed=_pick(args.seed, _parse_int(file_values, "seed"), DEFAULT_SEED),
        count=_pick(args.count, _parse_int(file_values, "count"), DEFAULT_COUNT),
        n_samples=_pick(args.samples, _parse_int(file_values, "samples"), DEFAULT_SAMPLES),
        fim_method=_pick(None, file_values.get("fim_method"), "analytic"),
        rank_tol_rel=_pick(args.rank_tol, _parse_float(file_values, "rank_tol"), DEFAULT_RANK_TOL_REL),
        psd_tol_rel=_pick(args.psd_tol, _parse_float(file_values, "psd_tol"), DEFAULT_PSD_TOL_REL),
        margin_tol=_pick(args.margin_tol, _parse_float(file_values, "margin_tol"), DEFAULT_MARGIN_TOL),
        output_dir=Path(args.out),
    )
    config.validate()
    return config


def build_model(config: RunConfig):
    if config.model_kind == "blind_channel":
        return BlindChannelModel(
            s_len=config.model_params["s_len"],
            h_len=config.model_params["h_len"],
            noise_var=config.model_params["noise_var"],
        )
    if config.model_kind == "gaussian_location":
        return gaussian_location(
            dim=config.model_params["dim"],
            noise_var=config.model_params["noise_var"],
        )
    raise InvalidInput(f"unknown model {config.model_kind!r}")


def resolve_theta(config: RunConfig, param_dim: int) -> np.ndarray:
    """Explicit theta from the config, else generic values from the seed."""
    if config.theta is not None:
        if config.theta.size != param_dim:
            raise InvalidInput(
                f"theta has length {config.theta.size}, model needs {param_dim}"
            )
        return config.theta
    return derived_rng(config.seed, "theta").uniform(0.5, 1.5, param_dim)


def information_matrix(config: RunConfig):
    """Resolve the run's information matrix; returns (SymMatrix, FimEstimate | None)."""
    if config.input_kind == "matrix":
        return as_sym_matrix(config.matrix), None
    model = build_model(config)
    theta = resolve_theta(config, model.param_dim)
    config.theta = theta  # record the resolved point for the manifest
    if config.fim_method == "monte_carlo":
        estimate = fim_monte_carlo(
            model, theta, config.n_samples, derived_seed(config.seed, "fim-mc")
        )
    else:
        estimate = fim_gaussian_mean(model, theta)
    return estimate.matrix, estimate


def write_manifest(config: RunConfig, path: Path) -> None:
    """Write the resolved run config in config-file form (17-digit floats)."""
    lines = [
        f"{CSV_VERSION_LINE} manifest",
        f"command = {config.command}",
        f"version = {__version__}",
        f"seed = {config.seed}",
        f"count = {config.count}",
        f"samples = {config.n_samples}",
        f"rank_tol = {format_float(config.rank_tol_rel)}",
        f"psd_tol = {format_float(config.psd_tol_rel)}",
        f"margin_tol = {format_float(config.margin_tol)}",
    ]
    if config.input_kind == "matrix":
        lines.append("input = j.matx")
    elif config.input_kind == "model":
        lines.append(f"model = {config.model_kind}")
        for key in ("s_len", "h_len", "dim"):
            if key in config.model_params:
                lines.append(f"{key} = {config.model_params[key]}")
        lines.append(f"noise_var = {format_float(config.model_params['noise_var'])}")
        lines.append(f"fim_method = {config.fim_method}")
        if config.theta is not None:
            lines.append("theta = " + " ".join(format_float(v) for v in config.theta))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def _kv_csv(rows: list[tuple[str, str]]) -> str:
    lines = [CSV_VERSION_LINE, "key,value"]
    lines += [f"{k},{v}" for k, v in rows]
    return "\n".join(lines) + "\n"


def cmd_analyze(config: RunConfig) -> int:
    """Rank, pseudoinverse, and optimal-constraint report for one matrix."""
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    try:
        sym, estimate = information_matrix(config)
    except (InvalidInput, InvalidMatrix, InvalidModel) as exc:
        raise CliError(EXIT_INVALID_INPUT, f"reading input: {exc}") from exc
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        raise CliError(EXIT_NUMERICAL, f"estimating information matrix: {exc}") from exc

    try:
        basis = ranked_svd(sym, config.rank_tol_rel)
        report = unconstrained_crb(sym, config.rank_tol_rel)
    except np.linalg.LinAlgError as exc:
        raise CliError(EXIT_NUMERICAL, f"decomposing information matrix: {exc}") from exc

    n, rank = sym.dim, basis.rank
    save_matrix(out / "j.matx", sym.entries)
    save_matrix(out / "j_pinv.matx", report.bound.entries)

    rows: list[tuple[str, str]] = [
        ("command", "analyze"),
        ("n", str(n)),
        ("rank", str(rank)),
        ("nullity", str(n - rank)),
        ("singular_fim_warning", "true" if report.singular_fim_warning else "false"),
        ("trace_pinv", format_float(report.trace)),
    ]
    if estimate is not None:
        rows.append(("fim_method", estimate.method))
        if estimate.method == "monte_carlo":
            rows.append(("fim_samples", str(estimate.n_samples)))
            rows.append(("fim_std_err_bound", format_float(estimate.std_err_bound)))
            rows.append(("fim_clip_magnitude", format_float(estimate.clip_magnitude)))
    for i, value in enumerate(ranked_svd(sym, config.rank_tol_rel).sigma, 1):
        rows.append((f"sigma_{i}", format_float(value)))
    for i, value in enumerate(report.eigenvalues.values, 1):
        rows.append((f"eig_pinv_{i}", format_float(value)))

    if rank == n:
        rows.append(("constraint", "none"))
        rows.append(("note", "no constraint needed"))
        print(f"information matrix is nonsingular (rank {rank}); no constraint needed")
        print(f"inverse written to {out / 'j_pinv.matx'}")
    else:
        try:
            spec = optimal_affine_constraint(sym, np.zeros(n), config.rank_tol_rel)
            bound = constrained_crb(sym, spec, config.rank_tol_rel)
        except np.linalg.LinAlgError as exc:
            raise CliError(EXIT_NUMERICAL, f"synthesizing optimal constraint: {exc}") from exc
        save_constraint_spec(out / "constraint.matx", spec)
        save_matrix(out / "crb_constrained.matx", bound.bound.entries)
        rows.append(("constraint", spec.label))
        rows.append(("constraint_rows", str(spec.n_constraints)))
        rows.append(("constraint_exists", "true" if bound.exists else "false"))
        rows.append(("trace_constrained", format_float(bound.trace)))
        for i, value in enumerate(bound.eigenvalues.values, 1):
            rows.append((f"eig_crb_{i}", format_float(value)))
        print(
            f"information matrix is singular (rank {rank} of {n}); "
            f"optimal affine constraint has {spec.n_constraints} row(s)"
        )

    (out / "analysis.csv").write_text(_kv_csv(rows), encoding="ascii")
    write_manifest(config, out / "manifest.cfg")
    print(f"report written to {out / 'analysis.csv'}")
    return EXIT_OK


def _certify_one_matrix(sym, config: RunConfig, index: int, constraints_count: int):
    """All per-matrix certificates for one singular J."""
    seed = config.seed
    tol = config.margin_tol
    rank_tol = config.rank_tol_rel
    basis = ranked_svd(sym, rank_tol)
    n, rank = sym.dim, basis.rank

    specs = sample_minimum_constraints(
        sym, constraints_count, derived_seed(seed, "certify-constraints", index), rank_tol
    )
    trace_cert = verify_trace_bound(sym, specs, tol, rank_tol)
    dominance_parts = []
    for spec in specs:
        v = null_complement(spec.f_jac, rank_tol)
        dominance_parts.append(verify_eigen_dominance(sym, v, tol, rank_tol))
    dominance_cert = merge_certificates(dominance_parts, tol)

    v = orthonormal_columns(
        derived_rng(seed, "certify-poincare", index).standard_normal((n, rank))
    )
    poincare_cert = verify_poincare(sym, v, tol)

    equiv_rng = derived_rng(seed, "certify-equivalence", index)
    alts = [
        equiv_rng.standard_normal((n - rank, n - rank)) @ basis.u_bar.T
        for _ in range(CERTIFY_EQUIVALENCE_ALTS)
    ]
    equivalence_cert = verify_constraint_equivalence(sym, np.zeros(n), alts, tol, rank_tol)

    min_rank_cert = verify_min_rank(
        sym, CERTIFY_MIN_RANK_TRIALS, derived_seed(seed, "certify-minrank", index), tol, rank_tol
    )
    return trace_cert, dominance_cert, poincare_cert, equivalence_cert, min_rank_cert


def cmd_certify(config: RunConfig) -> int:
    """Run the full certificate suite; exit 4 when any inequality fails."""
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    matrices = []
    if config.input_kind == "suite":
        shape_rng = derived_rng(config.seed, "certify-shapes")
        for i in range(config.count):
            n = int(shape_rng.integers(2, 9))
            rank = int(shape_rng.integers(1, n))
            matrices.append(
                random_rank_deficient_psd(n, rank, derived_rng(config.seed, "certify-matrix", i))
            )
        constraints_count = CERTIFY_CONSTRAINTS_PER_MATRIX
    else:
        try:
            sym, _ = information_matrix(config)
        except (InvalidInput, InvalidMatrix, InvalidModel) as exc:
            raise CliError(EXIT_INVALID_INPUT, f"reading input: {exc}") from exc
        if ranked_svd(sym, config.rank_tol_rel).rank == sym.dim:
            raise CliError(
                EXIT_INVALID_INPUT,
                "certify: input information matrix is nonsingular; the bound "
                "inequalities are only at stake for singular input",
            )
        matrices.append(sym)
        constraints_count = config.count

    per_theorem: dict[str, list] = {tid: [] for tid in ("trace_bound", "eigen_dominance", "poincare", "equivalence", "min_rank")}
    try:
        for index, sym in enumerate(matrices):
            certs = _certify_one_matrix(sym, config, index, constraints_count)
            for cert in certs:
                per_theorem[cert.theorem_id].append(cert)
    except (SamplingExhausted, NumericalFailure, np.linalg.LinAlgError) as exc:
        raise CliError(EXIT_NUMERICAL, f"building certificates: {exc}") from exc

    certificates = [
        merge_certificates(parts, config.margin_tol) for parts in per_theorem.values()
    ]
    certificates.append(counterexample_check(config.margin_tol))

    (out / "certificates.csv").write_text(certificates_to_csv(certificates), encoding="ascii")
    write_manifest(config, out / "manifest.cfg")

    failed = [cert for cert in certificates if not cert.passed]
    for cert in certificates:
        status = "passed" if cert.passed else "FAILED"
        print(
            f"{cert.theorem_id}: {status} over {cert.n_cases} cases, "
            f"worst margin {format_float(cert.worst_margin)}"
            + (f" ({cert.detail})" if cert.detail else "")
        )
    if failed:
        witness_dir = out / "witnesses"
        for cert in failed:
            paths = write_certificate_witnesses(cert, witness_dir)
            print(f"{cert.theorem_id}: wrote {len(paths)} witness files to {witness_dir}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def cmd_experiment(config: RunConfig) -> int:
    """Trace survey over sampled minimum constraints for a singular matrix."""
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    try:
        sym, _ = information_matrix(config)
    except (InvalidInput, InvalidMatrix, InvalidModel) as exc:
        raise CliError(EXIT_INVALID_INPUT, f"reading input: {exc}") from exc

    baseline = pinv_via_basis(sym, config.rank_tol_rel).trace
    try:
        specs = sample_minimum_constraints(
            sym, config.count, derived_seed(config.seed, "experiment-constraints"), config.rank_tol_rel
        )
    except FullRankFim as exc:
        raise CliError(EXIT_INVALID_INPUT, f"sampling constraints: {exc}") from exc
    except SamplingExhausted as exc:
        raise CliError(EXIT_NUMERICAL, f"sampling constraints: {exc}") from exc

    lines = [CSV_VERSION_LINE, f"# baseline_trace = {format_float(baseline)}", "sample_index,trace,margin"]
    worst = np.inf
    for idx, spec in enumerate(specs):
        report = constrained_crb(sym, spec, config.rank_tol_rel)
        margin = report.trace - baseline
        worst = min(worst, margin)
        lines.append(f"{idx},{format_float(report.trace)},{format_float(margin)}")
    (out / "traces.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    write_manifest(config, out / "manifest.cfg")

    print(
        f"{len(specs)} constraints sampled; baseline trace {format_float(baseline)}; "
        f"worst margin {format_float(worst)}"
    )
    if worst < -config.margin_tol:
        raise CliError(
            EXIT_NUMERICAL,
            f"experiment: observed trace margin {format_float(worst)} below -margin_tol",
        )
    print(f"traces written to {out / 'traces.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crbkit",
        description="Cramer-Rao bounds under singular Fisher information",
    )
    parser.add_argument("--version", action="version", version=f"crbkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("analyze", "rank / pseudoinverse / optimal constraint report"),
        ("certify", "run all inequality certificates"),
        ("experiment", "trace survey over sampled minimum constraints"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--input", help="matx matrix file or key = value config file")
        cmd.add_argument("--model", choices=MODEL_KINDS, help="built-in model with default sizes")
        cmd.add_argument("--seed", type=int, help="top-level random seed")
        cmd.add_argument("--count", type=int, help="matrices (certify suite) or constraints to sample")
        cmd.add_argument("--samples", type=int, help="Monte-Carlo sample count")
        cmd.add_argument("--out", default=DEFAULT_OUT, help="output directory")
        cmd.add_argument("--rank-tol", dest="rank_tol", type=float, help="relative rank cutoff")
        cmd.add_argument("--psd-tol", dest="psd_tol", type=float, help="relative PSD slack")
        cmd.add_argument("--margin-tol", dest="margin_tol", type=float, help="certificate margin tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        try:
            config = resolve_config(args)
        except (InvalidInput, InvalidMatrix, InvalidModel, DegenerateParameter, OSError) as exc:
            raise CliError(EXIT_INVALID_INPUT, f"resolving configuration: {exc}") from exc
        if config.command == "analyze":
            return cmd_analyze(config)
        if config.command == "certify":
            return cmd_certify(config)
        return cmd_experiment(config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except CrbKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
