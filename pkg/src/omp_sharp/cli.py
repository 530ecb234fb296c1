"""Command-line interface.

Subcommands:

    omp run      run orthogonal matching pursuit on a matrix/measurement pair
    ric          exact restricted isometry constants of a matrix file
    construct    build worst-case and demonstration instances as JSON
    experiment   run a seeded sweep from a JSON config, emitting CSV + summary

Exit codes: 0 success, 2 usage or parse error, 3 numerical/precondition
error, 4 enumeration budget exceeded.
"""

import json
import os
import sys

import click
import numpy as np

from . import instances as inst
from .errors import BudgetExceeded, OmpSharpError, ParseError
from .experiments import ExperimentConfig, write_experiment_outputs
from .omp import (
    CorrelationLInf,
    FixedIterations,
    NaiveLInf,
    ResidualL2,
    linf_stopping_threshold,
    run_omp,
)
from .rip import DEFAULT_BUDGET, exact_ric
from .serialize import (
    dumps_json,
    format_matrix_text,
    instance_to_json_dict,
    parse_matrix_text,
    parse_vector_text,
)


def _read_matrix(path):
    with open(path) as fh:
        return parse_matrix_text(fh.read())


def _read_vector(path):
    with open(path) as fh:
        return parse_vector_text(fh.read())


def _emit(text, output):
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _thread_cap():
    """OMP_SHARP_THREADS caps worker parallelism; execution is sequential, so
    any positive value is honored trivially."""
    raw = os.environ.get("OMP_SHARP_THREADS")
    if raw is None:
        return None
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
    except ValueError:
        raise click.UsageError(f"OMP_SHARP_THREADS must be a positive integer, got {raw!r}")
    return cap


def _parse_rule(spec, A, sparsity, use_exact_ric, delta2, delta_k1, unit_norm):
    """Resolve a rule spec string (fixed:K, l2:eps, linf:eps, naive-linf:eps)
    into a stopping rule.

    For linf the epsilon is the noise level; the actual stopping threshold is
    derived from it with either exactly enumerated deltas (--exact-ric) or the
    user-supplied --delta2/--delta-k1 pair.
    """
    name, _, value = spec.partition(":")
    if not value:
        raise click.UsageError(f"rule spec {spec!r} must look like name:value")
    try:
        if name == "fixed":
            return FixedIterations(int(value))
        if name == "l2":
            return ResidualL2(float(value))
        if name == "naive-linf":
            return NaiveLInf(float(value))
        if name == "linf":
            epsilon = float(value)
            if sparsity is None:
                raise click.UsageError("linf rule requires --sparsity")
            if use_exact_ric:
                delta_k1 = exact_ric(A, min(sparsity + 1, A.shape[1])).delta
                delta2 = exact_ric(A, min(2, A.shape[1])).delta
            elif delta2 is None or delta_k1 is None:
                raise click.UsageError(
                    "linf rule requires --exact-ric or both --delta2 and --delta-k1"
                )
            threshold = linf_stopping_threshold(
                sparsity, delta2, delta_k1, epsilon, unit_norm_columns=unit_norm
            )
            return CorrelationLInf(threshold)
    except ValueError:
        raise click.UsageError(f"rule spec {spec!r} has a malformed value")
    raise click.UsageError(
        f"unknown rule {name!r}; expected fixed, l2, linf or naive-linf"
    )


@click.group()
def cli():
    """Sparse support recovery via orthogonal matching pursuit."""


@cli.group("omp")
def omp_group():
    """Run the recovery algorithm."""


@omp_group.command("run")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("measurement_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("rule_spec")
@click.option("--sparsity", type=int, default=None, help="Sparsity K for the linf threshold.")
@click.option("--exact-ric", "use_exact_ric", is_flag=True,
              help="Derive the linf threshold from exactly enumerated deltas.")
@click.option("--delta2", type=float, default=None, help="Order-2 delta for the linf threshold.")
@click.option("--delta-k1", type=float, default=None, help="Order-(K+1) delta for the linf threshold.")
@click.option("--unit-norm", is_flag=True, help="Use the relaxed threshold for unit-norm columns.")
@click.option("--max-iterations", type=int, default=None)
@click.option("--tie-seed", type=int, default=None,
              help="Break correlation ties at random with this seed (default: smallest index).")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
              help="Write the trace JSON here instead of stdout.")
def omp_run(matrix_file, measurement_file, rule_spec, sparsity, use_exact_ric,
            delta2, delta_k1, unit_norm, max_iterations, tie_seed, output):
    """Run the solver and emit the iteration trace as JSON."""
    _thread_cap()
    A = _read_matrix(matrix_file)
    y = _read_vector(measurement_file)
    rule = _parse_rule(rule_spec, A, sparsity, use_exact_ric, delta2, delta_k1, unit_norm)
    rng = None if tie_seed is None else np.random.default_rng(tie_seed)
    trace = run_omp(y, A, rule, max_iterations=max_iterations, tie_break_rng=rng)
    _emit(dumps_json(trace.to_json_dict()), output)


@cli.command("ric")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("order", type=int)
@click.option("--all-orders", is_flag=True,
              help="Report every order 1..ORDER in one monotone table.")
@click.option("--budget", type=int, default=DEFAULT_BUDGET, show_default=True,
              help="Cap on the number of enumerated subsets.")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
def ric_cmd(matrix_file, order, all_orders, budget, output):
    """Exact restricted isometry constant by exhaustive enumeration."""
    _thread_cap()
    A = _read_matrix(matrix_file)
    orders = range(1, order + 1) if all_orders else [order]
    reports = [exact_ric(A, k, budget=budget).to_json_dict() for k in orders]
    doc = {"reports": reports} if all_orders else reports[0]
    _emit(dumps_json(doc), output)


def _certification(instance, sparsity):
    A = instance.A
    x = instance.x
    ric = exact_ric(A, min(sparsity + 1, A.shape[1]))
    correlations = A.T @ instance.measurements()
    on = [abs(float(correlations[i - 1])) for i in sorted(x.support)]
    off = [
        abs(float(correlations[i - 1]))
        for i in range(1, A.shape[1] + 1)
        if i not in x.support
    ]
    if instance.noise_model == inst.NOISE_L2:
        noise_bound = float(np.linalg.norm(instance.v))
    else:
        noise_bound = float(np.max(np.abs(A.T @ instance.v)))
    return {
        "exact_ric": ric.to_json_dict(),
        "noise_model": instance.noise_model,
        "noise_bound_value": noise_bound,
        "epsilon": instance.epsilon,
        "noise_bound_satisfied": noise_bound <= instance.epsilon + 1e-12,
        "first_iteration_correlations": {
            "max_on_support": max(on) if on else None,
            "max_off_support": max(off) if off else None,
        },
    }


@cli.command("construct")
@click.argument("kind", type=click.Choice(["l2", "linf", "example1", "example2", "example3"]))
@click.option("--sparsity", "-K", "sparsity", type=int, default=1, show_default=True)
@click.option("--delta", type=float, required=True)
@click.option("--epsilon", type=float, default=1.0, show_default=True)
@click.option("--gamma-fraction", type=float, default=0.9, show_default=True,
              help="Signal magnitude as a fraction of the open upper bound (l2/linf).")
@click.option("--gamma", type=float, default=None, help="Raw signal magnitude override.")
@click.option("--a", "a_value", type=float, default=None,
              help="Signal magnitude for the example instances (defaults per example).")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--matrix-out", type=click.Path(dir_okay=False), default=None,
              help="Also write the sensing matrix in the matrix text format.")
def construct_cmd(kind, sparsity, delta, epsilon, gamma_fraction, gamma, a_value,
                  output, matrix_out):
    """Build a worst-case or demonstration instance and certify it."""
    _thread_cap()
    K = sparsity
    if kind == "l2":
        if gamma is None:
            gamma = gamma_fraction * inst.l2_gamma_bound(K, delta, epsilon)
        instance = inst.build_counterexample_l2(K, delta, epsilon, gamma)
    elif kind == "linf":
        if gamma is None:
            gamma = gamma_fraction * inst.linf_gamma_bound(K, delta, epsilon)
        instance = inst.build_counterexample_linf(K, delta, epsilon, gamma)
    elif kind == "example1":
        if a_value is None:
            a_value = 1.5 * (1.0 + delta) / (1.0 - delta)
        instance = inst.build_example1(delta, a_value)
        K = 1
    elif kind == "example2":
        if a_value is None:
            a_value = 0.9 * inst.example2_a_bound(delta)
        instance = inst.build_example2(delta, a_value)
        K = 1
    else:
        if a_value is None:
            a_value = 0.9 * inst.example3_a_bound(delta)
        instance = inst.build_example3(delta, a_value)
        K = 1
    doc = {
        "instance": instance_to_json_dict(instance),
        "certification": _certification(instance, K),
    }
    _emit(dumps_json(doc), output)
    if matrix_out is not None:
        with open(matrix_out, "w") as fh:
            fh.write(format_matrix_text(instance.A))


@cli.command("experiment")
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Override the config's CSV output path.")
@click.option("--summary", "summary_path", type=click.Path(dir_okay=False), default=None,
              help="Override the config's JSON summary path.")
def experiment_cmd(config_file, csv_path, summary_path):
    """Run a seeded experiment sweep from a JSON config."""
    _thread_cap()
    with open(config_file) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{config_file}: {exc}", line=exc.lineno)
    config = ExperimentConfig.from_json_dict(doc)
    csv_path = csv_path or config.output_csv
    summary_path = summary_path or config.output_summary
    if csv_path is None:
        raise click.UsageError("no CSV output path: set output_csv in the config or pass --csv")
    summary = write_experiment_outputs(config, csv_path, summary_path)
    click.echo(dumps_json(summary), nl=False)


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except BudgetExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(4)
    except OmpSharpError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(3)
    sys.exit(0)


if __name__ == "__main__":
    main()
