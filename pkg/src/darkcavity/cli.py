"""Command-line entry point: experiment orchestration and plot-ready CSV/JSON
emission.

Subcommands:
  sweep          stationary observables over a detuning grid -> CSV
  darkstate      dark-state residual, stationary fidelity, observability -> report
  observability  anti-resonance observability report only
  oracle         weak-model vs full-model drive ladder -> CSV + convergence fit
  svd            collective-mode decomposition of the coupling matrix

Exit codes: 0 success, 1 validation/configuration error, 2 numerical failure
(including a convergence order off by more than 0.5), 3 resource budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import analytic, fockoracle, weaksolver
from .config import build_system_params, config_hash, load_config, to_toml
from .errors import (ConfigError, NumericalError, ResourceLimitError,
                     ValidationError)
from .model import decompose

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_RESOURCE = 3


def _fmt(value, precision):
    if isinstance(value, (float, np.floating)):
        return format(float(value), f".{precision}g")
    return str(value)


def _complex_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [_complex_pair(z) for z in obj.ravel()]
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, complex):
        return _complex_pair(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}") from exc


def _out_path(args, config):
    return args.out if args.out is not None else config.output.path


def _echo_config(args, config):
    if args.echo_config:
        _write_text(args.echo_config, to_toml(config))


def cmd_sweep(args):
    config = load_config(args.config)
    if config.sweep is None:
        raise ConfigError("the sweep command needs a [sweep] block")
    _echo_config(args, config)
    params = build_system_params(config, seed=args.seed)
    sw = config.sweep
    grid = np.linspace(sw.delta_min, sw.delta_max, sw.count)
    result = weaksolver.sweep_detuning(
        params, grid, pinned_delta_c=sw.pinned_delta_c,
        method=sw.method, threads=args.threads,
    )
    p = config.output.precision
    lines = [f"# config_sha256={config_hash(config)}", "# command=sweep"]
    header = (["delta"]
              + [f"pop_mode_{k + 1}" for k in range(params.n_modes)]
              + ["pop_total", "ground_weight"]
              + [f"atom_excitation_{l + 1}" for l in range(params.n_atoms)]
              + ["residual", "status"])
    lines.append(",".join(header))
    for i in range(result.n_points):
        row = [_fmt(result.deltas[i], p)]
        row += [_fmt(v, p) for v in result.mode_populations[i]]
        row += [_fmt(result.total_population[i], p), _fmt(result.ground_weight[i], p)]
        row += [_fmt(v, p) for v in result.atom_excitations[i]]
        row += [_fmt(result.residuals[i], p), result.statuses[i]]
        lines.append(",".join(row))
    _write_text(_out_path(args, config), "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_darkstate(args):
    config = load_config(args.config)
    _echo_config(args, config)
    params = build_system_params(
        config, seed=args.seed, delta_a=0.0, delta_c=config.darkstate.delta_c,
    )
    dec = decompose(params)
    dark = analytic.dark_state(dec)
    psi = dark.weak_vector(dec)
    H = weaksolver.build_hamiltonian(params)
    h_norm = float(np.linalg.norm(H))
    residual = float(np.linalg.norm(H @ psi)) / h_norm if h_norm > 0 else 0.0
    stationary = weaksolver.solve_stationary(weaksolver.build_liouvillian(params))
    fidelity = float(np.real(psi.conj() @ stationary.rho.data @ psi))
    report = analytic.observability_report(
        params, dec,
        target_splitting=config.observability.target_splitting,
        single_atom_g=config.observability.single_atom_g,
    )
    payload = {
        "config_sha256": config_hash(config),
        "dark_state": {
            "norm": dark.norm,
            "ground_amplitude": _complex_pair(dark.ground_amplitude),
            "atomic_amplitudes": [_complex_pair(z) for z in dark.atomic_amplitudes],
        },
        "hamiltonian_residual_relative": residual,
        "stationary_fidelity": fidelity,
        "stationary_method": stationary.method,
        "observability": _report_payload(report),
    }
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    print(f"dark-state residual |H psi|/|H| = {residual:.3e}")
    print(f"stationary fidelity             = {fidelity:.12f}")
    print(f"anti-resonance observable       = {'yes' if report.observable else 'no'}")
    out = _out_path(args, config)
    if out:
        _write_text(out, text)
    return EXIT_OK


def _report_payload(report):
    return {
        "splittings": report.splittings,
        "condition1_ok": report.condition1_ok,
        "condition1_margin": report.condition1_margin,
        "condition2_ok": report.condition2_ok,
        "condition2_margin": [None if np.isinf(m) else float(m)
                              for m in np.atleast_1d(report.condition2_margin)],
        "window_low": report.window_low,
        "window_high": report.window_high,
        "window_empty": report.window_empty,
        "in_window": report.in_window,
        "width_estimates": report.width_estimates,
        "weak_driving_ok": report.weak_driving_ok,
        "drive_ratio": report.drive_ratio,
        "observable": report.observable,
        "atom_number_estimate": (None if np.isnan(report.atom_number_estimate)
                                 else report.atom_number_estimate),
        "target_splitting": report.target_splitting,
    }


def cmd_observability(args):
    config = load_config(args.config)
    _echo_config(args, config)
    params = build_system_params(config, seed=args.seed)
    dec = decompose(params)
    report = analytic.observability_report(
        params, dec,
        target_splitting=config.observability.target_splitting,
        single_atom_g=config.observability.single_atom_g,
    )
    payload = {"config_sha256": config_hash(config),
               "observability": _report_payload(report)}
    verdict = "observable" if report.observable else "not observable"
    print(f"dark anti-resonance: {verdict}")
    print(f"window for the splitting: [{report.window_low:.6g}, {report.window_high:.6g}]"
          + (" (empty)" if report.window_empty else ""))
    for j, lam in enumerate(np.atleast_1d(report.splittings)):
        print(f"mode {j + 1}: splitting={lam:.6g} "
              f"cond1={'ok' if report.condition1_ok[j] else 'fail'} "
              f"(margin {report.condition1_margin[j]:.3g}) "
              f"cond2={'ok' if report.condition2_ok[j] else 'fail'} "
              f"(margin {report.condition2_margin[j]:.3g})")
    if not np.isnan(report.atom_number_estimate):
        print(f"atoms needed for splitting {report.target_splitting:.6g}: "
              f"{report.atom_number_estimate:.6g}")
    out = _out_path(args, config)
    if out:
        _write_text(out, json.dumps(payload, indent=2, sort_keys=True,
                                    default=_json_default) + "\n")
    return EXIT_OK


def cmd_oracle(args):
    config = load_config(args.config)
    if config.oracle is None:
        raise ConfigError("the oracle command needs an [oracle] block")
    _echo_config(args, config)
    oc = config.oracle
    p = config.output.precision
    rows = []
    for eta in oc.drive_ladder:
        params = build_system_params(
            config, seed=args.seed, delta_a=oc.delta, gamma=oc.gamma,
            drives=[eta] * config.system.n_modes,
        )
        weak = weaksolver.solve_stationary(weaksolver.build_liouvillian(params))
        fock = fockoracle.solve_full_stationary(params, oc.n_max)
        pw, pf = weak.total_population, fock.total_population
        if pw > 0:
            gap = abs(pf - pw) / pw
        else:
            gap = 0.0 if pf == pw else float("nan")
        rows.append((eta, pw, pf, gap))
    order = float("nan")
    finite = [(e, g) for e, g in ((r[0], r[3]) for r in rows)
              if e > 0 and np.isfinite(g) and g > 0]
    if len(finite) >= 2:
        le = np.log([e for e, _ in finite])
        lg = np.log([g for _, g in finite])
        order = float(np.polyfit(le, lg, 1)[0])
    lines = [f"# config_sha256={config_hash(config)}", "# command=oracle",
             f"# fitted_order={_fmt(order, p)}",
             "eta,pop_weak,pop_fock,relative_gap"]
    for eta, pw, pf, gap in rows:
        lines.append(",".join(_fmt(v, p) for v in (eta, pw, pf, gap)))
    _write_text(_out_path(args, config), "\n".join(lines) + "\n")
    print(f"fitted convergence order: {order:.4f}")
    if len(finite) >= 2 and abs(order - 2.0) > 0.5:
        raise NumericalError(
            f"convergence order {order:.4f} deviates from 2 by more than 0.5"
        )
    return EXIT_OK


def cmd_svd(args):
    config = load_config(args.config)
    _echo_config(args, config)
    params = build_system_params(config, seed=args.seed)
    dec = decompose(params)
    print(f"modes: {dec.n_modes}  atoms: {dec.n_atoms}  rank: {dec.rank}")
    print("singular values:", " ".join(format(s, ".12g") for s in dec.singular_values))
    print("transformed drives:",
          " ".join(f"{z.real:+.12g}{z.imag:+.12g}j" for z in dec.transformed_drives))
    with np.printoptions(precision=6, suppress=True):
        print("U =")
        print(dec.u)
        print("W =")
        print(dec.w)
    out = _out_path(args, config)
    if out:
        payload = {
            "config_sha256": config_hash(config),
            "n_modes": dec.n_modes, "n_atoms": dec.n_atoms, "rank": dec.rank,
            "singular_values": dec.singular_values,
            "transformed_drives": dec.transformed_drives,
            "u": [[_complex_pair(z) for z in row] for row in dec.u],
            "w": [[_complex_pair(z) for z in row] for row in dec.w],
        }
        _write_text(out, json.dumps(payload, indent=2, sort_keys=True,
                                    default=_json_default) + "\n")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="darkcavity",
        description="Stationary spectra and dark-state diagnostics of driven "
                    "lossy multi-mode atom-cavity systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("sweep", cmd_sweep), ("darkstate", cmd_darkstate),
                     ("observability", cmd_observability),
                     ("oracle", cmd_oracle), ("svd", cmd_svd)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML experiment file")
        sp.add_argument("--out", default=None, help="output path ('-' for stdout)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the coupling-generator seed")
        sp.add_argument("--threads", type=int, default=1,
                        help="parallel workers for sweep points")
        sp.add_argument("--echo-config", default=None,
                        help="write the resolved configuration to this path")
        sp.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
