"""Command-line front end.

    dbp analyze     --config FILE [--out DIR]
    dbp simulate    --config FILE [--out DIR] [--seed N] [--workers N]
    dbp rate-search --config FILE [--out DIR]
    dbp volumes     [--config FILE] [--u N --n-sc N --n-sym N --c N]
    dbp validate    [--corrupt fusion-weights]

Configs are INI files with the sections documented in the README; unknown
sections or keys are hard errors so a typo cannot silently change a
reproduction.  Exit codes: 0 success, 1 failed validation, 2 usage/config
error, 3 numerical failure or infeasible search point.
"""

import argparse
import configparser
import csv
import math
import os
import sys

import numpy as np

from . import asymptotics, validation
from .equalize import Equalizer
from .errors import ConfigError, DbpError, InfeasibleError, InvalidRegimeError
from .model import Architecture, ClusterPartition, make_constellation, message_volume
from .montecarlo import ExperimentConfig, run_experiment

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_SCHEMAS = {
    "analyze": {
        "system": {"constellation"},
        "sweep": {"beta", "es_over_n0_db"},
        "equalizer": {"kinds", "architectures"},
        "partition": {"c", "weights"},
        "output": {"file"},
    },
    "simulate": {
        "system": {"b", "u", "constellation"},
        "partition": {"c", "weights"},
        "equalizer": {"kinds", "architectures", "lama_t_max", "lama_damping"},
        "simulation": {"snr_db", "trials", "seed"},
        "output": {"file"},
    },
    "rate-search": {
        "system": {"constellation"},
        "equalizer": {"kinds", "architectures"},
        "partition": {"c", "weights"},
        "search": {"target_rates", "snr_loss_db"},
        "output": {"file"},
    },
    "volumes": {
        "volumes": {"u", "n_sc", "n_sym", "c", "bytes_per_entry"},
        "output": {"file"},
    },
}


def _read_config(path, command):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    schema = _SCHEMAS[command]
    for section in parser.sections():
        if section not in schema:
            raise ConfigError(f"unknown section [{section}] for {command}")
        for key in parser[section]:
            if key not in schema[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return parser


def _get(parser, section, key, default=None, required=False):
    if parser.has_option(section, key):
        return parser.get(section, key)
    if required:
        raise ConfigError(f"missing required key {key!r} in section [{section}]")
    return default


def _floats(text):
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _kinds(text):
    try:
        return [Equalizer(k.strip().lower()) for k in text.split(",") if k.strip()]
    except ValueError as exc:
        raise ConfigError(f"unknown equalizer in {text!r}") from exc


def _architectures(text):
    try:
        return [Architecture(a.strip().lower()) for a in text.split(",") if a.strip()]
    except ValueError as exc:
        raise ConfigError(f"unknown architecture in {text!r}") from exc


def _weights(parser, c):
    text = _get(parser, "partition", "weights", default="uniform")
    if text.strip().lower() == "uniform":
        return np.full(c, 1.0 / c)
    w = np.asarray(_floats(text))
    if w.size != c:
        raise ConfigError(f"expected {c} weights, got {w.size}")
    if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
        raise ConfigError("weights must be nonnegative and sum to 1")
    return w


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _db(linear):
    return 10.0 * math.log10(linear)


def cmd_analyze(args):
    cfg = _read_config(args.config, "analyze")
    constellation = make_constellation(_get(cfg, "system", "constellation",
                                            required=True))
    betas = _floats(_get(cfg, "sweep", "beta", required=True))
    snrs_db = _floats(_get(cfg, "sweep", "es_over_n0_db", required=True))
    kinds = _kinds(_get(cfg, "equalizer", "kinds", required=True))
    archs = _architectures(_get(cfg, "equalizer", "architectures", default="pd"))
    c = int(_get(cfg, "partition", "c", default="1"))
    weights = _weights(cfg, c)

    rows = []
    for beta in betas:
        for snr_db in snrs_db:
            g = 10.0 ** (snr_db / 10.0)
            for kind in kinds:
                for arch in archs:
                    try:
                        sinr = asymptotics.asymptotic_sinr(
                            kind, arch, constellation, g, beta, weights)
                        per_cluster = ""
                        if arch is Architecture.FD:
                            spec = asymptotics.MseSpec(
                                kind, es=constellation.es,
                                constellation=constellation
                                if kind is Equalizer.LAMA else None)
                            fd = asymptotics.sinr_fd(spec, g, beta, weights)
                            per_cluster = ";".join(
                                _fmt(_db(s)) if s > 0 else "-inf"
                                for s in fd.per_cluster_sinr)
                    except (InvalidRegimeError, DbpError) as exc:
                        raise DbpError(
                            f"{exc} (at beta={beta}, es_over_n0_db={snr_db}, "
                            f"kind={kind}, architecture={arch})") from exc
                    rows.append([beta, snr_db, str(kind), str(arch),
                                 ";".join(_fmt(w) for w in weights),
                                 _db(sinr), constellation.es / sinr, per_cluster])
    out = os.path.join(args.out, _get(cfg, "output", "file", default="analyze.csv"))
    _write_csv(out, ["beta", "es_over_n0_db", "equalizer", "architecture",
                     "weights", "sinr_db", "sigma2", "per_cluster_sinr_db"], rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_simulate(args):
    cfg = _read_config(args.config, "simulate")
    b = int(_get(cfg, "system", "b", required=True))
    u = int(_get(cfg, "system", "u", required=True))
    constellation = make_constellation(_get(cfg, "system", "constellation",
                                            required=True))
    c = int(_get(cfg, "partition", "c", default="1"))
    weights = _weights(cfg, c)
    partition = ClusterPartition.from_weights(b, weights)
    kinds = _kinds(_get(cfg, "equalizer", "kinds", required=True))
    archs = _architectures(_get(cfg, "equalizer", "architectures", default="pd"))
    t_max = int(_get(cfg, "equalizer", "lama_t_max", default="10"))
    damping = float(_get(cfg, "equalizer", "lama_damping", default="1.0"))
    snr_db = _floats(_get(cfg, "simulation", "snr_db", required=True))
    trials = int(_get(cfg, "simulation", "trials", required=True))
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    seed = args.seed if args.seed is not None else int(
        _get(cfg, "simulation", "seed", default="0"))

    rows = []
    for kind in kinds:
        for arch in archs:
            exp = ExperimentConfig(
                b=b, u=u, constellation=constellation, partition=partition,
                equalizer=kind, architecture=arch, snr_db=tuple(snr_db),
                trials=trials, seed=seed, lama_t_max=t_max,
                lama_damping=damping)
            result = run_experiment(exp, workers=args.workers)
            for pt in result.points:
                rows.append([pt.snr_db, str(kind), str(arch), partition.c,
                             pt.trials, pt.errors, pt.ser, pt.ci_low,
                             pt.ci_high, pt.ser_predicted])
    out = os.path.join(args.out, _get(cfg, "output", "file", default="simulate.csv"))
    _write_csv(out, ["snr_db", "equalizer", "architecture", "c", "trials",
                     "errors", "ser", "ci_low", "ci_high", "ser_predicted"], rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_rate_search(args):
    cfg = _read_config(args.config, "rate-search")
    constellation = make_constellation(_get(cfg, "system", "constellation",
                                            required=True))
    kinds = _kinds(_get(cfg, "equalizer", "kinds", required=True))
    archs = _architectures(_get(cfg, "equalizer", "architectures", default="pd"))
    c = int(_get(cfg, "partition", "c", default="2"))
    weights = _weights(cfg, c)
    rates = _floats(_get(cfg, "search", "target_rates", required=True))
    losses = _floats(_get(cfg, "search", "snr_loss_db", required=True))

    rows = []
    for kind in kinds:
        for arch in archs:
            for rate in rates:
                for loss in losses:
                    inv_beta = asymptotics.min_antenna_ratio(
                        kind, arch, constellation, rate, loss,
                        c=c, weights=weights)
                    rows.append([str(kind), str(arch), constellation.name,
                                 rate, loss, inv_beta])
    out = os.path.join(args.out, _get(cfg, "output", "file",
                                      default="rate_search.csv"))
    _write_csv(out, ["equalizer", "architecture", "constellation",
                     "target_rate", "snr_loss_db", "min_inv_beta"], rows)
    print(f"wrote {len(rows)} rows to {out}")
    return EXIT_OK


def cmd_volumes(args):
    params = {"u": args.u, "n_sc": args.n_sc, "n_sym": args.n_sym, "c": args.c,
              "bytes_per_entry": args.bytes_per_entry}
    csv_name = None
    if args.config:
        cfg = _read_config(args.config, "volumes")
        for key in ("u", "n_sc", "n_sym", "c", "bytes_per_entry"):
            if params[key] is None and cfg.has_option("volumes", key):
                params[key] = int(cfg.get("volumes", key))
        csv_name = _get(cfg, "output", "file")
    defaults = {"u": 16, "n_sc": 1200, "n_sym": 14, "c": 4, "bytes_per_entry": 8}
    for key, val in defaults.items():
        if params[key] is None:
            params[key] = val
    vol = message_volume(**params)
    # the consensus-sharing size is quoted as twice the (2-decimal) FD figure,
    # so the displayed value doubles the rounded MiB rather than the raw bytes
    rows = [("m_PD", vol.pd_bytes, vol.pd_mib),
            ("m_FD", vol.fd_bytes, vol.fd_mib),
            ("m_CS/iter", vol.cs_bytes, 2 * round(vol.fd_mib, 2))]
    print(f"message volumes for U={params['u']}, N_sc={params['n_sc']}, "
          f"N_sym={params['n_sym']}, C={params['c']}, "
          f"{params['bytes_per_entry']} B/entry")
    print(f"{'quantity':<14}{'bytes':>14}{'MiB':>10}")
    for name, nbytes, mib in rows:
        print(f"{name:<14}{nbytes:>14}{mib:>10.2f}")
    if csv_name:
        out = os.path.join(args.out, csv_name)
        _write_csv(out, ["quantity", "bytes", "mib"],
                   [(n, b, f"{m:.2f}") for n, b, m in rows])
        print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args):
    results = validation.run_all(corrupt=args.corrupt)
    width = max(len(name) for name, _ in results)
    failed = 0
    for name, passed in results:
        status = "PASS" if passed else "FAIL"
        print(f"{name:<{width}}  {status}")
        failed += not passed
    print(f"{len(results) - failed}/{len(results)} properties passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dbp",
        description="Decentralized feedforward equalization: analysis, "
                    "simulation, and reproduction tooling.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="INI configuration file")
        p.add_argument("--out", default=".", help="output directory for CSVs")

    p = sub.add_parser("analyze", help="asymptotic SINR sweep to CSV")
    add_common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("simulate", help="Monte Carlo SER experiment to CSV")
    add_common(p)
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--workers", type=int, default=os.cpu_count(),
                   help="parallel trial workers (default: available cores)")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("rate-search", help="minimum antenna-ratio search to CSV")
    add_common(p)
    p.set_defaults(fn=cmd_rate_search)

    p = sub.add_parser("volumes", help="feedforward message-volume table")
    add_common(p, config_required=False)
    p.add_argument("--u", type=int, default=None)
    p.add_argument("--n-sc", type=int, default=None)
    p.add_argument("--n-sym", type=int, default=None)
    p.add_argument("--c", type=int, default=None)
    p.add_argument("--bytes-per-entry", type=int, default=None)
    p.set_defaults(fn=cmd_volumes)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--corrupt", choices=["fusion-weights"], default=None,
                   help="negative control: corrupt a component and confirm "
                            "the matching property fails")
    p.set_defaults(fn=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, InvalidRegimeError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DbpError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def console_main():
    sys.exit(main())


if __name__ == "__main__":
    console_main()
