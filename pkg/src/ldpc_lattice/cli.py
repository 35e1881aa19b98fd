"""Command-line front end.

Every parameter is a flat key. It may be given as ``key=value``, as
``--key value`` or in a ``--config`` file of ``key = value`` lines; the
command line wins over the file. Results are CSV, preceded by ``# key=value``
lines echoing the resolved configuration.

Exit status: 0 success, 1 runtime failure, 2 usage or configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Callable

import numpy as np

from . import __version__
from .decomposition import OneWayPlan, TwoWayPlan
from .lattice import LatticeBasis
from .ldpc_core import DegenerateCodeError, build_regular_ldpc, read_alist, write_alist
from .relay_sim import (
    ONE_WAY,
    TWO_WAY,
    ChannelConfig,
    ConfigError,
    SimOptions,
    min_sum_power_oneway,
    min_sum_power_twoway,
    simulate_oneway,
    simulate_twoway,
    to_db,
)
from .shaping import ConstellationError, ShapingSpec, estimate_shaping_stats, rate_hypercube, rate_nested

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _floats(text: str) -> list:
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _opt_int(text: str):
    return None if text.strip().lower() in ("", "none", "inf") else int(text)


# key -> (parser, default, help); None defaults mean "unset"
CODE_KEYS = {
    "n": (int, 1000, "code length"),
    "k": (int, 850, "requested code dimension"),
    "w": (int, 3, "column weight"),
    "code": (str, None, "alist file to load instead of constructing a code"),
}
SHAPING_KEYS = {
    "L": (int, 8, "constellation size (information coordinates)"),
    "L_parity": (int, None, "constellation size on parity coordinates (default L)"),
    "method": (str, "hypercube", "hypercube or nested"),
    "M": (_opt_int, 5, "tree-search width for nested shaping; none = exhaustive"),
}
ONEWAY_CHANNEL = ("d_SR", "d_RD", "d_SD", "alpha_SR", "alpha_RD", "alpha_SD", "N_R", "N_D")
TWOWAY_CHANNEL = ("d_S1R", "d_S2R", "d_S1S2", "alpha_S1R", "alpha_S2R", "alpha_S1S2", "N_R",
                  "N_S1", "N_S2")


def _channel_keys(names) -> dict:
    ref = ChannelConfig()
    return {name: (float, float(getattr(ref, name)), "channel parameter") for name in names}


SIM_KEYS = {
    "powers": (_floats, [], "comma-separated sum powers in dB"),
    "T": (int, 10, "blocks per trial"),
    "seed": (int, 0, "simulation seed"),
    "code_seed": (int, 1, "code construction seed"),
    "max_trials": (int, 200, "trial cap per point"),
    "min_trials": (int, 1, "trials before early stopping"),
    "target_errors": (_opt_int, 200, "stop a point after this many symbol errors; none = never"),
    "chunk": (int, 4, "trials per work unit"),
    "relay_share": (float, None, "fraction of the sum power spent by the relay"),
    "noise_model": (str, "exact", "exact or amplitude"),
    "llr_model": (str, "exact", "exact or quarter"),
    "interference_aware": (_bool, False, "add interference variance to the decoder noise"),
    "energy_samples": (int, 4000, "samples for codeword energy estimates"),
    "max_iter": (int, 50, "decoder iterations"),
    "threads": (int, 1, "worker processes (does not change results)"),
    "out": (str, "-", "CSV output path, - for stdout"),
    "append": (_bool, False, "append rows to an existing CSV"),
}

COMMANDS = {
    "gen-code": {
        **{k: CODE_KEYS[k] for k in ("n", "k", "w")},
        "seed": (int, 0, "construction seed"),
        "out": (str, None, "alist output path (required)"),
        "csv": (str, "-", "summary CSV path, - for stdout"),
    },
    "shaping-gain": {
        **CODE_KEYS, **SHAPING_KEYS,
        "code_seed": (int, 1, "code construction seed"),
        "samples": (int, 10000, "Monte-Carlo samples"),
        "seed": (int, 0, "sampling seed"),
        "out": (str, "-", "CSV output path, - for stdout"),
    },
    "rate": {
        "n": (int, 1000, "code length"),
        "k": (int, 850, "code dimension"),
        "L": (int, 8, "constellation size (information coordinates)"),
        "L_parity": (int, None, "constellation size on parity coordinates (default L)"),
        "method": (str, "hypercube", "hypercube or nested"),
        "digits": (int, 2, "decimals printed"),
    },
    "bounds": {
        "topology": (str, ONE_WAY, "one_way or two_way"),
        "rate": (float, None, "rate in bits per dimension (default: from n, k, L, method)"),
        "n": (int, 1000, "code length"),
        "k": (int, 850, "code dimension"),
        "L": (int, 8, "constellation size (information coordinates)"),
        "L_parity": (int, None, "constellation size on parity coordinates (default L)"),
        "method": (str, "hypercube", "hypercube or nested"),
        "m1": (int, 1, "relay gain of source 1"),
        "m2": (int, 1, "relay gain of source 2"),
        **_channel_keys(dict.fromkeys(ONEWAY_CHANNEL + TWOWAY_CHANNEL)),
        "out": (str, "-", "CSV output path, - for stdout"),
    },
    "sim-oneway": {
        **CODE_KEYS, **SHAPING_KEYS,
        "rho": (float, 0.5, "fraction of coordinates forwarded by the relay"),
        "plan_seed": (int, 1, "seed of the forwarded-coordinate draw"),
        **_channel_keys(ONEWAY_CHANNEL),
        "energy_model": (str, "empirical", "empirical or closed_form"),
        **SIM_KEYS,
    },
    "sim-twoway": {
        **CODE_KEYS, **SHAPING_KEYS,
        "L_r": (int, 2, "resolution constellation size"),
        "m1": (int, 1, "relay gain of source 1"),
        "m2": (int, 1, "relay gain of source 2"),
        "direction": (str, "s2", "s2 (S2 decodes S1) or both"),
        **_channel_keys(TWOWAY_CHANNEL),
        **SIM_KEYS,
    },
}

SIM_COLUMNS = ["topology", "n", "k", "L", "method", "M", "sum_power_db", "trials", "symbols",
               "errors", "ser", "stage1_err", "stage2_err", "stage3_err", "seed"]
SHAPING_COLUMNS = ["n", "k", "L", "method", "M", "gain_db", "loss_db", "samples", "seed"]


def _read_config(path: str) -> dict:
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from exc
    out = {}
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key] = value
    return out


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldpc-lattice", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")
    for name, keys in COMMANDS.items():
        sp = sub.add_parser(name, help=f"run {name}")
        sp.add_argument("--config", help="file of key = value lines")
        for key, (_, default, text) in keys.items():
            sp.add_argument(f"--{key}", default=argparse.SUPPRESS, metavar="V",
                            help=f"{text} (default {default})")
    return p


def _normalise(argv) -> list:
    # key=value tokens become --key=value
    out = []
    for tok in argv:
        if not tok.startswith("-") and "=" in tok:
            out.append("--" + tok)
        else:
            out.append(tok)
    return out


def resolve(argv) -> tuple:
    """Parse ``argv`` into ``(command, params)`` with typed values."""
    ns = _parser().parse_args(_normalise(argv))
    keys = COMMANDS[ns.command]
    raw = {}
    if ns.config:
        raw.update(_read_config(ns.config))
    given = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    raw.update(given)
    unknown = sorted(set(raw) - set(keys))
    if unknown:
        raise UsageError(f"unknown key(s) for {ns.command}: {', '.join(unknown)}")
    params = {}
    for key, (conv, default, _) in keys.items():
        if key in raw:
            try:
                params[key] = conv(raw[key])
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {raw[key]!r} ({exc})") from None
        else:
            params[key] = default
    return ns.command, params


def _fmt(v) -> str:
    if isinstance(v, list):
        return ",".join(repr(x) for x in v)
    return "none" if v is None else str(v)


def _header(command: str, params: dict) -> str:
    lines = [f"# command={command}"]
    lines += [f"# {k}={_fmt(v)}" for k, v in params.items()]
    return "\n".join(lines) + "\n"


def _open_out(path: str, append: bool = False):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "a" if append else "w", newline=""), True


def _emit(path, command, params, columns, rows, append=False):
    import os

    fresh = not (append and path not in (None, "-") and os.path.exists(path)
                 and os.path.getsize(path) > 0)
    fh, close = _open_out(path, append)
    try:
        if fresh:
            fh.write(_header(command, params))
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(columns)
        w.writerows(rows)
        fh.flush()
    finally:
        if close:
            fh.close()


def _basis(params: dict, seed_key: str) -> LatticeBasis:
    if params.get("code"):
        return LatticeBasis.from_parity_check(read_alist(params["code"]))
    return LatticeBasis.regular(params["n"], params["k"], params["w"], params[seed_key])


def _spec(params: dict, basis_k: int, n: int) -> ShapingSpec:
    Lp = params["L_parity"] if params["L_parity"] is not None else params["L"]
    return ShapingSpec.split(basis_k, n, params["L"], Lp, params["method"], params["M"])


def _L_label(params: dict) -> str:
    Lp = params.get("L_parity")
    return str(params["L"]) if Lp in (None, params["L"]) else f"{params['L']}/{Lp}"


def _rate(params: dict, k: int, n: int) -> float:
    Lp = params["L_parity"] if params["L_parity"] is not None else params["L"]
    if params["method"] == "hypercube":
        L = np.concatenate([np.full(k, params["L"]), np.full(n - k, Lp)])
        return rate_hypercube(L, k, n)
    if params["method"] == "nested":
        L = np.concatenate([np.full(k, params["L"]), np.full(n - k, Lp)])
        return rate_nested(L)
    raise UsageError(f"unknown method {params['method']!r}")


def cmd_gen_code(p: dict) -> None:
    if not p["out"]:
        raise UsageError("gen-code needs out=<alist path>")
    H = build_regular_ldpc(p["n"], p["k"], p["w"], p["seed"])
    write_alist(H, p["out"])
    basis = LatticeBasis.from_parity_check(H)
    _emit(p["csv"], "gen-code", p, ["n", "m", "k", "w", "seed", "path"],
          [[H.n, H.m, basis.k, p["w"], p["seed"], p["out"]]])


def cmd_shaping_gain(p: dict) -> None:
    basis = _basis(p, "code_seed")
    spec = _spec(p, basis.k, basis.n)
    st = estimate_shaping_stats(basis, spec, p["samples"], p["seed"])
    _emit(p["out"], "shaping-gain", p, SHAPING_COLUMNS,
          [[basis.n, basis.k, _L_label(p), spec.method, _fmt(spec.M), f"{st.gain_db:.6f}",
            f"{st.loss_db:.6f}", st.samples, p["seed"]]])


def cmd_rate(p: dict) -> None:
    if not 0 < p["k"] <= p["n"]:
        raise UsageError("need 0 < k <= n")
    value = _rate(p, p["k"], p["n"])
    sys.stdout.write(f"{value:.{p['digits']}f}\n")


def cmd_bounds(p: dict) -> None:
    rate = p["rate"] if p["rate"] is not None else _rate(p, p["k"], p["n"])
    fields = {k: p[k] for k in p if k in ChannelConfig.__dataclass_fields__ and k != "topology"}
    cfg = ChannelConfig(topology=p["topology"], **fields)
    if cfg.topology == ONE_WAY:
        total = min_sum_power_oneway(cfg, rate)
        row = [ONE_WAY, f"{rate:.6f}", f"{to_db(total):.4f}", "", "", ""]
    else:
        total, q1, q2, qr = min_sum_power_twoway(cfg, rate)
        row = [TWO_WAY, f"{rate:.6f}", f"{to_db(total):.4f}", f"{q1:.6g}", f"{q2:.6g}", f"{qr:.6g}"]
    _emit(p["out"], "bounds", p, ["topology", "rate", "min_sum_power_db", "q_s1", "q_s2", "q_r"],
          [row])


def _options(p: dict, **extra) -> SimOptions:
    return SimOptions(max_trials=p["max_trials"], min_trials=p["min_trials"],
                      target_errors=p["target_errors"], chunk=p["chunk"],
                      relay_share=p["relay_share"], noise_model=p["noise_model"],
                      llr_model=p["llr_model"], interference_aware=p["interference_aware"],
                      energy_samples=p["energy_samples"], max_iter=p["max_iter"],
                      workers=p["threads"], **extra)


def _sim_rows(topology, basis, spec, p, records):
    return [[topology, basis.n, basis.k, _L_label(p), spec.method, _fmt(spec.M),
             f"{r.sum_power_db:.4f}", r.trials, r.symbols, r.symbol_errors, f"{r.ser:.6e}",
             *r.stage_errors, p["seed"]] for r in records]


def _channel(p: dict, topology: str, names) -> ChannelConfig:
    fields = {k: p[k] for k in names}
    if topology == TWO_WAY:
        fields.update(m1=p["m1"], m2=p["m2"])
    return ChannelConfig(topology=topology, T=p["T"], seed=p["seed"], **fields)


def cmd_sim_oneway(p: dict) -> None:
    if not p["powers"]:
        raise UsageError("sim-oneway needs powers=<dB list>")
    basis = _basis(p, "code_seed")
    spec = _spec(p, basis.k, basis.n)
    plan = OneWayPlan.random(basis.n, p["rho"], p["plan_seed"])
    cfg = _channel(p, ONE_WAY, ONEWAY_CHANNEL)
    recs = simulate_oneway(basis, spec, plan, cfg, p["powers"],
                           _options(p, energy_model=p["energy_model"]))
    _emit(p["out"], "sim-oneway", p, SIM_COLUMNS, _sim_rows(ONE_WAY, basis, spec, p, recs),
          p["append"])


def cmd_sim_twoway(p: dict) -> None:
    if not p["powers"]:
        raise UsageError("sim-twoway needs powers=<dB list>")
    basis = _basis(p, "code_seed")
    spec = _spec(p, basis.k, basis.n)
    plan = TwoWayPlan.for_spec(spec, p["L_r"], p["m1"], p["m2"])
    cfg = _channel(p, TWO_WAY, TWOWAY_CHANNEL)
    recs = simulate_twoway(basis, spec, plan, cfg, p["powers"], _options(p, direction=p["direction"]))
    _emit(p["out"], "sim-twoway", p, SIM_COLUMNS, _sim_rows(TWO_WAY, basis, spec, p, recs),
          p["append"])


HANDLERS: dict[str, Callable[[dict], None]] = {
    "gen-code": cmd_gen_code,
    "shaping-gain": cmd_shaping_gain,
    "rate": cmd_rate,
    "bounds": cmd_bounds,
    "sim-oneway": cmd_sim_oneway,
    "sim-twoway": cmd_sim_twoway,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command, params = resolve(argv)
    except SystemExit as exc:  # argparse reports its own usage errors
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except UsageError as exc:
        print(f"ldpc-lattice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ldpc-lattice: error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        HANDLERS[command](params)
    except (UsageError, ConfigError, ConstellationError, DegenerateCodeError) as exc:
        print(f"ldpc-lattice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ldpc-lattice: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"ldpc-lattice: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"ldpc-lattice: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
