"""Command-line experiment runner.

Every subcommand reads an optional INI file (a ``[run]`` section for shared
keys and one section named after the subcommand), then applies flag
overrides.  Primary outputs are comment-header CSV files whose header holds
the resolved config and its hash; wall time and worker count go to a
separate ``<out>.manifest.json`` so reruns stay byte-identical.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numeric failure.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__, _backend, tableio
from .errors import (ChecksumError, ConfigError, InvalidArgument, NumericFailure, ResourceLimit,
                     SrbbError)

log = logging.getLogger("srbb")

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(x) for x in s]
    s = str(s).strip()
    return [float(x) for x in s.split(",") if x.strip()] if s else []


# shared keys; ``workers`` and ``out`` never reach the primary output header
COMMON = {
    "seed": (int, None, "master seed (required for stochastic commands)"),
    "workers": (int, 1, "worker threads"),
    "chunk_size": (int, 512, "samples per RNG chunk"),
    "out": (str, None, "primary output path"),
}
NOT_HASHED = ("workers", "out", "samples_out")

POTENTIAL = {
    "potential": (str, "step", "pair potential kind: step or bump"),
    "eta": (float, 1.0, "potential strength"),
    "R": (float, 1.0, "potential range"),
}

SCHEMAS = {
    "estimate-gamma": dict(
        alpha=(float, 0.0, "interaction strength"),
        K=(int, 10, "largest k"),
        n_samples=(int, 4096, "bridges per k"),
        M=(int, 32, "grid steps per leg"),
        beta=(float, 1.0, "leg duration"),
        d=(int, 3, "dimension"),
        **POTENTIAL,
    ),
    "estimate-rhoc": dict(
        gamma=(str, None, "Gamma table path or 'free'"),
        d=(int, 5, "dimension for the free preset"),
        beta=(float, 1.0, "leg duration for the free preset"),
        K=(int, 200, "number of terms"),
        lam=(str, "lower", "lambda: number, lower, point or upper"),
        k_min=(int, 2, "first k of the lambda fit"),
    ),
    "phase-diagram": dict(
        gamma=(str, None, "Gamma table path or 'free'"),
        d=(int, 5, "dimension for the free preset"),
        beta=(float, 1.0, "leg duration for the free preset"),
        K=(int, 400, "truncation K_max"),
        lam=(str, "lower", "lambda: number, lower, point or upper"),
        rhos=(str, "", "comma-separated densities (overrides the range)"),
        rho_min=(float, None, "smallest density"),
        rho_max=(float, None, "largest density"),
        n_rho=(int, 0, "number of densities in the range"),
        tol=(float, 1e-13, "residual tolerance for c(rho)"),
    ),
    "sample-cycles": dict(
        weights=(str, None, "Gamma table path or 'free'"),
        d=(int, 5, "dimension for the free preset"),
        beta=(float, 1.0, "leg duration for the free preset"),
        N=(int, 100, "number of particles"),
        rho=(float, None, "density; the volume is N/rho"),
        n_samples=(int, 1000, "number of partitions"),
        K=(int, 10, "cycle lengths in the statistics table"),
        lam=(float, 1.0, "lambda for the p* comparison"),
        K_thermo=(int, 0, "truncation for p* (0 = no comparison)"),
        samples_out=(str, None, "optional path for the raw samples"),
    ),
    "verify": dict(
        suites=(str, "lace-identity,characterization,interlacing,convolution,deconvolution",
                "comma-separated suites"),
        N_identity=(int, 6, "largest N for the lace identity and characterization"),
        n_matrices=(int, 1000, "random U matrices per N"),
        N_interlace=(int, 8, "largest N for interlacing"),
        N_convolution=(int, 5, "largest N for the convolution residuals"),
        n_samples=(int, 20000, "samples for the convolution residuals"),
        M=(int, 16, "grid steps per leg for the convolution residuals"),
        alpha=(float, 0.5, "interaction strength for the convolution residuals"),
        d=(int, 3, "dimension for the convolution residuals"),
        z_max=(float, 4.0, "allowed |r_N| in standard errors"),
        mutate=(_bool, False, "invert the compatible-edge rule (fault injection)"),
        **POTENTIAL,
    ),
    "deconvolve": dict(
        source=(str, "heat", "heat, synthetic or a grid file"),
        d=(int, 1, "grid dimension"),
        X=(float, 12.0, "half width"),
        h=(float, 0.01, "grid spacing"),
        lam=(float, 0.5, "lambda of the preset"),
        c=(float, -0.2, "second coefficient of the synthetic preset"),
        tol=(float, 1e-12, "Neumann tail tolerance"),
    ),
    "green-asymptotics": dict(
        d=(int, 5, "dimension (>= 3)"),
        r_min=(float, 5.0, "smallest |x|"),
        r_max=(float, 20.0, "largest |x|"),
        n_r=(int, 16, "number of radii"),
        tol=(float, 1e-13, "truncation tolerance for G"),
    ),
    "un-decay": dict(
        alpha=(float, 0.5, "interaction strength"),
        d=(int, 3, "dimension"),
        M=(int, 32, "grid steps per leg"),
        beta=(float, 1.0, "leg duration"),
        n_samples=(int, 20000, "samples per separation"),
        s_min=(float, 0.0, "smallest |x4 - x2|"),
        s_max=(float, 3.0, "largest |x4 - x2|"),
        n_s=(int, 7, "number of separations"),
        **POTENTIAL,
    ),
}
STOCHASTIC = {"estimate-gamma", "sample-cycles", "verify", "un-decay"}


# ---------------------------------------------------------------- config

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="srbb", description="Self-repellent bridge and Bose gas numerics.")
    ap.add_argument("--version", action="version", version=f"srbb {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name, help=f"run {name}")
        p.add_argument("--config", help="INI file with [run] and [%s] sections" % name)
        p.add_argument("-v", "--verbose", action="store_true")
        for key, (typ, default, helptext) in {**COMMON, **schema}.items():
            p.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None,
                           help=f"{helptext} (default: {default})")
    return ap


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags."""
    schema = {**COMMON, **SCHEMAS[command]}
    raw = {k: v[1] for k, v in schema.items()}
    path = getattr(args, "config", None)
    if path:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            with open(path) as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for section in ("run", command):
            if cp.has_section(section):
                for key, val in cp.items(section):
                    if key not in schema:
                        raise ConfigError(f"unknown key {key!r} in [{section}]")
                    raw[key] = val
    for key in schema:
        val = getattr(args, key, None)
        if val is not None:
            raw[key] = val
    cfg = {}
    for key, (typ, _, _) in schema.items():
        val = raw[key]
        if val is None:
            cfg[key] = None
            continue
        try:
            cfg[key] = typ(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    if command in STOCHASTIC and cfg["seed"] is None:
        raise ConfigError("a seed is required (no wall-clock seeding)")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    return cfg


def config_hash(command: str, cfg: dict) -> str:
    body = {k: v for k, v in cfg.items() if k not in NOT_HASHED}
    text = json.dumps({"command": command, "config": body}, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def header_for(command: str, cfg: dict, extra: dict | None = None) -> dict:
    h = {"format": f"srbb-{command}", "code_version": __version__,
         "config_hash": config_hash(command, cfg)}
    for k in sorted(cfg):
        if k not in NOT_HASHED:
            h[f"config.{k}"] = tableio.fmt(cfg[k])
    for k, v in (extra or {}).items():
        h[k] = tableio.fmt(v)
    return h


def _out(cfg: dict, default: str) -> str:
    return cfg["out"] or default


def _rng(cfg, stream=0):
    from .rng import RngSpec
    return RngSpec(cfg["seed"], stream, cfg["chunk_size"])


def _potential(cfg):
    from .paths import PairPotential
    return PairPotential(cfg["potential"], cfg["eta"], cfg["R"])


def _gamma_source(cfg, key="gamma"):
    from .gamma import GammaTable
    src = cfg[key]
    if not src:
        raise ConfigError(f"missing {key} source: give a table path or 'free'")
    if src == "free":
        return GammaTable.free(cfg["d"], cfg["K"], cfg["beta"])
    if not os.path.exists(src):
        raise ConfigError(f"table {src} does not exist")
    return GammaTable.load(src)


def _lambda(table, spec):
    from .gamma import estimate_lambda_c
    try:
        return float(spec), None
    except ValueError:
        pass
    if spec not in ("lower", "point", "upper"):
        raise ConfigError(f"lam must be a number, lower, point or upper; got {spec!r}")
    br = estimate_lambda_c(table, k_min=2) if table.K >= 3 else None
    if br is None:
        raise ConfigError("lambda bracket needs a table with K >= 3")
    return {"lower": br.lower, "point": br.point_estimate, "upper": br.upper}[spec], br


# ---------------------------------------------------------------- commands

def cmd_estimate_gamma(cfg):
    from .gamma import GammaTable, estimate_gamma_table
    out = _out(cfg, "gamma_table.csv")
    existing = None
    if os.path.exists(out):
        # a corrupt table raises ChecksumError and is never overwritten
        existing = GammaTable.load(out)
        log.info("extending %s from K=%d", out, existing.K)
    table = estimate_gamma_table(cfg["alpha"], cfg["K"], cfg["n_samples"], cfg["M"], _rng(cfg),
                                 _potential(cfg), cfg["beta"], cfg["d"], existing, cfg["workers"],
                                 progress=lambda k, e: log.info("k=%d Gamma=%.6g +- %.2g", k, e.value, e.std_error))
    table.save(out)
    return {"outputs": [out], "seeds": {f"k={k}": [cfg["seed"], k] for k in range(1, cfg["K"] + 1)}}


def cmd_estimate_rhoc(cfg):
    from .gamma import estimate_rho_c
    table = _gamma_source(cfg)
    lam, br = _lambda(table, cfg["lam"])
    K = min(cfg["K"], table.K)
    sums = estimate_rho_c(table, lam, K)
    extra = {"lambda": lam, "rho_c": sums.value, "rho_c_error": sums.error,
             "tail_exponent": sums.tail_exponent, "tail_estimate": sums.tail_estimate}
    if br is not None:
        extra.update(lambda_lower=br.lower, lambda_upper=br.upper, lambda_point=br.point_estimate)
    rows = [(k, float(i), float(s), float(e)) for k, i, s, e in
            zip(range(1, K + 1), sums.increments, sums.partial_sums, sums.errors)]
    out = _out(cfg, "rhoc.csv")
    tableio.write(out, header_for("estimate-rhoc", cfg, extra), ["k", "increment", "partial_sum", "error"], rows)
    return {"outputs": [out]}


def _rho_grid(cfg):
    rhos = _floats(cfg["rhos"])
    if not rhos and cfg["n_rho"] > 0:
        if cfg["rho_min"] is None or cfg["rho_max"] is None:
            raise ConfigError("rho range needs rho_min and rho_max")
        rhos = list(np.linspace(cfg["rho_min"], cfg["rho_max"], cfg["n_rho"]))
    if not rhos:
        raise ConfigError("empty density grid")
    if any(not r > 0 for r in rhos):
        raise ConfigError("densities must be positive")
    return [float(r) for r in rhos]


def cmd_phase_diagram(cfg):
    from .thermo import phase_diagram, rho_c_truncated
    rhos = _rho_grid(cfg)
    table = _gamma_source(cfg)
    K = min(cfg["K"], table.K)
    lam, _ = _lambda(table, cfg["lam"])
    rows = phase_diagram(rhos, lam, table, K, cfg["tol"])
    extra = {"lambda": lam, "rho_c_truncated": rho_c_truncated(lam, table, K)}
    out = _out(cfg, "phase_diagram.csv")
    tableio.write(out, header_for("phase-diagram", cfg, extra), ["rho", "c", "f", "mass", "regime"], rows)
    return {"outputs": [out]}


def cmd_sample_cycles(cfg):
    from .permsample import PartitionSampler, cycle_statistics, free_gas_weights, table_weights
    if not cfg["weights"]:
        raise ConfigError("missing weights source: give a table path or 'free'")
    if cfg["rho"] is None or not cfg["rho"] > 0:
        raise ConfigError("a positive density rho is required")
    N = cfg["N"]
    if N < 1:
        raise ConfigError("N must be >= 1")
    if cfg["weights"] == "free":
        theta, vol = free_gas_weights(cfg["d"], N, cfg["rho"], cfg["beta"])
        from .gamma import GammaTable
        gtab = GammaTable.free(cfg["d"], max(N, cfg["K_thermo"], 1), cfg["beta"])
    else:
        gtab = _gamma_source(cfg, "weights")
        theta, vol = table_weights(gtab, N, cfg["rho"])
    sampler = PartitionSampler(theta, N)
    chunks = sampler.chunks(cfg["n_samples"], _rng(cfg), cfg["workers"])
    K = min(cfg["K"], N)
    st = cycle_statistics(chunks, vol, K)
    cols = ["k", "mean", "std_error", "ci95"]
    rows = [[int(k), float(m), float(s), float(c)] for k, m, s, c in zip(st.k, st.mean, st.std_error, st.ci95)]
    extra = {"volume": vol, "truncated_mass": st.mass()}
    if cfg["K_thermo"] > 0:
        from .thermo import minimizer_p_star, solve_c
        p = minimizer_p_star(cfg["rho"], cfg["lam"], gtab, cfg["K_thermo"])
        sol = solve_c(cfg["rho"], cfg["lam"], gtab, cfg["K_thermo"])
        extra.update(regime=sol.regime, c=sol.c)
        cols += ["p_star", "z_score"]
        for r in rows:
            ps = float(p[r[0] - 1]) if r[0] <= len(p) else float("nan")
            z = (r[1] - ps) / r[2] if r[2] > 0 else float("nan")
            r += [ps, z]
    out = _out(cfg, "cycles.csv")
    outputs = [out]
    if cfg["samples_out"]:
        lines = []
        for c in chunks:
            for row in c:
                lines.append(" ".join(f"{k}:{n}" for k, n in enumerate(row) if k and n))
        hdr = header_for("sample-cycles", cfg, {"columns": "k:count pairs, one sample per line"})
        with open(cfg["samples_out"], "w", newline="") as fh:
            fh.write("".join(f"# {k}: {v}\n" for k, v in hdr.items()))
            fh.write("\n".join(lines) + "\n")
        outputs.append(cfg["samples_out"])
    tableio.write(out, header_for("sample-cycles", cfg, extra), cols, rows)
    return {"outputs": outputs}


def _verify_caps(cfg, suites):
    from .laces import GRAPH_CAP, LACE_CAP
    checks = {"lace-identity": ("N_identity", GRAPH_CAP), "characterization": ("N_identity", GRAPH_CAP),
              "interlacing": ("N_interlace", LACE_CAP), "convolution": ("N_convolution", GRAPH_CAP)}
    for s in suites:
        if s in checks:
            key, cap = checks[s]
            if cfg[key] > cap:
                raise ResourceLimit(f"{key}={cfg[key]} exceeds the cap {cap} for suite {s}")


def run_verify(cfg):
    """Return report rows ``(suite, cases, max_discrepancy, verdict)``."""
    from . import laces
    known = ("lace-identity", "characterization", "interlacing", "convolution", "deconvolution")
    suites = [s.strip() for s in cfg["suites"].split(",") if s.strip()]
    for s in suites:
        if s not in known:
            raise ConfigError(f"unknown suite {s!r}")
    _verify_caps(cfg, suites)
    rows = []
    ctx = laces.compatible_set_mutation() if cfg["mutate"] else _null()
    with ctx:
        for s in suites:
            log.info("suite %s", s)
            if s == "lace-identity":
                gen = _rng(cfg, 1).generator(0)
                worst, cases = 0.0, 0
                for N in range(2, cfg["N_identity"] + 1):
                    U = gen.random((cfg["n_matrices"], N, N))
                    U = np.triu(U, 1) + np.transpose(np.triu(U, 1), (0, 2, 1))
                    _, _, diff = laces.lace_identity_check(N, U)
                    worst = max(worst, float(diff.max()))
                    cases += len(U)
                rows.append((s, cases, worst, "pass" if worst <= 1e-12 else "fail"))
            elif s == "characterization":
                cases = bad = 0
                for N in range(2, cfg["N_identity"] + 1):
                    c, b = laces.characterization_check(N)
                    cases += c
                    bad += b
                rows.append((s, cases, float(bad), "pass" if bad == 0 else "fail"))
            elif s == "interlacing":
                cases = bad = 0
                for N in range(2, cfg["N_interlace"] + 1):
                    c, b = laces.interlacing_check(N)
                    cases += c
                    bad += b
                rows.append((s, cases, float(bad), "pass" if bad == 0 else "fail"))
            elif s == "convolution":
                from .pi import convolution_identity_check
                res = convolution_identity_check(cfg["alpha"], cfg["N_convolution"], cfg["n_samples"], cfg["M"],
                                                 _rng(cfg, 2), _potential(cfg), 1.0, cfg["d"], cfg["workers"])
                exact = all(r.r == 0.0 for r in res if r.N <= 2)
                z = max((abs(r.r) / r.r_err if r.r_err > 0 else (0.0 if r.r == 0 else np.inf))
                        for r in res if r.N >= 3) if cfg["N_convolution"] >= 3 else 0.0
                ok = exact and z <= cfg["z_max"]
                rows.append((s, len(res), float(z), "pass" if ok else "fail"))
            elif s == "deconvolution":
                from . import greenlab as gl
                X, h = 12.0, 0.01
                n = int(round(2 * X / h)) + 1
                phi = gl.heat_kernel(1.0, 1, X, n)
                r1 = gl.neumann_deconvolve(phi * 0.5, phi)
                e1 = (r1.S - gl.g_mu_grid(0.5, 1, X, n)).l1()
                Gp, Gg = gl.synthetic_green_pair(0.5, -0.2, 1, X, n)
                r2 = gl.neumann_deconvolve(Gp, phi)
                worst = max(e1, r1.diagnostics["residual_l1"], r2.diagnostics["residual_l1"], (r2.S - Gg).l1())
                rows.append((s, 2, float(worst), "pass" if worst < 1e-6 else "fail"))
    return rows


class _null:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def cmd_verify(cfg):
    rows = run_verify(cfg)
    out = _out(cfg, "verify.csv")
    ok = all(r[3] == "pass" for r in rows)
    tableio.write(out, header_for("verify", cfg, {"verdict": "pass" if ok else "fail"}),
                  ["suite", "cases", "max_discrepancy", "verdict"], rows)
    for r in rows:
        print(f"{r[0]:18s} cases={r[1]:<8d} max={r[2]:.3g} {r[3]}")
    return {"outputs": [out], "failed": not ok}


def cmd_deconvolve(cfg):
    from . import greenlab as gl
    d, X, h = cfg["d"], cfg["X"], cfg["h"]
    n = int(round(2 * X / h)) + 1
    if n % 2 == 0 or abs((n - 1) * h - 2 * X) > 1e-9 * X:
        raise ConfigError("2X/h must be an even integer")
    phi = gl.heat_kernel(1.0, d, X, n)
    exact = None
    src = cfg["source"]
    if src == "heat":
        G_pi = phi * cfg["lam"]
    elif src == "synthetic":
        G_pi, exact = gl.synthetic_green_pair(cfg["lam"], cfg["c"], d, X, n)
    else:
        if not os.path.exists(src):
            raise ConfigError(f"grid file {src} does not exist")
        with open(src) as fh:
            G_pi = gl.GridFn.loads(fh.read())
        if (G_pi.d, G_pi.X, G_pi.n) != (d, X, n):
            raise ConfigError("grid file does not match d, X, h")
    res = gl.neumann_deconvolve(G_pi, phi, cfg["tol"])
    if src == "heat":
        exact = gl.g_mu_grid(cfg["lam"], d, X, n)
    extra = {"mu": res.mu}
    extra.update(res.diagnostics)
    if exact is not None:
        extra["l1_error_vs_exact"] = (res.S - exact).l1()
    out = _out(cfg, "deconvolution.csv")
    cols = ["index", "G_pi", "S"] + (["exact"] if exact is not None else [])
    flat = [G_pi.values.ravel(), res.S.values.ravel()] + ([exact.values.ravel()] if exact is not None else [])
    rows = [[i] + [float(a[i]) for a in flat] for i in range(len(flat[0]))]
    extra["layout"] = f"row-major {d}-d grid, {n} points per axis on [-X, X]"
    tableio.write(out, header_for("deconvolve", cfg, extra), cols, rows)
    return {"outputs": [out]}


def cmd_green_asymptotics(cfg):
    from . import greenlab as gl
    if cfg["d"] < 3:
        raise ConfigError("G is finite only for d >= 3")
    radii = np.linspace(cfg["r_min"], cfg["r_max"], cfg["n_r"])
    rows = gl.green_plot_rows(cfg["d"], radii, cfg["tol"])
    res = np.array([abs(r[3]) for r in rows])
    extra = {"a_d": gl.edgeworth_constant(cfg["d"])}
    if len(rows) >= 2 and np.all(res > 0):
        extra["residual_loglog_slope"] = float(np.polyfit(np.log(radii), np.log(res), 1)[0])
    out = _out(cfg, "green.csv")
    tableio.write(out, header_for("green-asymptotics", cfg, extra),
                  ["r", "G", "leading", "residual_poisson"], rows)
    return {"outputs": [out]}


def un_anchors(s: float, d: int) -> np.ndarray:
    """``x1 = x2 = x3 = 0`` and ``x4 = s e_1``."""
    x = np.zeros((4, d))
    x[3, 0] = s
    return x


def cmd_un_decay(cfg):
    from .pi import estimate_u_n
    seps = np.linspace(cfg["s_min"], cfg["s_max"], cfg["n_s"])
    if len(seps) < 2:
        raise ConfigError("need at least two separations")
    rows = []
    for i, s in enumerate(seps):
        est = estimate_u_n(cfg["alpha"], un_anchors(float(s), cfg["d"]), cfg["n_samples"], cfg["M"],
                           _rng(cfg, i), _potential(cfg), cfg["beta"], cfg["workers"])
        rows.append((float(s), est.value, est.std_error))
    u = np.array([r[1] for r in rows])
    extra = {"anchors": "x1=x2=x3=0, x4=s*e1"}
    if np.all(u > 0):
        extra["slope_log_u_vs_s2"] = float(np.polyfit(seps ** 2, np.log(u), 1)[0])
    out = _out(cfg, "un_decay.csv")
    tableio.write(out, header_for("un-decay", cfg, extra), ["s", "u", "std_error"], rows)
    return {"outputs": [out]}


COMMANDS = {
    "estimate-gamma": cmd_estimate_gamma,
    "estimate-rhoc": cmd_estimate_rhoc,
    "phase-diagram": cmd_phase_diagram,
    "sample-cycles": cmd_sample_cycles,
    "verify": cmd_verify,
    "deconvolve": cmd_deconvolve,
    "green-asymptotics": cmd_green_asymptotics,
    "un-decay": cmd_un_decay,
}


def write_manifest(command, cfg, info, wall):
    outputs = info.get("outputs", [])
    if not outputs:
        return None
    path = outputs[0] + ".manifest.json"
    man = {"command": command, "code_version": __version__, "backend": _backend.BACKEND,
           "config": cfg, "config_hash": config_hash(command, cfg), "seeds": info.get("seeds", {"master": cfg["seed"]}),
           "outputs": outputs, "workers": cfg["workers"], "wall_time_s": round(wall, 3)}
    with open(path, "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True, default=repr)
    return path


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = resolve_config(args.command, args)
        t0 = time.perf_counter()
        info = COMMANDS[args.command](cfg)
        write_manifest(args.command, cfg, info, time.perf_counter() - t0)
    except (ConfigError, ChecksumError, ResourceLimit, InvalidArgument, OSError) as exc:
        print(f"srbb: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"srbb: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SrbbError as exc:
        print(f"srbb: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_VERIFY if info.get("failed") else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
